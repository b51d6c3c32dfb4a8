# core/ballots.py
"""
Candidates, rankings, ballot spaces and exact-count profiles.

Every other module addresses ballot types by their index in
enumerate_ballots(space), so the enumeration order is part of the
public contract:

* three candidates, strict full rankings: A>B>C, A>C>B, C>A>B, C>B>A,
  B>C>A, B>A>C (each ballot differs from its neighbours by one
  adjacent transposition)
* other ordinal spaces: by tier sizes, then by tier members
* graded spaces: lexicographic by the grade of each candidate
"""
import string
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations, product
from numbers import Rational
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from core.errors import (
    DimensionMismatchError,
    EmptyElectorateError,
    InvalidParameterError,
    RankingParseError,
)
from core.helpers import iter_content_lines, normalize_text, parse_bool, parse_key_values, parse_rational
from core.logger import get_logger

logger = get_logger(__name__)

Count = Union[int, Fraction]

_THREE_CANDIDATE_ORDER = ((0, 1, 2), (0, 2, 1), (2, 0, 1), (2, 1, 0), (1, 2, 0), (1, 0, 2))


def default_labels(n_c: int) -> Tuple[str, ...]:
    """Labels A, B, C, ... for n_c candidates."""
    if n_c > len(string.ascii_uppercase):
        return tuple(f"C{i + 1}" for i in range(n_c))
    return tuple(string.ascii_uppercase[:n_c])


def _exact(value) -> Count:
    if isinstance(value, bool) or not isinstance(value, Rational):
        raise InvalidParameterError(f"expected an exact rational, got {value!r}")
    value = Fraction(value)
    return int(value) if value.denominator == 1 else value


@dataclass(frozen=True)
class Candidate:
    """A candidate: dense index plus display label."""
    index: int
    label: str


@dataclass(frozen=True)
class Ranking:
    """
    A voter's weak order as ordered tiers, best tier first.

    Ordinal rankings hold only non-empty tiers and list every candidate
    (truncated ballots carry their implicit last tier explicitly).
    Graded rankings hold exactly one tier per grade and may contain
    empty grades.
    """
    tiers: Tuple[FrozenSet[int], ...]
    n_c: int
    graded: bool = False
    _positions: Tuple[int, ...] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        tiers = tuple(frozenset(t) for t in self.tiers)
        object.__setattr__(self, "tiers", tiers)
        positions = [-1] * self.n_c
        for number, tier in enumerate(tiers):
            if not tier and not self.graded:
                raise RankingParseError("empty tier")
            for c in tier:
                if not 0 <= c < self.n_c:
                    raise RankingParseError(f"unknown candidate index {c}")
                if positions[c] != -1:
                    raise RankingParseError(f"duplicate candidate index {c}")
                positions[c] = number
        if -1 in positions:
            raise RankingParseError("ranking does not place every candidate")
        object.__setattr__(self, "_positions", tuple(positions))

    @classmethod
    def strict(cls, order: Sequence[int], n_c: Optional[int] = None) -> "Ranking":
        """Strict ranking from a best-first candidate sequence."""
        n_c = len(order) if n_c is None else n_c
        return cls(tuple(frozenset([c]) for c in order), n_c)

    def position(self, candidate: int) -> int:
        """Tier (or grade) index of a candidate, 0 is best."""
        return self._positions[candidate]

    def prefers(self, a: int, b: int) -> bool:
        """True when a is strictly above b."""
        return self._positions[a] < self._positions[b]

    @property
    def top(self) -> FrozenSet[int]:
        return self.tiers[0]

    @property
    def bottom(self) -> FrozenSet[int]:
        return self.tiers[-1]

    @property
    def is_strict(self) -> bool:
        return len(set(self._positions)) == self.n_c

    @property
    def is_fully_tied(self) -> bool:
        return len(set(self._positions)) == 1

    def strict_order(self) -> Tuple[int, ...]:
        """Best-first candidate order of a strict ranking."""
        if not self.is_strict:
            raise InvalidParameterError("ranking is not strict")
        return tuple(sorted(range(self.n_c), key=self.position))

    def utility(self, candidate: int) -> int:
        """Higher is better: n_c - 1 for the top of a strict ranking."""
        return self.n_c - 1 - self._positions[candidate]

    def relabel(self, mapping: Sequence[int]) -> "Ranking":
        """Rename candidate c to mapping[c] everywhere."""
        return Ranking(tuple(frozenset(mapping[c] for c in t) for t in self.tiers), self.n_c, self.graded)

    def swapped(self, i: int, j: int) -> "Ranking":
        mapping = list(range(self.n_c))
        mapping[i], mapping[j] = j, i
        return self.relabel(mapping)


def strict_rankings(n_c: int) -> Tuple[Ranking, ...]:
    """All strict full rankings, in the canonical order of the strict space."""
    return enumerate_ballots(BallotSpace(n_c))


@dataclass(frozen=True)
class BallotSpace:
    """
    The admissible ballots of an election.

    Args:
        n_c: number of candidates (>= 2)
        allow_ties: ballots may place several candidates in one tier
        allow_truncation: unlisted candidates share an implicit last tier
        max_ranks: optional cap on the number of tiers
        levels: graded space with this many grades (Approval, MCA, Range)
        labels: candidate labels (defaults to A, B, C, ...)
    """
    n_c: int
    allow_ties: bool = False
    allow_truncation: bool = False
    max_ranks: Optional[int] = None
    levels: Optional[int] = None
    labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        if self.n_c < 2:
            raise InvalidParameterError(f"need at least 2 candidates, got {self.n_c}")
        if self.levels is not None and self.levels < 2:
            raise InvalidParameterError(f"graded spaces need at least 2 levels, got {self.levels}")
        if self.max_ranks is not None and self.max_ranks < 1:
            raise InvalidParameterError(f"max_ranks must be positive, got {self.max_ranks}")
        labels = tuple(self.labels) if self.labels is not None else default_labels(self.n_c)
        if len(labels) != self.n_c or len(set(labels)) != self.n_c:
            raise InvalidParameterError("labels must be unique, one per candidate")
        for label in labels:
            if not label or any(ch in label for ch in "<>=:;#{} \t"):
                raise InvalidParameterError(f"invalid candidate label {label!r}")
        object.__setattr__(self, "labels", labels)

    @property
    def is_graded(self) -> bool:
        return self.levels is not None

    @property
    def has_ties(self) -> bool:
        """True when some ballot can hold two candidates in one tier."""
        return self.is_graded or self.allow_ties or self.allow_truncation

    @property
    def candidates(self) -> Tuple[Candidate, ...]:
        return tuple(Candidate(i, label) for i, label in enumerate(self.labels))

    @property
    def ballots(self) -> Tuple[Ranking, ...]:
        return enumerate_ballots(self)

    @property
    def dimension(self) -> int:
        return len(self.ballots)

    def index(self, ranking: Ranking) -> int:
        """Ballot-type index of an admissible ranking."""
        try:
            return _ballot_index(self)[ranking]
        except KeyError:
            raise RankingParseError(f"ranking not admissible in ballot space [{self.describe()}]",
                                    text=format_ranking(ranking, self))

    def admits(self, ranking: Ranking) -> bool:
        return ranking in _ballot_index(self)

    def label_of(self, candidate: int) -> str:
        return self.labels[candidate]

    def candidate_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise RankingParseError(f"unknown candidate label {label!r}")

    def describe(self) -> str:
        """Header text understood by BallotSpace.from_params."""
        parts = [f"candidates={self.n_c}"]
        if self.is_graded:
            parts.append(f"levels={self.levels}")
        else:
            parts.append(f"ties={'yes' if self.allow_ties else 'no'}")
            parts.append(f"truncation={'yes' if self.allow_truncation else 'no'}")
            if self.max_ranks is not None:
                parts.append(f"max_ranks={self.max_ranks}")
        if self.labels != default_labels(self.n_c):
            parts.append(f"labels={','.join(self.labels)}")
        return " ".join(parts)

    @classmethod
    def from_params(cls, params: Dict[str, str]) -> "BallotSpace":
        """Build a space from 'key=value' parameters of a file header."""
        known = {"candidates", "ties", "truncation", "max_ranks", "levels", "labels"}
        unknown = set(params) - known
        if unknown:
            raise RankingParseError(f"unknown ballot-space parameter(s): {', '.join(sorted(unknown))}")
        if "candidates" not in params:
            raise RankingParseError("ballot space needs candidates=N")
        levels = params.get("levels", "-")
        max_ranks = params.get("max_ranks", "-")
        labels = params.get("labels")
        try:
            return cls(
                n_c=int(params["candidates"]),
                allow_ties=parse_bool(params.get("ties", "no")),
                allow_truncation=parse_bool(params.get("truncation", "no")),
                max_ranks=None if max_ranks == "-" else int(max_ranks),
                levels=None if levels == "-" else int(levels),
                labels=tuple(labels.split(",")) if labels else None,
            )
        except ValueError as e:
            if isinstance(e, (RankingParseError, InvalidParameterError)):
                raise
            raise RankingParseError(f"invalid ballot-space parameter: {e}")


def _ordered_partitions(items: FrozenSet[int]):
    if not items:
        yield ()
        return
    members = sorted(items)
    for size in range(1, len(members) + 1):
        for first in combinations(members, size):
            head = frozenset(first)
            for rest in _ordered_partitions(items - head):
                yield (head,) + rest


def _ordinal_admissible(space: BallotSpace, tiers: Tuple[FrozenSet[int], ...]) -> bool:
    if space.max_ranks is not None and len(tiers) > space.max_ranks:
        return False
    if space.allow_ties:
        return True
    if all(len(t) == 1 for t in tiers):
        return True
    # truncation only: singleton tiers followed by one implicit tail with at least one ranked candidate
    return (space.allow_truncation and len(tiers) >= 2
            and all(len(t) == 1 for t in tiers[:-1]))


def _ordinal_key(ranking: Ranking):
    return (tuple(len(t) for t in ranking.tiers), tuple(tuple(sorted(t)) for t in ranking.tiers))


@lru_cache(maxsize=None)
def enumerate_ballots(space: BallotSpace) -> Tuple[Ranking, ...]:
    """
    Every admissible ranking of a ballot space exactly once, in canonical order.

    Args:
        space: Ballot space

    Returns:
        Tuple of rankings; a ranking's index is its ballot-type index
    """
    n_c = space.n_c
    if space.is_graded:
        ballots = []
        for grades in product(range(space.levels), repeat=n_c):
            tiers = tuple(frozenset(c for c in range(n_c) if grades[c] == g) for g in range(space.levels))
            ballots.append(Ranking(tiers, n_c, graded=True))
        return tuple(ballots)

    if n_c == 3 and not space.allow_ties and not space.allow_truncation and space.max_ranks is None:
        return tuple(Ranking.strict(order) for order in _THREE_CANDIDATE_ORDER)

    rankings = [Ranking(tiers, n_c) for tiers in _ordered_partitions(frozenset(range(n_c)))
                if _ordinal_admissible(space, tiers)]
    rankings.sort(key=_ordinal_key)
    logger.debug(f"Enumerated {len(rankings)} ballots for [{space.describe()}]")
    return tuple(rankings)


@lru_cache(maxsize=None)
def _ballot_index(space: BallotSpace) -> Dict[Ranking, int]:
    return {ranking: k for k, ranking in enumerate(enumerate_ballots(space))}


def parse_ranking(text: str, space: BallotSpace) -> Ranking:
    """
    Parse 'A>B=C' style text into an admissible ranking of the space.

    Unlisted candidates take the implicit last tier (bottom grade in
    graded spaces). Graded spaces accept empty grades ('A>>B').
    """
    compact = normalize_text(text)
    if not compact:
        raise RankingParseError("empty ranking", text=text)

    groups = compact.split('>')
    seen = set()
    tiers: List[set] = []
    for group in groups:
        if not group:
            if not space.is_graded:
                raise RankingParseError("empty tier", text=text)
            tiers.append(set())
            continue
        tier = set()
        for label in group.split('='):
            if not label:
                raise RankingParseError("empty candidate label", text=text)
            if label not in space.labels:
                raise RankingParseError(f"unknown candidate label {label!r}", text=text)
            c = space.labels.index(label)
            if c in seen:
                raise RankingParseError(f"duplicate candidate {label!r}", text=text)
            seen.add(c)
            tier.add(c)
        tiers.append(tier)

    unlisted = set(range(space.n_c)) - seen
    if space.is_graded:
        if len(tiers) > space.levels:
            raise RankingParseError(f"more than {space.levels} grades", text=text)
        tiers.extend(set() for _ in range(space.levels - len(tiers)))
        tiers[-1] |= unlisted
        ranking = Ranking(tuple(tiers), space.n_c, graded=True)
    else:
        if unlisted:
            tiers.append(unlisted)
        ranking = Ranking(tuple(tiers), space.n_c)

    if not space.admits(ranking):
        raise RankingParseError(f"ranking not admissible in ballot space [{space.describe()}]", text=text)
    return ranking


def format_ranking(ranking: Ranking, space: Optional[BallotSpace] = None) -> str:
    """Canonical text: every tier explicit, trailing empty grades dropped."""
    labels = space.labels if space is not None else default_labels(ranking.n_c)
    tiers = list(ranking.tiers)
    if ranking.graded:
        while len(tiers) > 1 and not tiers[-1]:
            tiers.pop()
    return ">".join("=".join(labels[c] for c in sorted(t)) for t in tiers)


@dataclass(frozen=True)
class Profile:
    """
    Anonymous electorate: exact non-negative count per ballot type.

    counts[k] is the number (or rational weight) of voters casting
    enumerate_ballots(space)[k].
    """
    space: BallotSpace
    counts: Tuple[Count, ...]

    def __post_init__(self):
        counts = tuple(_exact(c) for c in self.counts)
        if len(counts) != self.space.dimension:
            raise DimensionMismatchError(
                f"profile has {len(counts)} components, ballot space has {self.space.dimension}")
        if any(c < 0 for c in counts):
            raise InvalidParameterError("profile counts must be non-negative")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def empty(cls, space: BallotSpace) -> "Profile":
        return cls(space, (0,) * space.dimension)

    @classmethod
    def from_rankings(cls, space: BallotSpace, entries: Iterable[Union[Ranking, Tuple[Count, Ranking]]]) -> "Profile":
        """Build from rankings, or (count, ranking) pairs."""
        counts = [0] * space.dimension
        for entry in entries:
            count, ranking = entry if isinstance(entry, tuple) else (1, entry)
            counts[space.index(ranking)] += count
        return cls(space, tuple(counts))

    @classmethod
    def from_text(cls, space: BallotSpace, entries: Iterable[Tuple[Count, str]]) -> "Profile":
        """Build from (count, ranking text) pairs."""
        return cls.from_rankings(space, [(count, parse_ranking(text, space)) for count, text in entries])

    @property
    def n_voters(self) -> Count:
        return _exact(sum(self.counts))

    @property
    def is_empty(self) -> bool:
        return self.n_voters == 0

    def items(self) -> List[Tuple[Ranking, Count]]:
        """Non-zero (ranking, count) pairs in canonical ballot order."""
        ballots = self.space.ballots
        return [(ballots[k], c) for k, c in enumerate(self.counts) if c]

    def count(self, ranking: Ranking) -> Count:
        return self.counts[self.space.index(ranking)]

    def with_ballot(self, k: int, delta: Count = 1) -> "Profile":
        """Profile with delta voters added to ballot type k (negative removes)."""
        counts = list(self.counts)
        counts[k] += delta
        return Profile(self.space, tuple(counts))

    def scaled(self, factor: Count) -> "Profile":
        if factor <= 0:
            raise InvalidParameterError("scale factor must be positive")
        return Profile(self.space, tuple(c * factor for c in self.counts))

    def normalized(self) -> "Profile":
        return normalize(self)


def normalize(profile: Profile) -> Profile:
    """
    Scale counts so they sum to exactly 1.

    Args:
        profile: Profile with at least one voter

    Returns:
        Profile on the unit simplex (components p_k = n_k / n_V)
    """
    n_voters = profile.n_voters
    if n_voters == 0:
        raise EmptyElectorateError()
    return Profile(profile.space, tuple(Fraction(c) / n_voters for c in profile.counts))


def parse_profile(text: str, space: BallotSpace) -> Profile:
    """
    Parse 'COUNT: RANKING' lines.

    Repeated rankings accumulate. A profile with no lines is returned
    empty; evaluating it raises EmptyElectorateError.
    """
    counts = [0] * space.dimension
    for number, line in iter_content_lines(text):
        if ':' not in line:
            raise RankingParseError("expected 'COUNT: RANKING'", line=number, text=line)
        count_text, ranking_text = line.split(':', 1)
        count = parse_rational(count_text, line=number, allow_negative=False)
        try:
            ranking = parse_ranking(ranking_text, space)
        except RankingParseError as e:
            raise e.at_line(number)
        counts[space.index(ranking)] += count
    return Profile(space, tuple(counts))


def format_profile(profile: Profile) -> str:
    """Profile in the 'COUNT: RANKING' grammar, canonical ballot order."""
    lines = [f"{count}: {format_ranking(ranking, profile.space)}" for ranking, count in profile.items()]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_space_header(line: str) -> BallotSpace:
    """Parse 'space: candidates=3 ties=no ...' into a BallotSpace."""
    _, _, rest = line.partition(':')
    return BallotSpace.from_params(parse_key_values(rest.split()))
