# core/geometry.py
"""
Normal vectors over ballot types, candidate swap operators, symmetry
orbits, and the extremal-component tests that sort vectors into
categories.

A vector v stands for the victory inequality (p, v) > 0; equality is
the tie boundary. Right-hand sides are always 0: constants are folded
in along the all-ones direction I, which is harmless because (p, I) = 1
for every normalized profile.
"""
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from math import lcm
from numbers import Rational
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from core.ballots import (
    BallotSpace,
    Profile,
    Ranking,
    format_ranking,
    normalize,
    parse_ranking,
    parse_space_header,
)
from core.errors import DimensionMismatchError, InvalidParameterError, InvalidSwapError, RankingParseError
from core.helpers import iter_content_lines, parse_rational
from core.logger import get_logger

logger = get_logger(__name__)

READINGS = ("sfbc", "fbc")


def resolve_reading(space: BallotSpace, reading: str = "auto") -> str:
    """
    Pick the first-place reading for a space.

    'auto' means sole top occupancy for spaces without ties and top-tier
    membership for tied, truncated and graded spaces.
    """
    if reading == "auto":
        return "fbc" if space.has_ties else "sfbc"
    if reading not in READINGS:
        raise InvalidParameterError(f"unknown first-place reading {reading!r}")
    return reading


@dataclass(frozen=True)
class NormalVector:
    """
    Coefficients u_k over the ballot types of a space.

    orientation is an optional (i, j) tag meaning "points into c_i's
    region across the c_i / c_j boundary". It does not take part in
    equality.
    """
    space: BallotSpace
    components: Tuple[Fraction, ...]
    orientation: Optional[Tuple[int, int]] = field(default=None, compare=False)

    def __post_init__(self):
        components = tuple(Fraction(u) for u in self.components)
        if len(components) != self.space.dimension:
            raise DimensionMismatchError(
                f"vector has {len(components)} components, ballot space has {self.space.dimension}")
        if not any(components):
            raise InvalidParameterError("normal vector must not be all zero")
        object.__setattr__(self, "components", components)

    @classmethod
    def from_function(cls, space: BallotSpace, rule, orientation=None) -> "NormalVector":
        """Vector whose component k is rule(ranking_k)."""
        return cls(space, tuple(Fraction(rule(r)) for r in space.ballots), orientation)

    @property
    def integer_components(self) -> Tuple[int, ...]:
        """Components scaled by the common denominator; same signs for every product."""
        scaled = self.__dict__.get("_integer_components")
        if scaled is None:
            denominator = lcm(*(u.denominator for u in self.components))
            scaled = tuple(int(u * denominator) for u in self.components)
            self.__dict__["_integer_components"] = scaled
        return scaled

    def __neg__(self) -> "NormalVector":
        orientation = None if self.orientation is None else self.orientation[::-1]
        return NormalVector(self.space, tuple(-u for u in self.components), orientation)

    def __add__(self, other: "NormalVector") -> "NormalVector":
        _check_same_space(self.space, other.space)
        return NormalVector(self.space, tuple(a + b for a, b in zip(self.components, other.components)),
                            self.orientation)

    def __sub__(self, other: "NormalVector") -> "NormalVector":
        return self + (-other)

    def scaled(self, factor) -> "NormalVector":
        factor = Fraction(factor)
        orientation = self.orientation if factor > 0 else (None if self.orientation is None else self.orientation[::-1])
        return NormalVector(self.space, tuple(u * factor for u in self.components), orientation)

    def shifted(self, alpha) -> "NormalVector":
        """v + alpha * I."""
        alpha = Fraction(alpha)
        return NormalVector(self.space, tuple(u + alpha for u in self.components), self.orientation)

    def sort_key(self) -> Tuple[Fraction, ...]:
        return self.components


def _check_same_space(a: BallotSpace, b: BallotSpace):
    if a != b:
        raise DimensionMismatchError(f"ballot spaces differ: [{a.describe()}] vs [{b.describe()}]")


def ones(space: BallotSpace) -> NormalVector:
    """The all-ones vector I."""
    return NormalVector(space, (Fraction(1),) * space.dimension)


def inner(profile: Profile, v: NormalVector) -> Fraction:
    """
    Exact inner product of the normalized profile with v.

    Args:
        profile: Profile with at least one voter
        v: Normal vector of the same ballot space

    Returns:
        sum_k p_k * u_k as a Fraction
    """
    _check_same_space(profile.space, v.space)
    p = normalize(profile)
    return sum((pk * uk for pk, uk in zip(p.counts, v.components) if pk), Fraction(0))


def raw_product(counts: Sequence, integer_components: Sequence[int]):
    """Unnormalized product n_V * (p, v); only its sign is meaningful."""
    return sum(n * u for n, u in zip(counts, integer_components) if n and u)


# ---------------------------------------------------------------------------
# Swap operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SwapOperator:
    """Exchange of candidates i and j on every ballot."""
    space: BallotSpace
    i: int
    j: int

    def __post_init__(self):
        if self.i == self.j:
            raise InvalidSwapError(f"swap needs two distinct candidates, got ({self.i}, {self.j})")
        for c in (self.i, self.j):
            if not 0 <= c < self.space.n_c:
                raise InvalidSwapError(f"candidate index {c} out of range")

    @property
    def permutation(self) -> Tuple[int, ...]:
        """permutation[k] = index of ballot k after the exchange."""
        return _swap_permutation(self.space, self.i, self.j)

    def map_candidate(self, c: int) -> int:
        if c == self.i:
            return self.j
        if c == self.j:
            return self.i
        return c

    def map_pair(self, pair: Optional[Tuple[int, int]]) -> Optional[Tuple[int, int]]:
        if pair is None:
            return None
        return (self.map_candidate(pair[0]), self.map_candidate(pair[1]))

    def apply_to_ranking(self, ranking: Ranking) -> Ranking:
        return ranking.swapped(self.i, self.j)


@lru_cache(maxsize=None)
def _swap_permutation(space: BallotSpace, i: int, j: int) -> Tuple[int, ...]:
    return tuple(space.index(r.swapped(i, j)) for r in space.ballots)


@lru_cache(maxsize=None)
def swap_group(space: BallotSpace) -> Tuple[SwapOperator, ...]:
    """All transpositions S_ij with i < j; they generate every relabeling."""
    return tuple(SwapOperator(space, i, j) for i in range(space.n_c) for j in range(i + 1, space.n_c))


def permute_components(permutation: Sequence[int], values: Sequence) -> tuple:
    """Move component k to position permutation[k]."""
    out = [None] * len(values)
    for k, target in enumerate(permutation):
        out[target] = values[k]
    return tuple(out)


def apply_swap(op: SwapOperator, x: Union[Profile, NormalVector]) -> Union[Profile, NormalVector]:
    """
    Apply a swap operator to a profile or a normal vector.

    The exchange is an involution and preserves inner products:
    (S p, v) = (p, S v).
    """
    _check_same_space(op.space, x.space)
    if isinstance(x, NormalVector):
        return NormalVector(x.space, permute_components(op.permutation, x.components), op.map_pair(x.orientation))
    if isinstance(x, Profile):
        return Profile(x.space, permute_components(op.permutation, x.counts))
    raise TypeError(f"cannot apply a swap to {type(x).__name__}")


def orbit(v: NormalVector) -> Tuple[NormalVector, ...]:
    """
    Closure of {v} under every swap operator.

    Returns:
        Distinct vectors sorted by components
    """
    seen: Dict[Tuple[Fraction, ...], NormalVector] = {v.components: v}
    frontier = [v]
    operators = swap_group(v.space)
    while frontier:
        nxt = []
        for vector in frontier:
            for op in operators:
                image = apply_swap(op, vector)
                if image.components not in seen:
                    seen[image.components] = image
                    nxt.append(image)
        frontier = nxt
    return tuple(seen[key] for key in sorted(seen))


# ---------------------------------------------------------------------------
# Vector constructors
# ---------------------------------------------------------------------------

def positional_vector(space: BallotSpace, weights: Sequence, i: int, j: int) -> NormalVector:
    """T_i - T_j for points weights[position] per ballot."""
    weights = tuple(Fraction(w) for w in weights)

    def rule(r: Ranking):
        pi, pj = r.position(i), r.position(j)
        if max(pi, pj) >= len(weights):
            raise InvalidParameterError(f"weight vector too short for ballot position {max(pi, pj)}")
        return weights[pi] - weights[pj]

    return NormalVector.from_function(space, rule, (i, j))


def last_place_vector(space: BallotSpace, i: int, j: int) -> NormalVector:
    """Last-place count of c_j minus last-place count of c_i."""
    def rule(r: Ranking):
        return int(j in r.bottom) - int(i in r.bottom)

    return NormalVector.from_function(space, rule, (i, j))


def top_set_vector(space: BallotSpace, i: int, depth: int) -> NormalVector:
    """Indicator of c_i sitting within the first `depth` tiers."""
    if depth < 1:
        raise InvalidParameterError("depth must be at least 1")
    return NormalVector.from_function(space, lambda r: int(r.position(i) < depth))


def threshold_vector(v: NormalVector, q) -> NormalVector:
    """v - q * I: '(p, v) exceeds the fraction q of the electorate'."""
    return v.shifted(-Fraction(q))


def dominance_vector(space: BallotSpace, i: int, j: int) -> NormalVector:
    """
    Ballots that do not prefer c_j to c_i minus ballots that do.

    The fully tied ballot counts zero. (p, -dominance_vector(j, i)) > 0
    says a strict majority prefers c_i to c_j.
    """
    def rule(r: Ranking):
        if r.is_fully_tied:
            return 0
        return -1 if r.prefers(j, i) else 1

    return NormalVector.from_function(space, rule, (i, j))


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

class CategoryKind(str, Enum):
    CATEGORY_1 = "Category1"
    CATEGORY_2 = "Category2"
    CATEGORY_3 = "Category3"
    NON_COMPLIANT = "NonCompliant"


@dataclass(frozen=True)
class VectorCategory:
    """Result of classify_vector."""
    kind: CategoryKind
    pair: Optional[Tuple[int, int]] = None
    candidate: Optional[int] = None
    role: Optional[str] = None  # "source" or "sink" for Category2
    passing: FrozenSet[Tuple[int, int]] = frozenset()

    def describe(self, space: BallotSpace) -> str:
        if self.kind == CategoryKind.CATEGORY_1:
            return f"{self.kind.value}({space.label_of(self.pair[0])},{space.label_of(self.pair[1])})"
        if self.kind == CategoryKind.CATEGORY_2:
            return f"{self.kind.value}({self.role} {space.label_of(self.candidate)})"
        return self.kind.value


def first_place(ranking: Ranking, reading: str) -> FrozenSet[int]:
    """Candidates this ballot ranks first under a reading."""
    top = ranking.top
    if reading == "sfbc":
        return top if len(top) == 1 else frozenset()
    return top


def check_boundary_conditions(v: NormalVector, pair: Tuple[int, int], reading: str = "auto") -> bool:
    """
    Extremal-component test for the c_i / c_j boundary.

    The maximum must be attained by at least n_c - 1 components that
    together rank first every candidate except c_j; the minimum likewise
    for every candidate except c_i.

    Args:
        v: Normal vector
        pair: (i, j), i != j
        reading: 'sfbc', 'fbc' or 'auto'

    Returns:
        True when both conditions hold
    """
    i, j = pair
    if i == j:
        raise InvalidSwapError("boundary pair needs two distinct candidates")
    reading = resolve_reading(v.space, reading)
    return _passes(_extremal_cover(v, reading), v.space.n_c, i, j)


@lru_cache(maxsize=4096)
def _extremal_cover(v: NormalVector, reading: str):
    ballots = v.space.ballots
    comps = v.components
    top_value, bottom_value = max(comps), min(comps)
    top_idx = [k for k, u in enumerate(comps) if u == top_value]
    bottom_idx = [k for k, u in enumerate(comps) if u == bottom_value]
    top_cover = frozenset().union(*(first_place(ballots[k], reading) for k in top_idx))
    bottom_cover = frozenset().union(*(first_place(ballots[k], reading) for k in bottom_idx))
    return len(top_idx), top_cover, len(bottom_idx), bottom_cover


def _passes(cover, n_c: int, i: int, j: int) -> bool:
    top_count, top_cover, bottom_count, bottom_cover = cover
    everyone = frozenset(range(n_c))
    if top_count < n_c - 1 or bottom_count < n_c - 1:
        return False
    return (everyone - {j}) <= top_cover and (everyone - {i}) <= bottom_cover


def classify_vector(v: NormalVector, reading: str = "auto") -> VectorCategory:
    """
    Sort a vector into Category 1, 2, 3 or NonCompliant.

    Only four passing sets are possible: one pair; every pair leaving
    one candidate (source) or entering it (sink); all pairs; none.
    Anything else is an internal error.
    """
    reading = resolve_reading(v.space, reading)
    n_c = v.space.n_c
    cover = _extremal_cover(v, reading)
    all_pairs = frozenset((i, j) for i in range(n_c) for j in range(n_c) if i != j)
    passing = frozenset(p for p in all_pairs if _passes(cover, n_c, *p))

    if not passing:
        return VectorCategory(CategoryKind.NON_COMPLIANT, passing=passing)
    if len(passing) == 1:
        (pair,) = passing
        return VectorCategory(CategoryKind.CATEGORY_1, pair=pair, passing=passing)
    if passing == all_pairs:
        return VectorCategory(CategoryKind.CATEGORY_3, passing=passing)
    for c in range(n_c):
        if passing == frozenset((c, x) for x in range(n_c) if x != c):
            return VectorCategory(CategoryKind.CATEGORY_2, candidate=c, role="source", passing=passing)
        if passing == frozenset((x, c) for x in range(n_c) if x != c):
            return VectorCategory(CategoryKind.CATEGORY_2, candidate=c, role="sink", passing=passing)
    raise AssertionError(f"impossible passing set {sorted(passing)} for vector {v.components}")


# ---------------------------------------------------------------------------
# Vector literal files
# ---------------------------------------------------------------------------

def parse_vector(text: str, space: Optional[BallotSpace] = None) -> NormalVector:
    """
    Parse 'RANKING : VALUE' lines; omitted components are 0.

    A 'space: candidates=3 ...' header line selects the ballot space
    when none is given.
    """
    entries: List[Tuple[int, str, str]] = []
    for number, line in iter_content_lines(text):
        if line.lower().startswith("space:"):
            header_space = parse_space_header(line)
            if space is not None and header_space != space:
                raise RankingParseError("vector header does not match the ballot space", line=number, text=line)
            space = header_space
            continue
        if ':' not in line:
            raise RankingParseError("expected 'RANKING : VALUE'", line=number, text=line)
        ranking_text, value_text = line.rsplit(':', 1)
        entries.append((number, ranking_text, value_text))

    if space is None:
        space = BallotSpace(3)
    components = [Fraction(0)] * space.dimension
    assigned = set()
    for number, ranking_text, value_text in entries:
        try:
            k = space.index(parse_ranking(ranking_text, space))
        except RankingParseError as e:
            raise e.at_line(number)
        if k in assigned:
            raise RankingParseError("component given twice", line=number, text=ranking_text.strip())
        assigned.add(k)
        components[k] = parse_rational(value_text, line=number)
    return NormalVector(space, tuple(components))


def format_vector(v: NormalVector) -> str:
    """Vector literal with a space header and every component listed."""
    lines = [f"space: {v.space.describe()}"]
    for ranking, u in zip(v.space.ballots, v.components):
        lines.append(f"{format_ranking(ranking, v.space)} : {u}")
    return "\n".join(lines) + "\n"


def vector_from_values(space: BallotSpace, values: Iterable, orientation=None) -> NormalVector:
    """Vector from a component list in canonical ballot order."""
    values = tuple(values)
    if not all(isinstance(u, Rational) for u in values):
        raise InvalidParameterError("vector components must be exact rationals")
    return NormalVector(space, values, orientation)
