# core/methods.py
"""
Built-in election methods, point tallies and the method definition file.

Staged builtins (antiplurality, equal-top-two, quota-points, mca, mdda,
approval, range, bucklin) are built from swap-closed stages. Plurality
and IRV are direct tallies used as non-compliant controls.
"""
import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from pathlib import Path
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from core.ballots import BallotSpace, Profile, Ranking
from core.errors import (
    DimensionMismatchError,
    EmptyElectorateError,
    InvalidParameterError,
    RankingParseError,
    WeightFitError,
)
from core.geometry import (
    CategoryKind,
    NormalVector,
    classify_vector,
    dominance_vector,
    last_place_vector,
    parse_vector,
    positional_vector,
    resolve_reading,
    threshold_vector,
    top_set_vector,
)
from core.helpers import iter_content_lines, parse_bool, parse_key_values, parse_rational
from core.logger import get_logger
from core.stages import (
    Condition,
    Method,
    Outcome,
    Stage,
    StageType,
    Tiebreak,
    TiebreakResult,
    classify_stage,
    generate_stage,
    minimal_generators,
)

logger = get_logger(__name__)


# ---------------------------------------------------------------------------
# Point systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScoringWeights:
    """Points per ballot position (tier or grade index), non-increasing."""
    weights: Tuple[Fraction, ...]

    def __post_init__(self):
        weights = tuple(Fraction(w) for w in self.weights)
        if not weights:
            raise InvalidParameterError("scoring weights must not be empty")
        if any(a < b for a, b in zip(weights, weights[1:])):
            raise InvalidParameterError(f"scoring weights must be non-increasing, got {[str(w) for w in weights]}")
        object.__setattr__(self, "weights", weights)

    @classmethod
    def top(cls, depth: int, length: int) -> "ScoringWeights":
        """1 point for each of the first `depth` positions."""
        return cls(tuple(1 if p < depth else 0 for p in range(length)))

    @property
    def equal_top_two(self) -> bool:
        return len(self.weights) < 2 or self.weights[0] == self.weights[1]

    def for_position(self, position: int) -> Fraction:
        if position >= len(self.weights):
            raise InvalidParameterError(f"weight vector too short: no weight for position {position}")
        return self.weights[position]

    def normalized(self) -> "ScoringWeights":
        """Scaled so the first weight is 1 (when it is positive)."""
        head = self.weights[0]
        return self if head <= 0 else ScoringWeights(tuple(w / head for w in self.weights))


@dataclass(frozen=True)
class PointTally:
    totals: Tuple[Fraction, ...]
    winners: FrozenSet[int]


def tally_points(profile: Profile, weights: Union[ScoringWeights, Sequence]) -> PointTally:
    """
    Positional point totals.

    Args:
        profile: Profile (need not be normalized)
        weights: ScoringWeights or a raw weight sequence

    Returns:
        PointTally with exact totals and the argmax set
    """
    if not isinstance(weights, ScoringWeights):
        weights = ScoringWeights(tuple(weights))
    totals = [Fraction(0)] * profile.space.n_c
    for ranking, count in profile.items():
        for c in range(profile.space.n_c):
            totals[c] += count * weights.for_position(ranking.position(c))
    best = max(totals)
    return PointTally(tuple(totals), frozenset(c for c, t in enumerate(totals) if t == best))


def pairwise_count(profile: Profile, a: int, b: int) -> Fraction:
    """Voters ranking a strictly above b."""
    return sum((Fraction(n) for r, n in profile.items() if r.prefers(a, b)), Fraction(0))


def pairwise_tiebreak(profile: Profile, tied: FrozenSet[int]) -> TiebreakResult:
    """
    Break a two-way tie by head-to-head majority.

    Ties of other sizes and equal head-to-head counts stay unresolved.
    """
    if len(tied) != 2:
        return TiebreakResult(None, f"pairwise tiebreak needs 2 tied candidates, got {len(tied)}")
    a, b = sorted(tied)
    ab, ba = pairwise_count(profile, a, b), pairwise_count(profile, b, a)
    if ab == ba:
        return TiebreakResult(None, "pairwise tiebreak unresolved: equal head-to-head counts")
    return TiebreakResult(a if ab > ba else b, f"pairwise tiebreak {ab} vs {ba}")


pairwise_tiebreak.label = "pairwise"

TIEBREAKS: Dict[str, Optional[Tiebreak]] = {"pairwise": pairwise_tiebreak, "none": None}


# ---------------------------------------------------------------------------
# Direct tallies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DirectTally:
    """A method decided by a tally procedure instead of stages."""
    name: str
    space: BallotSpace
    tally: Callable[[Profile], Outcome]
    tiebreak: Optional[Tiebreak] = None
    stages: Tuple[Stage, ...] = ()

    @property
    def tiebreak_name(self) -> Optional[str]:
        return None if self.tiebreak is None else getattr(self.tiebreak, "label", self.tiebreak.__name__)

    def decide(self, profile: Profile, use_tiebreak: bool = True, trace: bool = False) -> Outcome:
        if profile.space != self.space:
            raise DimensionMismatchError(
                f"profile space [{profile.space.describe()}] differs from method space [{self.space.describe()}]")
        if profile.is_empty:
            raise EmptyElectorateError()
        outcome = self.tally(profile)
        if outcome.candidates and len(outcome.candidates) > 1 and use_tiebreak and self.tiebreak is not None:
            result = self.tiebreak(profile, outcome.candidates)
            if result.winner is not None:
                return Outcome.winner_of(result.winner, outcome.stage, diagnostic=result.diagnostic, tiebroken=True)
            return Outcome.tie_of(outcome.candidates, outcome.stage,
                                  diagnostic=result.diagnostic or outcome.diagnostic)
        return outcome

    def decide_counts(self, counts: Tuple, use_tiebreak: bool = True) -> Outcome:
        return self.decide(Profile(self.space, counts), use_tiebreak)


def plurality_tally(profile: Profile) -> Outcome:
    """Most first places; equal leaders tie."""
    weights = ScoringWeights.top(1, profile.space.n_c)
    result = tally_points(profile, weights)
    return Outcome.tie_of(result.winners, diagnostic="" if len(result.winners) == 1 else "equal first-place counts")


def _current_preference(ranking: Ranking, remaining: FrozenSet[int]) -> Optional[int]:
    for tier in ranking.tiers:
        live = tier & remaining
        if len(live) == 1:
            return next(iter(live))
        if live:
            return None  # truncated tail: ballot exhausted
    return None


def _irv_round(items: List[Tuple[Ranking, Fraction]], remaining: FrozenSet[int]) -> Outcome:
    if len(remaining) == 1:
        return Outcome.winner_of(next(iter(remaining)))
    if len(remaining) == 2:
        a, b = sorted(remaining)
        ab = sum((n for r, n in items if r.prefers(a, b)), Fraction(0))
        ba = sum((n for r, n in items if r.prefers(b, a)), Fraction(0))
        if ab == ba:
            return Outcome.tie_of((a, b), diagnostic="final tie")
        return Outcome.winner_of(a if ab > ba else b)

    tallies = {c: Fraction(0) for c in remaining}
    for ranking, n in items:
        current = _current_preference(ranking, remaining)
        if current is not None:
            tallies[current] += n
    lowest = min(tallies.values())
    losers = sorted(c for c in remaining if tallies[c] == lowest)
    if len(losers) == 1:
        return _irv_round(items, remaining - {losers[0]})

    winners = set()
    for loser in losers:
        branch = _irv_round(items, remaining - {loser})
        winners |= branch.candidates
    return Outcome.tie_of(winners, diagnostic=f"elimination tie among {len(losers)} candidates")


def tally_irv(profile: Profile) -> Outcome:
    """
    Instant runoff: eliminate the fewest current first preferences until
    two remain, then majority. Exhausted ballots drop out. An elimination
    tie reports every candidate some elimination order would elect.
    """
    if profile.is_empty:
        raise EmptyElectorateError()
    items = profile.items()
    for ranking, _ in items:
        if any(len(t) > 1 for t in ranking.tiers[:-1]):
            raise InvalidParameterError("IRV needs strict (possibly truncated) ballots")
    return _irv_round(items, frozenset(range(profile.space.n_c)))


# ---------------------------------------------------------------------------
# Stage builders
# ---------------------------------------------------------------------------

def antiplurality_stage(space: BallotSpace, label: str = "fewest last places") -> Stage:
    seed = Condition(0, frozenset(last_place_vector(space, 0, j) for j in range(1, space.n_c)))
    return generate_stage(seed, label)


def point_stage(space: BallotSpace, weights: ScoringWeights, label: str = "most points") -> Stage:
    seed = Condition(0, frozenset(positional_vector(space, weights.weights, 0, j) for j in range(1, space.n_c)))
    return generate_stage(seed, label)


def quota_stage(space: BallotSpace, weights: ScoringWeights, depth: int, q: Fraction, label: str) -> Stage:
    """Most points, provided the winner sits within `depth` positions on more than q of the ballots."""
    vectors = {positional_vector(space, weights.weights, 0, j) for j in range(1, space.n_c)}
    vectors.add(threshold_vector(top_set_vector(space, 0, depth), q))
    return generate_stage(Condition(0, frozenset(vectors)), label)


def majority_stage(space: BallotSpace, label: str = "dominates every rival") -> Stage:
    """c wins when a strict majority prefers c to each rival."""
    seed = Condition(0, frozenset(-dominance_vector(space, j, 0) for j in range(1, space.n_c)))
    return generate_stage(seed, label)


def undominated_stage(space: BallotSpace, label: str = "undominated, fewest last places") -> Stage:
    """
    c wins when no rival dominates c and, against each rival x, either
    c has fewer last places than x or x is dominated by someone.
    """
    n_c = space.n_c
    base = {dominance_vector(space, 0, j) for j in range(1, n_c)}
    options = []
    for x in range(1, n_c):
        clause = [last_place_vector(space, 0, x)]
        clause.extend(-dominance_vector(space, x, y) for y in range(n_c) if y != x)
        options.append(clause)
    seeds = [Condition(0, frozenset(base | set(choice))) for choice in product(*options)]
    return generate_stage(seeds, label)


# ---------------------------------------------------------------------------
# Builtin registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Recipe:
    builder: Callable[[BallotSpace, Dict[str, str]], Union[Method, DirectTally]]
    ties: bool = False
    truncation: bool = False
    levels: Optional[int] = None
    params: FrozenSet[str] = frozenset()


BUILTINS: Dict[str, _Recipe] = {}

_COMMON_PARAMS = frozenset({"candidates", "ties", "truncation", "levels", "tiebreak"})


def register(name: str, **recipe_kwargs):
    """Register a builtin builder under a CLI name."""
    def decorator(func):
        BUILTINS[name] = _Recipe(func, **recipe_kwargs)
        return func
    return decorator


@dataclass(frozen=True)
class BuiltinMethod:
    """A builtin name with its 'key=value' parameters."""
    name: str
    params: Tuple[Tuple[str, str], ...] = ()

    def __post_init__(self):
        if self.name not in BUILTINS:
            raise InvalidParameterError(
                f"unknown builtin {self.name!r}; choose from {', '.join(sorted(BUILTINS))}")
        object.__setattr__(self, "params", tuple(sorted(dict(self.params).items())))

    def describe(self) -> str:
        return " ".join([self.name] + [f"{k}={v}" for k, v in self.params])


def parse_builtin(text: str) -> BuiltinMethod:
    """Parse 'quota-points q=3/4' style text."""
    tokens = text.split()
    if not tokens:
        raise InvalidParameterError("empty builtin method name")
    return BuiltinMethod(tokens[0].lower(), tuple(parse_key_values(tokens[1:]).items()))


def _rational_param(params: Dict[str, str], key: str, default) -> Fraction:
    if key not in params:
        return Fraction(default)
    try:
        return parse_rational(params[key])
    except RankingParseError as e:
        raise InvalidParameterError(f"invalid {key}: {e}")


def _int_param(params: Dict[str, str], key: str, default: Optional[int]) -> Optional[int]:
    if key not in params:
        return default
    try:
        return int(params[key])
    except ValueError:
        raise InvalidParameterError(f"invalid {key}: {params[key]!r}")


def build(builtin: Union[BuiltinMethod, str], n_c: Optional[int] = None, allow_ties: Optional[bool] = None,
          allow_truncation: Optional[bool] = None, levels: Optional[int] = None) -> Union[Method, DirectTally]:
    """
    Construct a builtin method.

    Keyword arguments override the builtin's own parameters and defaults.

    Args:
        builtin: BuiltinMethod or its text form
        n_c: Number of candidates (default 3)
        allow_ties: Ballot-space override (ordinal builtins)
        allow_truncation: Ballot-space override (ordinal builtins)
        levels: Grade count override (graded builtins)

    Returns:
        Method or DirectTally
    """
    if isinstance(builtin, str):
        builtin = parse_builtin(builtin)
    recipe = BUILTINS[builtin.name]
    params = dict(builtin.params)
    unknown = set(params) - _COMMON_PARAMS - recipe.params
    if unknown:
        raise InvalidParameterError(f"{builtin.name}: unknown parameter(s) {', '.join(sorted(unknown))}")

    n_c = n_c if n_c is not None else _int_param(params, "candidates", 3)
    if recipe.levels is not None:
        if (allow_ties or allow_truncation or parse_bool(params.get("ties", "no"))
                or parse_bool(params.get("truncation", "no"))):
            raise InvalidParameterError(f"{builtin.name} uses graded ballots; ties/truncation do not apply")
        levels = levels if levels is not None else _int_param(params, "levels", recipe.levels)
        space = BallotSpace(n_c, levels=levels)
    else:
        if levels is not None or "levels" in params:
            raise InvalidParameterError(f"{builtin.name} uses ordinal ballots; levels does not apply")
        ties = allow_ties if allow_ties is not None else parse_bool(params.get("ties", "yes" if recipe.ties else "no"))
        truncation = (allow_truncation if allow_truncation is not None
                      else parse_bool(params.get("truncation", "yes" if recipe.truncation else "no")))
        space = BallotSpace(n_c, allow_ties=ties, allow_truncation=truncation)

    method = recipe.builder(space, params)
    tiebreak_name = params.get("tiebreak", "none")
    if tiebreak_name not in TIEBREAKS:
        raise InvalidParameterError(f"unknown tiebreak {tiebreak_name!r}")
    tiebreak = TIEBREAKS[tiebreak_name]
    if tiebreak is not None:
        method = dataclasses.replace(method, tiebreak=tiebreak)
    logger.debug(f"Built {builtin.describe()} over [{space.describe()}]")
    return method


@register("antiplurality")
def _build_antiplurality(space: BallotSpace, params: Dict[str, str]) -> Method:
    return Method((antiplurality_stage(space),), space, "antiplurality")


@register("equal-top-two", params=frozenset({"weights"}))
def _build_equal_top_two(space: BallotSpace, params: Dict[str, str]) -> Method:
    if "weights" in params:
        try:
            weights = ScoringWeights(tuple(parse_rational(w) for w in params["weights"].split(",")))
        except RankingParseError as e:
            raise InvalidParameterError(f"invalid weights: {e}")
    else:
        weights = ScoringWeights.top(space.n_c - 1, space.n_c)
    if len(weights.weights) < space.n_c:
        raise InvalidParameterError("weight vector too short for the ballot positions")
    if not weights.equal_top_two:
        raise InvalidParameterError("equal-top-two needs equal weights for positions 1 and 2")
    return Method((point_stage(space, weights),), space, "equal-top-two")


@register("quota-points", params=frozenset({"q", "depth"}))
def _build_quota_points(space: BallotSpace, params: Dict[str, str]) -> Method:
    q = _rational_param(params, "q", Fraction(3, 4))
    depth = _int_param(params, "depth", 2)
    if not Fraction(1, 2) < q <= 1:
        raise InvalidParameterError(f"quota must lie in (1/2, 1], got {q}")
    if not 1 <= depth < space.n_c:
        raise InvalidParameterError(f"depth must lie in [1, {space.n_c - 1}], got {depth}")
    weights = ScoringWeights.top(depth, space.n_c)
    stages = (
        quota_stage(space, weights, depth, q, f"most top-{depth} points with quota {q}"),
        antiplurality_stage(space),
    )
    return Method(stages, space, "quota-points")


@register("mca", levels=3)
def _build_mca(space: BallotSpace, params: Dict[str, str]) -> Method:
    if space.levels != 3:
        raise InvalidParameterError("mca ballots have exactly 3 grades")
    stages = (
        quota_stage(space, ScoringWeights((1, 0, 0)), 1, Fraction(1, 2), "most Preferred, with a majority"),
        point_stage(space, ScoringWeights((1, 1, 0)), "most Preferred or Approved"),
    )
    return Method(stages, space, "mca")


@register("mdda", ties=True, truncation=True)
def _build_mdda(space: BallotSpace, params: Dict[str, str]) -> Method:
    """
    Majority-defeat disqualification in three stages: a candidate who
    dominates every rival (Type2), then the undominated candidate with
    fewer last places than each rival it does not dominate (Type1b).

    When the dominance relation is a cycle nobody is undominated and both
    stages fall through, so a final antiplurality stage over all
    candidates (Type1) keeps the method decisive. `classify mdda`
    therefore lists three stages, not two.
    """
    stages = (majority_stage(space), undominated_stage(space), antiplurality_stage(space))
    return Method(stages, space, "mdda")


@register("approval", levels=2)
def _build_approval(space: BallotSpace, params: Dict[str, str]) -> Method:
    if space.levels != 2:
        raise InvalidParameterError("approval ballots have exactly 2 grades")
    return Method((point_stage(space, ScoringWeights((1, 0)), "most approvals"),), space, "approval")


@register("range", levels=6)
def _build_range(space: BallotSpace, params: Dict[str, str]) -> Method:
    top = space.levels - 1
    weights = ScoringWeights(tuple(top - g for g in range(space.levels)))
    return Method((point_stage(space, weights, "highest score"),), space, "range")


@register("bucklin", levels=4)
def _build_bucklin(space: BallotSpace, params: Dict[str, str]) -> Method:
    if space.levels < 4:
        raise InvalidParameterError("bucklin needs at least 4 grades")
    stages = (
        quota_stage(space, ScoringWeights.top(2, space.levels), 2, Fraction(1, 2),
                    "most first-or-second places, with a majority"),
        point_stage(space, ScoringWeights.top(3, space.levels), "most placements within the first three"),
    )
    return Method(stages, space, "bucklin")


@register("plurality")
def _build_plurality(space: BallotSpace, params: Dict[str, str]) -> DirectTally:
    return DirectTally("plurality", space, plurality_tally)


@register("irv")
def _build_irv(space: BallotSpace, params: Dict[str, str]) -> DirectTally:
    if space.allow_ties:
        raise InvalidParameterError("irv needs ballots without ties")
    return DirectTally("irv", space, tally_irv)


# ---------------------------------------------------------------------------
# Point-system recovery
# ---------------------------------------------------------------------------

def _ballot_with(space: BallotSpace, i: int, pi: int, j: int, pj: int) -> int:
    for k, ranking in enumerate(space.ballots):
        if ranking.position(i) == pi and ranking.position(j) == pj:
            return k
    raise WeightFitError(f"no ballot places candidate {i} at {pi} and {j} at {pj}")


def _fit_vector(v: NormalVector, pair: Tuple[int, int]) -> ScoringWeights:
    space = v.space
    n = space.n_c
    i, j = pair
    u = v.components
    alpha = (u[_ballot_with(space, i, n - 1, j, n - 2)] + u[_ballot_with(space, j, n - 1, i, n - 2)]) / 2
    weights = [u[_ballot_with(space, i, p, j, n - 1)] - alpha for p in range(n - 1)] + [Fraction(0)]

    for ranking, value in zip(space.ballots, u):
        if weights[ranking.position(i)] - weights[ranking.position(j)] + alpha != value:
            raise WeightFitError(f"vector is not a point-total difference at ballot {ranking.tiers}")
    if not any(weights):
        raise WeightFitError("fitted weights are all zero")
    try:
        return ScoringWeights(tuple(weights)).normalized()
    except InvalidParameterError as e:
        raise WeightFitError(str(e))


def fit_scoring_weights(stage: Stage, reading: str = "auto") -> ScoringWeights:
    """
    Recover the point system behind a Type 1 stage.

    Each generator must equal T_i - T_j + alpha * I for its boundary pair;
    every generator must give the same weights up to scale.

    Args:
        stage: Type 1 stage over strict full rankings
        reading: First-place reading for the Type 1 check

    Returns:
        Weights scaled so the first weight is 1
    """
    space = stage.space
    if space.has_ties:
        raise WeightFitError("weight fitting needs strict full rankings")
    if classify_stage(stage, reading) != StageType.TYPE_1:
        raise WeightFitError("only Type1 stages are point systems")

    fitted = None
    for generator in minimal_generators(stage):
        category = classify_vector(generator, resolve_reading(space, reading))
        assert category.kind == CategoryKind.CATEGORY_1
        weights = _fit_vector(generator, category.pair)
        if fitted is not None and weights != fitted:
            raise WeightFitError("generators imply different point systems")
        fitted = weights
    logger.info(f"Fitted scoring weights {[str(w) for w in fitted.weights]}")
    return fitted


# ---------------------------------------------------------------------------
# Method definition files
# ---------------------------------------------------------------------------

def _inline_vector(space: BallotSpace, items: str, line: int) -> NormalVector:
    text = "\n".join(item for item in items.split(';') if item.strip())
    try:
        return parse_vector(text, space)
    except RankingParseError as e:
        raise e.at_line(line)


def parse_method(text: str, base_dir: Optional[Path] = None, name: str = "custom") -> Union[Method, DirectTally]:
    """
    Parse a method definition (grammar in docs/METHOD_FORMAT.md).

    Args:
        text: File content
        base_dir: Directory for 'vector file' paths
        name: Method name for reports

    Returns:
        Method or DirectTally
    """
    base_dir = Path(base_dir) if base_dir else Path.cwd()
    space_params: Optional[Dict[str, str]] = None
    space: Optional[BallotSpace] = None
    builtin_text: Optional[str] = None
    tiebreak: Optional[Tiebreak] = None
    reading = "auto"
    stages: List[Stage] = []
    stage_open: Optional[Tuple[str, List[Condition], int]] = None
    condition_open: Optional[Tuple[int, List[NormalVector], int]] = None

    for number, line in iter_content_lines(text):
        keyword, _, rest = line.partition(' ')
        rest = rest.strip()

        if keyword == "ballots":
            if space_params is not None:
                raise RankingParseError("ballots given twice", line=number)
            if not (rest.startswith('{') and rest.endswith('}')):
                raise RankingParseError("expected 'ballots { key=value ... }'", line=number, text=line)
            space_params = parse_key_values(rest[1:-1].split(), line=number)
            if builtin_text is None:
                space = BallotSpace.from_params(space_params)
        elif keyword == "builtin":
            if stages or stage_open:
                raise RankingParseError("builtin cannot be combined with stages", line=number)
            builtin_text = rest
        elif keyword == "tiebreak":
            if rest not in TIEBREAKS:
                raise RankingParseError(f"unknown tiebreak {rest!r}", line=number)
            tiebreak = TIEBREAKS[rest]
        elif keyword == "reading":
            if rest not in ("auto", "sfbc", "fbc"):
                raise RankingParseError(f"unknown reading {rest!r}", line=number)
            reading = rest
        elif keyword == "stage":
            if builtin_text is not None:
                raise RankingParseError("builtin cannot be combined with stages", line=number)
            if space is None:
                raise RankingParseError("ballots must come before the first stage", line=number)
            if stage_open or not rest.endswith('{'):
                raise RankingParseError("expected 'stage [label] {'", line=number, text=line)
            stage_open = (rest[:-1].strip().strip('"'), [], number)
        elif keyword == "condition":
            if stage_open is None or condition_open is not None or not rest.endswith('{'):
                raise RankingParseError("expected 'condition winner=X {' inside a stage", line=number, text=line)
            params = parse_key_values(rest[:-1].split(), line=number)
            if set(params) != {"winner"}:
                raise RankingParseError("condition takes exactly winner=<label>", line=number, text=line)
            try:
                winner = space.candidate_index(params["winner"])
            except RankingParseError as e:
                raise e.at_line(number)
            condition_open = (winner, [], number)
        elif keyword == "vector":
            if condition_open is None:
                raise RankingParseError("vector outside a condition", line=number)
            kind, _, payload = rest.partition(' ')
            if kind == "inline":
                condition_open[1].append(_inline_vector(space, payload, number))
            elif kind == "file":
                path = base_dir / payload.strip()
                if not path.exists():
                    raise RankingParseError(f"vector file not found: {path}", line=number)
                condition_open[1].append(parse_vector(path.read_text(encoding="utf-8"), space))
            else:
                raise RankingParseError("expected 'vector inline ...' or 'vector file PATH'", line=number, text=line)
        elif keyword == "}":
            if condition_open is not None:
                winner, vectors, opened = condition_open
                if not vectors:
                    raise RankingParseError("condition has no vectors", line=opened)
                stage_open[1].append(Condition(winner, frozenset(vectors)))
                condition_open = None
            elif stage_open is not None:
                label, seeds, opened = stage_open
                if not seeds:
                    raise RankingParseError("stage has no conditions", line=opened)
                stages.append(generate_stage(seeds, label))
                stage_open = None
            else:
                raise RankingParseError("unbalanced '}'", line=number)
        else:
            raise RankingParseError(f"unknown keyword {keyword!r}", line=number, text=line)

    if stage_open is not None or condition_open is not None:
        raise RankingParseError("unterminated block at end of file")

    if builtin_text is not None:
        overrides = {}
        if space_params:
            overrides = {
                "n_c": int(space_params["candidates"]) if "candidates" in space_params else None,
                "allow_ties": parse_bool(space_params["ties"]) if "ties" in space_params else None,
                "allow_truncation": parse_bool(space_params["truncation"]) if "truncation" in space_params else None,
                "levels": int(space_params["levels"]) if space_params.get("levels", "-") != "-" else None,
            }
        method = build(builtin_text, **overrides)
        return dataclasses.replace(method, tiebreak=tiebreak) if tiebreak is not None else method

    if not stages:
        raise RankingParseError("method defines no stages and no builtin")
    return Method(tuple(stages), space, name, tiebreak, reading)


def load_method(path: Union[str, Path]) -> Union[Method, DirectTally]:
    """Read a method definition file."""
    path = Path(path)
    return parse_method(path.read_text(encoding="utf-8"), path.parent, path.stem)
