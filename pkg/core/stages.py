# core/stages.py
"""
Conditions, swap-closed stages, sequential methods and their evaluation.

A condition names a winner and a set of vectors; it holds when every
product (p, v) is strictly positive. A stage is the closure of one or
more seed conditions under all candidate swaps. A method tries its
stages in order.
"""
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from core.ballots import BallotSpace, Profile
from core.errors import (
    DimensionMismatchError,
    EmptyElectorateError,
    IndecisiveMethodError,
    MethodStructureError,
    MutualExclusivityError,
)
from core.geometry import (
    CategoryKind,
    NormalVector,
    SwapOperator,
    VectorCategory,
    apply_swap,
    classify_vector,
    orbit,
    raw_product,
    swap_group,
)
from core.logger import get_logger

logger = get_logger(__name__)


# ---------------------------------------------------------------------------
# Outcomes
# ---------------------------------------------------------------------------

class OutcomeKind(str, Enum):
    WINNER = "winner"
    TIE = "tie"
    CONFLICT = "conflict"
    EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class Outcome:
    """
    Result of evaluating a method on a profile.

    WINNER and TIE are ordinary results. CONFLICT (several stage winners
    at once) and EXHAUSTED (no stage decided) are diagnostics that
    raise_for_status() turns into exceptions.
    """
    kind: OutcomeKind
    candidates: FrozenSet[int]
    stage: Optional[int] = None
    diagnostic: str = ""
    tiebroken: bool = False
    trace: Tuple[dict, ...] = field(default=(), compare=False, repr=False)

    @classmethod
    def winner_of(cls, candidate: int, stage: Optional[int] = None, **kwargs) -> "Outcome":
        return cls(OutcomeKind.WINNER, frozenset([candidate]), stage, **kwargs)

    @classmethod
    def tie_of(cls, candidates: Iterable[int], stage: Optional[int] = None, **kwargs) -> "Outcome":
        candidates = frozenset(candidates)
        if len(candidates) == 1:
            return cls(OutcomeKind.WINNER, candidates, stage, **kwargs)
        return cls(OutcomeKind.TIE, candidates, stage, **kwargs)

    @property
    def winner(self) -> Optional[int]:
        if self.kind == OutcomeKind.WINNER:
            (candidate,) = self.candidates
            return candidate
        return None

    @property
    def is_decisive(self) -> bool:
        return self.kind == OutcomeKind.WINNER

    def same_result(self, other: "Outcome") -> bool:
        return self.kind == other.kind and self.candidates == other.candidates

    def relabel(self, mapping: Sequence[int]) -> "Outcome":
        return Outcome(self.kind, frozenset(mapping[c] for c in self.candidates), self.stage,
                       self.diagnostic, self.tiebroken)

    def raise_for_status(self) -> "Outcome":
        """Raise for CONFLICT / EXHAUSTED outcomes, return self otherwise."""
        if self.kind == OutcomeKind.CONFLICT:
            raise MutualExclusivityError(self.diagnostic or f"stage {self.stage} elects several candidates")
        if self.kind == OutcomeKind.EXHAUSTED:
            raise IndecisiveMethodError(self.diagnostic or "no stage produced a winner")
        return self

    def describe(self, space: BallotSpace) -> str:
        names = ", ".join(space.label_of(c) for c in sorted(self.candidates))
        if self.kind == OutcomeKind.WINNER:
            text = f"winner {names}"
        elif self.kind == OutcomeKind.TIE:
            text = f"tie {{{names}}}"
        elif self.kind == OutcomeKind.CONFLICT:
            text = f"conflict {{{names}}}"
        else:
            text = "exhausted"
        if self.tiebroken:
            text += " (tiebreak)"
        return text

    def to_dict(self, space: BallotSpace) -> dict:
        return {
            "kind": self.kind.value,
            "candidates": [space.label_of(c) for c in sorted(self.candidates)],
            "stage": None if self.stage is None else self.stage + 1,
            "tiebroken": self.tiebroken,
            "diagnostic": self.diagnostic,
        }


@dataclass(frozen=True)
class TiebreakResult:
    winner: Optional[int]
    diagnostic: str = ""


Tiebreak = Callable[[Profile, FrozenSet[int]], TiebreakResult]


# ---------------------------------------------------------------------------
# Conditions and stages
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Condition:
    """winner wins when (p, v) > 0 for every v in vectors."""
    winner: int
    vectors: FrozenSet[NormalVector]

    def __post_init__(self):
        vectors = frozenset(self.vectors)
        if not vectors:
            raise MethodStructureError("a condition needs at least one vector")
        spaces = {v.space for v in vectors}
        if len(spaces) != 1:
            raise DimensionMismatchError("condition vectors live in different ballot spaces")
        (space,) = spaces
        if not 0 <= self.winner < space.n_c:
            raise MethodStructureError(f"winner index {self.winner} out of range")
        object.__setattr__(self, "vectors", vectors)

    @property
    def space(self) -> BallotSpace:
        return next(iter(self.vectors)).space

    def swapped(self, op: SwapOperator) -> "Condition":
        return Condition(op.map_candidate(self.winner), frozenset(apply_swap(op, v) for v in self.vectors))

    def sort_key(self):
        return (self.winner, tuple(sorted(v.components for v in self.vectors)))


@dataclass(frozen=True)
class Stage:
    """Swap-closed set of conditions, with the seeds it was generated from."""
    conditions: Tuple[Condition, ...]
    seeds: Tuple[Condition, ...] = ()
    label: str = ""

    @property
    def space(self) -> BallotSpace:
        return self.conditions[0].space

    @property
    def vectors(self) -> Tuple[NormalVector, ...]:
        distinct = {v.components: v for c in self.conditions for v in c.vectors}
        return tuple(distinct[key] for key in sorted(distinct))

    def conditions_for(self, winner: int) -> Tuple[Condition, ...]:
        return tuple(c for c in self.conditions if c.winner == winner)


def generate_stage(seeds: Union[Condition, Iterable[Condition]], label: str = "") -> Stage:
    """
    Close seed conditions under every candidate swap.

    Swaps involving the winner produce conditions for other winners;
    duplicate conditions are merged.

    Args:
        seeds: One condition, or several for a disjunctive stage
        label: Display name

    Returns:
        Stage with canonically ordered conditions
    """
    seeds = (seeds,) if isinstance(seeds, Condition) else tuple(seeds)
    if not seeds:
        raise MethodStructureError("a stage needs at least one seed condition")
    spaces = {s.space for s in seeds}
    if len(spaces) != 1:
        raise DimensionMismatchError("stage seeds live in different ballot spaces")
    operators = swap_group(seeds[0].space)

    seen = {s.sort_key(): s for s in seeds}
    frontier = list(seeds)
    while frontier:
        nxt = []
        for condition in frontier:
            for op in operators:
                image = condition.swapped(op)
                key = image.sort_key()
                if key not in seen:
                    seen[key] = image
                    nxt.append(image)
        frontier = nxt

    conditions = tuple(seen[key] for key in sorted(seen))
    logger.debug(f"Generated stage {label!r} with {len(conditions)} conditions")
    return Stage(conditions, seeds, label)


def minimal_generators(stage: Stage) -> Tuple[NormalVector, ...]:
    """One representative vector per swap orbit among the stage's vectors."""
    generators = []
    covered = set()
    for v in stage.vectors:
        if v.components in covered:
            continue
        generators.append(v)
        covered.update(w.components for w in orbit(v))
    return tuple(generators)


class StageType(str, Enum):
    TYPE_1 = "Type1"
    TYPE_1B = "Type1b"
    TYPE_2 = "Type2"
    TYPE_3 = "Type3"
    NON_COMPLIANT = "NonCompliant"


def stage_categories(stage: Stage, reading: str = "auto") -> List[Tuple[NormalVector, VectorCategory]]:
    return [(v, classify_vector(v, reading)) for v in stage.vectors]


def classify_stage(stage: Stage, reading: str = "auto") -> StageType:
    """
    Stage type from the categories of its vectors.

    Any NonCompliant vector makes the stage NonCompliant, any Category 3
    vector makes it Type 3; otherwise all Category 1 is Type 1, all
    Category 2 is Type 2 and a mix is Type 1b.
    """
    kinds = {category.kind for _, category in stage_categories(stage, reading)}
    if CategoryKind.NON_COMPLIANT in kinds:
        return StageType.NON_COMPLIANT
    if CategoryKind.CATEGORY_3 in kinds:
        return StageType.TYPE_3
    if kinds == {CategoryKind.CATEGORY_1}:
        return StageType.TYPE_1
    if kinds == {CategoryKind.CATEGORY_2}:
        return StageType.TYPE_2
    return StageType.TYPE_1B


# ---------------------------------------------------------------------------
# Methods
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Method:
    """
    Ordered stages over one ballot space.

    Construction rejects a Type 1 stage anywhere but last, since such a
    stage always decides and would hide every later stage.
    """
    stages: Tuple[Stage, ...]
    space: BallotSpace
    name: str = "custom"
    tiebreak: Optional[Tiebreak] = None
    reading: str = "auto"
    validate: bool = True
    _vectors: Tuple[Tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    _plan: Tuple[Tuple[Tuple[int, Tuple[int, ...]], ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        stages = tuple(self.stages)
        object.__setattr__(self, "stages", stages)
        if not stages:
            raise MethodStructureError("a method needs at least one stage")
        for number, stage in enumerate(stages, start=1):
            if stage.space != self.space:
                raise DimensionMismatchError(f"stage {number} uses a different ballot space")

        if self.validate:
            for number, stage in enumerate(stages[:-1], start=1):
                stage_type = classify_stage(stage, self.reading)
                if stage_type == StageType.TYPE_1:
                    logger.error(f"Method {self.name!r}: stage {number} is Type1 but not last")
                    raise MethodStructureError(
                        f"stage {number} of {self.name!r} is Type1 and must be the last stage")
                if stage_type == StageType.NON_COMPLIANT:
                    logger.warning(f"Method {self.name!r}: stage {number} is NonCompliant")

        ids: Dict[Tuple[Fraction, ...], int] = {}
        vectors: List[Tuple[int, ...]] = []
        plan = []
        for stage in stages:
            rows = []
            for condition in stage.conditions:
                row = []
                for v in sorted(condition.vectors, key=NormalVector.sort_key):
                    if v.components not in ids:
                        ids[v.components] = len(vectors)
                        vectors.append(v.integer_components)
                    row.append(ids[v.components])
                rows.append((condition.winner, tuple(row)))
            plan.append(tuple(rows))
        object.__setattr__(self, "_vectors", tuple(vectors))
        object.__setattr__(self, "_plan", tuple(plan))

    @property
    def tiebreak_name(self) -> Optional[str]:
        return None if self.tiebreak is None else getattr(self.tiebreak, "label", self.tiebreak.__name__)

    def decide(self, profile: Profile, use_tiebreak: bool = True, trace: bool = False) -> Outcome:
        if profile.space != self.space:
            raise DimensionMismatchError(
                f"profile space [{profile.space.describe()}] differs from method space [{self.space.describe()}]")
        if profile.is_empty:
            raise EmptyElectorateError()
        outcome = self._decide_counts(profile.counts)
        if outcome.kind == OutcomeKind.TIE and use_tiebreak and self.tiebreak is not None:
            outcome = _apply_tiebreak(self.tiebreak, profile, outcome)
        if trace:
            outcome = Outcome(outcome.kind, outcome.candidates, outcome.stage, outcome.diagnostic,
                              outcome.tiebroken, self._trace(profile))
        return outcome

    def decide_counts(self, counts: Tuple, use_tiebreak: bool = True) -> Outcome:
        """decide() on a raw count tuple, building a Profile only for tiebreaks."""
        outcome = self._decide_counts(counts)
        if outcome.kind == OutcomeKind.TIE and use_tiebreak and self.tiebreak is not None:
            outcome = _apply_tiebreak(self.tiebreak, Profile(self.space, counts), outcome)
        return outcome

    def _decide_counts(self, counts: Tuple) -> Outcome:
        products = [raw_product(counts, v) for v in self._vectors]
        return self._from_stage(products, 0)

    def _from_stage(self, products: List, start: int) -> Outcome:
        for number in range(start, len(self._plan)):
            holders, boundary = set(), set()
            for winner, row in self._plan[number]:
                values = [products[k] for k in row]
                if all(x > 0 for x in values):
                    holders.add(winner)
                elif all(x >= 0 for x in values):
                    boundary.add(winner)
            if len(holders) > 1:
                return Outcome(OutcomeKind.CONFLICT, frozenset(holders), number,
                               f"stage {number + 1} elects several candidates")
            if holders:
                return Outcome.winner_of(holders.pop(), number)
            if boundary:
                rest = self._from_stage(products, number + 1)
                tied = set(boundary)
                if rest.kind in (OutcomeKind.WINNER, OutcomeKind.TIE):
                    tied |= rest.candidates
                return Outcome.tie_of(tied, number, diagnostic=f"boundary at stage {number + 1}")
        return Outcome(OutcomeKind.EXHAUSTED, frozenset(), None, "no stage produced a winner")

    def _trace(self, profile: Profile) -> Tuple[dict, ...]:
        n_voters = profile.n_voters
        entries = []
        for number, stage in enumerate(self.stages, start=1):
            rows = []
            for condition in stage.conditions:
                values = [sum((Fraction(n) * u for n, u in zip(profile.counts, v.components)), Fraction(0)) / n_voters
                          for v in sorted(condition.vectors, key=NormalVector.sort_key)]
                if all(x > 0 for x in values):
                    status = "holds"
                elif all(x >= 0 for x in values):
                    status = "boundary"
                else:
                    status = "fails"
                rows.append({
                    "winner": self.space.label_of(condition.winner),
                    "products": [str(x) for x in values],
                    "status": status,
                })
            entries.append({"stage": number, "label": stage.label, "conditions": rows})
        return tuple(entries)


def _apply_tiebreak(tiebreak: Tiebreak, profile: Profile, outcome: Outcome) -> Outcome:
    result = tiebreak(profile, outcome.candidates)
    if result.winner is None:
        return Outcome(outcome.kind, outcome.candidates, outcome.stage,
                       result.diagnostic or "residual tie", outcome.tiebroken, outcome.trace)
    return Outcome(OutcomeKind.WINNER, frozenset([result.winner]), outcome.stage,
                   result.diagnostic, True, outcome.trace)


def evaluate(method, profile: Profile, use_tiebreak: bool = True, trace: bool = False) -> Outcome:
    """
    Evaluate a method (staged or direct tally) on a profile.

    Stages are tried in order. One strict holder wins; several is a
    CONFLICT. With no holder, candidates whose conditions sit on the
    boundary tie together with whoever the remaining stages would
    elect. The tiebreak, when present and enabled, resolves ties.

    Args:
        method: Method or any object with a compatible decide()
        profile: Non-empty profile of the method's ballot space
        use_tiebreak: Apply the method's tiebreak to ties
        trace: Attach per-stage products (staged methods only)

    Returns:
        Outcome
    """
    outcome = method.decide(profile, use_tiebreak=use_tiebreak, trace=trace)
    if outcome.kind in (OutcomeKind.CONFLICT, OutcomeKind.EXHAUSTED):
        logger.warning(f"{method.name}: {outcome.kind.value} on profile {profile.counts}: {outcome.diagnostic}")
    return outcome
