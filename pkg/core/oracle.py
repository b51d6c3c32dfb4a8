# core/oracle.py
"""
Exhaustive small-electorate search for favorite-betrayal, least-favorite
promotion and monotonicity failures.

A manipulation instance is a multiset of other voters plus one pivotal
voter with a sincere strict ranking. The pivotal voter may cast any
admissible ballot. Ballots that respect the criterion are PROTECTED
(favorite alone on top for SFBC, nobody above the favorite for FBC,
least favorite alone at the bottom for LFP); all others are EXPOSED.
The instance is a violation when an exposed ballot elects a candidate
the voter strictly prefers to everything protected ballots can elect.
"""
import time
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations_with_replacement
from multiprocessing import Pool, cpu_count
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from core.ballots import BallotSpace, Profile, Ranking, format_profile, format_ranking, strict_rankings
from core.errors import IndecisiveMethodError, InvalidParameterError
from core.helpers import batch_list, compare_dicts
from core.logger import get_logger, log_metric
from core.stages import Outcome, OutcomeKind

logger = get_logger(__name__)


class Criterion(str, Enum):
    FBC = "fbc"
    SFBC = "sfbc"
    LFP = "lfp"
    MONOTONICITY = "monotonicity"


@dataclass(frozen=True)
class SearchScope:
    """
    What to search.

    Args:
        space: Ballot space of the method
        max_voters: Largest electorate
        criterion: Criterion to check
        skip_on_tie: Leave ties unbroken (True) or apply the method's tiebreak
        min_voters: Smallest electorate
        limit: Stop after this many counterexamples
        workers: Worker processes (1 runs in-process)
        chunk_size: Electorates per work unit
    """
    space: BallotSpace
    max_voters: int
    criterion: Criterion
    skip_on_tie: bool = True
    min_voters: int = 1
    limit: Optional[int] = None
    workers: int = 1
    chunk_size: int = 256

    def __post_init__(self):
        object.__setattr__(self, "criterion", Criterion(self.criterion))
        if self.max_voters < 1:
            raise InvalidParameterError(f"max_voters must be at least 1, got {self.max_voters}")
        if not 1 <= self.min_voters <= self.max_voters:
            raise InvalidParameterError(f"min_voters must lie in [1, {self.max_voters}], got {self.min_voters}")
        if self.limit is not None and self.limit < 1:
            raise InvalidParameterError("limit must be positive")
        if self.workers < 1 or self.chunk_size < 1:
            raise InvalidParameterError("workers and chunk_size must be positive")

    def to_dict(self) -> dict:
        return {
            "ballots": self.space.describe(),
            "criterion": self.criterion.value,
            "min_voters": self.min_voters,
            "max_voters": self.max_voters,
            "skip_on_tie": self.skip_on_tie,
            "limit": self.limit,
        }


@dataclass(frozen=True)
class Counterexample:
    """
    A replayable violation.

    profile is the electorate with the pivotal voters casting `cast`;
    replacing voters_changed of those ballots by `manipulation` gives
    manipulated_outcome. For manipulation criteria the protected ballot
    with the best result is recorded alongside.
    """
    criterion: Criterion
    profile: Profile
    sincere: Ranking
    cast: Ranking
    manipulation: Ranking
    sincere_outcome: Outcome
    manipulated_outcome: Outcome
    protected_ballot: Optional[Ranking] = None
    protected_outcome: Optional[Outcome] = None
    voters_changed: int = 1
    use_tiebreak: bool = False

    @property
    def manipulated_profile(self) -> Profile:
        space = self.profile.space
        return (self.profile.with_ballot(space.index(self.cast), -self.voters_changed)
                .with_ballot(space.index(self.manipulation), self.voters_changed))

    @property
    def protected_profile(self) -> Optional[Profile]:
        if self.protected_ballot is None:
            return None
        space = self.profile.space
        return (self.profile.with_ballot(space.index(self.cast), -1)
                .with_ballot(space.index(self.protected_ballot), 1))

    def to_dict(self) -> dict:
        space = self.profile.space
        data = {
            "criterion": self.criterion.value,
            "profile": format_profile(self.profile),
            "sincere": format_ranking(self.sincere, space),
            "cast": format_ranking(self.cast, space),
            "manipulation": format_ranking(self.manipulation, space),
            "voters_changed": self.voters_changed,
            "manipulated_profile": format_profile(self.manipulated_profile),
            "sincere_outcome": self.sincere_outcome.to_dict(space),
            "manipulated_outcome": self.manipulated_outcome.to_dict(space),
            "protected_ballot": None,
            "protected_outcome": None,
            "use_tiebreak": self.use_tiebreak,
        }
        if self.protected_ballot is not None:
            data["protected_ballot"] = format_ranking(self.protected_ballot, space)
            data["protected_outcome"] = self.protected_outcome.to_dict(space)
        return data


@dataclass(frozen=True)
class Verdict:
    scope: SearchScope
    method_name: str
    profiles_examined: int
    instances_examined: int
    instances_skipped: int
    counterexamples: Tuple[Counterexample, ...]
    notes: Tuple[str, ...] = ()
    elapsed_seconds: float = field(default=0.0, compare=False)

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    def to_dict(self) -> dict:
        return {
            "method": self.method_name,
            "scope": self.scope.to_dict(),
            "result": "no-counterexample" if self.passed else "counterexample",
            "profiles_examined": self.profiles_examined,
            "instances_examined": self.instances_examined,
            "instances_skipped": self.instances_skipped,
            "counterexamples": [c.to_dict() for c in self.counterexamples],
            "notes": list(self.notes),
        }


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def _count_vectors(dimension: int, n_voters: int) -> Iterator[Tuple[int, ...]]:
    for multiset in combinations_with_replacement(range(dimension), n_voters):
        counts = [0] * dimension
        for k in multiset:
            counts[k] += 1
        yield tuple(counts)


def enumerate_profiles(space: BallotSpace, n_voters: int) -> Iterator[Profile]:
    """
    Every multiset of n_voters ballots exactly once.

    Args:
        space: Ballot space
        n_voters: Electorate size (>= 1)

    Returns:
        Iterator of profiles, C(n_voters + d - 1, d - 1) in total
    """
    if n_voters < 1:
        raise InvalidParameterError(f"n_voters must be at least 1, got {n_voters}")
    for counts in _count_vectors(space.dimension, n_voters):
        yield Profile(space, counts)


def raised_rankings(ranking: Ranking, candidate: int, space: BallotSpace) -> Tuple[Ranking, ...]:
    """
    Admissible ballots moving `candidate` one step up, every other
    candidate keeping its relative order.

    Ordinal: split the candidate out above its tie-mates, merge it into
    the tier above, or swap it with a lone candidate directly above.
    Graded: one grade up.
    """
    t = ranking.position(candidate)
    options: List[Ranking] = []
    tiers = list(ranking.tiers)
    if ranking.graded:
        if t > 0:
            tiers[t] = tiers[t] - {candidate}
            tiers[t - 1] = tiers[t - 1] | {candidate}
            options.append(Ranking(tuple(tiers), ranking.n_c, graded=True))
    else:
        own = tiers[t]
        if len(own) > 1:
            options.append(Ranking(tuple(tiers[:t] + [frozenset([candidate]), own - {candidate}] + tiers[t + 1:]),
                                   ranking.n_c))
        elif t > 0:
            options.append(Ranking(tuple(tiers[:t - 1] + [tiers[t - 1] | own] + tiers[t + 1:]), ranking.n_c))
            if len(tiers[t - 1]) == 1:
                options.append(Ranking(tuple(tiers[:t - 1] + [own, tiers[t - 1]] + tiers[t + 1:]), ranking.n_c))
    seen = []
    for option in options:
        if option != ranking and space.admits(option) and option not in seen:
            seen.append(option)
    return tuple(seen)


# ---------------------------------------------------------------------------
# Sweep workers
# ---------------------------------------------------------------------------

class _Evaluator:
    """Memoized outcomes keyed by count tuple."""

    def __init__(self, method, use_tiebreak: bool):
        self.method = method
        self.use_tiebreak = use_tiebreak
        self.cache: Dict[Tuple, Outcome] = {}
        self.conflicts = 0

    def __call__(self, counts: Tuple) -> Outcome:
        outcome = self.cache.get(counts)
        if outcome is None:
            outcome = self.method.decide_counts(counts, self.use_tiebreak)
            if outcome.kind == OutcomeKind.TIE and self.use_tiebreak and self.method.tiebreak is None:
                raise IndecisiveMethodError(
                    f"{self.method.name} is indecisive on {counts} and has no tiebreak; "
                    "enable skip_on_tie or configure a tiebreak")
            if outcome.kind in (OutcomeKind.CONFLICT, OutcomeKind.EXHAUSTED):
                self.conflicts += 1
                logger.debug(f"{self.method.name}: {outcome.kind.value} on {counts}")
            if len(self.cache) > 500_000:
                self.cache.clear()
            self.cache[counts] = outcome
        return outcome


def _elected(outcome: Outcome, n_c: int) -> frozenset:
    """Candidates an outcome may elect; EXHAUSTED may elect anyone."""
    if outcome.kind == OutcomeKind.EXHAUSTED:
        return frozenset(range(n_c))
    return outcome.candidates


@dataclass
class _ChunkResult:
    profiles: int = 0
    instances: int = 0
    skipped: int = 0
    diagnostics: int = 0
    counterexamples: List[Counterexample] = field(default_factory=list)


def _is_protected(criterion: Criterion, ballot: Ranking, favorite: int, least: int) -> bool:
    candidates = range(ballot.n_c)
    if criterion == Criterion.SFBC:
        return all(ballot.prefers(favorite, c) for c in candidates if c != favorite)
    if criterion == Criterion.FBC:
        return not any(ballot.prefers(c, favorite) for c in candidates)
    return all(ballot.prefers(c, least) for c in candidates if c != least)


def _add(counts: Tuple, k: int, delta: int = 1) -> Tuple:
    out = list(counts)
    out[k] += delta
    return tuple(out)


def _manipulation_chunk(method, scope: SearchScope, chunk: Sequence[Tuple]) -> _ChunkResult:
    space = scope.space
    ballots = space.ballots
    n_c = space.n_c
    use_tiebreak = not scope.skip_on_tie
    evaluate = _Evaluator(method, use_tiebreak)
    result = _ChunkResult()
    sincere_types = strict_rankings(n_c)

    protected_masks = {}
    for s in sincere_types:
        order = s.strict_order()
        key = (order[0], order[-1])
        if key not in protected_masks:
            protected_masks[key] = [_is_protected(scope.criterion, b, order[0], order[-1]) for b in ballots]

    for others in chunk:
        result.profiles += 1
        outcomes = [evaluate(_add(others, k)) for k in range(len(ballots))]
        for sincere in sincere_types:
            if scope.limit is not None and len(result.counterexamples) >= scope.limit:
                result.diagnostics = evaluate.conflicts
                return result
            result.instances += 1
            order = sincere.strict_order()
            mask = protected_masks[(order[0], order[-1])]

            best_unique = None      # (utility, ballot index)
            best_tied = None        # highest utility inside a protected tie-set
            first_protected = None
            for k, outcome in enumerate(outcomes):
                if not mask[k]:
                    continue
                if first_protected is None:
                    first_protected = k
                if outcome.kind == OutcomeKind.WINNER:
                    u = sincere.utility(outcome.winner)
                    if best_unique is None or u > best_unique[0]:
                        best_unique = (u, k)
                else:
                    u = max(sincere.utility(c) for c in _elected(outcome, n_c))
                    best_tied = u if best_tied is None else max(best_tied, u)

            witness = None
            ambiguous = False
            for k, outcome in enumerate(outcomes):
                if mask[k] or outcome.kind != OutcomeKind.WINNER:
                    continue
                u = sincere.utility(outcome.winner)
                if best_unique is not None and u <= best_unique[0]:
                    continue
                if best_tied is not None and best_tied >= u:
                    ambiguous = True
                    continue
                if witness is None or u > witness[0]:
                    witness = (u, k)

            if witness is None:
                if ambiguous:
                    result.skipped += 1
                continue

            protected_k = best_unique[1] if best_unique is not None else first_protected
            cast = sincere if space.admits(sincere) else ballots[protected_k]
            cast_k = space.index(cast)
            base = _add(others, cast_k)
            result.counterexamples.append(Counterexample(
                criterion=scope.criterion,
                profile=Profile(space, base),
                sincere=sincere,
                cast=cast,
                manipulation=ballots[witness[1]],
                sincere_outcome=outcomes[cast_k],
                manipulated_outcome=outcomes[witness[1]],
                protected_ballot=ballots[protected_k],
                protected_outcome=outcomes[protected_k],
                use_tiebreak=use_tiebreak,
            ))
    result.diagnostics = evaluate.conflicts
    return result


def _monotonicity_chunk(method, scope: SearchScope, chunk: Sequence[Tuple]) -> _ChunkResult:
    space = scope.space
    ballots = space.ballots
    use_tiebreak = not scope.skip_on_tie
    evaluate = _Evaluator(method, use_tiebreak)
    result = _ChunkResult()
    raises: Dict[Tuple[int, int], Tuple[int, ...]] = {}

    for counts in chunk:
        result.profiles += 1
        base = evaluate(counts)
        if base.kind != OutcomeKind.WINNER:
            continue
        winner = base.winner
        for k, n_k in enumerate(counts):
            if not n_k:
                continue
            if (k, winner) not in raises:
                raises[(k, winner)] = tuple(space.index(r) for r in raised_rankings(ballots[k], winner, space))
            for target in raises[(k, winner)]:
                for m in range(1, n_k + 1):
                    if scope.limit is not None and len(result.counterexamples) >= scope.limit:
                        result.diagnostics = evaluate.conflicts
                        return result
                    result.instances += 1
                    changed = _add(_add(counts, k, -m), target, m)
                    outcome = evaluate(changed)
                    if outcome.kind == OutcomeKind.WINNER and outcome.winner == winner:
                        continue
                    if outcome.kind != OutcomeKind.WINNER and winner in _elected(outcome, space.n_c):
                        result.skipped += 1
                        continue
                    result.counterexamples.append(Counterexample(
                        criterion=scope.criterion,
                        profile=Profile(space, counts),
                        sincere=ballots[k],
                        cast=ballots[k],
                        manipulation=ballots[target],
                        sincere_outcome=base,
                        manipulated_outcome=outcome,
                        voters_changed=m,
                        use_tiebreak=use_tiebreak,
                    ))
    result.diagnostics = evaluate.conflicts
    return result


_WORKER_STATE: Dict[str, object] = {}


def _init_worker(method, scope: SearchScope):
    _WORKER_STATE["method"] = method
    _WORKER_STATE["scope"] = scope


def _run_chunk(chunk: Sequence[Tuple]) -> _ChunkResult:
    method, scope = _WORKER_STATE["method"], _WORKER_STATE["scope"]
    if scope.criterion == Criterion.MONOTONICITY:
        return _monotonicity_chunk(method, scope, chunk)
    return _manipulation_chunk(method, scope, chunk)


def _electorates(scope: SearchScope) -> Iterator[Tuple]:
    # manipulation criteria enumerate the other voters; the pivotal voter is added per instance
    offset = 0 if scope.criterion == Criterion.MONOTONICITY else 1
    for n_voters in range(scope.min_voters, scope.max_voters + 1):
        yield from _count_vectors(scope.space.dimension, n_voters - offset)


def _sweep(method, scope: SearchScope) -> Verdict:
    if method.space != scope.space:
        raise InvalidParameterError(
            f"method space [{method.space.describe()}] differs from scope space [{scope.space.describe()}]")
    if not scope.skip_on_tie and method.tiebreak is None:
        logger.info(f"{method.name}: no tiebreak configured; any tie will stop the sweep")

    started = time.perf_counter()
    total = _ChunkResult()
    chunks = batch_list(_electorates(scope), scope.chunk_size)

    def merge(part: _ChunkResult) -> bool:
        total.profiles += part.profiles
        total.instances += part.instances
        total.skipped += part.skipped
        total.diagnostics += part.diagnostics
        total.counterexamples.extend(part.counterexamples)
        return scope.limit is not None and len(total.counterexamples) >= scope.limit

    workers = min(scope.workers, cpu_count())
    if workers <= 1:
        _init_worker(method, scope)
        for chunk in chunks:
            if merge(_run_chunk(chunk)):
                break
    else:
        with Pool(workers, initializer=_init_worker, initargs=(method, scope)) as pool:
            for part in pool.imap(_run_chunk, chunks):
                if merge(part):
                    pool.terminate()
                    break

    counterexamples = tuple(total.counterexamples[:scope.limit] if scope.limit else total.counterexamples)
    notes = []
    if scope.criterion == Criterion.FBC and scope.space.has_ties:
        notes.append("FBC protects every ballot with no candidate strictly above the favorite "
                     "(equal-top ballots included)")
    if total.diagnostics:
        notes.append(f"{total.diagnostics} evaluations returned conflict or exhausted outcomes")
    elapsed = time.perf_counter() - started

    verdict = Verdict(scope, method.name, total.profiles, total.instances, total.skipped,
                      counterexamples, tuple(notes), elapsed)
    log_metric(logger, "oracle_sweep", len(counterexamples), {
        "method": method.name,
        "criterion": scope.criterion.value,
        "profiles_examined": total.profiles,
        "instances_examined": total.instances,
        "instances_skipped": total.skipped,
        "elapsed_seconds": round(elapsed, 3),
    })
    return verdict


def check_criterion(method, scope: SearchScope) -> Verdict:
    """
    Search for FBC, SFBC or LFP violations.

    An exposed ballot witnesses a violation only when it elects a single
    candidate x ranked above every single winner a protected ballot
    reaches, and no protected tie includes a candidate ranked at or above
    x; in that last case the instance is counted as skipped.
    Counting a protected tie by its best member is what exposes MDDA on
    weak orders: its strict-top failures at up to 5 voters all pass
    through a protected tie, so skipping every tied instance outright
    reports none of them.

    Args:
        method: Method or DirectTally
        scope: Scope with criterion fbc, sfbc or lfp

    Returns:
        Verdict with counterexamples in canonical order
    """
    if scope.criterion == Criterion.MONOTONICITY:
        raise InvalidParameterError("use check_monotonic for monotonicity")
    return _sweep(method, scope)


def check_monotonic(method, scope: SearchScope) -> Verdict:
    """
    Search for profiles where raising the winner on some ballots unseats it.

    For every ballot type, 1..n_k identical voters move the winner one
    step up. A tie that still contains the winner is skipped.
    Raising one ballot at a time is not enough for IRV: it first fails at
    17 voters, on {A>B>C: 6, B>C>A: 4, B>A>C: 2, C>A>B: 5}, where both
    B>A>C voters must raise A together; a single raised ballot only
    produces an elimination tie.
    """
    if scope.criterion != Criterion.MONOTONICITY:
        scope = SearchScope(scope.space, scope.max_voters, Criterion.MONOTONICITY, scope.skip_on_tie,
                            scope.min_voters, scope.limit, scope.workers, scope.chunk_size)
    return _sweep(method, scope)


def check(method, scope: SearchScope) -> Verdict:
    """Dispatch on scope.criterion."""
    if scope.criterion == Criterion.MONOTONICITY:
        return check_monotonic(method, scope)
    return check_criterion(method, scope)


def _outcome_summary(outcome: Optional[Outcome]) -> dict:
    if outcome is None:
        return {}
    return {"kind": outcome.kind.value, "candidates": sorted(outcome.candidates), "tiebroken": outcome.tiebroken}


def replay(counterexample: Counterexample, method) -> bool:
    """
    Re-evaluate a counterexample's profiles with the method.

    Returns:
        True when every recorded outcome is reproduced
    """
    space = counterexample.profile.space
    if method.space != space:
        logger.warning(f"replay: method space [{method.space.describe()}] differs from [{space.describe()}]")
        return False

    recorded = {
        "sincere": _outcome_summary(counterexample.sincere_outcome),
        "manipulated": _outcome_summary(counterexample.manipulated_outcome),
        "protected": _outcome_summary(counterexample.protected_outcome),
    }
    try:
        observed = {
            "sincere": _outcome_summary(method.decide(counterexample.profile, counterexample.use_tiebreak)),
            "manipulated": _outcome_summary(
                method.decide(counterexample.manipulated_profile, counterexample.use_tiebreak)),
            "protected": _outcome_summary(
                None if counterexample.protected_profile is None
                else method.decide(counterexample.protected_profile, counterexample.use_tiebreak)),
        }
    except (ValueError, KeyError) as e:
        logger.warning(f"replay failed: {e}")
        return False

    diff = compare_dicts(recorded, observed)
    if diff["added"] or diff["removed"] or diff["modified"]:
        logger.info(f"replay mismatch: {diff['modified'] or diff['added'] or diff['removed']}")
        return False
    return True
