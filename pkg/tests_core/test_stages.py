from fractions import Fraction

import pytest

from core.ballots import BallotSpace, Profile
from core.errors import (
    DimensionMismatchError,
    EmptyElectorateError,
    IndecisiveMethodError,
    MethodStructureError,
    MutualExclusivityError,
)
from core.geometry import apply_swap, last_place_vector, swap_group, vector_from_values
from core.methods import (
    ScoringWeights,
    antiplurality_stage,
    build,
    majority_stage,
    quota_stage,
)
from core.oracle import enumerate_profiles
from core.stages import (
    Condition,
    Method,
    OutcomeKind,
    StageType,
    classify_stage,
    evaluate,
    generate_stage,
    minimal_generators,
)


def _profile(space, counts):
    return Profile.from_text(space, [(n, text) for text, n in counts.items()])


def test_antiplurality_stage_has_one_condition_per_candidate(strict3):
    """Test a winner-symmetric seed closes to n_c conditions"""
    stage = antiplurality_stage(strict3)

    assert len(stage.conditions) == 3
    assert sorted(c.winner for c in stage.conditions) == [0, 1, 2]
    assert len(stage.vectors) == 6
    assert len(minimal_generators(stage)) == 1
    assert classify_stage(stage) == StageType.TYPE_1


def test_asymmetric_seed_closes_to_multiple_of_n_c(strict3):
    """Test a seed not invariant among non-winners yields more conditions"""
    stage = generate_stage(Condition(0, frozenset([last_place_vector(strict3, 0, 1)])))

    assert len(stage.conditions) == 6
    assert len(stage.conditions) % 3 == 0
    for winner in range(3):
        assert len(stage.conditions_for(winner)) == 2


def test_quota_stage_has_two_generators(strict3):
    """Test the threshold vector forms its own orbit"""
    stage = quota_stage(strict3, ScoringWeights.top(2, 3), 2, Fraction(3, 4), "quota")

    assert len(minimal_generators(stage)) == 2
    assert len(stage.vectors) == 9
    assert classify_stage(stage) == StageType.TYPE_1B


def test_majority_stage_is_type2_under_membership_reading(tied3):
    """Test domination stage classification"""
    stage = majority_stage(tied3)

    assert classify_stage(stage) == StageType.TYPE_2
    assert classify_stage(stage, "fbc") == StageType.TYPE_2


def test_source_vector_stage_conflict(strict3, test_data):
    """Test the m=2 source-vector stage elects two candidates at once"""
    v1 = vector_from_values(strict3, test_data["vectors"]["source_a_m2"]["components"])
    method = Method((generate_stage(Condition(0, frozenset([v1]))),), strict3, "source-m2")
    profile = _profile(strict3, test_data["profiles"]["exclusivity_clash"]["counts"])

    outcome = evaluate(method, profile)

    assert outcome.kind == OutcomeKind.CONFLICT
    assert outcome.candidates == frozenset({0, 1})
    with pytest.raises(MutualExclusivityError):
        outcome.raise_for_status()


def test_condorcet_cycle_exhausts_majority_stage(strict3):
    """Test a cyclic profile leaves a lone majority stage undecided"""
    method = Method((majority_stage(strict3),), strict3, "majority-only")
    profile = _profile(strict3, {"A>B>C": 1, "B>C>A": 1, "C>A>B": 1})

    outcome = evaluate(method, profile)

    assert outcome.kind == OutcomeKind.EXHAUSTED
    with pytest.raises(IndecisiveMethodError):
        outcome.raise_for_status()


def test_non_final_type1_stage_is_rejected(strict3):
    """Test construction rejects a Type1 stage before the last stage"""
    with pytest.raises(MethodStructureError):
        Method((antiplurality_stage(strict3), antiplurality_stage(strict3)), strict3, "twice")


def test_method_rejects_empty_and_foreign_profiles(strict3, tied3):
    """Test evaluation preconditions"""
    method = build("antiplurality")

    with pytest.raises(EmptyElectorateError):
        evaluate(method, Profile.empty(strict3))
    with pytest.raises(DimensionMismatchError):
        evaluate(method, Profile.empty(tied3).with_ballot(0))


def test_antiplurality_worked_example(strict3, test_data):
    """Test antiplurality elects the candidate ranked last least often"""
    entry = test_data["profiles"]["antiplurality_winner_b"]
    outcome = evaluate(build("antiplurality"), _profile(strict3, entry["counts"]))

    assert outcome.kind == OutcomeKind.WINNER
    assert strict3.label_of(outcome.winner) == entry["winner"]
    assert outcome.stage == 0


def test_symmetric_profile_ties_everyone(strict3):
    """Test one voter of every type ties all candidates"""
    profile = Profile(strict3, (1,) * 6)

    for name in ("antiplurality", "quota-points", "equal-top-two"):
        outcome = evaluate(build(name), profile)
        assert outcome.kind == OutcomeKind.TIE
        assert outcome.candidates == frozenset({0, 1, 2})


def test_boundary_set_joins_later_stage_winner(strict3):
    """Test a lone boundary candidate also elected by the fall-through stage wins"""
    method = build("quota-points q=3/4")
    # A is top-two on exactly 6 of 8 ballots: stage 1 sits on the quota boundary
    profile = _profile(strict3, {"A>B>C": 3, "A>C>B": 3, "B>C>A": 1, "C>B>A": 1})

    outcome = method.decide(profile)

    assert outcome.kind == OutcomeKind.WINNER
    assert outcome.winner == 0
    assert outcome.stage == 0
    assert outcome.diagnostic == "boundary at stage 1"


def test_trace_reports_each_condition(strict3):
    """Test the per-stage trace lists products and statuses"""
    method = build("quota-points")
    profile = _profile(strict3, {"A>B>C": 3, "A>C>B": 1})

    outcome = method.decide(profile, trace=True)

    assert outcome.winner == 0
    assert [entry["stage"] for entry in outcome.trace] == [1, 2]
    statuses = {row["winner"]: row["status"] for row in outcome.trace[0]["conditions"]}
    assert statuses["A"] == "holds"
    assert outcome.to_dict(strict3)["stage"] == 1


@pytest.mark.parametrize("name,kwargs,max_voters", [
    ("antiplurality", {}, 4),
    ("quota-points", {}, 4),
    ("equal-top-two", {}, 4),
    ("mca", {}, 3),
    ("mdda", {}, 4),
    ("approval", {}, 4),
    ("range levels=3", {}, 3),
    ("bucklin", {}, 2),
    ("plurality", {}, 4),
    ("irv", {}, 4),
    ("irv", {"allow_truncation": True}, 4),
])
def test_neutrality_on_small_profiles(name, kwargs, max_voters):
    """Test swapping candidates in the profile swaps them in the outcome"""
    method = build(name, **kwargs)
    space = method.space
    for n_voters in range(1, max_voters + 1):
        for profile in enumerate_profiles(space, n_voters):
            base = method.decide(profile, use_tiebreak=False)
            for op in swap_group(space):
                mapping = [op.map_candidate(c) for c in range(space.n_c)]
                swapped = method.decide(apply_swap(op, profile), use_tiebreak=False)
                assert swapped.same_result(base.relabel(mapping))


@pytest.mark.parametrize("name", ["antiplurality", "quota-points", "mdda"])
def test_scale_invariance(name):
    """Test multiplying every count leaves the outcome unchanged"""
    method = build(name)
    for profile in enumerate_profiles(method.space, 2):
        base = method.decide(profile, use_tiebreak=False)
        for factor in (2, 3, Fraction(5, 2)):
            assert method.decide(profile.scaled(factor), use_tiebreak=False).same_result(base)


def test_type1_stage_alone_decides_off_the_tie_set(strict3):
    """Test a lone Type1 stage never conflicts or exhausts"""
    method = Method((antiplurality_stage(strict3),), strict3, "antiplurality")
    for n_voters in range(1, 7):
        for profile in enumerate_profiles(strict3, n_voters):
            outcome = method.decide(profile)
            assert outcome.kind in (OutcomeKind.WINNER, OutcomeKind.TIE)


def test_custom_space_method_outcome_describe():
    """Test outcome rendering uses the space labels"""
    space = BallotSpace(3, labels=("X", "Y", "Z"))
    method = Method((antiplurality_stage(space),), space, "antiplurality")
    profile = Profile.from_text(space, [(2, "X>Y>Z"), (1, "Y>Z>X")])

    assert method.decide(profile).describe(space) == "winner Y"
