from fractions import Fraction

import pytest

from core.ballots import BallotSpace, Profile
from core.errors import InvalidParameterError, RankingParseError, WeightFitError
from core.geometry import dominance_vector, inner
from core.methods import (
    BUILTINS,
    DirectTally,
    ScoringWeights,
    antiplurality_stage,
    build,
    fit_scoring_weights,
    load_method,
    pairwise_tiebreak,
    parse_builtin,
    parse_method,
    quota_stage,
    tally_irv,
    tally_points,
)
from core.oracle import enumerate_profiles
from core.stages import OutcomeKind, StageType, classify_stage


def _profile(space, counts):
    return Profile.from_text(space, [(n, text) for text, n in counts.items()])


ANTIPLURALITY_FILE = """
# antiplurality written out by hand
ballots { candidates=3 ties=no truncation=no }
stage fewest last places {
  condition winner=A {
    vector inline A>C>B: 1; C>A>B: 1; C>B>A: -1; B>C>A: -1
    vector inline A>B>C: 1; B>A>C: 1; C>B>A: -1; B>C>A: -1
  }
}
tiebreak pairwise
"""


def test_point_tallies_worked_examples(strict3, test_data):
    """Test antiplurality and plurality totals on the same profile"""
    entry = test_data["profiles"]["antiplurality_winner_b"]
    profile = _profile(strict3, entry["counts"])

    anti = tally_points(profile, (1, 1, 0))
    assert list(anti.totals) == entry["antiplurality_totals"]
    assert anti.winners == frozenset({1})

    plurality = tally_points(profile, ScoringWeights.top(1, 3))
    assert plurality.winners == frozenset({0})

    constant = tally_points(profile, (1, 1, 1))
    assert constant.winners == frozenset({0, 1, 2})


def test_scoring_weight_validation(strict3):
    """Test increasing or short weight vectors are rejected"""
    with pytest.raises(InvalidParameterError):
        ScoringWeights((0, 1, 1))
    with pytest.raises(InvalidParameterError):
        tally_points(Profile(strict3, (1, 0, 0, 0, 0, 0)), (1, 1))

    assert ScoringWeights((2, 2, 1)).equal_top_two
    assert not ScoringWeights((2, 1, 0)).equal_top_two
    assert ScoringWeights((4, 4, 2)).normalized().weights == (1, 1, Fraction(1, 2))


def test_pairwise_tiebreak(strict3):
    """Test head-to-head tiebreak resolution and its unresolved cases"""
    profile = _profile(strict3, {"A>B>C": 2, "B>A>C": 1})
    assert pairwise_tiebreak(profile, frozenset({0, 1})).winner == 0

    balanced = _profile(strict3, {"A>B>C": 1, "B>A>C": 1})
    result = pairwise_tiebreak(balanced, frozenset({0, 1}))
    assert result.winner is None
    assert "unresolved" in result.diagnostic

    three = pairwise_tiebreak(profile, frozenset({0, 1, 2}))
    assert three.winner is None
    assert "2 tied candidates" in three.diagnostic


def test_pairwise_tiebreak_is_swap_consistent(strict3):
    """Test exchanging the tied candidates exchanges the tiebreak winner"""
    profile = _profile(strict3, {"A>B>C": 2, "C>B>A": 1})
    mirrored = _profile(strict3, {"B>A>C": 2, "C>A>B": 1})

    assert pairwise_tiebreak(profile, frozenset({0, 1})).winner == 0
    assert pairwise_tiebreak(mirrored, frozenset({0, 1})).winner == 1


def test_irv_transfer(strict3, test_data):
    """Test IRV eliminates the weakest candidate and transfers"""
    entry = test_data["profiles"]["irv_transfer"]
    outcome = tally_irv(_profile(strict3, entry["counts"]))

    assert outcome.kind == OutcomeKind.WINNER
    assert strict3.label_of(outcome.winner) == entry["winner"]


def test_irv_two_candidates_is_majority():
    """Test IRV degenerates to majority rule"""
    space = BallotSpace(2)
    profile = Profile.from_text(space, [(3, "B>A"), (2, "A>B")])

    assert tally_irv(profile).winner == 1


def test_irv_elimination_tie_reports_union(strict3):
    """Test a three-way first-count tie surfaces every branch winner"""
    profile = _profile(strict3, {"A>B>C": 1, "B>C>A": 1, "C>A>B": 1})
    outcome = tally_irv(profile)

    assert outcome.kind == OutcomeKind.TIE
    assert outcome.candidates == frozenset({0, 1, 2})
    assert "elimination tie" in outcome.diagnostic


def test_irv_truncated_ballots_exhaust():
    """Test truncated ballots drop out once their listed candidates are gone"""
    space = BallotSpace(3, allow_truncation=True)
    profile = _profile(space, {"B": 2, "A>C>B": 2, "C>A>B": 1})

    assert tally_irv(profile).winner == 0


def test_irv_rejects_tied_ballots():
    """Test IRV refuses ballot spaces with ties"""
    with pytest.raises(InvalidParameterError):
        build("irv", allow_ties=True)


def test_plurality_with_pairwise_tiebreak(strict3):
    """Test plurality breaks a two-way first-place tie head to head"""
    profile = _profile(strict3, {"A>B>C": 2, "B>C>A": 2, "C>A>B": 1})

    plain = build("plurality").decide(profile)
    assert plain.kind == OutcomeKind.TIE
    assert plain.candidates == frozenset({0, 1})

    broken = build("plurality tiebreak=pairwise").decide(profile)
    assert broken.winner == 0
    assert broken.tiebroken
    assert build("plurality tiebreak=pairwise").decide(profile, use_tiebreak=False).kind == OutcomeKind.TIE


@pytest.mark.parametrize("name,expected", [
    ("antiplurality", [StageType.TYPE_1]),
    ("equal-top-two", [StageType.TYPE_1]),
    ("equal-top-two weights=2,2,1", [StageType.TYPE_1]),
    ("quota-points", [StageType.TYPE_1B, StageType.TYPE_1]),
    ("quota-points q=2/3", [StageType.TYPE_1B, StageType.TYPE_1]),
    ("mca", [StageType.TYPE_1B, StageType.TYPE_1]),
    ("mdda", [StageType.TYPE_2, StageType.TYPE_1B, StageType.TYPE_1]),
    ("approval", [StageType.TYPE_1]),
    ("range levels=4", [StageType.TYPE_1]),
    ("bucklin", [StageType.TYPE_1B, StageType.TYPE_1]),
    ("plurality", []),
    ("irv", []),
])
def test_builtin_stage_types(name, expected):
    """Test each builtin's stage taxonomy"""
    method = build(name)

    assert [classify_stage(stage) for stage in method.stages] == expected


def test_every_builtin_is_registered():
    """Test the builtin catalog"""
    assert set(BUILTINS) == {"antiplurality", "equal-top-two", "quota-points", "mca", "mdda",
                             "approval", "range", "bucklin", "plurality", "irv"}
    assert isinstance(build("irv"), DirectTally)


@pytest.mark.parametrize("text", [
    "quota-points q=1/2",
    "quota-points q=5/4",
    "quota-points depth=3",
    "equal-top-two weights=2,1,0",
    "antiplurality levels=3",
    "approval ties=yes",
    "antiplurality color=red",
    "antiplurality tiebreak=coin",
    "range levels=1",
    "borda",
])
def test_invalid_builtin_parameters(text):
    """Test builtin parameter validation"""
    with pytest.raises(InvalidParameterError):
        build(text)


def test_parse_builtin_sorts_parameters():
    """Test builtin text parsing"""
    builtin = parse_builtin("Quota-Points depth=2 q=3/4")

    assert builtin.name == "quota-points"
    assert builtin.describe() == "quota-points depth=2 q=3/4"


def test_mdda_domination_vectors(tied3):
    """Test the first MDDA stage is built from domination vectors"""
    method = build("mdda")
    vectors = {v.components for v in method.stages[0].vectors}

    assert method.space == tied3
    assert (-dominance_vector(tied3, 1, 0)).components in vectors


def test_antiplurality_stage_matches_point_tally(strict3):
    """Test stage evaluation and (1,1,0) points agree, tie-sets included"""
    method = build("antiplurality")
    for n_voters in range(1, 7):
        for profile in enumerate_profiles(strict3, n_voters):
            outcome = method.decide(profile)
            assert outcome.candidates == tally_points(profile, (1, 1, 0)).winners


def test_fit_scoring_weights_recovers_equal_top_two(strict3):
    """Test weight fitting on a Type1 stage"""
    weights = fit_scoring_weights(antiplurality_stage(strict3))

    assert weights.weights == (1, 1, 0)
    assert weights.equal_top_two

    method = build("antiplurality")
    for profile in enumerate_profiles(strict3, 4):
        assert method.decide(profile).candidates == tally_points(profile, weights).winners


def test_fit_scoring_weights_rejects_non_point_stages(strict3, tied3):
    """Test weight fitting refuses Type1b stages and tied spaces"""
    with pytest.raises(WeightFitError):
        fit_scoring_weights(quota_stage(strict3, ScoringWeights.top(2, 3), 2, Fraction(3, 4), "quota"))
    with pytest.raises(WeightFitError):
        fit_scoring_weights(antiplurality_stage(tied3))


def test_mdda_majority_top_candidate_is_never_dominated(tied3):
    """Test a candidate on top of most ballots that are not fully tied is undominated"""
    for n_voters in range(1, 4):
        for profile in enumerate_profiles(tied3, n_voters):
            ranked = [(r, n) for r, n in profile.items() if not r.is_fully_tied]
            total = sum(n for _, n in ranked)
            for c in range(3):
                if 2 * sum(n for r, n in ranked if c in r.top) <= total:
                    continue
                for x in range(3):
                    if x != c:
                        assert inner(profile, dominance_vector(tied3, c, x)) > 0


def test_mdda_majority_cycle_falls_through_to_antiplurality():
    """Test a dominance cycle is decided by the final fewest-last-places stage"""
    method = build("mdda")
    # A beats B 5-3, B beats C 6-2, C beats A 5-3; B is last on only 2 ballots
    profile = _profile(method.space, {"A>B>C": 3, "B>C>A": 3, "C>A>B": 2})

    outcome = method.decide(profile, trace=True)

    assert outcome.kind == OutcomeKind.WINNER
    assert outcome.winner == 1
    assert outcome.stage == 2
    for entry in outcome.trace[:2]:
        assert {row["status"] for row in entry["conditions"]} == {"fails"}


def test_mca_first_stage_decides_with_majority_preferred():
    """Test MCA falls through exactly when nobody reaches half the Preferred ratings"""
    method = build("mca")
    for n_voters in range(1, 4):
        for profile in enumerate_profiles(method.space, n_voters):
            preferred = [sum(n for r, n in profile.items() if r.position(c) == 0) for c in range(3)]
            outcome = method.decide(profile)
            if any(2 * p > n_voters for p in preferred):
                assert outcome.stage == 0
            elif all(2 * p < n_voters for p in preferred):
                assert outcome.stage == 1


def test_bucklin_residual_tie_surfaces():
    """Test a symmetric graded profile stays tied"""
    method = build("bucklin")
    profile = Profile.from_text(method.space, [(1, "A>B>C"), (1, "B>C>A"), (1, "C>A>B")])

    assert method.decide(profile).kind == OutcomeKind.TIE


def test_parse_method_file_matches_builtin(strict3):
    """Test a hand-written method file reproduces antiplurality"""
    method = parse_method(ANTIPLURALITY_FILE, name="hand")
    builtin = build("antiplurality")

    assert method.name == "hand"
    assert method.tiebreak_name == "pairwise"
    assert method.stages[0].label == "fewest last places"
    assert len(method.stages[0].conditions) == 3
    for profile in enumerate_profiles(strict3, 4):
        assert method.decide(profile, use_tiebreak=False).same_result(builtin.decide(profile))


def test_load_method_with_vector_file(tmp_path):
    """Test 'vector file' paths resolve next to the method file"""
    (tmp_path / "anti_ab.vec").write_text("space: candidates=3 ties=no truncation=no\n"
                                          "A>C>B : 1\nC>A>B : 1\nC>B>A : -1\nB>C>A : -1\n")
    (tmp_path / "anti.method").write_text(
        "ballots { candidates=3 ties=no truncation=no }\n"
        "stage {\n"
        "  condition winner=A {\n"
        "    vector file anti_ab.vec\n"
        "    vector inline A>B>C: 1; B>A>C: 1; C>B>A: -1; B>C>A: -1\n"
        "  }\n"
        "}\n")

    method = load_method(tmp_path / "anti.method")

    assert method.name == "anti"
    assert classify_stage(method.stages[0]) == StageType.TYPE_1


def test_method_file_builtin_with_overrides():
    """Test 'builtin' lines honour ballots and tiebreak lines"""
    method = parse_method("ballots { candidates=4 }\nbuiltin quota-points q=2/3\ntiebreak pairwise\n")

    assert method.name == "quota-points"
    assert method.space.n_c == 4
    assert method.tiebreak_name == "pairwise"


@pytest.mark.parametrize("text,line", [
    ("ballots { candidates=3 }\nwibble\n", 2),
    ("ballots { candidates=3 }\nstage {\n  condition winner=Q {\n", 3),
    ("ballots { candidates=3 }\ncondition winner=A {\n", 2),
    ("stage {\n", 1),
    ("ballots { candidates=3 }\nstage {\n  condition winner=A {\n    vector inline A>B>C: x\n", 4),
])
def test_method_file_errors_name_the_line(text, line):
    """Test method file errors carry line numbers"""
    with pytest.raises(RankingParseError) as excinfo:
        parse_method(text)

    assert excinfo.value.line == line


def test_method_file_unterminated_block():
    """Test an unclosed stage is an error"""
    with pytest.raises(RankingParseError):
        parse_method("ballots { candidates=3 }\nstage {\n  condition winner=A {\n"
                     "    vector inline A>B>C: 1\n  }\n")
