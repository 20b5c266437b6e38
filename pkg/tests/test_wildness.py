import pytest

from app.core.errors import NotWild, WindowExhausted
from app.services.groups import ball
from app.services.wildness import (
    TruncationParams,
    WildStatus,
    analyzer_for,
    center,
    certified_tame,
    classify,
    coset_decomposition,
    estimate_constants,
    m_estimate,
    m_stable,
    profile,
    tame_subgroup,
    wild_interval,
)


def test_truncation_defaults():
    trunc = TruncationParams(radius=6)
    assert trunc.tau == 3
    assert trunc.scan_window == 12
    assert trunc.at(4).radius == 4
    with pytest.raises(ValueError):
        TruncationParams(radius=1)


@pytest.mark.parametrize(
    ("word", "expected"),
    [("b", (0,)), ("a^3 b A^2", (2,)), ("b a", (-1,)), ("A b a b", (0,))],
)
def test_wilderness_interval_in_free_group(f2_action, trunc4, el, word, expected):
    assert wild_interval(el(word), f2_action, trunc4) == expected


def test_profile_carries_witnesses(f2_action, trunc4, el):
    prof = profile(el("b"), f2_action, trunc4)
    assert prof.status is WildStatus.WILD_WITNESSED
    assert prof.center == 0
    assert prof.witnesses[0].spread == 2 * trunc4.radius


def test_classification_matches_axis_subgroup(f2, f2_action, trunc4):
    for h in ball(f2, 3):
        status = classify(h, f2_action, trunc4)
        on_axis = all(abs(x) == 1 for x in h.word)
        expected = WildStatus.TAME_CERTIFIED if on_axis else WildStatus.WILD_WITNESSED
        assert status is expected, str(h)


def test_tame_elements_have_no_interval(f2_action, trunc4, el):
    with pytest.raises(NotWild):
        wild_interval(el("a^2"), f2_action, trunc4)


def test_center_of_index_set():
    assert center([-3, -2, -1]) == -2
    assert center([0, 1]) == 0
    with pytest.raises(NotWild):
        center([])


def test_abelian_groups_are_all_tame(z2, z2_action, trunc4):
    assert all(certified_tame(z2_action, x.word) for x in ball(z2, 2))


def test_m_of_identity_is_zero(f2_action, trunc4, el):
    estimate = m_estimate(el("e"), f2_action, trunc4)
    assert estimate.value == 0
    assert not estimate.vacuous


def test_m_sees_inner_syllable(f2_action, trunc4, el):
    assert m_estimate(el("b A^2 B"), f2_action, trunc4).value == 2


def test_m_stability_needs_short_h(f2_action, el):
    assert m_stable(el("b A^2 B"), f2_action, TruncationParams(radius=4)) == (2, False)
    assert m_stable(el("b A^2 B"), f2_action, TruncationParams(radius=5)) == (2, True)


def test_m_is_not_subadditive_across_merged_syllables(f2_action, el):
    trunc = TruncationParams(radius=5)
    assert m_stable(el("b a"), f2_action, trunc) == (0, True)
    assert m_stable(el("a b"), f2_action, trunc) == (0, True)
    assert m_stable(el("b a^2 b"), f2_action, trunc) == (2, True)


def test_free_group_constants(f2_action, trunc4):
    constants = estimate_constants(f2_action, trunc4, radii=[3, 4])
    assert (constants.M_hat, constants.L_hat, constants.N_hat) == (0, 0, 0)
    assert constants.stable
    assert constants.m_hat == {"a": 0, "A": 0, "b": 0, "B": 0}


def test_window_exhausted_reports_witness(f2_action, el):
    trunc = TruncationParams(radius=4, window=2)
    with pytest.raises(WindowExhausted) as info:
        m_estimate(el("b A^3 B"), f2_action, trunc)
    assert info.value.witness == "b a^3"


def test_free_group_tame_subgroup(f2_action, trunc4):
    tame = tame_subgroup(f2_action, trunc4)
    assert [str(t) for t in tame.finite_part] == ["e"]
    assert [str(t) for t in tame.coset_reps] == ["e"]
    assert len(tame.tame) == 9
    assert not tame.covers_ball


def test_abelian_finite_part_grows_with_radius(z2_action):
    sizes = [len(tame_subgroup(z2_action, TruncationParams(radius=r)).finite_part) for r in (3, 4, 5)]
    assert sizes == [7, 9, 11]


def test_coset_decomposition(f2, f2_action, z2, z2_action):
    assert coset_decomposition(f2_action, f2.parse("a^3")) == (3, ())
    assert coset_decomposition(z2_action, z2.parse("a^-2 b")) == (-2, (0, 1))


def test_pull_back_keeps_verdicts(f2_pullback, el):
    trunc = TruncationParams(radius=4)
    assert m_estimate(el("e"), f2_pullback, trunc).value == 0
    assert classify(el("b"), f2_pullback, trunc) is WildStatus.WILD_WITNESSED
    assert classify(el("a^2"), f2_pullback, trunc) is WildStatus.TAME_CERTIFIED


def test_coverage_uses_any_translate_inside_window(f2_action, f2):
    # every uncovered point has index 3; only g²D_[-1,1] fits the window
    trunc = TruncationParams(radius=6, window=2, tau_slope=0.25)
    assert analyzer_for(f2_action).coverage(f2.parse("a^3 b a"), trunc) == 1


def test_exhausted_probe_is_recorded_not_raised(f2_action, el):
    trunc = TruncationParams(radius=4, window=2)
    constants = estimate_constants(f2_action, trunc, [el("b A^3 B")], radii=[3, 4])
    assert constants.exhausted == {"b A^3 B": "b a^3"}
    assert constants.m_hat["b A^3 B"] == trunc.scan_window + 1
    assert constants.M_hat == 0
    assert not constants.stable


def test_witness_coverage_bounds_m_from_below(f2, f2_action, trunc4):
    analyzer = analyzer_for(f2_action)
    h = f2.parse("b a^2 B")
    assert analyzer.witness_coverage(h, f2.parse("b A^2"), trunc4) == 2
    assert analyzer.witness_coverage(h, f2.parse("b"), trunc4) is None
    assert analyzer.witness_coverage(h, f2.parse("a"), trunc4) is None
    assert m_estimate(h, f2_action, trunc4).value >= 2


def test_abelian_estimates_are_vacuous(z2_action, trunc4):
    constants = estimate_constants(z2_action, trunc4, radii=[3, 4])
    assert constants.M_hat == 0
    assert "e" in constants.vacuous
    assert set(constants.vacuous) == {"e", "a", "A", "b", "B"}
