import pytest

from app.core.errors import ConfigError, EquivarianceViolation, GroupMismatch
from app.services.actions import (
    ActionModel,
    Interval,
    act,
    block_index,
    check_equivariance,
    domain_points,
    in_interval,
    left_regular,
    make_map,
    pull_back,
)
from app.services.groups import CyclicTimesFinite, FreeGroup, normal_form


def test_leading_syllable_index(f2, f2_action, el):
    assert f2_action.rule == "leading"
    assert block_index(el("b"), f2_action) == 0
    assert block_index(el("a^3 b"), f2_action) == 3
    assert block_index(el("A^2 b a"), f2_action) == -2
    assert block_index(el("e"), f2_action) == 0


def test_index_shifts_along_g(f2, f2_action, el):
    x = el("A b a")
    for n in range(-3, 4):
        y = act(normal_form(f"a^{n}", f2), x.word, f2_action)
        assert f2_action.index(y) == f2_action.index(x.word) + n


def test_coordinate_index(z2, z2_action):
    assert z2_action.rule == "coordinate"
    assert z2_action.index(z2.parse("a^-3 b^2")) == -3


def test_coset_index_for_non_letter_g(f2):
    action = ActionModel(f2, f2.parse("a a"))
    assert action.rule == "coset"
    assert action.index(f2.parse("a^5")) == 2
    assert action.index(f2.parse("b")) == 0
    assert action.index(f2.parse("a^4 b")) == 2


def test_finite_order_g_rejected():
    group = CyclicTimesFinite(3)
    with pytest.raises(ConfigError):
        ActionModel(group, group.parse("s"))


def test_left_regular_checks_group(f2, z2):
    with pytest.raises(GroupMismatch):
        left_regular(f2, normal_form("a", z2))


def test_interval_membership(f2_action, el):
    interval = Interval(el("b"), -1, 1)
    assert in_interval(el("b a b"), interval, f2_action)
    assert not in_interval(el("b a^2 b"), interval, f2_action)
    with pytest.raises(ValueError):
        Interval(el("b"), 2, 1)


def test_domain_points(f2_action):
    points = domain_points(f2_action, 2)
    assert len(points) == 9
    assert all(f2_action.index(x) == 0 for x in points)


def test_pull_back_along_right_multiplication(f2, f2_pullback):
    assert f2_pullback.kind == "pull_back"
    assert f2_pullback.index(f2.parse("e")) == 0
    assert f2_pullback.index(f2.parse("a^2")) == 2
    assert f2_pullback.index(f2.parse("B")) == 0
    assert "right_multiply(b)" in f2_pullback.describe()


def test_pull_back_rejects_non_equivariant_map(f2, f2_action):
    f = make_map("left_multiply", f2, f2.parse("b"))
    assert check_equivariance(f) is not None
    with pytest.raises(EquivarianceViolation):
        pull_back(f2_action, f)


def test_map_needs_parameter(f2):
    with pytest.raises(ConfigError):
        make_map("orbit", f2)
    assert check_equivariance(make_map("identity", f2)) is None


def test_pull_back_group_mismatch(f2_action):
    other = FreeGroup(("x", "y"))
    with pytest.raises(GroupMismatch):
        pull_back(f2_action, make_map("identity", other))
