import pytest

from app.core.errors import CapacityExceeded, GroupMismatch, UnknownGenerator
from app.services.groups import (
    CyclicTimesFinite,
    DirectProduct,
    FreeAbelian,
    FreeGroup,
    ball,
    ball_words,
    build_group,
    commutes,
    identity,
    invert,
    multiply,
    normal_form,
    power,
)


def test_free_reduction_cancels_to_identity(f2):
    assert normal_form("a b B A", f2).is_identity()
    assert normal_form(["a", "b", "B"], f2).word == f2.parse("a")


def test_format_groups_syllables(f2):
    x = normal_form("a a a b A", f2)
    assert str(x) == "a^3 b A"
    assert x.length == 5
    assert str(normal_form("B^2 a^-2", f2)) == "B^2 A^2"
    assert str(identity(f2)) == "e"


def test_free_ball_sizes(f2):
    assert [len(ball_words(f2, r)) for r in range(6)] == [1, 5, 17, 53, 161, 485]


def test_ball_is_shortlex_ordered(f2):
    words = [str(x) for x in ball(f2, 1)]
    assert words == ["e", "a", "A", "b", "B"]


def test_abelian_ball_and_normal_form(z2):
    assert len(ball_words(z2, 2)) == 13
    assert normal_form("a b A", z2).word == (0, 1)
    assert str(normal_form("b a^2", z2)) == "a^2 b"


def test_cyclic_times_finite_wraps():
    group = CyclicTimesFinite(3)
    x = normal_form("s s s t", group)
    assert x.word == (1, 0)
    assert normal_form("S", group).word == (0, 2)
    assert str(normal_form("s s", group)) == "S"


def test_order_two_factor_has_one_generator():
    group = CyclicTimesFinite(2)
    assert group.generators() == [(1, 0), (-1, 0), (0, 1)]


def test_direct_product_multiplies_componentwise():
    group = DirectProduct((FreeGroup(("a", "b")), FreeAbelian(("c",))))
    x = normal_form("a c b C", group)
    assert x.word == ((1, 2), (0,))
    assert commutes(normal_form("c", group), x)


def test_direct_product_rejects_overlapping_labels():
    with pytest.raises(UnknownGenerator):
        DirectProduct((FreeGroup(("a",)), FreeAbelian(("a",))))


def test_unknown_generator(f2):
    with pytest.raises(UnknownGenerator):
        normal_form("a c", f2)
    with pytest.raises(UnknownGenerator):
        normal_form("a^x", f2)


def test_group_mismatch(f2, z2):
    with pytest.raises(GroupMismatch):
        multiply(identity(f2), identity(z2))


def test_inverse_and_power(f2):
    x = normal_form("a b", f2)
    assert multiply(x, invert(x)).is_identity()
    assert str(power(x, -2)) == "B A B A"


def test_capacity_guard(f2):
    with pytest.raises(CapacityExceeded):
        ball_words(f2, 4, capacity=100)


def test_build_group_families():
    assert build_group("free", rank=3).labels == ("a", "b", "c")
    assert build_group("abelian", rank=1).is_abelian
    assert build_group("cyclic_times_finite", order=4).order == 4
    with pytest.raises(UnknownGenerator):
        build_group("heisenberg")


def test_default_alphabet_skips_identity_token():
    group = build_group("free", rank=5)
    assert group.labels == ("a", "b", "c", "d", "f")
    x = normal_form("d f D", group)
    assert x.length == 3
    assert normal_form(str(x), group) == x
    assert len(build_group("abelian", rank=25).labels) == 25
    with pytest.raises(UnknownGenerator):
        build_group("free", rank=26)


@pytest.mark.parametrize("labels", [["a", "e"], ["x", "1"], ["a", "B"], ["a", "a"]])
def test_reserved_or_ambiguous_labels_rejected(labels):
    with pytest.raises(UnknownGenerator):
        build_group("free", labels=labels)


def test_commutes_requires_one_group(f2, z2):
    assert commutes(normal_form("a^2", f2), normal_form("A", f2))
    assert not commutes(normal_form("a", f2), normal_form("b", f2))
    with pytest.raises(GroupMismatch):
        commutes(identity(f2), identity(z2))
