"""G-actions on sets with a ⟨g⟩ block structure.

A block-index function idx: X -> ℤ encodes the fundamental domain D = idx⁻¹(0)
and its translates D_i = gⁱD.  The carrier is either the left-regular action
of G on itself or an action pulled back along an equivariant map; in both
cases points are raw group words.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal

from app.core.errors import ConfigError, EquivarianceViolation, GroupMismatch
from app.services.groups import (
    CyclicTimesFinite,
    DirectProduct,
    FreeAbelian,
    FreeGroup,
    GroupElement,
    GroupModel,
    Word,
    ball_words,
)

logger = logging.getLogger(__name__)

IndexRule = Literal["leading", "coordinate", "coset"]
MapKind = Literal["identity", "right_multiply", "left_multiply", "orbit"]


def has_infinite_order(group: GroupModel, u: Word) -> bool:
    if isinstance(group, FreeGroup):
        return u != ()
    if isinstance(group, FreeAbelian):
        return any(u)
    if isinstance(group, CyclicTimesFinite):
        return u[0] != 0
    if isinstance(group, DirectProduct):
        return any(has_infinite_order(f, x) for f, x in zip(group.factors, u))
    return False


@dataclass(frozen=True)
class EquivariantMap:
    """A point map f between two left-regular carriers of the same group."""

    kind: MapKind
    group: GroupModel
    parameter: Word | None = None

    def __call__(self, x: Word) -> Word:
        group = self.group
        if self.kind == "identity":
            return x
        if self.kind in ("right_multiply", "orbit"):
            return group.mul(x, self.parameter)
        if self.kind == "left_multiply":
            return group.mul(self.parameter, x)
        raise ConfigError(f"Unknown map kind {self.kind!r}")

    def describe(self) -> str:
        if self.parameter is None:
            return self.kind
        return f"{self.kind}({self.group.format(self.parameter)})"


@dataclass(frozen=True)
class ActionModel:
    group: GroupModel
    g: Word
    base: ActionModel | None = None
    point_map: EquivariantMap | None = None
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self) -> None:
        if not has_infinite_order(self.group, self.g):
            raise ConfigError(
                f"g = {self.group.format(self.g)} must have infinite order for a free ⟨g⟩-action"
            )

    @property
    def kind(self) -> str:
        return "left_regular" if self.base is None else "pull_back"

    @property
    def rule(self) -> IndexRule:
        return _index_rule(self.group, self.g)

    @property
    def base_point(self) -> Word:
        return self.group.identity_word

    def act_word(self, h: Word, x: Word) -> Word:
        return self.group.mul(h, x)

    def index(self, x: Word) -> int:
        if self.base is not None:
            return self.base.index(self.point_map(x))
        rule = self.rule
        if rule == "leading":
            return _leading_index(self.g, x)
        if rule == "coordinate":
            return _coordinate_index(self.group, self.g, x)
        cached = self._cache.get(x)
        if cached is None:
            cached = _coset_index(self.group, self.g, x)
            self._cache[x] = cached
        return cached

    def axis(self, radius: int) -> list[tuple[int, Word]]:
        """Probe points gⁿ·x₀ for |n| <= radius."""
        group = self.group
        points = [(0, self.base_point)]
        forward = backward = self.base_point
        g_inv = group.inv(self.g)
        for n in range(1, radius + 1):
            forward = group.mul(self.g, forward)
            backward = group.mul(g_inv, backward)
            points.append((n, forward))
            points.append((-n, backward))
        points.sort()
        return points

    def describe(self) -> str:
        text = f"{self.kind} g={self.group.format(self.g)}"
        if self.point_map is not None:
            text += f" via {self.point_map.describe()}"
        return text


@dataclass(frozen=True)
class Interval:
    """The translated interval w·D_[lo, hi]."""

    w: GroupElement
    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"Empty interval [{self.lo}, {self.hi}]")


def _index_rule(group: GroupModel, g: Word) -> IndexRule:
    if isinstance(group, FreeGroup) and len(g) == 1:
        return "leading"
    if isinstance(group, (FreeAbelian, CyclicTimesFinite)):
        if len(group.letters(g)) == 1:
            return "coordinate"
    return "coset"


def _leading_index(g: Word, x: Word) -> int:
    letter = g[0]
    n = 0
    if x and abs(x[0]) == abs(letter):
        head = x[0]
        for y in x:
            if y != head:
                break
            n += 1
        if head != letter:
            n = -n
    return n


def _coordinate_index(group: GroupModel, g: Word, x: Word) -> int:
    index, sign = group.letters(g)[0]
    return sign * x[index]


def _coset_index(group: GroupModel, g: Word, x: Word) -> int:
    """The n with g⁻ⁿx the shortlex-least element of the coset ⟨g⟩x.

    |g⁻ⁿx| >= |n| - |x| for infinite-order g in the supported families, so
    the representative (of length <= |x|) lies in |n| <= 2|x|.
    """
    window = 2 * group.length(x) + 1
    g_inv = group.inv(g)
    best_n, best_key = 0, group.sort_key(x)
    up = down = x
    for n in range(1, window + 1):
        up = group.mul(g_inv, up)
        down = group.mul(g, down)
        for candidate, shift in ((up, n), (down, -n)):
            key = group.sort_key(candidate)
            if key < best_key:
                best_n, best_key = shift, key
    return best_n


def left_regular(group: GroupModel, g: GroupElement) -> ActionModel:
    if g.group != group:
        raise GroupMismatch("g must belong to the acting group")
    return ActionModel(group, g.word)


def act(h: GroupElement, x: Word, action: ActionModel) -> Word:
    if h.group != action.group:
        raise GroupMismatch("acting element is not in the action's group")
    return action.act_word(h.word, x)


def block_index(x: Word | GroupElement, action: ActionModel) -> int:
    if isinstance(x, GroupElement):
        x = x.word
    return action.index(x)


def in_interval(x: Word | GroupElement, interval: Interval, action: ActionModel) -> bool:
    if isinstance(x, GroupElement):
        x = x.word
    group = action.group
    i = action.index(group.mul(group.inv(interval.w.word), x))
    return interval.lo <= i <= interval.hi


def domain_points(action: ActionModel, radius: int) -> list[Word]:
    """D ∩ ball(radius)."""
    return [x for x in ball_words(action.group, radius) if action.index(x) == 0]


def make_map(kind: MapKind, group: GroupModel, parameter: Word | None = None) -> EquivariantMap:
    if kind != "identity" and parameter is None:
        raise ConfigError(f"Map {kind!r} needs a parameter word")
    return EquivariantMap(kind, group, parameter)


def check_equivariance(f: EquivariantMap, radius: int = 2) -> tuple[Word, Word] | None:
    """First (h, x) in ball(radius)² with f(hx) != h f(x), if any."""
    group = f.group
    sample = ball_words(group, radius)
    for h in sample:
        for x in sample:
            if f(group.mul(h, x)) != group.mul(h, f(x)):
                return h, x
    return None


def pull_back(target: ActionModel, f: EquivariantMap) -> ActionModel:
    """The action on the source of f with fundamental domain f⁻¹(D)."""
    if f.group != target.group:
        raise GroupMismatch("map and action live over different groups")
    violation = check_equivariance(f)
    if violation is not None:
        h, x = violation
        raise EquivarianceViolation(
            f"{f.describe()} is not equivariant: h={f.group.format(h)}, x={f.group.format(x)}"
        )
    logger.info("Pulled back %s along %s", target.describe(), f.describe())
    return ActionModel(target.group, target.g, base=target, point_map=f)
