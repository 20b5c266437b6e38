"""Projections of wild elements to T, coset projections and the (P0)-(P2) checks.

π(w) is computed from the reduced formula ∪_{t∈F} t·I(w⁻¹t), with I-sets
identified with subsets of ⟨g⟩ via n ↦ gⁿ.  π(s·w·t) = s·π(w) for tame s, t,
which is what makes π_{h₁T}(h₂T) = h₁·π(h₁⁻¹h₂) independent of representatives.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable

from app.core.errors import InsufficientCosets, NotWild, SameCoset
from app.services.actions import ActionModel
from app.services.groups import GroupElement, Word, ball_words
from app.services.wildness import (
    ConstantEstimates,
    TruncationParams,
    analyzer_for,
    center_word,
    certified_tame,
    coset_decomposition,
    estimate_constants,
    tame_subgroup,
)

logger = logging.getLogger(__name__)

P2_SAMPLE_PAIRS = 24


@dataclass(frozen=True, order=True)
class CosetId:
    """The coset hT, keyed by its shortlex-least representative."""

    sort_key: tuple = field(repr=False)
    representative: GroupElement = field(compare=False)

    @property
    def word(self) -> Word:
        return self.representative.word

    def __str__(self) -> str:
        return f"{self.representative}T"


@dataclass
class AxiomReport:
    theta_hat: int
    theta_previous: int
    theta_stable: bool
    p1_constant: int
    p1_bound: int
    p1_violations: list[tuple[str, str, str]]
    p2_threshold: int
    p2_census: dict[str, int]
    p2_previous: dict[str, int]
    p2_stable: bool
    coset_count: int

    @property
    def passed(self) -> bool:
        return not self.p1_violations and self.theta_stable and self.p2_stable


@dataclass
class LargeProjectionCensus:
    h: str
    threshold: int
    cosets: list[str]
    size: int
    previous_size: int
    consistent: bool

    @property
    def delta(self) -> int:
        return self.size - self.previous_size


class ProjectionSystem:
    """Coset projections between a fixed family of cosets at one truncation.

    The projection table is filled lazily and then only read.
    """

    def __init__(self, action: ActionModel, trunc: TruncationParams, cosets: Iterable[CosetId]):
        self.action = action
        self.group = action.group
        self.trunc = trunc
        self.cosets = sorted(set(cosets))
        tame = tame_subgroup(action, trunc)
        self.finite_part = [t.word for t in tame.finite_part]
        self.tame_reps = [r.word for r in tame.coset_reps]
        self._pi: dict[Word, frozenset[Word]] = {}
        self._table: dict[tuple[CosetId, CosetId], frozenset[Word]] = {}
        self._t_length: dict[Word, int] = {}

    # -- cosets -----------------------------------------------------------

    def coset_of(self, h: GroupElement | Word) -> CosetId:
        word = h.word if isinstance(h, GroupElement) else h
        group = self.group
        best, best_key = word, group.sort_key(word)
        for rep in self.tame_reps:
            hr = group.mul(word, rep)
            span = 2 * group.length(hr) + 1
            up = down = hr
            candidates = [hr]
            for _ in range(span):
                up = group.mul(up, self.action.g)
                down = group.mul(down, group.inv(self.action.g))
                candidates += [up, down]
            for candidate in candidates:
                key = group.sort_key(candidate)
                if key < best_key:
                    best, best_key = candidate, key
        return CosetId(best_key, GroupElement(group, best))

    def same_coset(self, x: CosetId, y: CosetId) -> bool:
        group = self.group
        return x == y or certified_tame(self.action, group.mul(group.inv(x.word), y.word))

    # -- projections ------------------------------------------------------

    def pi(self, w: Word) -> frozenset[Word]:
        cached = self._pi.get(w)
        if cached is not None:
            return cached
        group, analyzer = self.group, analyzer_for(self.action)
        if certified_tame(self.action, w):
            raise NotWild(f"{group.format(w)} is tame")
        w_inv = group.inv(w)
        points: set[Word] = set()
        for t in self.finite_part:
            indices, _ = analyzer.interval(group.mul(w_inv, t), self.trunc)
            for n in indices:
                points.add(group.mul(t, group.power(self.action.g, n)))
        if not points:
            raise NotWild(f"{group.format(w)} has no witnessed wilderness at R={self.trunc.radius}")
        result = frozenset(points)
        self._pi[w] = result
        return result

    def relative_projection(self, y: CosetId, x: CosetId) -> frozenset[Word]:
        """π(h₁⁻¹h₂), the projection of X to Y translated back into T."""
        key = (y, x)
        cached = self._table.get(key)
        if cached is None:
            if self.same_coset(y, x):
                raise SameCoset(f"{x} and {y} are the same coset")
            group = self.group
            cached = self.pi(group.mul(group.inv(y.word), x.word))
            self._table[key] = cached
        return cached

    def projection(self, y: CosetId, x: CosetId) -> list[GroupElement]:
        group = self.group
        points = {group.mul(y.word, p) for p in self.relative_projection(y, x)}
        return sorted((GroupElement(group, p) for p in points), key=GroupElement.sort_key)

    # -- metric on T ------------------------------------------------------

    def t_length(self, t: Word) -> int:
        cached = self._t_length.get(t)
        if cached is None:
            k, f = coset_decomposition(self.action, t)
            cached = abs(k) + (f != self.group.identity_word)
            self._t_length[t] = cached
        return cached

    def t_distance(self, s: Word, t: Word) -> int:
        return self.t_length(self.group.mul(self.group.inv(s), t))

    def diameter(self, points: Iterable[Word]) -> int:
        points = list(points)
        return max((self.t_distance(p, q) for p, q in itertools.combinations(points, 2)), default=0)

    def distance(self, y: CosetId, x: CosetId, z: CosetId) -> int:
        """d_Y(π_Y(X), π_Y(Z)): diameter of the union inside Y."""
        return self.diameter(self.relative_projection(y, x) | self.relative_projection(y, z))

    def theta(self) -> int:
        return max(
            (self.diameter(self.relative_projection(y, x))
             for y, x in itertools.permutations(self.cosets, 2)),
            default=0,
        )

    def export_rows(self) -> list[tuple[str, str, str, int]]:
        rows = []
        for y, x in itertools.permutations(self.cosets, 2):
            points = self.projection(y, x)
            rows.append((
                str(y), str(x), ",".join(str(p) for p in points),
                self.diameter(self.relative_projection(y, x)),
            ))
        return rows


def coset_id(h: GroupElement, action: ActionModel, trunc: TruncationParams) -> CosetId:
    return ProjectionSystem(action, trunc, ()).coset_of(h)


def cosets_from_ball(action: ActionModel, trunc: TruncationParams, radius: int) -> list[CosetId]:
    """Distinct cosets wT for w in ball(radius), in shortlex order of representatives."""
    system = ProjectionSystem(action, trunc, ())
    return sorted({system.coset_of(w) for w in ball_words(action.group, radius)})


def build_projection_system(action: ActionModel, trunc: TruncationParams,
                            coset_radius: int) -> ProjectionSystem:
    return ProjectionSystem(action, trunc, cosets_from_ball(action, trunc, coset_radius))


def pi_hat(w: GroupElement, action: ActionModel, trunc: TruncationParams) -> list[GroupElement]:
    system = ProjectionSystem(action, trunc, ())
    return sorted((GroupElement(action.group, p) for p in system.pi(w.word)),
                  key=GroupElement.sort_key)


def coset_projection(y: CosetId, x: CosetId, action: ActionModel,
                     trunc: TruncationParams) -> list[GroupElement]:
    return ProjectionSystem(action, trunc, ()).projection(y, x)


def proj_distance(y: CosetId, x: CosetId, z: CosetId, action: ActionModel,
                  trunc: TruncationParams) -> int:
    return ProjectionSystem(action, trunc, ()).distance(y, x, z)


def behrstock_minimum(system: ProjectionSystem, y1: CosetId, y2: CosetId, y3: CosetId) -> int:
    return min(system.distance(y1, y2, y3), system.distance(y2, y1, y3))


def _p2_census(system: ProjectionSystem, threshold: int) -> dict[str, int]:
    census: dict[str, int] = {}
    pairs = itertools.islice(itertools.combinations(system.cosets, 2), P2_SAMPLE_PAIRS)
    for y1, y2 in pairs:
        large = sum(
            1 for y in system.cosets
            if y not in (y1, y2) and system.distance(y, y1, y2) > threshold
        )
        census[f"{y1}|{y2}"] = large
    return census


def check_axioms(
    cosets: Iterable[CosetId],
    action: ActionModel,
    trunc: TruncationParams,
    constants: ConstantEstimates | None = None,
    system: ProjectionSystem | None = None,
) -> AxiomReport:
    cosets = sorted(set(cosets))
    if len(cosets) < 3:
        raise InsufficientCosets(f"need at least 3 distinct cosets, got {len(cosets)}")
    if constants is None:
        constants = estimate_constants(action, trunc)
    if system is None or system.cosets != cosets:
        system = ProjectionSystem(action, trunc, cosets)
    previous = ProjectionSystem(action, trunc.at(max(2, trunc.radius - 1)), cosets)

    theta = system.theta()
    theta_previous = previous.theta()
    bound = 5 * constants.M_hat + theta
    worst, violations = 0, []
    for y1, y2, y3 in itertools.permutations(cosets, 3):
        if y2 < y1:
            continue
        value = behrstock_minimum(system, y1, y2, y3)
        worst = max(worst, value)
        if value > bound:
            violations.append((str(y1), str(y2), str(y3)))
    census = _p2_census(system, constants.N_hat)
    census_previous = _p2_census(previous, constants.N_hat)
    logger.info(
        "check_axioms R=%d cosets=%d theta=%d P1=%d/%d violations=%d",
        trunc.radius, len(cosets), theta, worst, bound, len(violations),
    )
    return AxiomReport(
        theta_hat=theta,
        theta_previous=theta_previous,
        theta_stable=theta == theta_previous,
        p1_constant=worst,
        p1_bound=bound,
        p1_violations=violations,
        p2_threshold=constants.N_hat,
        p2_census=census,
        p2_previous=census_previous,
        p2_stable=census == census_previous,
        coset_count=len(cosets),
    )


def right_coset_rep(action: ActionModel, w: Word) -> Word:
    """Canonical representative of w⟨g⟩."""
    group = action.group
    _, f = coset_decomposition(action, group.inv(w))
    return group.inv(f)


def _census_at(h: Word, action: ActionModel, trunc: TruncationParams,
               threshold: int) -> tuple[set[Word], bool]:
    group = action.group
    found: set[Word] = set()
    consistent = True
    for w in ball_words(group, trunc.radius):
        i_w = center_word(w, action, trunc)
        if i_w is None:
            continue
        hw = group.mul(h, w)
        i_hw = center_word(hw, action, trunc)
        if i_hw is None:
            continue
        f_h = i_hw - i_w
        wg = group.mul(w, action.g)
        i_wg, i_hwg = center_word(wg, action, trunc), center_word(group.mul(hw, action.g), action, trunc)
        if i_wg is not None and i_hwg is not None and i_hwg - i_wg != f_h:
            consistent = False
        if abs(f_h) > threshold:
            found.add(right_coset_rep(action, w))
    return found, consistent


def large_projection_census(
    h: GroupElement,
    action: ActionModel,
    trunc: TruncationParams,
    threshold: int | None = None,
) -> LargeProjectionCensus:
    """Cosets w⟨g⟩ with |i(hw) - i(w)| above the threshold (N_hat by default)."""
    if threshold is None:
        threshold = estimate_constants(action, trunc).N_hat
    found, consistent = _census_at(h.word, action, trunc, threshold)
    previous, _ = _census_at(h.word, action, trunc.at(max(2, trunc.radius - 1)), threshold)
    group = action.group
    reps = sorted(found, key=group.sort_key)
    logger.info("census h=%s R=%d size=%d previous=%d", h, trunc.radius, len(found), len(previous))
    return LargeProjectionCensus(
        h=str(h),
        threshold=threshold,
        cosets=[group.format(r) for r in reps],
        size=len(found),
        previous_size=len(previous),
        consistent=consistent,
    )
