"""Tame/wild classification, wilderness intervals and the m(h) estimates.

Unboundedness is only ever *witnessed*: a translate hD_i counts as unbounded
at radius R when the probe points of ball(R) lying in hD_i have block indices
spreading over at least τ(R) consecutive values.  Tameness is only ever
*certified* by the exact commensurator backend.  Everything else is Unknown.
"""

from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Iterable, Literal

from app.core.errors import NotWild, WindowExhausted
from app.services.actions import ActionModel
from app.services.groups import GroupElement, Word, ball_words, words_commute

logger = logging.getLogger(__name__)


class WildStatus(str, Enum):
    TAME_CERTIFIED = "TameCertified"
    WILD_WITNESSED = "WildWitnessed"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class TruncationParams:
    radius: int
    tau_slope: float = 0.5
    window: int | None = None
    witness_sample: Literal["axis", "ball"] = "axis"

    def __post_init__(self) -> None:
        if self.radius < 2:
            raise ValueError("truncation radius must be at least 2")
        if self.tau > self.scan_window:
            raise ValueError(f"tau({self.radius}) = {self.tau} exceeds window {self.scan_window}")

    @property
    def tau(self) -> int:
        return max(1, math.ceil(self.tau_slope * self.radius))

    @property
    def scan_window(self) -> int:
        return self.window if self.window is not None else 2 * self.radius

    def at(self, radius: int) -> TruncationParams:
        return replace(self, radius=radius)


@dataclass(frozen=True)
class Witness:
    index: int
    point: Word
    spread: int


@dataclass(frozen=True)
class WildProfile:
    element: GroupElement
    status: WildStatus
    interval: tuple[int, ...] = ()
    center: int | None = None
    witnesses: tuple[Witness, ...] = ()


@dataclass(frozen=True)
class TameSubgroup:
    tame: tuple[GroupElement, ...]
    finite_part: tuple[GroupElement, ...]
    coset_reps: tuple[GroupElement, ...]
    covers_ball: bool


@dataclass(frozen=True)
class MEstimate:
    value: int
    radius: int
    vacuous: bool
    qualifying: int
    worst: Word | None = None


@dataclass
class ConstantEstimates:
    M_hat: int
    m_hat: dict[str, int]
    L_hat: int
    N_hat: int
    stability: dict[int, int] = field(default_factory=dict)
    stable: bool = False
    # h -> the w whose coverage ran past the scan window
    exhausted: dict[str, str] = field(default_factory=dict)
    vacuous: list[str] = field(default_factory=list)


def certified_tame(action: ActionModel, h: Word) -> bool:
    """Exact commensurator test.

    In free groups, free abelian groups, ℤ × finite and their direct products
    the commensurator of ⟨g⟩ is the centraliser of g.
    """
    return words_commute(action.group, h, action.g)


class WildnessAnalyzer:
    """Per-action caches for interval scans and coverage numbers."""

    def __init__(self, action: ActionModel):
        self.action = action
        self.group = action.group
        self._intervals: dict[tuple[Word, TruncationParams], tuple[tuple[int, ...], tuple[Witness, ...]]] = {}
        self._coverage: dict[tuple[Word, TruncationParams], int | None] = {}
        self._probes: dict[TruncationParams, list[tuple[int, Word]]] = {}
        self._ball_index: dict[int, list[tuple[Word, int]]] = {}

    def probes(self, trunc: TruncationParams) -> list[tuple[int, Word]]:
        probes = self._probes.get(trunc)
        if probes is None:
            action = self.action
            if trunc.witness_sample == "axis":
                points = [x for _, x in action.axis(trunc.radius)]
            else:
                points = list(ball_words(self.group, trunc.radius))
            probes = [(action.index(x), x) for x in points]
            self._probes[trunc] = probes
        return probes

    def ball_index(self, radius: int) -> list[tuple[Word, int]]:
        indexed = self._ball_index.get(radius)
        if indexed is None:
            indexed = [(x, self.action.index(x)) for x in ball_words(self.group, radius)]
            self._ball_index[radius] = indexed
        return indexed

    def interval(self, y: Word, trunc: TruncationParams) -> tuple[tuple[int, ...], tuple[Witness, ...]]:
        """Witnessed I_R(y) together with one witness per index."""
        key = (y, trunc)
        cached = self._intervals.get(key)
        if cached is not None:
            return cached
        group, action = self.group, self.action
        y_inv = group.inv(y)
        window = trunc.scan_window
        lows: dict[int, tuple[int, Word]] = {}
        highs: dict[int, tuple[int, Word]] = {}
        for i_x, x in self.probes(trunc):
            j = action.index(group.mul(y_inv, x))
            if abs(j) > window:
                continue
            if j not in lows or i_x < lows[j][0]:
                lows[j] = (i_x, x)
            if j not in highs or i_x > highs[j][0]:
                highs[j] = (i_x, x)
        indices: list[int] = []
        witnesses: list[Witness] = []
        for j in sorted(lows):
            spread = highs[j][0] - lows[j][0]
            if spread >= trunc.tau:
                indices.append(j)
                witnesses.append(Witness(j, highs[j][1], spread))
        result = (tuple(indices), tuple(witnesses))
        self._intervals[key] = result
        return result

    def coverage(self, w: Word, trunc: TruncationParams) -> int | None:
        """Least m with ball(R) ⊆ wD_[-m,m] ∪ gⁿD_[-m,m] for some |n| <= window."""
        key = (w, trunc)
        if key in self._coverage:
            return self._coverage[key]
        group, action = self.group, self.action
        w_inv = group.inv(w)
        pairs = sorted(
            (abs(action.index(group.mul(w_inv, x))), i_x)
            for x, i_x in self.ball_index(trunc.radius)
        )
        depths = [a for a, _ in pairs]
        n_pairs = len(pairs)
        suffix_lo = [0] * (n_pairs + 1)
        suffix_hi = [0] * (n_pairs + 1)
        suffix_lo[n_pairs], suffix_hi[n_pairs] = math.inf, -math.inf
        for k in range(n_pairs - 1, -1, -1):
            suffix_lo[k] = min(suffix_lo[k + 1], pairs[k][1])
            suffix_hi[k] = max(suffix_hi[k + 1], pairs[k][1])
        window = trunc.scan_window
        result: int | None = None
        for m in range(window + 1):
            k = bisect.bisect_right(depths, m)
            if k == n_pairs:
                result = m
                break
            lo, hi = suffix_lo[k], suffix_hi[k]
            # some n in [hi - m, lo + m] must also lie in [-window, window]
            if max(hi - m, -window) <= min(lo + m, window):
                result = m
                break
        self._coverage[key] = result
        return result

    def m_estimate(self, h: Word, trunc: TruncationParams) -> MEstimate:
        # Tame w are skipped: wB ∪ gⁿB is bounded for them, so no m could cover X.
        group = self.group
        best, worst, qualifying = 0, None, 0
        for w in ball_words(group, trunc.radius):
            if certified_tame(self.action, w):
                continue
            indices, _ = self.interval(group.mul(h, w), trunc)
            if 0 not in indices:
                continue
            qualifying += 1
            m_w = self.coverage(w, trunc)
            if m_w is None:
                raise WindowExhausted(
                    f"no m <= {trunc.scan_window} covers ball({trunc.radius}) for "
                    f"h={group.format(h)}, w={group.format(w)}",
                    witness=group.format(w),
                )
            if worst is None or m_w > best:
                best, worst = m_w, w
        return MEstimate(best, trunc.radius, qualifying == 0, qualifying, worst)

    def witness_coverage(self, h: Word, w: Word, trunc: TruncationParams) -> int | None:
        """coverage(w) when w is one of the w that m_estimate(h) maximises over.

        The result never exceeds m(h), whatever the length of h.
        """
        if certified_tame(self.action, w):
            return None
        indices, _ = self.interval(self.group.mul(h, w), trunc)
        if 0 not in indices:
            return None
        return self.coverage(w, trunc)


@lru_cache(maxsize=32)
def analyzer_for(action: ActionModel) -> WildnessAnalyzer:
    return WildnessAnalyzer(action)


def _word(h: GroupElement | Word) -> Word:
    return h.word if isinstance(h, GroupElement) else h


def profile(h: GroupElement, action: ActionModel, trunc: TruncationParams) -> WildProfile:
    if certified_tame(action, h.word):
        return WildProfile(h, WildStatus.TAME_CERTIFIED)
    indices, witnesses = analyzer_for(action).interval(h.word, trunc)
    if not indices:
        return WildProfile(h, WildStatus.UNKNOWN)
    return WildProfile(
        h,
        WildStatus.WILD_WITNESSED,
        indices,
        (min(indices) + max(indices)) // 2,
        witnesses,
    )


def classify(h: GroupElement, action: ActionModel, trunc: TruncationParams) -> WildStatus:
    return profile(h, action, trunc).status


def tame_subgroup(action: ActionModel, trunc: TruncationParams) -> TameSubgroup:
    group = action.group
    words = ball_words(group, trunc.radius)
    tame = [x for x in words if certified_tame(action, x)]
    domain = [x for x in words if action.index(x) == 0]
    finite_part = [
        t for t in tame if any(action.index(group.mul(t, d)) == 0 for d in domain)
    ]
    reps: list[Word] = []
    for t in tame:
        rep = coset_rep(action, t)
        if rep not in reps:
            reps.append(rep)
    reps.sort(key=group.sort_key)
    logger.info(
        "tame_subgroup R=%d: |T_hat|=%d |F_hat|=%d reps=%d",
        trunc.radius, len(tame), len(finite_part), len(reps),
    )
    return TameSubgroup(
        tuple(GroupElement(group, t) for t in tame),
        tuple(GroupElement(group, t) for t in finite_part),
        tuple(GroupElement(group, r) for r in reps),
        len(tame) == len(words),
    )


def coset_rep(action: ActionModel, t: Word) -> Word:
    """Shortlex-least element of the right coset ⟨g⟩t."""
    return coset_decomposition(action, t)[1]


def coset_decomposition(action: ActionModel, t: Word) -> tuple[int, Word]:
    """(k, f) with t = gᵏ·f and f the shortlex-least element of ⟨g⟩t."""
    group = action.group
    g_inv = group.inv(action.g)
    best, best_k, best_key = t, 0, group.sort_key(t)
    up = down = t
    for n in range(1, 2 * group.length(t) + 2):
        up = group.mul(g_inv, up)
        down = group.mul(action.g, down)
        for candidate, k in ((up, n), (down, -n)):
            key = group.sort_key(candidate)
            if key < best_key:
                best, best_k, best_key = candidate, k, key
    return best_k, best


def wild_interval(w: GroupElement, action: ActionModel, trunc: TruncationParams) -> tuple[int, ...]:
    prof = profile(w, action, trunc)
    if prof.status is not WildStatus.WILD_WITNESSED:
        raise NotWild(f"{w} is {prof.status.value} at R={trunc.radius}")
    return prof.interval


def center(w: GroupElement | Iterable[int], action: ActionModel | None = None,
           trunc: TruncationParams | None = None) -> int:
    """⌊(min I + max I)/2⌋, from an element or directly from an index set."""
    if isinstance(w, GroupElement):
        indices = wild_interval(w, action, trunc)
    else:
        indices = tuple(w)
        if not indices:
            raise NotWild("empty wilderness interval")
    return (min(indices) + max(indices)) // 2


def center_word(w: Word, action: ActionModel, trunc: TruncationParams) -> int | None:
    indices, _ = analyzer_for(action).interval(w, trunc)
    if not indices or certified_tame(action, w):
        return None
    return (min(indices) + max(indices)) // 2


def m_estimate(h: GroupElement | Word, action: ActionModel, trunc: TruncationParams) -> MEstimate:
    return analyzer_for(action).m_estimate(_word(h), trunc)


def m_stable(h: GroupElement | Word, action: ActionModel, trunc: TruncationParams) -> tuple[int, bool]:
    """Estimate at R and whether it agrees with R-1 while the w-range reaches past h.

    WindowExhausted at R propagates; at R-1 it only makes the value unstable.
    """
    word = _word(h)
    current = m_estimate(word, action, trunc).value
    if trunc.radius <= 2:
        return current, False
    try:
        previous = m_estimate(word, action, trunc.at(trunc.radius - 1)).value
    except WindowExhausted:
        return current, False
    return current, previous == current and action.group.length(word) < trunc.radius


def estimate_constants(
    action: ActionModel,
    trunc: TruncationParams,
    probes: Iterable[GroupElement] = (),
    radii: Iterable[int] | None = None,
) -> ConstantEstimates:
    """M, m(s) for s in S, L = max m(s) + 2M and N = 20M + L at radius R.

    An element whose estimate exhausts the scan window is recorded in
    ``exhausted`` and counted as window + 1; the result is then unstable.
    """
    group = action.group
    radii = sorted(radii) if radii is not None else [max(2, trunc.radius - 1), trunc.radius]
    exhausted: dict[str, str] = {}
    vacuous: list[str] = []

    def estimate(h: Word, at: TruncationParams) -> int:
        try:
            result = m_estimate(h, action, at)
        except WindowExhausted as exc:
            exhausted.setdefault(group.format(h), exc.witness)
            logger.warning("m(%s) exhausted the window at R=%d: %s", group.format(h), at.radius, exc)
            return at.scan_window + 1
        if result.vacuous and at == trunc and group.format(h) not in vacuous:
            vacuous.append(group.format(h))
        return result.value

    stability = {r: estimate(group.identity_word, trunc.at(r)) for r in radii}
    M_hat = stability[trunc.radius] if trunc.radius in stability else estimate(
        group.identity_word, trunc)
    m_hat: dict[str, int] = {}
    for s in group.generators():
        m_hat[group.format(s)] = estimate(s, trunc)
    L_hat = max(m_hat.values(), default=0) + 2 * M_hat
    for h in probes:
        m_hat[str(h)] = estimate(h.word, trunc)
    values = [stability[r] for r in radii[-2:]]
    return ConstantEstimates(
        M_hat=M_hat,
        m_hat=m_hat,
        L_hat=L_hat,
        N_hat=20 * M_hat + L_hat,
        stability=stability,
        stable=len(values) == 2 and values[0] == values[1] and not exhausted,
        exhausted=exhausted,
        vacuous=vacuous,
    )
