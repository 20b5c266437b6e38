"""Scenario pipeline: build the action, audit the pair, run the lemma suites, write reports."""

from __future__ import annotations

import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from functools import cached_property
from pathlib import Path
from typing import Callable

import networkx as nx
from pydantic import ValidationError

from app.config import get_settings
from app.core.errors import (
    AxialError,
    CapacityExceeded,
    ConfigError,
    Disconnected,
    InsufficientCosets,
    PointMissing,
    UnknownGenerator,
    UnknownSuite,
    WindowExhausted,
)
from app.schemas.report import (
    AuditVerdict,
    AxiomVerdict,
    CensusRecord,
    ComplexDiagnostics,
    ConstantsRecord,
    ReportDocument,
    SuiteReport,
    TamenessReport,
    Verdict,
)
from app.schemas.scenario import GroupSpec, Scenario, SuiteId
from app.services.actions import ActionModel, make_map, pull_back
from app.services.complex import (
    TruncGraph,
    build_projection_complex,
    build_quasi_tree_of_spaces,
    default_K,
    hyperbolicity_delta,
    least_bottleneck,
    translation_growth,
)
from app.services.export import (
    write_distance_table,
    write_dot,
    write_projection_table,
    write_report,
)
from app.services.groups import GroupElement, GroupModel, Word, ball_words, build_group
from app.services.projections import (
    AxiomReport,
    ProjectionSystem,
    build_projection_system,
    check_axioms,
    large_projection_census,
)
from app.services.wildness import (
    ConstantEstimates,
    TruncationParams,
    WildStatus,
    analyzer_for,
    center_word,
    certified_tame,
    classify,
    estimate_constants,
    m_estimate,
    m_stable,
    tame_subgroup,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAIL = 2
EXIT_INCONCLUSIVE = 3

MAX_WITNESSES = 10


# -- scenario loading -------------------------------------------------------

def load_scenario(path: str | Path) -> Scenario:
    try:
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"Cannot read scenario {path}: {exc}") from exc
    try:
        return Scenario.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"Invalid scenario {path}: {exc}") from exc


def build_group_model(spec: GroupSpec) -> GroupModel:
    factors = [build_group_model(f) for f in spec.factors]
    return build_group(spec.family, spec.rank, spec.order, spec.labels, factors)


def build_action(scenario: Scenario) -> ActionModel:
    group = build_group_model(scenario.group)
    try:
        g = group.parse(scenario.g)
        parameter = group.parse(scenario.action.parameter) if scenario.action.parameter else None
    except UnknownGenerator as exc:
        raise ConfigError(str(exc)) from exc
    base = ActionModel(group, g)
    if scenario.action.kind == "left_regular":
        return base
    return pull_back(base, make_map(scenario.action.map, group, parameter))


def truncation_for(scenario: Scenario, radius: int | None = None) -> TruncationParams:
    spec = scenario.truncation
    try:
        return TruncationParams(
            radius=radius if radius is not None else spec.R,
            tau_slope=spec.tau_slope,
            window=spec.window,
            witness_sample=spec.witness_sample,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


class ScenarioRun:
    """One scenario at one radius, with the estimates shared between suites."""

    def __init__(self, scenario: Scenario, radius: int | None = None):
        self.scenario = scenario
        self.action = build_action(scenario)
        self.group = self.action.group
        self.trunc = truncation_for(scenario, radius)
        self.graphs: dict[int, tuple[TruncGraph, TruncGraph | None]] = {}
        self.censuses: list[CensusRecord] = []
        self.diagnostics: list[ComplexDiagnostics] = []
        self._m: dict[Word, tuple[int, bool]] = {}
        # h -> the w whose coverage ran past the scan window
        self.exhausted: dict[Word, str] = {}
        self._suites: dict[str, SuiteReport] = {}

    def fmt(self, word: Word) -> str:
        return self.group.format(word)

    def words(self, texts: list[str]) -> list[Word]:
        try:
            return [self.group.parse(text) for text in texts]
        except UnknownGenerator as exc:
            raise ConfigError(str(exc)) from exc

    @cached_property
    def radii(self) -> list[int]:
        r = self.trunc.radius
        return sorted({max(2, r - 2), max(2, r - 1), r})

    @cached_property
    def probes(self) -> list[Word]:
        probes = list(ball_words(self.group, self.scenario.samples.probe_radius))
        for word in self.words(self.scenario.samples.probes):
            if word not in probes:
                probes.append(word)
        return probes

    @cached_property
    def constants(self) -> ConstantEstimates:
        extras = [GroupElement(self.group, w) for w in self.words(self.scenario.samples.probes)]
        constants = estimate_constants(self.action, self.trunc, extras, self.radii)
        logger.info(
            "Constants at R=%d: M=%d L=%d N=%d stable=%s",
            self.trunc.radius, constants.M_hat, constants.L_hat, constants.N_hat, constants.stable,
        )
        return constants

    def m(self, h: Word) -> tuple[int, bool]:
        """m_stable(h); an exhausted window counts as window + 1 and unstable."""
        cached = self._m.get(h)
        if cached is None:
            try:
                cached = m_stable(h, self.action, self.trunc)
            except WindowExhausted as exc:
                logger.warning("m(%s) exhausted the window: %s", self.fmt(h), exc)
                self.exhausted[h] = exc.witness or "?"
                cached = (self.trunc.scan_window + 1, False)
            self._m[h] = cached
        return cached

    def m_lower(self, h: Word, w: Word) -> int | None:
        return analyzer_for(self.action).witness_coverage(h, w, self.trunc)

    def vacuous(self, h: Word) -> bool:
        return m_estimate(h, self.action, self.trunc).vacuous

    def center(self, w: Word) -> int | None:
        return center_word(w, self.action, self.trunc)

    @cached_property
    def projection_system(self) -> ProjectionSystem:
        return build_projection_system(self.action, self.trunc, self.scenario.complex.coset_radius)

    @cached_property
    def axioms(self) -> AxiomReport:
        system = self.projection_system
        return check_axioms(system.cosets, self.action, self.trunc, self.constants, system)

    @cached_property
    def audit(self) -> AuditVerdict:
        return audit_run(self)

    def suite(self, suite_id: str) -> SuiteReport:
        if suite_id not in self._suites:
            try:
                runner = SUITES[SuiteId(suite_id)]
            except ValueError as exc:
                raise UnknownSuite(f"Unknown suite {suite_id!r}") from exc
            logger.info("Running suite %s at R=%d", suite_id, self.trunc.radius)
            self._suites[suite_id] = runner(self)
        return self._suites[suite_id]


# -- audit ------------------------------------------------------------------

def _axiom1(run: ScenarioRun) -> AxiomVerdict:
    sizes: dict[int, int] = {}
    finite: list[str] = []
    for r in run.radii:
        tame = tame_subgroup(run.action, run.trunc.at(r))
        sizes[r] = len(tame.finite_part)
        finite = [str(t) for t in tame.finite_part]
    counts = {str(r): n for r, n in sizes.items()}
    values = [sizes[r] for r in run.radii]
    if len(values) == 3 and values[0] < values[1] < values[2]:
        return AxiomVerdict(
            verdict=Verdict.FAIL, witnesses=finite, counts=counts,
            note="|F_hat| grows strictly with the radius",
        )
    if len(values) == 3 and len(set(values)) == 1:
        return AxiomVerdict(verdict=Verdict.PASS, witnesses=finite, counts=counts)
    return AxiomVerdict(
        verdict=Verdict.INCONCLUSIVE, witnesses=finite, counts=counts,
        note="F_hat neither stable nor strictly growing over three radii",
    )


def _axiom2(run: ScenarioRun) -> AxiomVerdict:
    values: dict[str, int] = {}
    unstable: list[str] = []
    vacuous: list[str] = []
    exhausted: list[str] = []
    for h in run.probes:
        value, stable = run.m(h)
        if h in run.exhausted:
            exhausted.append(f"h={run.fmt(h)} w={run.exhausted[h]}")
            continue
        values[run.fmt(h)] = value
        if not stable:
            unstable.append(run.fmt(h))
        if run.vacuous(h):
            vacuous.append(run.fmt(h))
    for h, w in run.constants.exhausted.items():
        if f"h={h} w={w}" not in exhausted:
            exhausted.append(f"h={h} w={w}")
    if exhausted:
        return AxiomVerdict(
            verdict=Verdict.FAIL, witnesses=exhausted[:MAX_WITNESSES], counts=values, vacuous=vacuous,
            note=f"{len(exhausted)} estimates need m beyond the scan window {run.trunc.scan_window}",
        )
    if unstable:
        return AxiomVerdict(
            verdict=Verdict.INCONCLUSIVE, witnesses=unstable[:MAX_WITNESSES], counts=values,
            vacuous=vacuous, note=f"{len(unstable)} probe estimates did not stabilise",
        )
    note = f"M_hat={run.constants.M_hat}"
    if vacuous:
        note += f"; vacuous for {len(vacuous)} of {len(values)} probes (no witnessed-wild w)"
    return AxiomVerdict(verdict=Verdict.PASS, counts=values, vacuous=vacuous, note=note)


def _tameness(run: ScenarioRun) -> TamenessReport:
    action, trunc, group = run.action, run.trunc, run.group
    counts = {status: 0 for status in WildStatus}
    unknown_short = 0
    inverse_closed = True
    tame: list[Word] = []
    for w in ball_words(group, trunc.radius):
        status = classify(GroupElement(group, w), action, trunc)
        counts[status] += 1
        if status is WildStatus.UNKNOWN and group.length(w) <= 3:
            unknown_short += 1
        if status is WildStatus.TAME_CERTIFIED:
            tame.append(w)
            inverse_closed &= certified_tame(action, group.inv(w))
        elif status is WildStatus.WILD_WITNESSED:
            inverse_closed &= not certified_tame(action, group.inv(w))
    half = (trunc.radius + 1) // 2
    short_tame = [t for t in tame if group.length(t) <= half]
    product_closed = all(
        certified_tame(action, group.mul(s, t)) for s in short_tame for t in short_tame
    )
    finite = tame_subgroup(action, trunc).finite_part
    return TamenessReport(
        radius=trunc.radius,
        tame=counts[WildStatus.TAME_CERTIFIED],
        wild=counts[WildStatus.WILD_WITNESSED],
        unknown=counts[WildStatus.UNKNOWN],
        unknown_short=unknown_short,
        finite_part=[str(t) for t in finite],
        inverse_closed=inverse_closed,
        product_closed=product_closed,
    )


def constants_record(run: ScenarioRun, theta: int | None = None) -> ConstantsRecord:
    c = run.constants
    return ConstantsRecord(
        M_hat=c.M_hat, L_hat=c.L_hat, N_hat=c.N_hat, theta_hat=theta,
        m_hat=dict(c.m_hat),
        stability={str(r): v for r, v in c.stability.items()},
        stable=c.stable,
        exhausted=dict(c.exhausted),
        vacuous=list(c.vacuous),
    )


def audit_run(run: ScenarioRun) -> AuditVerdict:
    axiom1 = _axiom1(run)
    axiom2 = _axiom2(run)
    tameness = _tameness(run)
    covers = tame_subgroup(run.action, run.trunc).covers_ball
    virtually_cyclic = tameness.wild == 0 and covers and axiom1.verdict is not Verdict.FAIL
    logger.info(
        "Audit %s: axiom1=%s axiom2=%s virtually_cyclic=%s",
        run.scenario.name, axiom1.verdict.value, axiom2.verdict.value, virtually_cyclic,
    )
    return AuditVerdict(
        axiom1=axiom1,
        axiom2=axiom2,
        virtually_cyclic=virtually_cyclic,
        constants=constants_record(run),
        stabilization_radii=run.radii,
        tameness=tameness,
    )


def audit_axial_pair(scenario: Scenario, radius: int | None = None) -> AuditVerdict:
    return ScenarioRun(scenario, radius).audit


# -- lemma suites -----------------------------------------------------------

class _Tally:
    def __init__(self, suite: SuiteId):
        self.suite = suite
        self.checked = 0
        self.violations = 0
        self.skipped = 0
        self.worst_excess: int | None = None
        self.worst: str | None = None
        self.witnesses: list[str] = []

    def record(self, excess: int, description: str) -> None:
        """A check whose value exceeds its bound by `excess` (violation when > 0)."""
        self.checked += 1
        if excess <= 0:
            return
        self.violations += 1
        if self.worst_excess is None or excess > self.worst_excess:
            self.worst_excess, self.worst = excess, description
        if len(self.witnesses) < MAX_WITNESSES:
            self.witnesses.append(description)

    def report(self, constants: dict[str, int], details: dict | None = None,
               unstable: bool = False) -> SuiteReport:
        # a sample mostly skipped says nothing about the rest
        if self.violations:
            verdict = Verdict.FAIL
        elif unstable or self.checked == 0 or self.skipped > self.checked:
            verdict = Verdict.INCONCLUSIVE
        else:
            verdict = Verdict.PASS
        return SuiteReport(
            suite=self.suite.value,
            verdict=verdict,
            checked=self.checked,
            violations=self.violations,
            skipped=self.skipped,
            worst=self.worst,
            witnesses=self.witnesses,
            constants=constants,
            details=details or {},
        )


def _axiom_suite(run: ScenarioRun, suite: SuiteId, verdict: AxiomVerdict) -> SuiteReport:
    failed = verdict.verdict is Verdict.FAIL
    return SuiteReport(
        suite=suite.value,
        verdict=verdict.verdict,
        checked=max(1, len(verdict.counts)),
        violations=len(verdict.witnesses) if failed else 0,
        worst=verdict.witnesses[0] if failed else None,
        witnesses=verdict.witnesses[:MAX_WITNESSES] if failed else [],
        constants={"M_hat": run.constants.M_hat},
        details={"counts": verdict.counts, "note": verdict.note},
    )


def suite_axiom1(run: ScenarioRun) -> SuiteReport:
    return _axiom_suite(run, SuiteId.AXIOM1, run.audit.axiom1)


def suite_axiom2(run: ScenarioRun) -> SuiteReport:
    return _axiom_suite(run, SuiteId.AXIOM2, run.audit.axiom2)


def suite_subadditivity(run: ScenarioRun) -> SuiteReport:
    """m(h₁h₂) <= m(h₁) + m(h₂) over ordered pairs of a ball."""
    group, R = run.group, run.trunc.radius
    tally = _Tally(SuiteId.SUBADDITIVITY)
    sample = ball_words(group, run.scenario.samples.pair_radius)
    for h1 in sample:
        for h2 in sample:
            product = group.mul(h1, h2)
            if max(group.length(h1), group.length(h2), group.length(product)) >= R:
                tally.skipped += 1
                continue
            (m1, s1), (m2, s2), (m12, s12) = run.m(h1), run.m(h2), run.m(product)
            if not (s1 and s2 and s12):
                tally.skipped += 1
                continue
            tally.record(
                m12 - m1 - m2,
                f"h1={run.fmt(h1)} h2={run.fmt(h2)}: m(h1h2)={m12} vs {m1}+{m2}",
            )
    return tally.report({"M_hat": run.constants.M_hat}, unstable=not run.constants.stable)


def _spread_outside(run: ScenarioRun, w: Word, lo: int, hi: int) -> tuple[int, int] | None:
    """(min, max) of idx(x) over x in ball(R) with idx(w⁻¹x) outside [lo, hi]."""
    group, action = run.group, run.action
    w_inv = group.inv(w)
    low = high = None
    for x, i_x in analyzer_for(action).ball_index(run.trunc.radius):
        j = action.index(group.mul(w_inv, x))
        if lo <= j <= hi:
            continue
        low = i_x if low is None else min(low, i_x)
        high = i_x if high is None else max(high, i_x)
    return None if low is None else (low, high)


def suite_interval_diameter(run: ScenarioRun) -> SuiteReport:
    """diam I(w) <= 2M, and wD_[i-M, i+M] misses at most one window of width 2M."""
    group = run.group
    M = run.constants.M_hat
    analyzer = analyzer_for(run.action)
    tally = _Tally(SuiteId.INTERVAL_DIAMETER)
    cobounded_failures = 0
    for w in ball_words(group, run.scenario.samples.interval_radius):
        if certified_tame(run.action, w):
            continue
        indices, _ = analyzer.interval(w, run.trunc)
        if not indices:
            tally.skipped += 1
            continue
        diameter = max(indices) - min(indices)
        tally.record(diameter - 2 * M, f"w={run.fmt(w)}: diam I={diameter} vs 2M={2 * M}")
        for i in indices:
            spread = _spread_outside(run, w, i - M, i + M)
            if spread is not None and spread[1] - spread[0] > 2 * M:
                cobounded_failures += 1
                tally.record(
                    spread[1] - spread[0] - 2 * M,
                    f"w={run.fmt(w)} i={i}: complement spans {spread[0]}..{spread[1]}",
                )
    return tally.report(
        {"M_hat": M},
        details={"cobounded_failures": cobounded_failures},
        unstable=not run.constants.stable,
    )


def _wild_sample(run: ScenarioRun, radius: int) -> list[tuple[Word, int]]:
    sample = []
    for w in ball_words(run.group, radius):
        i_w = run.center(w)
        if i_w is not None:
            sample.append((w, i_w))
    return sample


def suite_coarse_lip(run: ScenarioRun) -> SuiteReport:
    """|i(u) - i(v)| <= m(uv⁻¹) + 2M over wild pairs.

    A pair is settled without m(uv⁻¹) when the gap is already within 2M, or
    when w = v·g^i(u), which qualifies for uv⁻¹, has coverage covering the
    gap.  Only the remaining pairs need a stable m(uv⁻¹), and so |uv⁻¹| < R.
    """
    group, R = run.group, run.trunc.radius
    M = run.constants.M_hat
    tally = _Tally(SuiteId.COARSE_LIP)
    wild = _wild_sample(run, run.scenario.samples.lip_radius)
    lower_bounded = 0
    for u, i_u in wild:
        for v, i_v in wild:
            gap = abs(i_u - i_v) - 2 * M
            description = f"u={run.fmt(u)} v={run.fmt(v)}: |{i_u}-{i_v}|"
            if gap <= 0:
                tally.record(gap, f"{description} vs 2M")
                continue
            h = group.mul(u, group.inv(v))
            bound = run.m_lower(h, group.mul(v, group.power(run.action.g, i_u)))
            if bound is not None and bound >= gap:
                lower_bounded += 1
                tally.record(gap - bound, f"{description} vs m(uv^-1)>={bound}+2M")
                continue
            if group.length(h) >= R:
                tally.skipped += 1
                continue
            m_h, stable = run.m(h)
            if not stable:
                tally.skipped += 1
                continue
            tally.record(gap - m_h, f"{description} vs m(uv^-1)={m_h}+2M")
    return tally.report(
        {"M_hat": M},
        details={"lower_bounded": lower_bounded},
        unstable=not run.constants.stable,
    )


def suite_behrstock(run: ScenarioRun) -> SuiteReport:
    """min{|i(u) - i(v⁻¹u)|, |i(v) - i(u⁻¹v)|} <= 5M, plus the wD_[i(w)±4M] cover."""
    group = run.group
    M = run.constants.M_hat
    tally = _Tally(SuiteId.BEHRSTOCK)
    wild = _wild_sample(run, run.scenario.samples.behrstock_radius)
    for u, i_u in wild:
        u_inv = group.inv(u)
        for v, i_v in wild:
            i_uv = run.center(group.mul(u_inv, v))
            if i_uv is None:
                continue
            i_vu = run.center(group.mul(group.inv(v), u))
            if i_vu is None:
                tally.skipped += 1
                continue
            value = min(abs(i_u - i_vu), abs(i_v - i_uv))
            tally.record(value - 5 * M, f"u={run.fmt(u)} v={run.fmt(v)}: min={value} vs 5M={5 * M}")
    cover_failures = 0
    for w, i_w in wild:
        i_inv = run.center(group.inv(w))
        if i_inv is None:
            tally.skipped += 1
            continue
        spread = _spread_outside(run, w, i_w - 4 * M, i_w + 4 * M)
        if spread is None:
            continue
        excess = max(i_inv - 2 * M - spread[0], spread[1] - i_inv - 2 * M)
        if excess > 0:
            cover_failures += 1
        tally.record(excess, f"w={run.fmt(w)}: complement spans {spread[0]}..{spread[1]}")
    return tally.report(
        {"M_hat": M},
        details={"cover_failures": cover_failures},
        unstable=not run.constants.stable,
    )


def suite_large_proj(run: ScenarioRun) -> SuiteReport:
    """Census of cosets w⟨g⟩ with |f_h| > N_hat, compared between R-1 and R."""
    N = run.constants.N_hat
    elements = run.words(run.scenario.samples.census) or run.group.generators()
    tally = _Tally(SuiteId.LARGE_PROJ)
    drifting = []
    run.censuses = []
    for h in elements:
        census = large_projection_census(GroupElement(run.group, h), run.action, run.trunc, N)
        run.censuses.append(CensusRecord(
            h=census.h, threshold=census.threshold, size=census.size,
            previous_size=census.previous_size, delta=census.delta,
            consistent=census.consistent, cosets=census.cosets,
        ))
        tally.record(0 if census.consistent else 1, f"h={census.h}: f_h depends on the representative")
        if census.delta != 0:
            drifting.append(census.h)
    return tally.report(
        {"N_hat": N},
        details={"sizes": {c.h: c.size for c in run.censuses}, "drifting": drifting},
        unstable=bool(drifting) or not run.constants.stable,
    )


def suite_bbf_axioms(run: ScenarioRun) -> SuiteReport:
    tally = _Tally(SuiteId.BBF_AXIOMS)
    try:
        axioms = run.axioms
    except InsufficientCosets as exc:
        return tally.report({}, details={"note": str(exc)}, unstable=True)
    tally.checked = max(1, axioms.coset_count)
    tally.violations = len(axioms.p1_violations)
    tally.witnesses = ["|".join(t) for t in axioms.p1_violations[:MAX_WITNESSES]]
    tally.worst = tally.witnesses[0] if tally.witnesses else None
    return tally.report(
        {"M_hat": run.constants.M_hat, "N_hat": run.constants.N_hat, "theta_hat": axioms.theta_hat},
        details={
            "theta_hat": axioms.theta_hat,
            "theta_previous": axioms.theta_previous,
            "p1_constant": axioms.p1_constant,
            "p1_bound": axioms.p1_bound,
            "p2_threshold": axioms.p2_threshold,
            "p2_census": axioms.p2_census,
            "p2_stable": axioms.p2_stable,
            "cosets": axioms.coset_count,
        },
        unstable=not (axioms.theta_stable and axioms.p2_stable),
    )


def resolve_K(run: ScenarioRun) -> list[int]:
    values = set()
    for k in run.scenario.complex.K:
        values.add(default_K(run.axioms.p1_constant) if k == "default" else k)
    return sorted(values)


def _diagnose(run: ScenarioRun, K: int) -> ComplexDiagnostics:
    spec = run.scenario.complex
    system = run.projection_system
    complex_graph = build_projection_complex(system, K, run.axioms)
    quasi_tree = build_quasi_tree_of_spaces(system, K, spec.depth, run.axioms, complex_graph)
    run.graphs[K] = (complex_graph, quasi_tree)
    graph = complex_graph.graph
    notes = []
    connected = graph.number_of_nodes() > 0 and nx.is_connected(graph)
    delta = bottleneck = None
    try:
        delta = hyperbolicity_delta(complex_graph)
        bottleneck = least_bottleneck(complex_graph, spec.max_delta)
    except (CapacityExceeded, Disconnected) as exc:
        notes.append(str(exc))
    g = GroupElement(run.group, run.action.g)
    growth_tree: list[int] = []
    growth_complex: list[int] = []
    try:
        growth_tree = translation_growth(quasi_tree, g, spec.n_max)
        growth_complex = translation_growth(complex_graph, g, spec.n_max)
    except (PointMissing, Disconnected) as exc:
        notes.append(str(exc))
    return ComplexDiagnostics(
        K=K,
        vertices=graph.number_of_nodes(),
        edges=graph.number_of_edges(),
        connected=connected,
        delta=delta,
        bottleneck=bottleneck,
        growth_quasi_tree=growth_tree,
        growth_complex=growth_complex,
        quasi_tree_vertices=quasi_tree.graph.number_of_nodes(),
        notes=notes,
    )


def suite_complex_diag(run: ScenarioRun) -> SuiteReport:
    tally = _Tally(SuiteId.COMPLEX_DIAG)
    try:
        Ks = resolve_K(run)
    except InsufficientCosets as exc:
        return tally.report({}, details={"note": str(exc)}, unstable=True)
    run.diagnostics = []
    incomplete = False
    previous_edges: set | None = None
    for K in Ks:
        diag = _diagnose(run, K)
        run.diagnostics.append(diag)
        tally.record(0 if diag.connected else 1, f"K={K}: projection complex is disconnected")
        growth = diag.growth_quasi_tree
        if growth:
            tally.record(
                0 if growth[-1] > growth[0] else 1,
                f"K={K}: no translation growth {growth}",
            )
        else:
            incomplete = True
        edges = {frozenset(e) for e in run.graphs[K][0].graph.edges()}
        if previous_edges is not None:
            tally.record(len(previous_edges - edges), f"K={K}: edges lost when K grew")
        previous_edges = edges
    return tally.report(
        {"M_hat": run.constants.M_hat, "p1_constant": run.axioms.p1_constant},
        details={"K": Ks},
        unstable=incomplete,
    )


SUITES: dict[SuiteId, Callable[[ScenarioRun], SuiteReport]] = {
    SuiteId.AXIOM1: suite_axiom1,
    SuiteId.AXIOM2: suite_axiom2,
    SuiteId.SUBADDITIVITY: suite_subadditivity,
    SuiteId.INTERVAL_DIAMETER: suite_interval_diameter,
    SuiteId.COARSE_LIP: suite_coarse_lip,
    SuiteId.BEHRSTOCK: suite_behrstock,
    SuiteId.LARGE_PROJ: suite_large_proj,
    SuiteId.BBF_AXIOMS: suite_bbf_axioms,
    SuiteId.COMPLEX_DIAG: suite_complex_diag,
}


def verify_lemma(suite_id: str, scenario: Scenario, radius: int | None = None) -> SuiteReport:
    return ScenarioRun(scenario, radius).suite(suite_id)


# -- reports ----------------------------------------------------------------

def exit_code_for(verdicts: list[Verdict]) -> int:
    if Verdict.FAIL in verdicts:
        return EXIT_FAIL
    if Verdict.INCONCLUSIVE in verdicts:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def build_report(run: ScenarioRun, suites: list[str] | None = None) -> ReportDocument:
    selected = suites if suites is not None else [s.value for s in run.scenario.suites]
    reports = {suite_id: run.suite(suite_id) for suite_id in selected}
    audit = run.audit.model_copy(deep=True)
    audit.suite_violations = {k: r.violations for k, r in reports.items()}
    if SuiteId.BBF_AXIOMS.value in reports and "theta_hat" in reports["bbf_axioms"].details:
        audit.constants.theta_hat = reports["bbf_axioms"].details["theta_hat"]
    return ReportDocument(
        scenario=run.scenario.name,
        action=run.action.describe(),
        radius=run.trunc.radius,
        audit=audit,
        suites=reports,
        complex=run.diagnostics,
        census=run.censuses,
        exit_code=exit_code_for([r.verdict for r in reports.values()]),
    )


def output_dir(scenario: Scenario, out: str | Path | None = None) -> Path:
    if out is not None:
        return Path(out)
    if scenario.output.dir:
        return Path(scenario.output.dir)
    return Path(get_settings().output_dir) / scenario.name


def write_outputs(run: ScenarioRun, document: ReportDocument, directory: Path,
                  dot: bool = False) -> list[Path]:
    written = [write_report(document.to_json_dict(), directory / "report.json")]
    tsv = run.scenario.output.tsv
    if tsv and "projection_system" in run.__dict__ and len(run.projection_system.cosets) > 1:
        written.append(write_projection_table(run.projection_system, directory / "projections.tsv"))
    for K, (complex_graph, quasi_tree) in sorted(run.graphs.items()):
        if tsv:
            written.append(write_distance_table(complex_graph, directory / f"distances_K{K}.tsv"))
        if dot or run.scenario.output.dot:
            written.append(write_dot(complex_graph, directory / f"complex_K{K}.dot"))
            if quasi_tree is not None:
                written.append(write_dot(quasi_tree, directory / f"quasi_tree_K{K}.dot"))
    return written


def run_scenario(config_path: str | Path, radius: int | None = None, out: str | Path | None = None,
                 dot: bool = False, suites: list[str] | None = None) -> int:
    """Run a scenario file end to end; returns the process exit code."""
    try:
        scenario = load_scenario(config_path)
        run = ScenarioRun(scenario, radius)
        document = build_report(run, suites)
        write_outputs(run, document, output_dir(scenario, out), dot)
    except (AxialError, OSError) as exc:
        logger.error("Scenario %s failed: %s", config_path, exc)
        return EXIT_ERROR
    logger.info("Scenario %s finished with exit code %d", scenario.name, document.exit_code)
    return document.exit_code
