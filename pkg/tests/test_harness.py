import json
from pathlib import Path

import pytest
from pydantic import ValidationError

from app.core.errors import ConfigError, UnknownSuite
from app.schemas.report import Verdict
from app.schemas.scenario import Scenario, SuiteId
from app.services.harness import (
    EXIT_ERROR,
    EXIT_FAIL,
    EXIT_OK,
    ScenarioRun,
    _Tally,
    audit_axial_pair,
    build_report,
    exit_code_for,
    load_scenario,
    run_scenario,
    verify_lemma,
)
from tests.conftest import make_scenario

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.mark.parametrize("name", ["f2", "f2_pullback", "f2_subadditivity", "z", "z2", "f2_times_z"])
def test_shipped_scenarios_load(name):
    scenario = load_scenario(SCENARIOS / f"{name}.toml")
    assert scenario.name == name


def test_malformed_scenario(tmp_path):
    path = tmp_path / "broken.toml"
    path.write_text("name = [unterminated\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_scenario(path)
    assert run_scenario(path, out=tmp_path / "out") == EXIT_ERROR


def test_invalid_scenario_values(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text('g = "a"\n[group]\nfamily = "heisenberg"\n', encoding="utf-8")
    with pytest.raises(ConfigError):
        load_scenario(path)


def test_scenario_validation():
    with pytest.raises(ValidationError):
        make_scenario(complex={"K": []})
    with pytest.raises(ValidationError):
        make_scenario(suites=["axiom1", "axiom1"])
    with pytest.raises(ValidationError):
        make_scenario(group={"family": "product", "factors": [{"family": "free"}]})
    with pytest.raises(ValidationError):
        make_scenario(action={"kind": "pull_back"})


def test_unknown_generator_in_g():
    with pytest.raises(ConfigError):
        ScenarioRun(make_scenario(g="c"))


def test_free_group_audit(f2_scenario):
    audit = audit_axial_pair(f2_scenario)
    assert audit.axiom1.verdict is Verdict.PASS
    assert audit.axiom1.counts == {"2": 1, "3": 1, "4": 1}
    assert audit.axiom2.verdict is Verdict.PASS
    assert audit.constants.M_hat == 0
    assert audit.constants.stable
    assert not audit.virtually_cyclic
    assert audit.tameness.unknown == 0
    assert audit.tameness.finite_part == ["e"]
    assert audit.tameness.inverse_closed and audit.tameness.product_closed


def test_pull_back_audit_matches(f2_scenario):
    pulled = make_scenario(action={"kind": "pull_back", "map": "right_multiply", "parameter": "b"})
    base, other = audit_axial_pair(f2_scenario), audit_axial_pair(pulled)
    assert other.axiom1.verdict is base.axiom1.verdict
    assert other.axiom2.verdict is base.axiom2.verdict
    assert other.constants.M_hat == base.constants.M_hat


def test_abelian_rank_two_fails_axiom1(tmp_path):
    code = run_scenario(SCENARIOS / "z2.toml", out=tmp_path)
    assert code == EXIT_FAIL
    report = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    assert report["schema"] == 1
    assert report["audit"]["axiom1"]["verdict"] == "FAIL"
    assert report["audit"]["axiom1"]["counts"] == {"3": 7, "4": 9, "5": 11}
    assert report["exit_code"] == EXIT_FAIL


def test_integers_are_virtually_cyclic():
    audit = audit_axial_pair(load_scenario(SCENARIOS / "z.toml"))
    assert audit.virtually_cyclic
    assert audit.axiom1.verdict is Verdict.PASS


def test_unknown_suite(f2_scenario):
    with pytest.raises(UnknownSuite):
        verify_lemma("quasi_morphism", f2_scenario)


@pytest.mark.parametrize(
    "suite", ["interval_diameter", "coarse_lip", "behrstock", "large_proj", "bbf_axioms", "complex_diag"]
)
def test_free_group_suites_pass(f2_scenario, suite):
    report = verify_lemma(suite, f2_scenario)
    assert report.verdict is Verdict.PASS, report.witnesses
    assert report.checked > 0
    assert report.violations == 0
    assert report.worst is None


def test_subadditivity_counterexample():
    scenario = make_scenario(truncation={"R": 5}, samples={"pair_radius": 2}, suites=["subadditivity"])
    report = verify_lemma("subadditivity", scenario)
    assert report.verdict is Verdict.FAIL
    assert report.worst.startswith("h1=b a h2=a b: m(h1h2)=2")


def test_complex_diagnostics(f2_scenario):
    run = ScenarioRun(f2_scenario)
    report = run.suite("complex_diag")
    assert report.details["K"] == [1]
    (diag,) = run.diagnostics
    assert diag.connected
    assert diag.vertices == 9
    assert diag.growth_quasi_tree == [1, 2, 3, 4]
    assert diag.growth_complex == [0, 0, 0, 0]


def test_exit_codes():
    assert exit_code_for([Verdict.PASS, Verdict.PASS]) == EXIT_OK
    assert exit_code_for([Verdict.PASS, Verdict.INCONCLUSIVE]) == 3
    assert exit_code_for([Verdict.INCONCLUSIVE, Verdict.FAIL]) == EXIT_FAIL


def test_report_is_deterministic(tmp_path):
    config = tmp_path / "small.toml"
    config.write_text(
        'name = "small"\ng = "a"\nsuites = ["axiom1", "axiom2", "bbf_axioms", "complex_diag"]\n'
        "[group]\nfamily = \"free\"\n[truncation]\nR = 4\n"
        "[complex]\ncoset_radius = 2\ndepth = 4\nn_max = 4\n",
        encoding="utf-8",
    )
    first, second = tmp_path / "first", tmp_path / "second"
    assert run_scenario(config, out=first, dot=True) == EXIT_OK
    assert run_scenario(config, out=second, dot=True) == EXIT_OK
    for name in ("report.json", "projections.tsv", "distances_K1.tsv", "complex_K1.dot"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_report_document_shape(f2_scenario):
    run = ScenarioRun(f2_scenario)
    document = build_report(run, ["axiom1"]).to_json_dict()
    assert set(document) == {
        "schema", "scenario", "action", "radius", "audit", "suites", "complex", "census", "exit_code",
    }
    assert document["action"] == "left_regular g=a"
    assert document["audit"]["suite_violations"] == {"axiom1": 0}


def test_window_exhaustion_fails_axiom2(tmp_path):
    config = tmp_path / "narrow.toml"
    config.write_text(
        'name = "narrow"\ng = "a"\nsuites = ["axiom2"]\n'
        '[group]\nfamily = "free"\n[truncation]\nR = 4\nwindow = 2\n'
        '[samples]\nprobes = ["b A^3 B"]\n',
        encoding="utf-8",
    )
    assert run_scenario(config, out=tmp_path / "out") == EXIT_FAIL
    report = json.loads((tmp_path / "out" / "report.json").read_text(encoding="utf-8"))
    axiom2 = report["audit"]["axiom2"]
    assert axiom2["verdict"] == "FAIL"
    assert "h=b A^3 B w=b a^3" in axiom2["witnesses"]
    assert report["audit"]["constants"]["exhausted"] == {"b A^3 B": "b a^3"}
    assert report["suites"]["axiom2"]["verdict"] == "FAIL"


def test_coarse_lip_settles_pairs_beyond_the_radius():
    run = ScenarioRun(make_scenario(samples={"lip_radius": 3}))
    report = run.suite("coarse_lip")
    assert report.verdict is Verdict.PASS
    assert report.skipped == 0
    assert report.checked == 46 * 46
    assert report.details["lower_bounded"] > 0


def test_mostly_skipped_sample_is_inconclusive():
    tally = _Tally(SuiteId.SUBADDITIVITY)
    tally.record(-1, "within bound")
    tally.skipped = 2
    report = tally.report({})
    assert report.verdict is Verdict.INCONCLUSIVE
    assert report.worst is None
    tally.record(1, "over bound")
    tally.record(0, "at bound")
    report = tally.report({})
    assert report.verdict is Verdict.FAIL
    assert report.worst == "over bound"
    assert report.witnesses == ["over bound"]


def test_vacuous_axiom2_is_flagged():
    audit = audit_axial_pair(load_scenario(SCENARIOS / "z2.toml"))
    assert audit.axiom2.vacuous
    assert audit.axiom2.vacuous == list(audit.axiom2.counts)
    assert "vacuous" in audit.axiom2.note
    assert "e" in audit.constants.vacuous


def test_free_group_axiom2_is_not_vacuous(f2_scenario):
    audit = audit_axial_pair(f2_scenario)
    assert audit.axiom2.vacuous == []
    assert audit.constants.vacuous == []
    assert audit.constants.exhausted == {}
