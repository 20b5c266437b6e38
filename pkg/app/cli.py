"""Command-line entry point: ``axial audit|verify|complex|report|serve``."""

import argparse
import logging
import sys

from app.config import get_settings
from app.core.errors import AxialError
from app.services.harness import (
    EXIT_ERROR,
    ScenarioRun,
    build_report,
    exit_code_for,
    load_scenario,
    output_dir,
    run_scenario,
    write_outputs,
)

logger = logging.getLogger(__name__)


def _configure_logging() -> None:
    logging.basicConfig(
        level=getattr(logging, get_settings().log_level.upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="axial", description="Axial-element toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_command(name: str, help_text: str) -> argparse.ArgumentParser:
        command = sub.add_parser(name, help=help_text)
        command.add_argument("--config", required=True, help="scenario TOML file")
        command.add_argument("--radius", type=int, default=None, help="override truncation radius R")
        command.add_argument("--out", default=None, help="output directory")
        command.add_argument("--dot", action="store_true", help="also write .dot graph exports")
        return command

    scenario_command("audit", "check Axioms 1 and 2 for the scenario's pair")
    verify = scenario_command("verify", "run one lemma verification suite")
    verify.add_argument("suite", help="suite id, e.g. behrstock")
    scenario_command("complex", "build the projection complex and quasi-tree diagnostics")
    scenario_command("report", "run every selected suite and write report.json")

    serve = sub.add_parser("serve", help="start the HTTP API")
    serve.add_argument("--host", default=None)
    serve.add_argument("--port", type=int, default=None)
    return parser


def _run_partial(args: argparse.Namespace, suites: list[str]) -> int:
    try:
        scenario = load_scenario(args.config)
        run = ScenarioRun(scenario, args.radius)
        document = build_report(run, suites)
        if args.command == "audit":
            audit = document.audit
            document.exit_code = exit_code_for([audit.axiom1.verdict, audit.axiom2.verdict])
        write_outputs(run, document, output_dir(scenario, args.out), args.dot)
    except (AxialError, OSError) as exc:
        logger.error("%s failed: %s", args.command, exc)
        return EXIT_ERROR
    for suite_id, report in document.suites.items():
        print(f"{suite_id}\t{report.verdict.value}\tviolations={report.violations}\tchecked={report.checked}")
    if args.command == "audit":
        audit = document.audit
        print(f"axiom1\t{audit.axiom1.verdict.value}")
        print(f"axiom2\t{audit.axiom2.verdict.value}\tM_hat={audit.constants.M_hat}")
        print(f"virtually_cyclic\t{audit.virtually_cyclic}")
    return document.exit_code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging()
    if args.command == "serve":
        import uvicorn

        settings = get_settings()
        uvicorn.run("app.main:app", host=args.host or settings.host, port=args.port or settings.port)
        return 0
    if args.command == "audit":
        return _run_partial(args, [])
    if args.command == "verify":
        return _run_partial(args, [args.suite])
    if args.command == "complex":
        return _run_partial(args, ["complex_diag"])
    return run_scenario(args.config, args.radius, args.out, args.dot)


if __name__ == "__main__":
    sys.exit(main())
