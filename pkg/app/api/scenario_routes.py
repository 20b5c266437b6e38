import asyncio

from fastapi import APIRouter, HTTPException

from app.core.errors import AxialError, UnknownSuite
from app.schemas.report import AuditVerdict, SuiteReport
from app.schemas.scenario import Scenario
from app.services.harness import ScenarioRun, build_report

router = APIRouter(tags=["scenarios"])


def _audit(scenario: Scenario) -> AuditVerdict:
    return ScenarioRun(scenario).audit


def _verify(scenario: Scenario, suite_id: str) -> SuiteReport:
    return ScenarioRun(scenario).suite(suite_id)


def _report(scenario: Scenario) -> dict:
    return build_report(ScenarioRun(scenario)).to_json_dict()


@router.post("/audit", response_model=AuditVerdict)
async def audit_scenario(body: Scenario):
    try:
        return await asyncio.to_thread(_audit, body)
    except AxialError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@router.post("/verify/{suite_id}", response_model=SuiteReport)
async def verify_suite(suite_id: str, body: Scenario):
    try:
        return await asyncio.to_thread(_verify, body, suite_id)
    except UnknownSuite as exc:
        raise HTTPException(status_code=404, detail=str(exc))
    except AxialError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@router.post("/report")
async def scenario_report(body: Scenario):
    try:
        return await asyncio.to_thread(_report, body)
    except AxialError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
