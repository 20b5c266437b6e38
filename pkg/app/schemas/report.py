from enum import Enum
from typing import Any

from pydantic import BaseModel, Field

REPORT_SCHEMA = 1


class Verdict(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"


class AxiomVerdict(BaseModel):
    verdict: Verdict
    witnesses: list[str] = Field(default_factory=list)
    counts: dict[str, int] = Field(default_factory=dict)
    vacuous: list[str] = Field(default_factory=list)
    note: str | None = None


class ConstantsRecord(BaseModel):
    M_hat: int
    L_hat: int
    N_hat: int
    theta_hat: int | None = None
    m_hat: dict[str, int] = Field(default_factory=dict)
    stability: dict[str, int] = Field(default_factory=dict)
    stable: bool
    exhausted: dict[str, str] = Field(default_factory=dict)
    vacuous: list[str] = Field(default_factory=list)


class TamenessReport(BaseModel):
    radius: int
    tame: int
    wild: int
    unknown: int
    unknown_short: int
    finite_part: list[str]
    inverse_closed: bool
    product_closed: bool


class AuditVerdict(BaseModel):
    axiom1: AxiomVerdict
    axiom2: AxiomVerdict
    virtually_cyclic: bool
    constants: ConstantsRecord
    stabilization_radii: list[int]
    tameness: TamenessReport
    suite_violations: dict[str, int] = Field(default_factory=dict)


class SuiteReport(BaseModel):
    suite: str
    verdict: Verdict
    checked: int = 0
    violations: int = 0
    skipped: int = 0
    worst: str | None = None
    witnesses: list[str] = Field(default_factory=list)
    constants: dict[str, int] = Field(default_factory=dict)
    details: dict[str, Any] = Field(default_factory=dict)


class ComplexDiagnostics(BaseModel):
    K: int
    vertices: int
    edges: int
    connected: bool
    delta: float | None = None
    bottleneck: int | None = None
    growth_quasi_tree: list[int] = Field(default_factory=list)
    growth_complex: list[int] = Field(default_factory=list)
    quasi_tree_vertices: int = 0
    notes: list[str] = Field(default_factory=list)


class CensusRecord(BaseModel):
    h: str
    threshold: int
    size: int
    previous_size: int
    delta: int
    consistent: bool
    cosets: list[str] = Field(default_factory=list)


class ReportDocument(BaseModel):
    schema_version: int = Field(REPORT_SCHEMA, serialization_alias="schema")
    scenario: str
    action: str
    radius: int
    audit: AuditVerdict
    suites: dict[str, SuiteReport] = Field(default_factory=dict)
    complex: list[ComplexDiagnostics] = Field(default_factory=list)
    census: list[CensusRecord] = Field(default_factory=list)
    exit_code: int

    def to_json_dict(self) -> dict:
        return self.model_dump(mode="json", by_alias=True)
