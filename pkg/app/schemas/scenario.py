from enum import Enum
from typing import Literal

from pydantic import BaseModel, Field, model_validator


class SuiteId(str, Enum):
    AXIOM1 = "axiom1"
    AXIOM2 = "axiom2"
    SUBADDITIVITY = "subadditivity"
    INTERVAL_DIAMETER = "interval_diameter"
    COARSE_LIP = "coarse_lip"
    BEHRSTOCK = "behrstock"
    LARGE_PROJ = "large_proj"
    BBF_AXIOMS = "bbf_axioms"
    COMPLEX_DIAG = "complex_diag"


ALL_SUITES = list(SuiteId)


class GroupSpec(BaseModel):
    family: Literal["free", "abelian", "cyclic_times_finite", "product"]
    rank: int = Field(2, ge=1, le=25)
    order: int = Field(1, ge=1)
    labels: list[str] | None = None
    factors: list["GroupSpec"] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_factors(self):
        if self.family == "product" and len(self.factors) < 2:
            raise ValueError("a product needs at least two factors")
        return self


class ActionSpec(BaseModel):
    kind: Literal["left_regular", "pull_back"] = "left_regular"
    map: Literal["identity", "right_multiply", "left_multiply", "orbit"] | None = None
    parameter: str | None = None  # word, e.g. "b"

    @model_validator(mode="after")
    def check_map(self):
        if self.kind == "pull_back" and self.map is None:
            raise ValueError("pull_back actions need a map kind")
        return self


class TruncationSpec(BaseModel):
    R: int = Field(6, ge=2)
    tau_slope: float = Field(0.5, gt=0)
    window: int | None = Field(None, ge=1)
    witness_sample: Literal["axis", "ball"] = "axis"


class SampleSpec(BaseModel):
    """Radii of the element samples each suite scans."""

    probe_radius: int = Field(2, ge=0)
    probes: list[str] = Field(default_factory=list)
    pair_radius: int = Field(3, ge=0)
    interval_radius: int = Field(5, ge=0)
    lip_radius: int = Field(4, ge=0)
    behrstock_radius: int = Field(4, ge=0)
    census: list[str] = Field(default_factory=list)


class ComplexSpec(BaseModel):
    K: list[int | Literal["default"]] = Field(default_factory=lambda: ["default"])
    coset_radius: int = Field(4, ge=0)
    depth: int = Field(8, ge=1)
    n_max: int = Field(8, ge=1)
    max_delta: int = Field(2, ge=0)

    @model_validator(mode="after")
    def check_K(self):
        for k in self.K:
            if k != "default" and k < 1:
                raise ValueError("K values must be positive")
        return self


class OutputSpec(BaseModel):
    dir: str | None = None
    dot: bool = False
    tsv: bool = True


class Scenario(BaseModel):
    name: str = Field("scenario", min_length=1)
    group: GroupSpec
    g: str = Field(..., min_length=1)
    action: ActionSpec = Field(default_factory=ActionSpec)
    truncation: TruncationSpec = Field(default_factory=TruncationSpec)
    samples: SampleSpec = Field(default_factory=SampleSpec)
    complex: ComplexSpec = Field(default_factory=ComplexSpec)
    suites: list[SuiteId] = Field(default_factory=lambda: list(ALL_SUITES))
    output: OutputSpec = Field(default_factory=OutputSpec)

    @model_validator(mode="after")
    def check_suites(self):
        if SuiteId.COMPLEX_DIAG in self.suites and not self.complex.K:
            raise ValueError("complex_diag needs a non-empty K list")
        if len(set(self.suites)) != len(self.suites):
            raise ValueError("suites must not repeat")
        return self
