"""Pydantic request/response models for the sum service."""

from __future__ import annotations

from typing import Optional, Union

from pydantic import BaseModel, Field

from ..defset import DEFAULT_BUDGET


class WitnessModel(BaseModel):
    z: str
    h: str


class JobModel(BaseModel):
    """A builtin job by name, or an inline formula/curve/block document."""

    name: Optional[str] = None
    kind: str = "formula"
    formula: Optional[str] = None
    vars: Optional[list[str]] = None
    params: list[str] = Field(default_factory=list)
    f_num: str = "0"
    f_den: str = "1"
    g_num: str = "1"
    g_den: str = "1"
    psi: int = 1
    chi: Union[int, str] = 0
    lhs: Optional[str] = None
    rhs: Optional[str] = None
    equations: list[str] = Field(default_factory=list)
    witnesses: list[WitnessModel] = Field(default_factory=list)

    def to_doc(self):
        if self.name:
            return self.name
        doc = {
            "kind": self.kind,
            "params": self.params,
            "f_num": self.f_num, "f_den": self.f_den,
            "g_num": self.g_num, "g_den": self.g_den,
            "psi": self.psi, "chi": self.chi,
        }
        if self.formula is not None:
            doc["formula"] = self.formula
        if self.vars is not None:
            doc["vars"] = self.vars
        if self.kind == "curve":
            doc.update({"lhs": self.lhs, "rhs": self.rhs})
        if self.kind == "block":
            doc["equations"] = self.equations
            doc["witnesses"] = [w.model_dump() for w in self.witnesses]
        return doc


class CommonOptions(BaseModel):
    budget: int = DEFAULT_BUDGET
    workers: int = 1


class CountRequest(CommonOptions):
    job: JobModel
    p: int
    nu: int = 1
    y: list[int] = Field(default_factory=list)


class CountResponse(BaseModel):
    p: int
    nu: int
    count: int
    cost: int


class SumRequest(CountRequest):
    pass


class SumResponse(BaseModel):
    p: int
    nu: int
    re: float
    im: float
    abs: float
    count: int
    poles: int
    ratio_sqrtq: float


class CompanionRequest(CommonOptions):
    job: JobModel
    p: int
    nu: int = 1          # base field degree
    numax: int = 3       # companion degrees 1..numax
    y: list[int] = Field(default_factory=list)


class CompanionRecord(BaseModel):
    nu: int
    re: float
    im: float
    abs: float
    count: int
    poles: int
    ratio_sqrtq: float


class CompanionResponse(BaseModel):
    p: int
    base_nu: int
    records: list[CompanionRecord]


class ZetaRequest(CommonOptions):
    job: JobModel
    p: int
    numax: int = 6


class ZetaResponse(BaseModel):
    p: int
    counts: list[int]
    order: int
    char_poly: list[str]
    weights: list[Optional[int]]
    roots: list[list[float]]  # [re, im, multiplicity]
    max_weight: Optional[int]
    zeta_num: Optional[list[int]]
    zeta_den: Optional[list[int]]
    predictions_ok: bool


class DensityRequest(CommonOptions):
    job: JobModel
    pmin: int = 5
    pmax: int = 97


class ClusterModel(BaseModel):
    delta: int
    mu: str
    C: float
    support: list[int]
    unclustered: list[int]


class DensityResponse(BaseModel):
    records: list[list[float]]  # p, count, delta_p, mu_p
    clusters: list[ClusterModel]
    passed: bool


class TwistsRequest(CommonOptions):
    job: JobModel
    p: int
    threshold: float = 3.0


class TwistsResponse(BaseModel):
    p: int
    count: int
    exceptions: list[list[int]]
    nonzero_exceptions: int
    bound: float
    observed_D: float
    zero_twist_abs: float
    max_ok_abs: float


class IntervalRequest(CommonOptions):
    job: JobModel
    pmin: int = 5
    pmax: int = 97
    synthetic: bool = False
    max_flags: Optional[int] = None


class EquidistRequest(CommonOptions):
    job: JobModel
    p: int
    hmax: int = 10


class KloostermanRequest(CommonOptions):
    n: int = 2
    pmin: int = 3
    pmax: int = 61
    constant_one: bool = False
    ratio_bound: Optional[float] = 3.0


class VerifyDecompRequest(CommonOptions):
    job: JobModel
    p: int
    nu: int = 1
    y: list[int] = Field(default_factory=list)


class VerifyDecompResponse(BaseModel):
    p: int
    e: int
    lhs: str
    rhs: str
    equal: bool
    weighted: bool


class PaperExamplesRequest(CommonOptions):
    quick: bool = False


class ExperimentResponse(BaseModel):
    name: str
    columns: list[str]
    records: list[list]
    summary: dict
    passed: bool
    failures: list[str]
