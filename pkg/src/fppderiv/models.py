"""Pydantic request/response models for the HTTP service.

The CLI builds these same models and calls the handlers in-process, so
request validation behaves identically over the wire and offline.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, model_validator


class EdgeRef(BaseModel):
    base: list[int]
    axis: int


class LatticeParams(BaseModel):
    dim: int = 2
    radius: int = 1
    a: int = 1
    b: int = 2
    reduced_box: list[list[int]] | None = None
    source: list[int] | None = None
    sink: list[int] | None = None


class EnvironmentFile(BaseModel):
    """The on-disk environment schema; exceptions carry the non-default value."""

    dim: int
    radius: int
    a: int
    b: int
    reduced_box: list[list[int]] | None = None
    source: list[int]
    sink: list[int]
    default: Literal["a", "b"]
    exceptions: list[EdgeRef] = []


class EnvSourceRequest(BaseModel):
    """Exactly one input source: inline lattice params xor an environment."""

    lattice: LatticeParams | None = None
    default: Literal["a", "b"] = "a"
    environment: EnvironmentFile | None = None

    @model_validator(mode="after")
    def _exactly_one_source(self):
        if (self.lattice is None) == (self.environment is None):
            raise ValueError("provide exactly one of 'lattice' or 'environment'")
        return self


class TimeRequest(EnvSourceRequest):
    pass


class TimeResponse(BaseModel):
    f: int
    n_edges: int
    box: list[list[int]]
    reduced_box_mode: bool


class DerivativeRequest(EnvSourceRequest):
    S: list[EdgeRef]
    method: Literal["leibniz", "recursive", "table"] = "leibniz"


class DerivativeResponse(BaseModel):
    S: list[EdgeRef]
    raw: int
    normalized: str
    method: str


class ClassifyRequest(EnvSourceRequest):
    edges: list[EdgeRef] | None = None


class ClassificationRecord(BaseModel):
    edge: EdgeRef
    essential: bool
    semi_essential: bool
    influential: bool
    very_influential: bool


class ClassifyResponse(BaseModel):
    f: int
    records: list[ClassificationRecord]


class LanesRequest(BaseModel):
    m1: int
    m2: int
    beta1: int
    beta2: int
    a: int = 1
    b: int = 2
    lane_length: int | None = None
    embed: bool = False
    separation: int = 2
    span: int | None = None


class LanesEmbedding(BaseModel):
    dim: int
    lane_length: int
    lattice: dict
    s_edges: list[EdgeRef]
    lattice_derivative_normalized: str
    environment: dict


class LanesResponse(BaseModel):
    m1: int
    m2: int
    beta1: int
    beta2: int
    D_normalized: int
    bruteforce_normalized: int | None
    embedded: bool
    verified: bool
    embedding: LanesEmbedding | None = None
    dim_note: str | None = None


class ExtremeReportModel(BaseModel):
    k: int
    mode: str
    instance: dict
    max_normalized: str
    min_normalized: str
    max_witness: dict
    min_witness: dict
    scanned: int
    notes: list[str] = []


class SearchExtremesRequest(BaseModel):
    k: int
    mode: Literal["exhaustive", "random", "lanes", "hunt"] = "exhaustive"
    budget: int = 2000
    seed: int | None = None
    max_beta: int = 4
    workers: int = 1
    lattice: LatticeParams | None = None
    default: Literal["a", "b"] = "a"
    environment: EnvironmentFile | None = None

    @model_validator(mode="after")
    def _check_mode_inputs(self):
        needs_graph = self.mode in ("exhaustive", "random")
        has_source = self.lattice is not None or self.environment is not None
        if needs_graph:
            if (self.lattice is None) == (self.environment is None):
                raise ValueError(
                    f"mode {self.mode!r} needs exactly one of 'lattice' or 'environment'"
                )
        elif has_source:
            raise ValueError(f"mode {self.mode!r} takes no lattice input")
        if self.mode in ("random", "hunt") and self.seed is None:
            raise ValueError(f"mode {self.mode!r} requires an explicit seed")
        return self


class SearchExtremesResponse(BaseModel):
    k: int
    mode: str
    max_normalized: str
    min_normalized: str
    scanned: int
    instance: dict | None = None
    max_witness: dict | None = None
    min_witness: dict | None = None
    notes: list[str] = []
    lanes: ExtremeReportModel | None = None
    randomized_upper: ExtremeReportModel | None = None
    randomized_lower: ExtremeReportModel | None = None


class VarianceRequest(EnvSourceRequest):
    p: float
    max_size: int | None = None
    mc_samples: int | None = None
    seed: int | None = None
    talagrand_k: int | None = None
    workers: int = 1

    @model_validator(mode="after")
    def _seeded_sampling(self):
        if self.mc_samples is not None and self.seed is None:
            raise ValueError("Monte Carlo sampling requires an explicit seed")
        return self


class VarianceRow(BaseModel):
    size: int
    term_sum: float
    cumulative: float
    residual: float


class TalagrandTerms(BaseModel):
    k: int
    first_sum: float
    second_sum_c1: float


class MonteCarloResult(BaseModel):
    samples: int
    seed: int
    estimate: float
    standard_error: float


class VarianceResponse(BaseModel):
    p: float
    n_edges: int
    mean: float
    variance: float
    max_size: int
    rows: list[VarianceRow]
    total: float
    residual: float
    relative_residual: float
    talagrand: TalagrandTerms | None = None
    monte_carlo: MonteCarloResult | None = None


class IdentitiesRequest(BaseModel):
    check: bool = True
    max_b: int = 64
    max_nk: int = 64


class IdentitiesResponse(BaseModel):
    ok: bool
    alternating_checked: int
    vandermonde_checked: int


class ReproduceTableRequest(BaseModel):
    max_beta: int = 4
    workers: int = 1


class TableCell(BaseModel):
    k: int
    u_expected: int
    u_witnessed: str
    u_pass: bool
    l_expected: int
    l_witnessed: str
    l_pass: bool
    u_witness: dict
    l_witness: dict
    exhaustive_max: str
    exhaustive_min: str


class ReproduceTableResponse(BaseModel):
    cells: list[TableCell]
    all_pass: bool
    instance: dict
    notes: list[str] = []


class ErrorRecord(BaseModel):
    code: str
    message: str


class ErrorResponse(BaseModel):
    error: ErrorRecord
