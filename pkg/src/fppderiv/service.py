"""FastAPI service exposing every capability of the engine.

Errors carry a structured record {"error": {"code", "message"}} whose
code matches the CLI exit-code taxonomy.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from . import __version__, api
from . import models as m
from .errors import (
    FppError,
    InvalidInputError,
    TheoremViolationError,
    SizeCapError,
    VerificationError,
)

STATUS_BY_ERROR = {
    InvalidInputError: 400,
    SizeCapError: 413,
    VerificationError: 409,
    TheoremViolationError: 500,
}

app = FastAPI(
    title="fppderiv",
    version=__version__,
    description=(
        "Exact first-passage percolation engine: passage times, environment "
        "derivatives of any order, edge classification, extremal two-lane "
        "environments, bound searches, and variance decomposition."
    ),
)


@app.exception_handler(FppError)
async def fpp_error_handler(_request: Request, exc: FppError) -> JSONResponse:
    status = STATUS_BY_ERROR.get(type(exc), 500)
    return JSONResponse(
        status_code=status,
        content={"error": {"code": exc.code, "message": str(exc)}},
    )


@app.exception_handler(RequestValidationError)
async def validation_error_handler(
    _request: Request, exc: RequestValidationError
) -> JSONResponse:
    return JSONResponse(
        status_code=422,
        content={"error": {"code": "invalid_input", "message": str(exc.errors())}},
    )


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/time", response_model=m.TimeResponse)
def time_endpoint(req: m.TimeRequest) -> m.TimeResponse:
    return api.compute_time(req)


@app.post("/derivative", response_model=m.DerivativeResponse)
def derivative_endpoint(req: m.DerivativeRequest) -> m.DerivativeResponse:
    return api.compute_derivative(req)


@app.post("/classify", response_model=m.ClassifyResponse)
def classify_endpoint(req: m.ClassifyRequest) -> m.ClassifyResponse:
    return api.classify(req)


@app.post("/lanes", response_model=m.LanesResponse)
def lanes_endpoint(req: m.LanesRequest) -> m.LanesResponse:
    return api.lanes(req)


@app.post("/search-extremes", response_model=m.SearchExtremesResponse)
def search_extremes_endpoint(req: m.SearchExtremesRequest) -> m.SearchExtremesResponse:
    return api.search_extremes(req)


@app.post("/variance", response_model=m.VarianceResponse)
def variance_endpoint(req: m.VarianceRequest) -> m.VarianceResponse:
    return api.variance(req)


@app.post("/identities", response_model=m.IdentitiesResponse)
def identities_endpoint(req: m.IdentitiesRequest) -> m.IdentitiesResponse:
    return api.identities(req)


@app.post("/reproduce-table", response_model=m.ReproduceTableResponse)
def reproduce_table_endpoint(req: m.ReproduceTableRequest) -> m.ReproduceTableResponse:
    return api.reproduce_table(req)
