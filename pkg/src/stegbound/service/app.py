"""FastAPI application exposing the bound, simulation, and image commands.

Run with e.g. ``uvicorn stegbound.service.app:app``.  Error mapping:
PGM format problems answer 415, other domain/numerical errors 400, and
request validation is FastAPI's usual 422.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import PgmFormatError, StegboundError
from . import handlers
from .schemas import (
    BoundRequest,
    CodeRequest,
    CurveRequest,
    DetectRequest,
    ErrorBody,
    ImageBoundRequest,
    RunEnvelope,
)

app = FastAPI(
    title="stegbound",
    version=__version__,
    description=(
        "Embedding-capacity bounds for correlated Gaussian covers with "
        "Monte Carlo detection and random-coding verification."
    ),
)


def _error_response(status: int, exc: Exception) -> JSONResponse:
    body = ErrorBody(error=type(exc).__name__, detail=str(exc))
    return JSONResponse(status_code=status, content=body.model_dump())


@app.exception_handler(PgmFormatError)
async def _pgm_error(_request: Request, exc: PgmFormatError) -> JSONResponse:
    return _error_response(415, exc)


@app.exception_handler(StegboundError)
async def _domain_error(_request: Request, exc: StegboundError) -> JSONResponse:
    return _error_response(400, exc)


@app.exception_handler(ValueError)
async def _value_error(_request: Request, exc: ValueError) -> JSONResponse:
    return _error_response(400, exc)


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/bound", response_model=RunEnvelope)
def bound(request: BoundRequest) -> RunEnvelope:
    return handlers.handle_bound(request)


@app.post("/curve", response_model=RunEnvelope)
def curve(request: CurveRequest) -> RunEnvelope:
    return handlers.handle_curve(request)


@app.post("/detect", response_model=RunEnvelope)
def detect(request: DetectRequest) -> RunEnvelope:
    return handlers.handle_detect(request)


@app.post("/code", response_model=RunEnvelope)
def code(request: CodeRequest) -> RunEnvelope:
    return handlers.handle_code(request)


@app.post("/image-bound", response_model=RunEnvelope)
def image_bound(request: ImageBoundRequest) -> RunEnvelope:
    return handlers.handle_image_bound(request)
