"""Pydantic request/response models for the service and the CLI client.

Every run renders to one :class:`RunEnvelope` with ``config`` (the full
resolved parameters, seed included), ``results``, and ``diagnostics``
keys, so JSON output is identical whether a command executes in-process
or over HTTP.
"""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field

# Simulation endpoints build n x n covariance models; bound endpoints are
# O(1) in n and accept any size.
MAX_SIMULATION_DIM = 1024


class BoundRequest(BaseModel):
    """Rate bound for n cover elements at total-variation budget epsilon."""

    n: int = Field(ge=1)
    epsilon: float = Field(ge=0)


class CurveRequest(BaseModel):
    """Payload-versus-error-target curve over a linear grid of p_E values."""

    n: int = Field(ge=1)
    p_e_min: float = Field(default=0.0, ge=0, le=0.5)
    p_e_max: float = Field(default=0.5, ge=0, le=0.5)
    steps: int = Field(default=5, ge=1, le=100_000)


class DetectRequest(BaseModel):
    """Monte Carlo optimal-detection run on a unit-variance identity cover."""

    n: int = Field(ge=1, le=MAX_SIMULATION_DIM)
    epsilon: float = Field(ge=0)
    trials: int = Field(default=100_000, ge=1, le=10_000_000)
    seed: int = Field(default=0, ge=0)


class CodeRequest(BaseModel):
    """Random-coding run at rate fractions of the capacity bound."""

    n: int = Field(ge=1, le=MAX_SIMULATION_DIM)
    epsilon: float = Field(gt=0)
    fractions: list[float] = Field(min_length=1)
    trials: int = Field(default=500, ge=1, le=1_000_000)
    seed: int = Field(default=0, ge=0)


class ImageBoundRequest(BaseModel):
    """Per-image capacity bound; the PGM file travels base64-encoded."""

    pgm_base64: str
    epsilon: float = Field(ge=0)
    mode: Literal["independent-pixels", "square-block", "single-clique"] = "independent-pixels"
    block_edge: int | None = Field(default=None, ge=1)
    shrinkage: float = Field(default=0.05, ge=0, le=1)


class RunEnvelope(BaseModel):
    """Uniform run output: resolved config, results, diagnostics."""

    config: dict[str, Any]
    results: dict[str, Any]
    diagnostics: dict[str, Any]


class ErrorBody(BaseModel):
    """Typed error payload mirrored by the CLI's exit-code mapping."""

    error: str
    detail: str
