"""Command handlers shared by the FastAPI endpoints and the CLI client.

Each handler maps a validated request model to a :class:`RunEnvelope`.
Handlers are pure given their request (seeds travel in the request), so
an envelope is byte-for-byte reproducible.  Floats in envelopes are
rounded to 9 significant digits — below solver tolerance, above Monte
Carlo noise — so machine renderings (JSON, CSV) agree exactly.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import math
from dataclasses import asdict

import numpy as np

from .. import __version__
from ..capacity import max_rate, payload_curve, srl_bound
from ..gaussian import GaussianModel
from ..ingest import CliqueSpec, image_capacity, load_pgm
from ..simulate import run_coding, run_detector_comparison
from ..special import embedding_factor, embedding_factor_reverse, sandwich_bounds
from .schemas import (
    BoundRequest,
    CodeRequest,
    CurveRequest,
    DetectRequest,
    ImageBoundRequest,
    RunEnvelope,
)

__all__ = [
    "handle_bound",
    "handle_curve",
    "handle_detect",
    "handle_code",
    "handle_image_bound",
    "round9",
]


def round9(value):
    """Round floats to 9 significant digits, recursing through containers."""
    if isinstance(value, float):
        return float(f"{value:.9g}")
    if isinstance(value, dict):
        return {k: round9(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round9(v) for v in value]
    return value


def _config(command: str, request, **extra) -> dict:
    cfg = {"command": command, "version": __version__}
    cfg.update(request.model_dump())
    cfg.update(extra)
    return cfg


def handle_bound(request: BoundRequest) -> RunEnvelope:
    bound = max_rate(request.n, request.epsilon)
    results = asdict(bound)
    if bound.u > 0.0:
        low, high = sandwich_bounds(bound.u)
    else:
        low = high = 1.0
    results["sandwich_low"] = low
    results["sandwich_high"] = high
    diagnostics = {
        "srl_bits_per_element": bound.srl_nats / (bound.n * math.log(2.0)),
        "rate_to_srl_ratio": bound.rate_nats / bound.srl_nats if bound.srl_nats else None,
        # Root of the swapped-divergence budget equation; differs from `a`
        # for every positive budget and is reported for comparison only.
        "reverse_budget_factor": embedding_factor_reverse(bound.u),
    }
    return RunEnvelope(
        config=round9(_config("bound", request)),
        results=round9(results),
        diagnostics=round9(diagnostics),
    )


def handle_curve(request: CurveRequest) -> RunEnvelope:
    if request.p_e_min > request.p_e_max:
        raise ValueError(f"p_e_min {request.p_e_min} exceeds p_e_max {request.p_e_max}")
    grid = np.linspace(request.p_e_min, request.p_e_max, request.steps)
    rows = []
    for p_e_target, payload_bpe in payload_curve(request.n, grid):
        spread = 1.0 - 2.0 * p_e_target
        a_low = embedding_factor(4.0 * spread * spread / request.n).a
        # SRL ceiling at the budget this error target implies.
        srl_bpe = srl_bound(request.n, spread) / (request.n * math.log(2.0))
        rows.append(
            {
                "p_E": p_e_target,
                "payload_bpe": payload_bpe,
                "a_low": a_low,
                "srl_bpe": srl_bpe,
            }
        )
    return RunEnvelope(
        config=round9(_config("curve", request)),
        results=round9({"rows": rows}),
        diagnostics={"row_count": len(rows)},
    )


def handle_detect(request: DetectRequest) -> RunEnvelope:
    cover = GaussianModel(np.zeros(request.n), np.eye(request.n))
    lrt, energy = run_detector_comparison(
        cover, request.epsilon, request.trials, request.seed
    )
    return RunEnvelope(
        config=round9(_config("detect", request, cover="unit-variance identity")),
        results=round9(asdict(lrt)),
        diagnostics=round9({"energy_baseline": asdict(energy)}),
    )


def handle_code(request: CodeRequest) -> RunEnvelope:
    cover = GaussianModel(np.zeros(request.n), np.eye(request.n))
    reports = run_coding(
        cover, request.epsilon, request.fractions, request.trials, request.seed
    )
    bound = max_rate(request.n, request.epsilon)
    return RunEnvelope(
        config=round9(_config("code", request, cover="unit-variance identity")),
        results=round9({"rows": [asdict(r) for r in reports]}),
        diagnostics=round9(
            {
                "rate_bound_nats": bound.rate_nats,
                "rate_bound_nats_per_element": bound.rate_nats / bound.n,
                "embedding_factor": bound.a,
            }
        ),
    )


def handle_image_bound(request: ImageBoundRequest) -> RunEnvelope:
    try:
        raw = base64.b64decode(request.pgm_base64, validate=True)
    except binascii.Error as exc:
        raise ValueError(f"pgm_base64 is not valid base64: {exc}") from exc
    image = load_pgm(raw)
    spec = CliqueSpec(
        mode=request.mode, block_edge=request.block_edge, shrinkage=request.shrinkage
    )
    report = image_capacity(image, spec, request.epsilon)
    results = asdict(report.bound)
    results.update(
        {
            "clique_count": report.clique_count,
            "clique_dim": report.clique_dim,
            "width": image.width,
            "height": image.height,
            "maxval": image.maxval,
        }
    )
    diagnostics = {
        "model_entropy_nats": report.model_entropy_nats,
        "message_scale": report.message_scale,
        "message_cov": report.message_cov,
        "estimator_note": report.estimator_note,
    }
    config = _config("image-bound", request)
    # The image itself is identified, not embedded, in the reproducibility header.
    del config["pgm_base64"]
    config["pgm_sha256"] = hashlib.sha256(raw).hexdigest()
    config["pgm_bytes"] = len(raw)
    return RunEnvelope(
        config=round9(config),
        results=round9(results),
        diagnostics=round9(diagnostics),
    )
