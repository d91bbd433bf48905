"""Correlated multivariate Gaussian models: sampling, quantization, divergences.

A :class:`GaussianModel` is immutable after construction and caches the
lower Cholesky factor of its covariance, so it can be shared freely
across threads.  Determinant work is always done in log space through
the cached factor; covariances large enough to overflow ``det`` stay
representable.  Sampling takes an explicit seed and owns its generator,
so concurrent trials partition the seed space instead of sharing state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import get_lapack_funcs, solve_triangular

from .errors import (
    DegenerateModelError,
    DimensionMismatchError,
    NotPositiveDefiniteError,
)

__all__ = [
    "GaussianModel",
    "QuantizationSpec",
    "factorize",
    "sample",
    "quantize",
    "kl_forward",
    "kl_reverse",
    "diff_entropy",
    "quantized_entropy",
]

_LOG_2PI = math.log(2.0 * math.pi)
_SYMMETRY_RTOL = 1e-12


def factorize(cov: np.ndarray) -> np.ndarray:
    """Lower-triangular factor L with ``L @ L.T == cov``.

    Raises ValueError for non-square or asymmetric input (symmetry is
    checked to 1e-12 relative) and :class:`NotPositiveDefiniteError`,
    carrying the 0-based failing pivot index, when a pivot is not
    positive.
    """
    a = np.array(cov, dtype=np.float64, order="C")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"covariance must be a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        raise ValueError("covariance must have at least one row")
    if not np.all(np.isfinite(a)):
        raise ValueError("covariance contains non-finite entries")
    scale = float(np.max(np.abs(a)))
    if float(np.max(np.abs(a - a.T))) > _SYMMETRY_RTOL * max(scale, 1.0):
        raise ValueError("covariance is not symmetric to 1e-12 relative")
    (potrf,) = get_lapack_funcs(("potrf",), (a,))
    chol, info = potrf(a, lower=True, clean=True)
    if info > 0:
        raise NotPositiveDefiniteError(
            f"covariance is not positive definite (pivot {info - 1})", pivot=info - 1
        )
    if info < 0:
        raise ValueError(f"invalid argument {-info} to Cholesky factorization")
    return chol


@dataclass(frozen=True)
class GaussianModel:
    """Multivariate normal with cached Cholesky factor.

    ``degenerate`` marks the all-zero covariance produced by a zero
    embedding budget: such a model samples as a constant and is rejected
    by every density/divergence operation.
    """

    mean: np.ndarray
    cov: np.ndarray
    chol: np.ndarray | None = field(init=False, repr=False, default=None)
    degenerate: bool = field(init=False, default=False)

    def __post_init__(self):
        mean = np.array(self.mean, dtype=np.float64).reshape(-1)
        cov = np.array(self.cov, dtype=np.float64)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise ValueError(f"covariance must be square, got shape {cov.shape}")
        if mean.shape[0] != cov.shape[0]:
            raise DimensionMismatchError(
                f"mean has length {mean.shape[0]} but covariance is {cov.shape[0]}x{cov.shape[0]}"
            )
        if not np.all(np.isfinite(mean)):
            raise ValueError("mean contains non-finite entries")
        degenerate = not cov.any()
        chol = None if degenerate else factorize(cov)
        for arr in (mean, cov) + (() if chol is None else (chol,)):
            arr.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "chol", chol)
        object.__setattr__(self, "degenerate", degenerate)

    @property
    def n(self) -> int:
        """Number of elements (dimension)."""
        return self.mean.shape[0]

    @property
    def logdet_cov(self) -> float:
        """log |cov| computed from the cached factor."""
        self._require_density("log-determinant")
        return 2.0 * float(np.sum(np.log(np.diag(self.chol))))

    def _require_density(self, what: str) -> None:
        if self.degenerate:
            raise DegenerateModelError(f"{what} undefined for a zero-covariance model")


@dataclass(frozen=True)
class QuantizationSpec:
    """Uniform grid with ``2**bits`` levels at ``origin + k * step``.

    ``bits = 0`` is the degenerate single-level grid; it leaves
    quantized entropies equal to their differential counterparts.
    """

    bits: int
    step: float
    origin: float = 0.0

    def __post_init__(self):
        if not isinstance(self.bits, int) or self.bits < 0:
            raise ValueError(f"bits must be a nonnegative integer, got {self.bits!r}")
        if not (self.step > 0.0) or not math.isfinite(self.step):
            raise ValueError(f"step must be positive and finite, got {self.step!r}")
        if not math.isfinite(self.origin):
            raise ValueError("origin must be finite")


def sample(model: GaussianModel, count: int, seed) -> np.ndarray:
    """Draw ``count`` vectors as ``mean + L z``; deterministic per seed.

    ``seed`` may be an int or a ``numpy.random.SeedSequence`` (callers
    running batches in parallel hand each batch its own spawned child).
    Returns an array of shape ``(count, n)``; a degenerate model yields
    ``count`` copies of its mean.
    """
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    rng = np.random.default_rng(seed)
    if model.degenerate:
        return np.tile(model.mean, (count, 1))
    z = rng.standard_normal((count, model.n))
    return model.mean + z @ model.chol.T


def quantize(x: np.ndarray, spec: QuantizationSpec) -> np.ndarray:
    """Snap each component to the nearest grid level, half-up ties.

    Levels are ``origin + k * step`` with k clipped to [0, 2**bits - 1];
    values outside the representable range saturate at the end levels.
    """
    arr = np.asarray(x, dtype=np.float64)
    k = np.floor((arr - spec.origin) / spec.step + 0.5)
    np.clip(k, 0.0, float(2**spec.bits - 1), out=k)
    return spec.origin + k * spec.step


def _check_comparable(p: GaussianModel, q: GaussianModel) -> None:
    if p.n != q.n:
        raise DimensionMismatchError(f"models have dimensions {p.n} and {q.n}")
    if p.degenerate or q.degenerate:
        raise DegenerateModelError("divergence undefined for zero-covariance models")


def _divergence(p: GaussianModel, q: GaussianModel) -> float:
    # D(p || q) = (tr(Sq^-1 Sp) + (mq-mp)' Sq^-1 (mq-mp) + ln|Sq|/|Sp| - n) / 2
    a = solve_triangular(q.chol, p.chol, lower=True, check_finite=False)
    trace = float(np.sum(a * a))
    v = solve_triangular(q.chol, q.mean - p.mean, lower=True, check_finite=False)
    quad = float(v @ v)
    return 0.5 * (trace + quad + q.logdet_cov - p.logdet_cov - p.n)


def kl_forward(stego: GaussianModel, cover: GaussianModel) -> float:
    """Divergence D(stego || cover) in nats, closed multivariate-normal form."""
    _check_comparable(stego, cover)
    return _divergence(stego, cover)


def kl_reverse(cover: GaussianModel, stego: GaussianModel) -> float:
    """Divergence D(cover || stego) in nats (roles swapped inside the formula)."""
    _check_comparable(cover, stego)
    return _divergence(cover, stego)


def diff_entropy(model: GaussianModel) -> float:
    """Differential entropy (n*ln(2*pi*e) + ln|cov|) / 2 in nats."""
    model._require_density("entropy")
    return 0.5 * (model.n * (_LOG_2PI + 1.0) + model.logdet_cov)


def quantized_entropy(model: GaussianModel, spec: QuantizationSpec) -> float:
    """Entropy of the uniformly quantized model: diff_entropy + bits*ln(2).

    The bit term is a grid-resolution offset; it cancels in every entropy
    difference the rate computations consume.
    """
    return diff_entropy(model) + spec.bits * math.log(2.0)
