"""Monte Carlo verification: optimal detection, total variation, random coding.

Detection trials are drawn in fixed-size batches whose seeds are spawned
deterministically from the caller's seed, so a report is reproducible for
a given (seed, trials, batch_size) triple and batches may be executed in
parallel without changing the counts.

The coding experiment measures the decoding-error rate of the
minimum-Mahalanobis (maximum-likelihood) decoder.  Codebooks up to
``max_codebook`` codewords are materialized and decoded exhaustively;
beyond that size — total rates make ``K = ceil(exp(n R))`` astronomically
large long before memory runs out — the experiment switches to an exact
order-statistics form: decoding fails iff the minimum of K-1 i.i.d.
competitor distances falls below the true codeword's distance, a
Bernoulli event whose probability is available in closed form through
the noncentral chi-square CDF.  Both paths estimate the same
codebook-averaged error rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.integrate import quad
from scipy.linalg import solve_triangular
from scipy.stats import ncx2

from .capacity import max_rate, message_params, pe_floor
from .errors import (
    CodebookTooLargeError,
    DegenerateCodebookError,
    DimensionMismatchError,
)
from .gaussian import GaussianModel, QuantizationSpec, quantize, sample
from .special import embedding_factor

__all__ = [
    "H0",
    "H1",
    "DetectionReport",
    "Codebook",
    "CodingReport",
    "lrt_decide",
    "run_detection",
    "run_detector_comparison",
    "total_variation_1d",
    "build_codebook",
    "embed",
    "decode",
    "run_coding",
]

H0 = "H0"
H1 = "H1"

_LOG_2PI = math.log(2.0 * math.pi)

# Total rates above this cannot even represent K = ceil(exp(n R)) in a float.
_MAX_TOTAL_RATE_NATS = 700.0


@dataclass(frozen=True)
class DetectionReport:
    """Empirical binary-hypothesis-test outcome against the theory floor.

    ``p_e = alpha + beta`` and ``p_E = p_e / 2`` assume equal priors.
    ``mc_stderr`` is the binomial standard error of ``p_e`` computed from
    the pooled error proportion over the 2 * trials decisions;
    acceptance-style comparisons use 3 * mc_stderr margins.
    """

    trials: int
    alpha: float
    beta: float
    p_e: float
    p_E: float
    kl_theoretical: float
    p_e_floor: float
    mc_stderr: float
    detector: str = "lrt"


@dataclass(frozen=True)
class Codebook:
    """K codewords of length n drawn independently from the message model."""

    codewords: np.ndarray
    rate_nats_per_element: float
    seed: int

    def __post_init__(self):
        cw = np.array(self.codewords, dtype=np.float64)
        if cw.ndim != 2 or cw.shape[0] < 1:
            raise ValueError("codewords must be a (K, n) array with K >= 1")
        cw.setflags(write=False)
        object.__setattr__(self, "codewords", cw)

    @property
    def size(self) -> int:
        return self.codewords.shape[0]

    @property
    def n(self) -> int:
        return self.codewords.shape[1]


@dataclass(frozen=True)
class CodingReport:
    """Decoding-error rate of one random-coding run.

    ``rate_fraction`` is the requested fraction of the per-element bound;
    ``stderr`` is the binomial standard error sqrt(p(1-p)/trials);
    ``method`` records whether the codebook was materialized ("exact") or
    evaluated through the order-statistics form ("analytic-min").
    """

    n: int
    K: int
    trials: int
    p_B: float
    rate_fraction: float
    rate_nats_per_element: float
    stderr: float
    method: Literal["exact", "analytic-min"]


def _log_density(model: GaussianModel, x: np.ndarray) -> np.ndarray:
    """Row-wise log density; x has shape (m, n)."""
    w = solve_triangular(model.chol, (x - model.mean).T, lower=True, check_finite=False)
    quad_forms = np.einsum("ij,ij->j", w, w)
    return -0.5 * (model.n * _LOG_2PI + model.logdet_cov + quad_forms)


def lrt_decide(observation, cover: GaussianModel, stego: GaussianModel) -> str:
    """Likelihood-ratio decision for one observation; ties go to H0."""
    x = np.asarray(observation, dtype=np.float64).reshape(1, -1)
    if x.shape[1] != cover.n or cover.n != stego.n:
        raise DimensionMismatchError("observation and models must share one dimension")
    llr = float(_log_density(stego, x)[0] - _log_density(cover, x)[0])
    return H1 if llr > 0.0 else H0


def _trivial_report(detector: str) -> DetectionReport:
    # epsilon = 0: cover and stego coincide, the tie-break rule answers H0
    # everywhere, so alpha = 0, beta = 1 without sampling.
    return DetectionReport(
        trials=0,
        alpha=0.0,
        beta=1.0,
        p_e=1.0,
        p_E=0.5,
        kl_theoretical=0.0,
        p_e_floor=1.0,
        mc_stderr=0.0,
        detector=detector,
    )


def _detection_counts(
    cover: GaussianModel,
    stego: GaussianModel,
    factor: float,
    trials: int,
    seed,
    batch_size: int,
    quantization: QuantizationSpec | None,
) -> tuple[int, int, int, int]:
    """False-positive / false-negative counts for LRT and energy detectors.

    Both detectors see the same samples.  The energy detector thresholds
    ||x - mean||^2 at ``n * sigma_bar^2 * a ln(a) / (a - 1)`` (the exact
    likelihood-ratio threshold when the covariance is isotropic), with
    sigma_bar^2 the mean cover variance.
    """
    n = cover.n
    sigma_bar2 = float(np.trace(cover.cov)) / n
    energy_threshold = n * sigma_bar2 * factor * math.log(factor) / (factor - 1.0)

    n_batches = -(-trials // batch_size)
    children = np.random.SeedSequence(seed).spawn(n_batches)
    lrt_fp = lrt_fn = energy_fp = energy_fn = 0
    remaining = trials
    for child in children:
        m = min(batch_size, remaining)
        remaining -= m
        rng = np.random.default_rng(child)
        covers = cover.mean + rng.standard_normal((m, n)) @ cover.chol.T
        stegos = stego.mean + rng.standard_normal((m, n)) @ stego.chol.T
        if quantization is not None:
            covers = quantize(covers, quantization)
            stegos = quantize(stegos, quantization)
        llr_covers = _log_density(stego, covers) - _log_density(cover, covers)
        llr_stegos = _log_density(stego, stegos) - _log_density(cover, stegos)
        lrt_fp += int(np.count_nonzero(llr_covers > 0.0))
        lrt_fn += int(np.count_nonzero(llr_stegos <= 0.0))
        e_covers = np.einsum("ij,ij->i", covers - cover.mean, covers - cover.mean)
        e_stegos = np.einsum("ij,ij->i", stegos - cover.mean, stegos - cover.mean)
        energy_fp += int(np.count_nonzero(e_covers > energy_threshold))
        energy_fn += int(np.count_nonzero(e_stegos <= energy_threshold))
    return lrt_fp, lrt_fn, energy_fp, energy_fn


def _report_from_counts(
    fp: int, fn: int, trials: int, epsilon: float, detector: str
) -> DetectionReport:
    alpha = fp / trials
    beta = fn / trials
    p_e = alpha + beta
    p_E = 0.5 * p_e
    kl = 2.0 * epsilon * epsilon
    stderr = 2.0 * math.sqrt(p_E * (1.0 - p_E) / (2.0 * trials))
    return DetectionReport(
        trials=trials,
        alpha=alpha,
        beta=beta,
        p_e=p_e,
        p_E=p_E,
        kl_theoretical=kl,
        p_e_floor=pe_floor(kl).p_e_floor,
        mc_stderr=stderr,
        detector=detector,
    )


def run_detection(
    cover: GaussianModel,
    epsilon: float,
    trials: int,
    seed,
    *,
    batch_size: int = 65536,
    quantization: QuantizationSpec | None = None,
) -> DetectionReport:
    """Monte Carlo error rates of the optimal (likelihood-ratio) detector.

    Builds the optimal stego model for ``epsilon``, samples ``trials``
    covers and ``trials`` stegos, and compares the empirical total error
    against the theory floor for a divergence of ``2 * epsilon**2``.
    ``epsilon = 0`` reports the trivial p_e = 1 without sampling.
    ``quantization`` optionally snaps all samples to a grid before
    detection, probing that quantized observations cannot be easier to
    detect than the continuous relaxation.
    """
    lrt, _ = run_detector_comparison(
        cover, epsilon, trials, seed, batch_size=batch_size, quantization=quantization
    )
    return lrt


def run_detector_comparison(
    cover: GaussianModel,
    epsilon: float,
    trials: int,
    seed,
    *,
    batch_size: int = 65536,
    quantization: QuantizationSpec | None = None,
) -> tuple[DetectionReport, DetectionReport]:
    """LRT and baseline energy-detector reports on shared samples.

    The energy detector thresholds the squared Euclidean deviation from
    the cover mean; the likelihood-ratio test must not lose to it beyond
    Monte Carlo noise on the same samples.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    epsilon = float(epsilon)
    if epsilon == 0.0:
        return _trivial_report("lrt"), _trivial_report("energy")
    message = message_params(cover, epsilon)
    stego = GaussianModel(cover.mean, cover.cov + message.cov)
    factor = max_rate(cover.n, epsilon).a
    counts = _detection_counts(cover, stego, factor, trials, seed, batch_size, quantization)
    lrt_fp, lrt_fn, energy_fp, energy_fn = counts
    return (
        _report_from_counts(lrt_fp, lrt_fn, trials, epsilon, "lrt"),
        _report_from_counts(energy_fp, energy_fn, trials, epsilon, "energy"),
    )


def total_variation_1d(var_cover: float, a: float) -> float:
    """Total variation between N(0, v) and N(0, a v) by adaptive quadrature.

    The densities cross at ``x* = sqrt(v a ln(a) / (a - 1))``; the
    integral of |p_s - p_c| is split there so the quadrature never
    straddles the kink.  Returns half the L1 distance, a value in [0, 1].
    """
    var_cover = float(var_cover)
    a = float(a)
    if not (var_cover > 0.0) or not math.isfinite(var_cover):
        raise ValueError(f"variance must be positive, got {var_cover!r}")
    if not math.isfinite(a) or a < 1.0:
        raise ValueError(f"factor must be >= 1, got {a!r}")
    if a == 1.0:
        return 0.0
    x_star = math.sqrt(var_cover * a * math.log(a) / (a - 1.0))
    sig_c = math.sqrt(var_cover)
    sig_s = math.sqrt(a * var_cover)

    def gap(x: float) -> float:
        pc = math.exp(-0.5 * (x / sig_c) ** 2) / (sig_c * math.sqrt(2.0 * math.pi))
        ps = math.exp(-0.5 * (x / sig_s) ** 2) / (sig_s * math.sqrt(2.0 * math.pi))
        return abs(ps - pc)

    # Half-line integral of |p_s - p_c| equals half the full L1 by symmetry.
    inner, _ = quad(gap, 0.0, x_star)
    outer, _ = quad(gap, x_star, np.inf)
    return inner + outer


def build_codebook(
    n: int,
    rate_nats_per_element: float,
    message_model: GaussianModel,
    seed: int,
    *,
    max_codewords: int = 2**20,
) -> Codebook:
    """Materialize ``K = ceil(exp(n R))`` codewords drawn from the message model.

    Raises :class:`DegenerateCodebookError` when a zero-covariance message
    model would have to supply more than one (indistinguishable) codeword,
    and :class:`CodebookTooLargeError` when K exceeds ``max_codewords``.
    """
    rate = float(rate_nats_per_element)
    if not math.isfinite(rate) or rate < 0.0:
        raise ValueError(f"rate must be finite and >= 0, got {rate!r}")
    if message_model.n != n:
        raise DimensionMismatchError(f"message model has dimension {message_model.n}, not {n}")
    total = n * rate
    if total > _MAX_TOTAL_RATE_NATS:
        raise CodebookTooLargeError(f"codebook size exp({total:.3g}) is not representable")
    k = math.ceil(math.exp(total))
    if k > max_codewords:
        raise CodebookTooLargeError(f"codebook of {k} codewords exceeds cap {max_codewords}")
    if message_model.degenerate and k > 1:
        raise DegenerateCodebookError("zero-covariance message model admits only K = 1")
    if not isinstance(seed, (int, np.integer)):
        raise ValueError(f"codebook seed must be an integer, got {type(seed).__name__}")
    return Codebook(
        codewords=sample(message_model, k, seed),
        rate_nats_per_element=rate,
        seed=int(seed),
    )


def embed(cover, codeword) -> np.ndarray:
    """Componentwise embedding: stego = cover + codeword."""
    c = np.asarray(cover, dtype=np.float64).reshape(-1)
    m = np.asarray(codeword, dtype=np.float64).reshape(-1)
    if c.shape != m.shape:
        raise DimensionMismatchError(f"cover has length {c.shape[0]}, codeword {m.shape[0]}")
    return c + m


def decode(stego, codebook: Codebook, cover: GaussianModel) -> int:
    """Index of the codeword minimizing the Mahalanobis distance to the residual.

    Distance is ``(s - m_i - mean)' cov^-1 (s - m_i - mean)`` under the
    cover covariance; ties resolve to the lowest index.
    """
    s = np.asarray(stego, dtype=np.float64).reshape(-1)
    if s.shape[0] != cover.n or codebook.n != cover.n:
        raise DimensionMismatchError("stego, codebook and cover dimensions must agree")
    diff = (s - cover.mean)[None, :] - codebook.codewords
    w = solve_triangular(cover.chol, diff.T, lower=True, check_finite=False)
    return int(np.argmin(np.einsum("ij,ij->j", w, w)))


def _coding_exact(
    n: int, k: int, delta: float, trials: int, rng: np.random.Generator
) -> int:
    """Error count with a materialized codebook, in whitened coordinates.

    Mahalanobis decoding is invariant under the whitening map L^-1, so the
    experiment depends on the cover model only through (n, a); codewords
    are i.i.d. N(0, (a-1) I) and cover noise is N(0, I).
    """
    sig_m = math.sqrt(delta)
    codewords = rng.standard_normal((k, n)) * sig_m
    errors = 0
    for _ in range(trials):
        z = rng.standard_normal(n)
        true_index = int(rng.integers(k))
        residual = z + codewords[true_index]
        distances = np.einsum(
            "ij,ij->i", residual[None, :] - codewords, residual[None, :] - codewords
        )
        if int(np.argmin(distances)) != true_index:
            errors += 1
    return errors


def _coding_analytic_min(
    n: int, k: int, delta: float, trials: int, rng: np.random.Generator
) -> int:
    """Error count through the order-statistics form of the decoder.

    Whitened by L^-1 and scaled by (a-1), a wrong codeword's distance to
    the received point y is noncentral chi-square with n degrees of
    freedom and noncentrality |y|^2/(a-1).  Decoding fails iff the
    minimum over the K-1 i.i.d. competitors undercuts the true distance
    |z|^2/(a-1) — a Bernoulli draw with probability
    ``1 - (1 - F(d_true))**(K-1)``, evaluated via log1p/expm1 so that
    K ~ 1e20 with F ~ 1e-25 keeps full precision.
    """
    sig_m = math.sqrt(delta)
    z = rng.standard_normal((trials, n))
    m_true = rng.standard_normal((trials, n)) * sig_m
    received = z + m_true
    noncentrality = np.einsum("ij,ij->i", received, received) / delta
    d_true = np.einsum("ij,ij->i", z, z) / delta
    competitor_cdf = ncx2.cdf(d_true, df=n, nc=noncentrality)
    with np.errstate(divide="ignore"):
        # cdf == 1.0 gives log1p(-1) = -inf and p_error = 1, the right limit.
        log_miss = np.log1p(-np.minimum(competitor_cdf, 1.0))
    p_error = -np.expm1((k - 1) * log_miss)
    return int(np.count_nonzero(rng.random(trials) < p_error))


def run_coding(
    cover: GaussianModel,
    epsilon: float,
    rate_fractions,
    trials: int,
    seed,
    *,
    max_codebook: int = 65536,
) -> list[CodingReport]:
    """Decoding-error rates at rates set as fractions of the capacity bound.

    For each fraction f the per-element rate is ``R = f * I/n`` with I the
    rate bound for (cover.n, epsilon); the report's ``p_B`` estimates the
    probability that a fresh cover's stego decodes to the wrong codeword.
    Runs are deterministic per (seed, trials) and independent across
    fractions (seeds are spawned per entry).
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    fractions = [float(f) for f in rate_fractions]
    for f in fractions:
        if not math.isfinite(f) or f < 0.0:
            raise ValueError(f"rate fractions must be finite and >= 0, got {f!r}")
    bound = max_rate(cover.n, epsilon)
    # Full-precision a - 1; bound.a - 1.0 would shed digits for tiny budgets.
    delta = embedding_factor(bound.u).delta
    per_element = bound.rate_nats / cover.n
    message = message_params(cover, epsilon)
    n = cover.n
    seeds = np.random.SeedSequence(seed).spawn(len(fractions))
    reports = []
    for f, child in zip(fractions, seeds):
        rate = f * per_element
        total = n * rate
        if total > _MAX_TOTAL_RATE_NATS:
            raise CodebookTooLargeError(f"total rate {total:.3g} nats is not representable")
        k = math.ceil(math.exp(total))
        if k > 1 and message.degenerate:
            raise DegenerateCodebookError("zero-covariance message model admits only K = 1")
        rng = np.random.default_rng(child)
        if k == 1:
            errors = 0
            method = "exact"
        elif k <= max_codebook:
            errors = _coding_exact(n, k, delta, trials, rng)
            method = "exact"
        else:
            errors = _coding_analytic_min(n, k, delta, trials, rng)
            method = "analytic-min"
        p_b = errors / trials
        reports.append(
            CodingReport(
                n=n,
                K=k,
                trials=trials,
                p_B=p_b,
                rate_fraction=f,
                rate_nats_per_element=rate,
                stderr=math.sqrt(p_b * (1.0 - p_b) / trials),
                method=method,
            )
        )
    return reports
