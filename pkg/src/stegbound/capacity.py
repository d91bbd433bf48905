"""Maximum embedding rate, optimal message distribution, and error floors.

For a cover with n elements and a total-variation budget epsilon, the
divergence budget is ``2 * epsilon**2`` nats, the embedding factor is the
root a >= 1 of ``a - ln(a) = 1 + 4*epsilon**2/n``, and the maximal
mutual information between stego and message is ``(n/2) ln(a)`` nats.
All rates are kept in nats internally; bits appear only in reporting
fields (conversion by ln 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InconsistentBudgetError
from .gaussian import GaussianModel
from .special import embedding_factor

__all__ = [
    "EmbeddingBound",
    "PeBound",
    "message_params",
    "max_rate",
    "srl_bound",
    "pe_floor",
    "factor_range",
    "payload_curve",
]


@dataclass(frozen=True)
class EmbeddingBound:
    """Resolved rate bound for (n, epsilon).

    ``rate_nats`` is the total mutual-information bound (n/2) ln(a);
    ``rate_bits_per_element`` is the same quantity per element in bits;
    ``srl_nats`` is the square-root-law ceiling 2*sqrt(2)*eps*sqrt(n),
    strictly above ``rate_nats`` whenever epsilon > 0.
    """

    n: int
    epsilon: float
    u: float
    a: float
    rate_nats: float
    rate_bits_per_element: float
    srl_nats: float


@dataclass(frozen=True)
class PeBound:
    """Detector error floor and/or admissible embedding-factor range.

    :func:`pe_floor` fills the floor part, :func:`factor_range` fills the
    (a_low, a_high) part; unused fields stay None.
    """

    p_e_floor: float | None = None
    p_E_floor: float | None = None
    a_low: float | None = None
    a_high: float | None = None


def _validate_n(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return int(n)


def _validate_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not math.isfinite(epsilon) or epsilon < 0.0:
        raise ValueError(f"epsilon must be finite and >= 0, got {epsilon!r}")
    return epsilon


def message_params(cover: GaussianModel, epsilon: float) -> GaussianModel:
    """Optimal message distribution for a cover and budget epsilon.

    Zero mean with covariance ``(a - 1) * cover.cov``; the resulting
    stego covariance ``a * cover.cov`` meets the divergence budget
    ``2 * epsilon**2`` with equality.  ``epsilon = 0`` yields the all-zero
    covariance, flagged ``degenerate`` on the returned model.
    """
    epsilon = _validate_epsilon(epsilon)
    if cover.degenerate:
        raise ValueError("cover model must be nondegenerate")
    fac = embedding_factor(4.0 * epsilon * epsilon / cover.n)
    return GaussianModel(np.zeros(cover.n), fac.delta * cover.cov)


def max_rate(n: int, epsilon: float) -> EmbeddingBound:
    """Maximum achievable embedding rate for n cover elements at budget epsilon."""
    n = _validate_n(n)
    epsilon = _validate_epsilon(epsilon)
    u = 4.0 * epsilon * epsilon / n
    fac = embedding_factor(u)
    rate_nats = 0.5 * n * math.log1p(fac.delta)
    return EmbeddingBound(
        n=n,
        epsilon=epsilon,
        u=u,
        a=fac.a,
        rate_nats=rate_nats,
        rate_bits_per_element=rate_nats / (n * math.log(2.0)),
        srl_nats=srl_bound(n, epsilon),
    )


def srl_bound(n: int, epsilon: float) -> float:
    """Square-root-law ceiling 2*sqrt(2)*epsilon*sqrt(n) in nats."""
    n = _validate_n(n)
    epsilon = _validate_epsilon(epsilon)
    return 2.0 * math.sqrt(2.0) * epsilon * math.sqrt(n)


def pe_floor(kl_nats: float) -> PeBound:
    """Error floor implied by a divergence of ``kl_nats``.

    Any detector's total error alpha + beta is at least
    ``1 - sqrt(kl/2)`` (clamped at 0); the average-error floor is half
    that.  A divergence of zero pins total error at 1 (coin flipping).
    """
    kl_nats = float(kl_nats)
    if not math.isfinite(kl_nats) or kl_nats < 0.0:
        raise ValueError(f"divergence must be finite and >= 0, got {kl_nats!r}")
    floor = max(0.0, 1.0 - math.sqrt(0.5 * kl_nats))
    return PeBound(p_e_floor=floor, p_E_floor=0.5 * floor)


def factor_range(n: int, p_E: float, epsilon: float) -> PeBound:
    """Admissible embedding-factor range for an average-error target p_E.

    ``a_low`` comes from the budget implied by the error target
    (``u = 4 (1 - 2 p_E)**2 / n``), ``a_high`` from the stated epsilon.
    Raises :class:`InconsistentBudgetError` when the target demands more
    distortion than the budget allows (a_low > a_high).
    """
    n = _validate_n(n)
    epsilon = _validate_epsilon(epsilon)
    p_E = float(p_E)
    if not (0.0 <= p_E <= 0.5):
        raise ValueError(f"p_E must lie in [0, 0.5], got {p_E!r}")
    spread = 1.0 - 2.0 * p_E
    u_low = 4.0 * spread * spread / n
    u_high = 4.0 * epsilon * epsilon / n
    if u_low > u_high:
        raise InconsistentBudgetError(
            f"error target p_E={p_E} needs budget {spread:.6g} > epsilon={epsilon:.6g}"
        )
    return PeBound(a_low=embedding_factor(u_low).a, a_high=embedding_factor(u_high).a)


def payload_curve(n: int, p_E_grid) -> list[tuple[float, float]]:
    """Upper-bound payload in bits per element over a grid of error targets.

    For each p_E the payload is ``ln(a_low) / (2 ln 2)`` with a_low from
    the error-target budget; the curve decreases monotonically to 0 at
    p_E = 0.5.
    """
    n = _validate_n(n)
    rows = []
    for p_E in p_E_grid:
        p_E = float(p_E)
        if not (0.0 <= p_E <= 0.5):
            raise ValueError(f"p_E grid values must lie in [0, 0.5], got {p_E!r}")
        spread = 1.0 - 2.0 * p_E
        fac = embedding_factor(4.0 * spread * spread / n)
        rows.append((p_E, math.log1p(fac.delta) / (2.0 * math.log(2.0))))
    return rows
