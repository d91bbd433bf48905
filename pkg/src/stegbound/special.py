"""Real-branch Lambert W machinery for the embedding factor.

The stego covariance scale ("embedding factor") is the unique root
a >= 1 of

    a - ln(a) = 1 + u,        u >= 0,

equivalently ``-W_{-1}(-exp(-u - 1))`` on the secondary real branch of
the Lambert W function.  The solver iterates on ``d = a - 1`` with
``log1p`` so that accuracy survives the near-degenerate regime
``u -> 0`` where ``a - ln(a) - 1`` suffers catastrophic cancellation.

All functions are pure and safe to call from any number of threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "EmbeddingFactor",
    "embedding_factor",
    "embedding_factor_reverse",
    "lambert_wm1",
    "sandwich_bounds",
]

# Roundoff grace at the branch point: float(-1/e) may land a hair past the
# exact branch point, which must still map to w = -1.
_BRANCH_GRACE = 1e-12


@dataclass(frozen=True)
class EmbeddingFactor:
    """A solved budget/factor pair with ``a - ln(a) = 1 + u``.

    ``delta`` carries ``a - 1`` at full precision; consumers that need
    ``ln(a)`` for tiny budgets should use ``log1p(delta)``.
    """

    u: float
    a: float
    delta: float

    @property
    def residual(self) -> float:
        """Defect ``a - ln(a) - 1 - u`` of the stored root."""
        return self.delta - math.log1p(self.delta) - self.u


def sandwich_bounds(u: float) -> tuple[float, float]:
    """Open bracket ``(lo, hi)`` enclosing the embedding factor for u > 0.

    lo = 1 + sqrt(2u) + (2/3)u and hi = 1 + sqrt(2u) + u; the factor lies
    strictly between them for every positive budget.
    """
    if not (u > 0.0) or not math.isfinite(u):
        raise ValueError(f"bracket requires a positive finite budget, got {u!r}")
    s = math.sqrt(2.0 * u)
    return 1.0 + s + (2.0 / 3.0) * u, 1.0 + s + u


def _solve_delta(u: float) -> float:
    # Halley iteration on g(d) = d - log1p(d) - u in d = a - 1.
    # g' = d/(1+d), g'' = 1/(1+d)^2.
    s = math.sqrt(2.0 * u)
    if u < 1e-3:
        # Branch-point series a = 1 + s + s^2/3 + s^3/36 + O(s^4).
        d = s * (1.0 + s * (1.0 / 3.0 + s * (1.0 / 36.0)))
    else:
        # Midpoint of the sandwich bracket.
        d = s + (5.0 / 6.0) * u
    for _ in range(50):
        one_d = 1.0 + d
        g = d - math.log1p(d) - u
        gp = d / one_d
        gpp = 1.0 / (one_d * one_d)
        step = 2.0 * g * gp / (2.0 * gp * gp - g * gpp)
        d -= step
        if abs(step) <= 1e-15 * d:
            break
    return d


def embedding_factor(u: float) -> EmbeddingFactor:
    """Solve ``a - ln(a) = 1 + u`` for the embedding factor a >= 1.

    ``u = 0`` is answered exactly with a = 1 (no embedding).  Raises
    ValueError for negative or non-finite budgets.
    """
    u = float(u)
    if not math.isfinite(u) or u < 0.0:
        raise ValueError(f"budget must be finite and >= 0, got {u!r}")
    if u == 0.0:
        return EmbeddingFactor(0.0, 1.0, 0.0)
    d = _solve_delta(u)
    return EmbeddingFactor(u, 1.0 + d, d)


def embedding_factor_reverse(u: float) -> float:
    """Root a >= 1 of the swapped-divergence equation ``1/a + ln(a) = 1 + u``.

    Diagnostic companion to :func:`embedding_factor`; rate bounds use the
    forward form only.  The two roots agree at u = 0 and diverge as the
    budget grows.
    """
    u = float(u)
    if not math.isfinite(u) or u < 0.0:
        raise ValueError(f"budget must be finite and >= 0, got {u!r}")
    if u > 700.0:
        # The reverse root grows like exp(1 + u) and leaves float range.
        raise ValueError(f"reverse root overflows for budget {u!r}")
    if u == 0.0:
        return 1.0

    def h(a: float) -> float:
        return 1.0 / a + math.log(a) - 1.0 - u

    lo = 1.0
    hi = 1.0 + math.sqrt(2.0 * u) + u
    while h(hi) < 0.0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if h(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return 0.5 * (lo + hi)


def lambert_wm1(x: float) -> float:
    """W_{-1}(x) for -1/e < x < 0: the real solution w <= -1 of w*exp(w) = x.

    The branch point maps to exactly -1; arguments outside (-1/e, 0) raise
    ValueError (either the branch is undefined there or the principal
    branch would apply).
    """
    x = float(x)
    if not math.isfinite(x) or x >= 0.0:
        raise ValueError(f"W_-1 requires x in (-1/e, 0), got {x!r}")
    u = -1.0 - math.log(-x)
    if u < 0.0:
        if u < -_BRANCH_GRACE:
            raise ValueError(f"W_-1 requires x in (-1/e, 0), got {x!r} below the branch point")
        u = 0.0
    return -embedding_factor(u).a
