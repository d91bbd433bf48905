"""Shared test oracles and fixture builders.

The bisection oracle here is deliberately independent of the package's
Halley solver: it brackets the root with the sandwich bounds and halves
its way down, so it can certify the production path.
"""

import math

import mpmath as mp
import numpy as np

from stegbound import GaussianModel


def bisect_embedding_factor(u: float, dps: int = 50) -> float:
    """Bisection oracle for the root a >= 1 of a - ln(a) = 1 + u.

    Runs in mpmath arithmetic: near u = 0 the bracket endpoints differ
    from the root by O(u**2), which float64 cannot resolve but 50 digits
    can, so the sandwich bracket stays certified down to u = 1e-12.
    """
    if u == 0.0:
        return 1.0
    with mp.workdps(dps):
        uu = mp.mpf(u)
        s = mp.sqrt(2 * uu)
        lo = 1 + s + 2 * uu / 3
        hi = 1 + s + uu

        def g(a):
            return a - mp.log(a) - 1 - uu

        assert g(lo) < 0 < g(hi), "sandwich bracket must straddle the root"
        for _ in range(200):
            mid = (lo + hi) / 2
            if g(mid) < 0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= mp.mpf("1e-30") * mid:
                break
        return float((lo + hi) / 2)


def bisect_reverse_factor(u: float, dps: int = 50) -> float:
    """Bisection oracle for the root a >= 1 of 1/a + ln(a) = 1 + u."""
    if u == 0.0:
        return 1.0
    with mp.workdps(dps):
        uu = mp.mpf(u)

        def h(a):
            return 1 / a + mp.log(a) - 1 - uu

        lo, hi = mp.mpf(1), mp.mpf(2)
        while h(hi) < 0:
            hi *= 2
        for _ in range(200):
            mid = (lo + hi) / 2
            if h(mid) < 0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= mp.mpf("1e-30") * mid:
                break
        return float((lo + hi) / 2)


def epsilon_for_factor(a: float, n: int) -> float:
    """Budget epsilon that makes the embedding factor equal a for n elements."""
    u = a - math.log(a) - 1.0
    return math.sqrt(u * n) / 2.0


def random_pd_cov(rng: np.random.Generator, n: int) -> np.ndarray:
    """Well-conditioned random symmetric positive-definite matrix."""
    a = rng.standard_normal((n, n))
    return a @ a.T / n + np.diag(rng.uniform(0.5, 1.5, n))


def toeplitz_cover(n: int, rho: float = 0.6, scale: float = 1.0) -> GaussianModel:
    """Zero-mean cover with covariance scale * rho**|i-j| (correlated for n > 1)."""
    idx = np.arange(n)
    cov = scale * rho ** np.abs(idx[:, None] - idx[None, :])
    return GaussianModel(np.zeros(n), cov)


def random_disjoint_structure(rng, n_cliques=4, max_size=3, temperature=None):
    """Random disjoint-clique field with sizes 1..max_size and PD covariances."""
    from stegbound import CliqueStructure

    sizes = [int(rng.integers(1, max_size + 1)) for _ in range(n_cliques)]
    sites = list(range(sum(sizes)))
    cliques, means, covs = [], [], []
    neighborhood = {s: set() for s in sites}
    pos = 0
    for size in sizes:
        group = tuple(sites[pos : pos + size])
        pos += size
        cliques.append(group)
        for s in group:
            neighborhood[s] = set(group) - {s}
        means.append(rng.standard_normal(size))
        covs.append(random_pd_cov(rng, size))
    return CliqueStructure(
        sites=tuple(sites),
        neighborhood={s: frozenset(v) for s, v in neighborhood.items()},
        cliques=tuple(cliques),
        temperature=temperature if temperature is not None else float(rng.uniform(0.2, 5.0)),
        clique_means=tuple(means),
        clique_covs=tuple(covs),
    )


def pgm_bytes(width: int, height: int, maxval: int, pixels: np.ndarray) -> bytes:
    """Hand-rolled P5 serializer (independent of the package's save_pgm)."""
    header = f"P5\n{width} {height}\n{maxval}\n".encode()
    arr = np.asarray(pixels, dtype=np.uint16).reshape(height, width)
    if maxval > 255:
        return header + arr.astype(">u2").tobytes()
    return header + arr.astype(np.uint8).tobytes()
