"""Quadratic-potential random fields over disjoint cliques.

A lattice is described by its sites, a symmetric neighborhood relation,
and a partition into cliques (groups of mutually neighboring sites).
Each clique carries a quadratic potential ``(T/2) (f - mu)' S^-1 (f - mu)``;
the field density ``exp(-U/T) / Z`` uses the standard multivariate-normal
normalizer per clique, so the temperature cancels and the density of a
disjoint-clique field factors into independent Gaussian blocks.

Structures are immutable after construction and shareable across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .gaussian import factorize

__all__ = ["CliqueStructure", "gibbs_energy", "gibbs_density"]

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class CliqueStructure:
    """Sites, neighborhoods, a disjoint clique partition, and clique moments.

    Sites are arbitrary hashable labels; ``realization`` vectors are
    indexed by position in ``sites``.  Validation enforces the lattice
    axioms (no self-neighbors, symmetric neighborhoods, cliques disjoint
    and covering, members of a multi-site clique pairwise neighbors) and
    positive-definiteness of every clique covariance.
    """

    sites: tuple
    neighborhood: dict
    cliques: tuple
    temperature: float
    clique_means: tuple
    clique_covs: tuple
    _chols: tuple = field(init=False, repr=False, default=())
    _indices: tuple = field(init=False, repr=False, default=())

    def __post_init__(self):
        sites = tuple(self.sites)
        if not sites:
            raise ValueError("at least one site is required")
        if len(set(sites)) != len(sites):
            raise ValueError("site labels must be unique")
        position = {s: i for i, s in enumerate(sites)}

        neighborhood = {s: frozenset(self.neighborhood.get(s, ())) for s in sites}
        for extra in set(self.neighborhood) - set(sites):
            raise ValueError(f"neighborhood references unknown site {extra!r}")
        for s, nbrs in neighborhood.items():
            if s in nbrs:
                raise ValueError(f"site {s!r} cannot neighbor itself")
            for t in nbrs:
                if t not in position:
                    raise ValueError(f"unknown neighbor {t!r} of site {s!r}")
                if s not in neighborhood[t]:
                    raise ValueError(f"neighborhood not symmetric between {s!r} and {t!r}")

        cliques = tuple(tuple(c) for c in self.cliques)
        seen: set = set()
        for clique in cliques:
            if not clique:
                raise ValueError("empty clique")
            for s in clique:
                if s not in position:
                    raise ValueError(f"clique references unknown site {s!r}")
                if s in seen:
                    raise ValueError(f"site {s!r} appears in more than one clique")
                seen.add(s)
            for i, s in enumerate(clique):
                for t in clique[i + 1 :]:
                    if t not in neighborhood[s]:
                        raise ValueError(f"clique members {s!r} and {t!r} are not neighbors")
        if seen != set(sites):
            raise ValueError("cliques must cover every site")

        if not (self.temperature > 0.0) or not math.isfinite(self.temperature):
            raise ValueError(f"temperature must be positive, got {self.temperature!r}")
        if len(self.clique_means) != len(cliques) or len(self.clique_covs) != len(cliques):
            raise ValueError("need one mean and one covariance per clique")

        means, covs, chols, indices = [], [], [], []
        for clique, mu, cov in zip(cliques, self.clique_means, self.clique_covs):
            mu = np.array(mu, dtype=np.float64).reshape(-1)
            cov = np.atleast_2d(np.array(cov, dtype=np.float64))
            k = len(clique)
            if mu.shape[0] != k or cov.shape != (k, k):
                raise ValueError(f"clique {clique!r} moments must have dimension {k}")
            chol = factorize(cov)
            for arr in (mu, cov, chol):
                arr.setflags(write=False)
            means.append(mu)
            covs.append(cov)
            chols.append(chol)
            indices.append(np.array([position[s] for s in clique], dtype=np.intp))

        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "neighborhood", neighborhood)
        object.__setattr__(self, "cliques", cliques)
        object.__setattr__(self, "clique_means", tuple(means))
        object.__setattr__(self, "clique_covs", tuple(covs))
        object.__setattr__(self, "_chols", tuple(chols))
        object.__setattr__(self, "_indices", tuple(indices))

    @property
    def site_count(self) -> int:
        return len(self.sites)


def _realization_vector(realization, structure: CliqueStructure) -> np.ndarray:
    f = np.asarray(realization, dtype=np.float64).reshape(-1)
    if f.shape[0] != structure.site_count:
        raise ValueError(
            f"realization has {f.shape[0]} entries for {structure.site_count} sites"
        )
    return f


def gibbs_energy(realization, structure: CliqueStructure) -> float:
    """Total field energy: sum over cliques of (T/2)(f-mu)' S^-1 (f-mu)."""
    f = _realization_vector(realization, structure)
    half_t = 0.5 * structure.temperature
    energy = 0.0
    for idx, mu, chol in zip(structure._indices, structure.clique_means, structure._chols):
        w = solve_triangular(chol, f[idx] - mu, lower=True, check_finite=False)
        energy += half_t * float(w @ w)
    return energy


def gibbs_density(realization, structure: CliqueStructure) -> float:
    """Field density exp(-U/T) / Z with the per-clique Gaussian normalizer.

    Z multiplies ``(2*pi)^(k/2) |S|^(1/2)`` over cliques of size k, which
    makes the density equal the product of clique-wise multivariate normal
    densities whenever the cliques are disjoint.
    """
    energy = gibbs_energy(realization, structure)
    log_norm = 0.0
    for clique, chol in zip(structure.cliques, structure._chols):
        log_norm += 0.5 * len(clique) * _LOG_2PI + float(np.sum(np.log(np.diag(chol))))
    return math.exp(-energy / structure.temperature - log_norm)
