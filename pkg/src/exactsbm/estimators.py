"""Estimating the latent block assignment.

Two estimators feed the latent-block test: a point estimate by regularized
spectral clustering, and a posterior over assignments from a collapsed Gibbs
sampler for the ER-SBM.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graph import BlockAssignment, Graph


@dataclass
class AssignmentDistribution:
    """Weighted block assignments, merged up to relabeling and sorted by weight.

    Each assignment is stored in canonical form (blocks numbered by first
    occurrence). Ties in weight are broken by the assignment vector.
    """

    atoms: list
    provenance: str = "given"

    def __post_init__(self):
        merged: dict = {}
        for z, w in self.atoms:
            if w <= 0:
                raise ValueError("assignment weights must be positive")
            c = z.canonical()
            merged[c] = merged.get(c, 0.0) + float(w)
        if not merged:
            raise ValueError("an assignment distribution needs at least one atom")
        total = sum(merged.values())
        atoms = [(z, w / total) for z, w in merged.items()]
        atoms.sort(key=lambda a: (-a[1], a[0].key()))
        self.atoms = atoms

    @classmethod
    def point(cls, z: BlockAssignment) -> "AssignmentDistribution":
        return cls([(z, 1.0)], provenance="point")

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    @property
    def mode(self) -> BlockAssignment:
        return self.atoms[0][0]

    def truncated(self, threshold: float) -> "AssignmentDistribution":
        """Drop atoms with weight at or below ``threshold`` and renormalize.

        If that would drop everything the distribution is returned unchanged.
        """
        kept = [(z, w) for z, w in self.atoms if w > threshold]
        return AssignmentDistribution(kept or self.atoms, self.provenance)

    def top(self, m: int | None) -> "AssignmentDistribution":
        if m is None or m >= len(self.atoms):
            return self
        return AssignmentDistribution(self.atoms[:m], self.provenance)

    def to_json(self) -> list:
        return [{"z": [int(x) + 1 for x in z.z], "weight": w} for z, w in self.atoms]

    @classmethod
    def from_json(cls, data, k: int | None = None) -> "AssignmentDistribution":
        if isinstance(data, str):
            data = json.loads(data)
        atoms = [(BlockAssignment([x - 1 for x in rec["z"]], k=k), rec["weight"]) for rec in data]
        return cls(atoms)


def regularized_laplacian(adj: np.ndarray, tau: float = 0.25) -> np.ndarray:
    n = adj.shape[0]
    a = adj.astype(float)
    dbar = a.sum() / n
    a = a + tau * dbar / n
    d = a.sum(axis=1)
    inv = np.where(d > 0, 1.0 / np.sqrt(np.where(d > 0, d, 1.0)), 0.0)
    return inv[:, None] * a * inv[None, :]


def spectral_estimate(g: Graph, k: int, tau: float = 0.25, restarts: int = 20,
                      rng=None) -> AssignmentDistribution:
    """Regularized spectral clustering returned as a single-atom distribution."""
    from sklearn.cluster import KMeans

    if k < 1:
        raise ValueError("k must be at least 1")
    if k > g.n:
        raise ValueError(f"cannot split {g.n} nodes into {k} blocks")
    if k == 1:
        return AssignmentDistribution.point(BlockAssignment(np.zeros(g.n, dtype=int), k=1))
    if g.num_edges == 0:
        raise ValueError("spectral clustering of an empty graph has no signal")
    lap = regularized_laplacian(g.adjacency(), tau)
    vals, vecs = np.linalg.eigh(lap)
    x = vecs[:, np.argsort(vals)[::-1][:k]]
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    x = x / np.where(norms > 0, norms, 1.0)
    seed = int(np.random.default_rng(rng).integers(0, 2**31 - 1))
    labels = KMeans(n_clusters=k, n_init=restarts, random_state=seed).fit_predict(x)
    return AssignmentDistribution.point(BlockAssignment(labels, k=k))


def gibbs_draws(g: Graph, k: int, iterations: int = 2000, burn_in: int = 500, rng=None,
                alpha0: float = 1.0, init: BlockAssignment | None = None) -> np.ndarray:
    """Raw assignment draws (one row per sweep) from the collapsed Gibbs sampler."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if iterations < 1 or burn_in < 0:
        raise ValueError("iterations must be positive and burn_in nonnegative")
    gen = np.random.default_rng(rng)
    z0 = gen.integers(0, k, size=g.n) if init is None else np.array(init.z)
    seed = int(gen.integers(0, 2**62))
    return _kernels.gibbs_kernel(g.adjacency(), z0.astype(np.int64), k, int(iterations),
                                 int(burn_in), seed, float(alpha0))


def gibbs_posterior(g: Graph, k: int, iterations: int = 2000, burn_in: int = 500, rng=None,
                    alpha0: float = 1.0, threshold: float | None = None) -> AssignmentDistribution:
    """Posterior over block assignments as empirical frequencies of Gibbs draws.

    ``threshold`` defaults to ``1 / iterations``: assignments drawn only once
    are dropped before renormalizing. Pass ``0`` to keep every draw.
    """
    draws = gibbs_draws(g, k, iterations, burn_in, rng, alpha0)
    counts: dict = {}
    for row in draws:
        z = BlockAssignment(row, k=k).canonical()
        counts[z] = counts.get(z, 0) + 1
    dist = AssignmentDistribution(list(counts.items()), provenance="posterior")
    if threshold is None:
        threshold = 1.0 / iterations
    return dist.truncated(threshold) if threshold > 0 else dist
