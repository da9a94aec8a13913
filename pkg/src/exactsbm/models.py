"""Edge-probability parametrizations and maximum likelihood fits for the three block models."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import EmptyBlockError, NonexistenceError, UndefinedParameterError
from .graph import (BlockAssignment, Graph, _check, block_edge_matrix, block_pairs,
                    dyad_endpoints, num_dyads, pair_index)

#: |parameter| beyond which a Newton iterate counts as divergent
DIVERGENCE_CAP = 30.0


def _as_symmetric(m, name: str) -> np.ndarray:
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix")
    if not np.allclose(a, a.T, equal_nan=True):
        raise ValueError(f"{name} must be symmetric")
    return a


@dataclass(frozen=True, eq=False)
class ErParams:
    """Block-pair edge probabilities ``Q``; NaN marks an entry the data cannot determine."""

    Q: np.ndarray

    def __post_init__(self):
        q = _as_symmetric(self.Q, "Q")
        finite = q[~np.isnan(q)]
        if np.any((finite < 0) | (finite > 1)):
            raise ValueError("edge probabilities must lie in [0, 1]")
        q.setflags(write=False)
        object.__setattr__(self, "Q", q)

    @property
    def k(self) -> int:
        return self.Q.shape[0]

    def q(self, i: int, j: int) -> float:
        value = self.Q[i, j]
        if np.isnan(value):
            raise UndefinedParameterError(f"q[{i},{j}] is undefined (block pair has no dyads)")
        return float(value)

    def to_json(self) -> dict:
        return {"model": "er", "Q": [[None if np.isnan(x) else float(x) for x in row] for row in self.Q]}


@dataclass(frozen=True, eq=False)
class AddParams:
    alpha: np.ndarray

    def __post_init__(self):
        a = np.array(self.alpha, dtype=float).reshape(-1)
        if not np.all(np.isfinite(a)):
            raise ValueError("additive block parameters must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "alpha", a)

    @property
    def k(self) -> int:
        return self.alpha.shape[0]

    def to_json(self) -> dict:
        return {"model": "add", "alpha": self.alpha.tolist()}


@dataclass(frozen=True, eq=False)
class BetaParams:
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        a = _as_symmetric(self.alpha, "alpha")
        b = np.array(self.beta, dtype=float).reshape(-1)
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("beta-SBM parameters must be finite")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def k(self) -> int:
        return self.alpha.shape[0]

    def to_json(self) -> dict:
        return {"model": "beta", "alpha": self.alpha.tolist(), "beta": self.beta.tolist()}


def params_from_json(data: dict):
    model = data.get("model")
    if model == "er":
        return ErParams(np.array([[np.nan if x is None else x for x in row] for row in data["Q"]]))
    if model == "add":
        return AddParams(data["alpha"])
    if model == "beta":
        return BetaParams(data["alpha"], data["beta"])
    raise ValueError(f"unknown parameter model {model!r}")


def edge_prob(params, z: BlockAssignment, u: int, v: int) -> float:
    if u == v:
        raise ValueError("edge probability is undefined for a self-loop")
    i, j = int(z.z[u]), int(z.z[v])
    if isinstance(params, ErParams):
        return params.q(i, j)
    if isinstance(params, AddParams):
        return float(expit(params.alpha[i] + params.alpha[j]))
    if isinstance(params, BetaParams):
        return float(expit(params.alpha[i, j] + params.beta[u] + params.beta[v]))
    raise TypeError(f"unsupported parameter type {type(params).__name__}")


def dyad_probabilities(params, z: BlockAssignment) -> np.ndarray:
    """Symmetric ``n x n`` matrix of edge probabilities, zero on the diagonal."""
    zz = z.z
    if isinstance(params, ErParams):
        p = params.Q[np.ix_(zz, zz)].copy()
    elif isinstance(params, AddParams):
        a = params.alpha[zz]
        p = expit(a[:, None] + a[None, :])
    elif isinstance(params, BetaParams):
        if params.beta.shape[0] != z.n:
            raise ValueError("beta vector length must equal the node count")
        b = params.beta
        p = expit(params.alpha[np.ix_(zz, zz)] + b[:, None] + b[None, :])
    else:
        raise TypeError(f"unsupported parameter type {type(params).__name__}")
    np.fill_diagonal(p, 0.0)
    return p


def _require_nonempty(z: BlockAssignment) -> None:
    empty = z.empty_blocks()
    if empty:
        raise EmptyBlockError(f"blocks {empty} are empty")


def pair_dyad_counts(sizes) -> np.ndarray:
    """``k x k`` matrix of dyad counts per block pair: ``n_i n_j`` off the diagonal, ``C(n_i, 2)`` on it."""
    s = np.asarray(sizes, dtype=np.int64)
    n = np.outer(s, s)
    n[np.diag_indices_from(n)] = s * (s - 1) // 2
    return n


def mle_er(g: Graph, z: BlockAssignment) -> ErParams:
    """Block-pair edge densities. Diagonal entries of singleton blocks are NaN."""
    _check(g, z)
    _require_nonempty(z)
    counts = block_edge_matrix(g, z).astype(float)
    dyads = pair_dyad_counts(z.sizes()).astype(float)
    with np.errstate(invalid="ignore", divide="ignore"):
        q = np.where(dyads > 0, counts / np.where(dyads > 0, dyads, 1), np.nan)
    return ErParams(q)


def mle_add(g: Graph, z: BlockAssignment) -> np.ndarray:
    """The additive-model estimate ``m_ij / C(n, 2)``.

    ``m_ij`` is the double sum of ``g_uv`` over ``u in B_i``, ``v in B_j``, so
    a within-block edge counts twice on the diagonal.
    """
    _check(g, z)
    if g.n < 2:
        raise ValueError("the additive estimate needs at least two nodes")
    oh = z.onehot()
    m = oh.T @ g.adjacency().astype(np.int64) @ oh
    return m / num_dyads(g.n)


def _beta_design(z: BlockAssignment):
    """Dyad design matrix for the beta-SBM with one beta per block pinned to zero.

    Returns the matrix, the active block-pair indices, and the free node indices.
    """
    n, k = z.n, z.k
    iu, iv = dyad_endpoints(n)
    zz = z.z
    pidx = np.array([pair_index(a, b, k) for a, b in zip(zz[iu], zz[iv])], dtype=np.int64)
    active = np.unique(pidx)
    col_of_pair = {int(c): i for i, c in enumerate(active)}
    pinned = {int(z.members(i)[0]) for i in range(k) if z.sizes()[i] > 0}
    free = np.array([u for u in range(n) if u not in pinned], dtype=np.int64)
    col_of_node = {int(u): len(active) + i for i, u in enumerate(free)}
    x = np.zeros((iu.shape[0], len(active) + len(free)))
    rows = np.arange(iu.shape[0])
    x[rows, [col_of_pair[int(c)] for c in pidx]] = 1.0
    for end in (iu, iv):
        for r, u in zip(rows, end):
            c = col_of_node.get(int(u))
            if c is not None:
                x[r, c] = 1.0
    return x, active, free


def _bernoulli_loglik(eta: np.ndarray, y: np.ndarray) -> float:
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def mle_beta(g: Graph, z: BlockAssignment, tol: float = 1e-8, max_iter: int = 200,
             cap: float = DIVERGENCE_CAP) -> BetaParams:
    """Maximum likelihood fit of the beta-SBM by damped Newton ascent.

    Converged parameters reproduce the observed block-pair edge counts and the
    degree sequence to within ``tol``. The betas are normalized to sum to zero
    within every block. Raises :class:`NonexistenceError` when the iterates run
    past ``cap`` or stop improving, which happens exactly when the observed
    statistic sits on the boundary of the model polytope.
    """
    _check(g, z)
    _require_nonempty(z)
    x, active, free = _beta_design(z)
    y = g.dyads.astype(float)
    theta = np.zeros(x.shape[1])
    converged = False
    for _ in range(max_iter):
        eta = x @ theta
        p = expit(eta)
        grad = x.T @ (y - p)
        w = p * (1.0 - p)
        hess = x.T @ (x * w[:, None])
        step = np.linalg.lstsq(hess, grad, rcond=1e-14)[0]
        if np.max(np.abs(grad), initial=0.0) < tol and np.max(np.abs(step), initial=0.0) < 1e-6:
            converged = True
            break
        base = _bernoulli_loglik(eta, y)
        t = 1.0
        for _ in range(40):
            cand = theta + t * step
            if _bernoulli_loglik(x @ cand, y) >= base:
                break
            t *= 0.5
        else:
            raise NonexistenceError("beta-SBM likelihood stopped improving before the moments matched")
        theta = cand
        if np.max(np.abs(theta), initial=0.0) > cap:
            raise NonexistenceError("beta-SBM Newton iterates diverged; the MLE does not exist")
    if not converged:
        raise NonexistenceError(f"beta-SBM fit did not converge in {max_iter} iterations")

    k, n = z.k, z.n
    alpha = np.zeros((k, k))
    pairs = block_pairs(k)
    for col, c in enumerate(active):
        a, b = pairs[int(c)]
        alpha[a, b] = alpha[b, a] = theta[col]
    beta = np.zeros(n)
    beta[free] = theta[len(active):]
    # shift each block's betas to mean zero and push the offset into alpha
    shift = np.array([beta[z.members(i)].mean() for i in range(k)])
    beta -= shift[z.z]
    alpha += shift[:, None] + shift[None, :]
    return BetaParams(alpha, beta)


def loglik(g: Graph, z: BlockAssignment, params) -> float:
    """Bernoulli log-likelihood over all dyads; ``-inf`` when a 0/1 probability contradicts ``g``."""
    _check(g, z)
    p = dyad_probabilities(params, z)
    iu, iv = dyad_endpoints(g.n)
    pd = p[iu, iv]
    y = g.dyads.astype(bool)
    if np.any(np.isnan(pd)):
        raise UndefinedParameterError("parameters leave some dyad probability undefined")
    if np.any(y & (pd == 0.0)) or np.any(~y & (pd == 1.0)):
        return -math.inf
    with np.errstate(divide="ignore"):
        terms = np.where(y, np.log(np.where(y, pd, 1.0)), np.log1p(-np.where(y, 0.0, pd)))
    return float(terms.sum())
