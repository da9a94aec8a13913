"""Goodness-of-fit statistics.

Both statistics come in a single-graph form and a batch form that takes a
stack of packed dyad vectors (one row per sampled graph), which is what the
fiber walk emits.
"""

from __future__ import annotations

import numpy as np

from .graph import BlockAssignment, Graph, _check, dyad_endpoints

CHI2_BC = "chi2_bc"
CHI2_PEARSON = "chi2_pearson"


def _as_batch(states: np.ndarray) -> np.ndarray:
    s = np.asarray(states)
    return s[None, :] if s.ndim == 1 else s


def block_degree_batch(states: np.ndarray, z: BlockAssignment) -> np.ndarray:
    """``m[s, u, i]`` for every packed graph ``s`` in the batch."""
    s = _as_batch(states)
    n = z.n
    iu, iv = dyad_endpoints(n)
    adj = np.zeros((s.shape[0], n, n), dtype=np.float64)
    adj[:, iu, iv] = s
    adj[:, iv, iu] = s
    return np.rint(adj @ z.onehot().astype(np.float64)).astype(np.int64)


def expected_block_degrees(qhat, z: BlockAssignment) -> np.ndarray:
    """``n_i * qhat[z(u), i]`` for every node ``u`` and block ``i``.

    The own-block count uses ``n_i`` rather than ``n_i - 1``.
    """
    q = np.asarray(qhat, dtype=float)
    return z.sizes()[None, :] * q[z.z, :]


def _zero_cell_policy(on_zero: str, bad: np.ndarray, message: str) -> None:
    if on_zero not in ("raise", "inf"):
        raise ValueError(f"on_zero must be 'raise' or 'inf', got {on_zero!r}")
    if on_zero == "raise" and np.any(bad):
        raise ValueError(message)


def chi2_bc_batch(states: np.ndarray, z: BlockAssignment, qhat, on_zero: str = "raise") -> np.ndarray:
    """Batch chi2_bc. With ``on_zero="inf"`` a graph that puts edges where the
    fit expects none scores ``inf`` instead of raising."""
    expected = expected_block_degrees(qhat, z)
    finite = expected[~np.isnan(expected)]
    if np.any((finite < 0)):
        raise ValueError("qhat entries must be nonnegative")
    m = block_degree_batch(states, z).astype(float)
    zero = (expected == 0) | np.isnan(expected)
    bad = np.any(m[:, zero] > 0, axis=1)
    _zero_cell_policy(on_zero, bad, "zero expected count with a positive observed count")
    safe = np.where(zero, 1.0, expected)
    terms = np.where(zero[None], 0.0, (m - expected[None]) ** 2 / safe[None])
    return np.where(bad, np.inf, terms.sum(axis=(1, 2)))


def chi2_bc(g: Graph, z: BlockAssignment, qhat) -> float:
    """Block-corrected chi-square: sum over nodes and blocks of (m_ui - n_i q)^2 / (n_i q).

    Cells with zero expected count and zero observed count contribute 0.
    """
    _check(g, z)
    return float(chi2_bc_batch(g.dyads, z, qhat)[0])


def chi2_pearson_batch(states: np.ndarray, fitted: np.ndarray, on_zero: str = "raise") -> np.ndarray:
    s = _as_batch(states).astype(float)
    p = np.asarray(fitted, dtype=float)
    if p.ndim == 2:
        iu, iv = dyad_endpoints(p.shape[0])
        p = p[iu, iv]
    if np.any(np.isnan(p)):
        raise ValueError("fitted probabilities contain NaN")
    zero = p == 0
    bad = np.any(s[:, zero] > 0, axis=1)
    _zero_cell_policy(on_zero, bad, "zero fitted probability on an observed edge")
    safe = np.where(zero, 1.0, p)
    terms = np.where(zero[None], 0.0, (p[None] - s) ** 2 / safe[None])
    return np.where(bad, np.inf, terms.sum(axis=1))


def chi2_pearson(g: Graph, z: BlockAssignment, fitted) -> float:
    """Pearson chi-square over dyads, sum of (p_uv - g_uv)^2 / p_uv.

    ``fitted`` is an ``n x n`` probability matrix or a packed dyad vector.
    """
    _check(g, z)
    return float(chi2_pearson_batch(g.dyads, fitted)[0])
