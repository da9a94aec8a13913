"""Graphs, block assignments and the sufficient statistics of the three block models.

Nodes are 0-based everywhere in the Python API. Files on disk use 1-based labels
(see :mod:`exactsbm.io`).

A graph on ``n`` nodes is stored as a packed vector over the ``n(n-1)/2`` dyads
``{u, v}``, ``u < v``, in row-major upper-triangular order: ``(0,1), (0,2), ...,
(0,n-1), (1,2), ...``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError


class Model(str, enum.Enum):
    ER = "er"
    ADD = "add"
    BETA = "beta"

    @classmethod
    def parse(cls, value) -> "Model":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"er": cls.ER, "er-sbm": cls.ER, "sbm": cls.ER,
                   "add": cls.ADD, "additive": cls.ADD,
                   "beta": cls.BETA, "beta-sbm": cls.BETA}
        if key not in aliases:
            raise ValueError(f"unknown model {value!r}; expected one of er, add, beta")
        return aliases[key]


def num_dyads(n: int) -> int:
    return n * (n - 1) // 2


def dyad_index(u: int, v: int, n: int) -> int:
    """Position of dyad ``{u, v}`` in the packed vector."""
    if u == v:
        raise ValueError("self-loops are not dyads")
    if u > v:
        u, v = v, u
    return u * n - u * (u + 1) // 2 + (v - u - 1)


@lru_cache(maxsize=64)
def _triu(n: int):
    iu, iv = np.triu_indices(n, k=1)
    iu.setflags(write=False)
    iv.setflags(write=False)
    return iu, iv


def dyad_endpoints(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Arrays ``(u, v)`` of dyad endpoints in packed order."""
    return _triu(n)


class Graph:
    """Simple undirected graph, immutable once built."""

    __slots__ = ("_n", "_dyads", "_hash")

    def __init__(self, n: int, dyads=None):
        n = int(n)
        if n < 1:
            raise ValueError("a graph needs at least one node")
        d = num_dyads(n)
        if dyads is None:
            arr = np.zeros(d, dtype=np.uint8)
        else:
            arr = np.array(dyads, dtype=np.uint8).reshape(-1)
            if arr.shape[0] != d:
                raise DimensionError(f"expected {d} dyads for n={n}, got {arr.shape[0]}")
            if arr.size and arr.max() > 1:
                raise ValueError("dyad entries must be 0 or 1")
        arr.setflags(write=False)
        self._n = n
        self._dyads = arr
        self._hash = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        arr = np.zeros(num_dyads(n), dtype=np.uint8)
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) has a node outside 0..{n - 1}")
            arr[dyad_index(u, v, n)] = 1
        return cls(n, arr)

    @classmethod
    def from_adjacency(cls, adj) -> "Graph":
        a = np.asarray(adj)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError("adjacency matrix must be square")
        if np.any(np.diag(a) != 0):
            raise ValueError("self-loops are not allowed")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency matrix must be symmetric")
        iu, iv = _triu(a.shape[0])
        return cls(a.shape[0], (a[iu, iv] != 0).astype(np.uint8))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, np.ones(num_dyads(n), dtype=np.uint8))

    @property
    def n(self) -> int:
        return self._n

    @property
    def dyads(self) -> np.ndarray:
        """Read-only packed 0/1 dyad vector."""
        return self._dyads

    @property
    def num_edges(self) -> int:
        return int(self._dyads.sum())

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self._dyads[dyad_index(u, v, self._n)])

    def edges(self) -> list[tuple[int, int]]:
        iu, iv = _triu(self._n)
        idx = np.flatnonzero(self._dyads)
        return [(int(iu[i]), int(iv[i])) for i in idx]

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self._n, self._n), dtype=np.uint8)
        iu, iv = _triu(self._n)
        a[iu, iv] = self._dyads
        a[iv, iu] = self._dyads
        return a

    def degrees(self) -> np.ndarray:
        return self.adjacency().sum(axis=1).astype(np.int64)

    def with_dyads(self, set_on=(), set_off=()) -> "Graph":
        arr = self._dyads.copy()
        for u, v in set_on:
            arr[dyad_index(u, v, self._n)] = 1
        for u, v in set_off:
            arr[dyad_index(u, v, self._n)] = 0
        return Graph(self._n, arr)

    def relabel(self, perm) -> "Graph":
        """Graph with node ``u`` renamed to ``perm[u]``."""
        perm = np.asarray(perm)
        a = self.adjacency()
        b = np.zeros_like(a)
        b[np.ix_(perm, perm)] = a
        return Graph.from_adjacency(b)

    def key(self) -> bytes:
        return self._dyads.tobytes()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and np.array_equal(self._dyads, other._dyads)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._n, self.key()))
        return self._hash

    def __repr__(self) -> str:
        return f"Graph(n={self._n}, edges={self.num_edges})"


class BlockAssignment:
    """Assignment of each node to one of ``k`` blocks (0-based labels).

    Empty blocks are allowed here; model-fitting code rejects them.
    """

    __slots__ = ("_z", "_k")

    def __init__(self, z, k: int | None = None):
        arr = np.array(z, dtype=np.int64).reshape(-1)
        if arr.size == 0:
            raise ValueError("block assignment must cover at least one node")
        if arr.min() < 0:
            raise ValueError("block labels must be nonnegative")
        k = int(arr.max()) + 1 if k is None else int(k)
        if k < 1 or arr.max() >= k:
            raise ValueError(f"block labels must lie in 0..{k - 1}")
        arr.setflags(write=False)
        self._z = arr
        self._k = k

    @classmethod
    def from_blocks(cls, blocks: Sequence[Iterable[int]], n: int | None = None) -> "BlockAssignment":
        members = [list(b) for b in blocks]
        n = sum(len(b) for b in members) if n is None else n
        z = np.full(n, -1, dtype=np.int64)
        for i, b in enumerate(members):
            for u in b:
                if z[u] != -1:
                    raise ValueError(f"node {u} appears in two blocks")
                z[u] = i
        if np.any(z < 0):
            raise ValueError("every node must be assigned to a block")
        return cls(z, k=len(members))

    @property
    def z(self) -> np.ndarray:
        return self._z

    @property
    def k(self) -> int:
        return self._k

    @property
    def n(self) -> int:
        return self._z.shape[0]

    def sizes(self) -> np.ndarray:
        return np.bincount(self._z, minlength=self._k).astype(np.int64)

    def members(self, i: int) -> np.ndarray:
        return np.flatnonzero(self._z == i)

    def empty_blocks(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.sizes() == 0)]

    def onehot(self) -> np.ndarray:
        m = np.zeros((self.n, self._k), dtype=np.int64)
        m[np.arange(self.n), self._z] = 1
        return m

    def canonical(self) -> "BlockAssignment":
        """Relabel blocks in order of first occurrence; ``k`` is kept."""
        mapping = {}
        for label in self._z:
            if int(label) not in mapping:
                mapping[int(label)] = len(mapping)
        z = np.array([mapping[int(x)] for x in self._z], dtype=np.int64)
        return BlockAssignment(z, k=self._k)

    def key(self) -> tuple[int, ...]:
        return tuple(int(x) for x in self._z)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BlockAssignment):
            return NotImplemented
        return self._k == other._k and np.array_equal(self._z, other._z)

    def __hash__(self) -> int:
        return hash((self._k, self.key()))

    def __repr__(self) -> str:
        return f"BlockAssignment(k={self._k}, sizes={self.sizes().tolist()})"


@dataclass(frozen=True)
class SufficientStatistics:
    """Model-tagged integer vector.

    ER values are the block-pair edge counts for ``i <= j`` in row-major
    upper-triangular order; Add values are the block degree sums; Beta values
    are the ER vector followed by the degree sequence.
    """

    model: Model
    values: tuple[int, ...]

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.int64)

    def to_json(self) -> dict:
        return {"model": self.model.value, "values": list(self.values)}


def block_pairs(k: int) -> list[tuple[int, int]]:
    """Block pairs ``(i, j)``, ``i <= j``, in the canonical statistic order."""
    return [(i, j) for i in range(k) for j in range(i, k)]


def pair_index(i: int, j: int, k: int) -> int:
    if i > j:
        i, j = j, i
    return i * k - i * (i - 1) // 2 + (j - i)


def _check(g: Graph, z: BlockAssignment) -> None:
    if g.n != z.n:
        raise DimensionError(f"graph has {g.n} nodes but assignment covers {z.n}")


def degrees_into_blocks(g: Graph, z: BlockAssignment) -> np.ndarray:
    """``m[u, i]``: number of neighbours of node ``u`` inside block ``i``."""
    _check(g, z)
    return g.adjacency().astype(np.int64) @ z.onehot()


def block_edge_matrix(g: Graph, z: BlockAssignment) -> np.ndarray:
    """Symmetric ``k x k`` matrix of edge counts between (or within) blocks."""
    _check(g, z)
    c = z.onehot().T @ degrees_into_blocks(g, z)
    c[np.diag_indices_from(c)] //= 2
    return c


def _upper(c: np.ndarray) -> tuple[int, ...]:
    k = c.shape[0]
    return tuple(int(c[i, j]) for i, j in block_pairs(k))


def t_er(g: Graph, z: BlockAssignment) -> SufficientStatistics:
    return SufficientStatistics(Model.ER, _upper(block_edge_matrix(g, z)))


def t_add(g: Graph, z: BlockAssignment) -> SufficientStatistics:
    _check(g, z)
    x = z.onehot().T @ g.degrees()
    return SufficientStatistics(Model.ADD, tuple(int(v) for v in x))


def t_beta(g: Graph, z: BlockAssignment) -> SufficientStatistics:
    er = t_er(g, z).values
    return SufficientStatistics(Model.BETA, er + tuple(int(d) for d in g.degrees()))


def sufficient_statistic(g: Graph, z: BlockAssignment, model) -> SufficientStatistics:
    model = Model.parse(model)
    if model is Model.ER:
        return t_er(g, z)
    if model is Model.ADD:
        return t_add(g, z)
    return t_beta(g, z)
