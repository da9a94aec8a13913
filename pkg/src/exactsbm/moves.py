"""Markov moves on graph fibers.

A move removes one set of dyads and adds another. The three proposal
families are

* ER-SBM: swap one edge for a non-edge joining the same pair of blocks.
* Additive SBM: with probability 1/2 an ER swap, otherwise an exchange along
  an alternating 4-cycle (two edges out, two non-edges in, degrees fixed).
* beta-SBM: with probability 1/2 an alternating 4-cycle, otherwise an
  alternating closed walk of length 6 (nodes may repeat), in both cases only
  when the removed and added dyads carry the same multiset of block-pair
  labels.

Every family is symmetric: the chance of proposing a move from ``g`` equals
the chance of proposing its reverse from the resulting graph. That is what
makes the uniform distribution on the fiber stationary with acceptance 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InapplicableMoveError
from .graph import BlockAssignment, Graph, Model, _check, dyad_endpoints, sufficient_statistic


def _dyad(u: int, v: int) -> tuple[int, int]:
    u, v = int(u), int(v)
    if u == v:
        raise ValueError(f"({u}, {v}) is a self-loop")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Move:
    add: frozenset
    remove: frozenset

    def __init__(self, add=(), remove=()):
        a = frozenset(_dyad(u, v) for u, v in add)
        r = frozenset(_dyad(u, v) for u, v in remove)
        if a & r:
            raise ValueError("a move cannot add and remove the same dyad")
        object.__setattr__(self, "add", a)
        object.__setattr__(self, "remove", r)

    @property
    def degree(self) -> int:
        return max(len(self.add), len(self.remove))

    def reversed(self) -> "Move":
        return Move(add=self.remove, remove=self.add)

    def is_applicable(self, g: Graph) -> bool:
        return (all(not g.has_edge(u, v) for u, v in self.add)
                and all(g.has_edge(u, v) for u, v in self.remove))

    def to_json(self) -> dict:
        """1-based dyads, as in the file formats."""
        return {"add": [[u + 1, v + 1] for u, v in sorted(self.add)],
                "remove": [[u + 1, v + 1] for u, v in sorted(self.remove)]}

    @classmethod
    def from_json(cls, data) -> "Move":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(add=[(u - 1, v - 1) for u, v in data.get("add", [])],
                   remove=[(u - 1, v - 1) for u, v in data.get("remove", [])])


def apply(g: Graph, move: Move) -> Graph:
    if not move.is_applicable(g):
        raise InapplicableMoveError("move adds a present dyad or removes an absent one")
    return g.with_dyads(set_on=move.add, set_off=move.remove)


def validate(move: Move, g: Graph, z: BlockAssignment, model) -> bool:
    """True iff the move applies to ``g`` and leaves the model's statistic unchanged."""
    _check(g, z)
    if not move.is_applicable(g):
        return False
    return sufficient_statistic(apply(g, move), z, model) == sufficient_statistic(g, z, model)


def _seed(rng) -> int:
    return int(np.random.default_rng(rng).integers(0, 2**62))


def _moves_from_ids(n: int, sizes, rems, adds) -> list:
    iu, iv = dyad_endpoints(n)
    out = []
    for r, rem, add in zip(sizes, rems, adds):
        if r == 0:
            out.append(None)
            continue
        out.append(Move(add=[(iu[d], iv[d]) for d in add[:r]],
                        remove=[(iu[d], iv[d]) for d in rem[:r]]))
    return out


def propose_many(g: Graph, z: BlockAssignment, model, count: int, rng=None) -> list:
    """``count`` independent proposals from ``g`` (``None`` where no move came up)."""
    _check(g, z)
    code = _kernels.MODEL_CODES[Model.parse(model).value]
    state = _kernels.build_state(g.dyads, z.z, z.k)
    sizes, rems, adds = _kernels.propose_many(code, int(count), _seed(rng), *state)
    return _moves_from_ids(g.n, sizes, rems, adds)


def propose_er(g: Graph, z: BlockAssignment, rng=None):
    return propose_many(g, z, Model.ER, 1, rng)[0]


def propose_add(g: Graph, z: BlockAssignment, rng=None):
    return propose_many(g, z, Model.ADD, 1, rng)[0]


def propose_beta(g: Graph, z: BlockAssignment, rng=None):
    return propose_many(g, z, Model.BETA, 1, rng)[0]


PROPOSERS = {Model.ER: propose_er, Model.ADD: propose_add, Model.BETA: propose_beta}
