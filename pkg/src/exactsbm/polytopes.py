"""Halfspace descriptions of the ER-SBM and additive-SBM model polytopes.

The MLE of a log-linear model exists exactly when the observed statistic lies
in the relative interior of the model polytope, so a membership verdict
doubles as an MLE-existence certificate. Everything here is integer
arithmetic; "boundary" means some inequality holds with equality.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import DimensionError
from .graph import BlockAssignment, Graph, Model, _check, block_pairs, t_add, t_er

INTERIOR = "interior"
BOUNDARY = "boundary"
OUTSIDE = "outside"

#: 3^k inequality pairs; beyond this the additive check is refused
MAX_ADD_BLOCKS = 12


@dataclass
class MembershipVerdict:
    verdict: str
    tight: list = field(default_factory=list)
    violated: list = field(default_factory=list)
    parity_ok: bool = True

    @property
    def interior(self) -> bool:
        return self.verdict == INTERIOR

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "tight": self.tight, "violated": self.violated,
                "parity_ok": self.parity_ok}


def _verdict(tight, violated, parity_ok=True) -> MembershipVerdict:
    if violated:
        v = OUTSIDE
    elif tight:
        v = BOUNDARY
    else:
        v = INTERIOR
    return MembershipVerdict(v, tight, violated, parity_ok)


def _values(t) -> list[int]:
    vals = t.values if hasattr(t, "values") else t
    return [int(x) for x in vals]


def er_membership(t, sizes) -> MembershipVerdict:
    """Box constraints ``0 <= t_ij <= n_i n_j`` (i < j) and ``0 <= t_ii <= C(n_i, 2)``.

    Constraint descriptors are ``{"pair": [i, j], "side": "lower" | "upper"}``.
    """
    sizes = [int(s) for s in sizes]
    k = len(sizes)
    vals = _values(t)
    pairs = block_pairs(k)
    if len(vals) != len(pairs):
        raise DimensionError(f"ER statistic for k={k} has {len(pairs)} entries, got {len(vals)}")
    tight, violated = [], []
    for (i, j), x in zip(pairs, vals):
        upper = sizes[i] * sizes[j] if i != j else sizes[i] * (sizes[i] - 1) // 2
        for side, slack in (("lower", x), ("upper", upper - x)):
            desc = {"pair": [i, j], "side": side}
            if slack < 0:
                violated.append(desc)
            elif slack == 0:
                tight.append(desc)
    return _verdict(tight, violated)


def add_inequalities(sizes):
    """Yield ``(T, S, rhs)`` for every disjoint pair of block sets with ``T | S`` nonempty.

    The inequality reads ``sum_T x - sum_S x <= rhs`` with
    ``rhs = 2 C(N_T, 2) + N_T * N_rest``, where ``N_T`` is the node count of the
    blocks in ``T`` and ``N_rest`` that of the blocks in neither set.
    """
    sizes = [int(s) for s in sizes]
    k = len(sizes)
    for labels in itertools.product((0, 1, 2), repeat=k):  # 0: neither, 1: T, 2: S
        if not any(labels):
            continue
        in_t = [i for i in range(k) if labels[i] == 1]
        in_s = [i for i in range(k) if labels[i] == 2]
        n_t = sum(sizes[i] for i in in_t)
        n_rest = sum(sizes[i] for i in range(k) if labels[i] == 0)
        yield in_t, in_s, n_t * (n_t - 1) + n_t * n_rest


def add_membership(t, sizes) -> MembershipVerdict:
    """Check a block-degree-sum vector against all ``3^k - 1`` additive inequalities.

    Descriptors are ``{"T": [...], "S": [...]}``. An odd total degree is flagged
    through ``parity_ok`` without changing the verdict.
    """
    sizes = [int(s) for s in sizes]
    k = len(sizes)
    vals = _values(t)
    if len(vals) != k:
        raise DimensionError(f"additive statistic must have {k} entries, got {len(vals)}")
    if k > MAX_ADD_BLOCKS:
        raise ValueError(f"additive membership enumerates 3^k inequalities; k={k} exceeds {MAX_ADD_BLOCKS}")
    tight, violated = [], []
    for in_t, in_s, rhs in add_inequalities(sizes):
        lhs = sum(vals[i] for i in in_t) - sum(vals[i] for i in in_s)
        desc = {"T": in_t, "S": in_s}
        if lhs > rhs:
            violated.append(desc)
        elif lhs == rhs:
            tight.append(desc)
    return _verdict(tight, violated, parity_ok=sum(vals) % 2 == 0)


def mle_exists(model, g: Graph, z: BlockAssignment) -> tuple[bool, MembershipVerdict]:
    """MLE existence for the ER or additive model, via polytope membership."""
    _check(g, z)
    model = Model.parse(model)
    sizes = z.sizes()
    if model is Model.ER:
        verdict = er_membership(t_er(g, z), sizes)
    elif model is Model.ADD:
        verdict = add_membership(t_add(g, z), sizes)
    else:
        raise ValueError("beta-SBM existence is detected by the Newton fit, not a polytope check")
    return verdict.interior, verdict

