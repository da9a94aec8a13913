"""Random walks on fibers and brute-force fiber enumeration.

Conditioning any of the three models on its sufficient statistic leaves the
uniform distribution on the fiber, whatever the parameters. The proposals in
:mod:`exactsbm.moves` are symmetric, so Metropolis-Hastings toward the uniform
target accepts every applicable move; a proposal that comes up empty keeps
the current state and still counts as a step.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .graph import BlockAssignment, Graph, Model, _check, dyad_endpoints, num_dyads

#: refuse brute-force enumeration beyond this many dyads (n = 8)
MAX_ENUM_DYADS = 28


@dataclass
class WalkSettings:
    """Chain length controls. ``None`` picks the defaults 10 * C(n, 2) and C(n, 2)."""

    num_graphs: int = 1000
    burn_in: int | None = None
    thin: int | None = None
    check_every: int = 10_000

    def resolved(self, n: int) -> "WalkSettings":
        d = max(num_dyads(n), 1)
        burn = 10 * d if self.burn_in is None else int(self.burn_in)
        thin = d if self.thin is None else int(self.thin)
        if self.num_graphs < 1:
            raise ValueError("num_graphs must be at least 1")
        if thin < 1 or burn < 0:
            raise ValueError("thin must be >= 1 and burn_in >= 0")
        return WalkSettings(int(self.num_graphs), burn, thin, int(self.check_every))


@dataclass
class FiberSample:
    n: int
    states: np.ndarray  # (num_graphs, C(n,2)) packed 0/1 graphs
    settings: WalkSettings
    seed: int
    steps: int
    accepted: int
    checks: int
    drift: int
    audit: list = field(default_factory=list)

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.steps if self.steps else 0.0

    @property
    def stuck(self) -> bool:
        return self.accepted == 0

    def graphs(self) -> list[Graph]:
        return [Graph(self.n, row) for row in self.states]

    def diagnostics(self) -> dict:
        return {"steps": self.steps, "accepted": self.accepted,
                "acceptance_rate": self.acceptance_rate, "stuck": self.stuck,
                "exactness_checks": self.checks, "drift": self.drift,
                "settings": asdict(self.settings), "seed": self.seed}

    def audit_lines(self) -> str:
        """Applied moves as JSON lines (1-based dyads)."""
        return "".join(json.dumps(rec) + "\n" for rec in self.audit)


class DriftError(AssertionError):
    """Incrementally tracked statistics disagree with a full recount."""


def walk(g_obs: Graph, z: BlockAssignment, model, settings: WalkSettings | None = None,
         rng=None, audit: bool = False) -> FiberSample:
    _check(g_obs, z)
    model = Model.parse(model)
    settings = (settings or WalkSettings()).resolved(g_obs.n)
    seed = int(np.random.default_rng(rng).integers(0, 2**62))
    state = _kernels.build_state(g_obs.dyads, z.z, z.k)
    out = _kernels.walk_kernel(_kernels.MODEL_CODES[model.value], settings.num_graphs,
                               settings.burn_in, settings.thin, seed, settings.check_every,
                               audit, *state, z.z)
    states, accepted, steps, checks, drift, ref_er, ref_deg, er, deg, a_step, a_rem, a_add = out
    if drift:
        raise DriftError("incremental statistics disagree with a recount")
    oh = z.onehot()
    kept = {
        Model.ER: np.array_equal(ref_er, er),
        Model.ADD: np.array_equal(oh.T @ ref_deg, oh.T @ deg),
        Model.BETA: np.array_equal(ref_er, er) and np.array_equal(ref_deg, deg),
    }[model]
    if not kept:
        raise DriftError(f"the {model.value} sufficient statistic changed during the walk")
    records = []
    if audit:
        iu, iv = dyad_endpoints(g_obs.n)
        for s, rem, add in zip(a_step, a_rem, a_add):
            records.append({"step": int(s),
                            "remove": [[int(iu[d]) + 1, int(iv[d]) + 1] for d in rem if d >= 0],
                            "add": [[int(iu[d]) + 1, int(iv[d]) + 1] for d in add if d >= 0]})
    return FiberSample(g_obs.n, states, settings, seed, int(steps), int(accepted),
                       int(checks), int(drift), records)


def _all_patterns(nd: int, chunk: int = 1 << 16):
    bits = (1 << np.arange(nd, dtype=np.int64))
    total = 1 << nd
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        yield ((codes[:, None] & bits[None, :]) != 0).astype(np.uint8)


def statistic_matrix(z: BlockAssignment, model) -> np.ndarray:
    """Linear map from packed dyads to the model's sufficient statistic (``states @ M``)."""
    model = Model.parse(model)
    n, k = z.n, z.k
    iu, iv = dyad_endpoints(n)
    nd = iu.shape[0]
    a = np.minimum(z.z[iu], z.z[iv])
    b = np.maximum(z.z[iu], z.z[iv])
    cls = a * k - a * (a - 1) // 2 + (b - a)
    er = np.zeros((nd, k * (k + 1) // 2), dtype=np.int64)
    er[np.arange(nd), cls] = 1
    inc = np.zeros((nd, n), dtype=np.int64)
    inc[np.arange(nd), iu] = 1
    inc[np.arange(nd), iv] = 1
    if model is Model.ER:
        return er
    if model is Model.ADD:
        return inc @ z.onehot()
    return np.hstack([er, inc])


def enumerate_fiber(g_obs: Graph, z: BlockAssignment, model) -> list[Graph]:
    """Every graph sharing ``g_obs``'s statistic, found by checking all 2^C(n,2) graphs."""
    _check(g_obs, z)
    nd = num_dyads(g_obs.n)
    if nd > MAX_ENUM_DYADS:
        raise ValueError(f"brute-force enumeration needs C(n,2) <= {MAX_ENUM_DYADS}; n={g_obs.n} is too large")
    m = statistic_matrix(z, model)
    target = g_obs.dyads.astype(np.int64) @ m
    found = []
    for block in _all_patterns(nd):
        hit = np.all(block.astype(np.int64) @ m == target, axis=1)
        found.extend(Graph(g_obs.n, row) for row in block[hit])
    return found
