"""Synthetic block-model graphs and rejection-rate experiments."""

from __future__ import annotations

import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import logit

from .graph import BlockAssignment, Graph, Model, dyad_endpoints
from .models import AddParams, BetaParams, ErParams, dyad_probabilities
from .testing import TestSettings, test_latent

DENSE = "dense"
SPARSE = "sparse"

# Two-block parameter sets. The additive entries are block-pair probabilities;
# the generator turns them into per-block log-odds alpha_i = logit(q_ii) / 2.
REGIMES = {
    (Model.ER, DENSE): {"Q": [[0.6, 0.1], [0.1, 0.6]]},
    (Model.ER, SPARSE): {"Q": [[0.2, 0.01], [0.01, 0.2]]},
    (Model.ADD, DENSE): {"Q": [[0.77, 0.67], [0.67, 0.55]]},
    (Model.ADD, SPARSE): {"Q": [[0.02, 0.12], [0.12, 0.50]]},
    (Model.BETA, DENSE): {"alpha": [[0.6, 0.1], [0.1, 0.3]]},
    (Model.BETA, SPARSE): {"alpha": [[-2.0, -0.01], [-0.01, -1.0]]},
}


def simulate_assignment(n: int, k: int, rng=None) -> BlockAssignment:
    """Each node's block drawn independently and uniformly from the k blocks."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    if k > n:
        warnings.warn(f"k={k} exceeds n={n}; some blocks will be empty", stacklevel=2)
    gen = np.random.default_rng(rng)
    return BlockAssignment(gen.integers(0, k, size=n), k=k)


def simulate_graph(z: BlockAssignment, params, rng=None) -> Graph:
    """Independent Bernoulli dyads with the probabilities ``params`` assign under ``z``."""
    p = dyad_probabilities(params, z)
    if np.any(np.isnan(p)):
        raise ValueError("parameters leave some edge probabilities undefined")
    iu, iv = dyad_endpoints(z.n)
    gen = np.random.default_rng(rng)
    return Graph(z.n, (gen.random(iu.shape[0]) < p[iu, iv]).astype(np.uint8))


def additive_alpha_from_q(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return logit(np.diag(q)) / 2.0


@dataclass
class SimulationConfig:
    """One cell of a rejection-rate table: data from ``model``, tested against ``null_model``.

    ``beta_bound=None`` draws node parameters from Unif(-n, n). Overrides
    replace the named regime's matrices.
    """

    model: str = "er"
    n: int = 27
    k: int = 2
    regime: str = DENSE
    Q: list | None = None
    alpha: list | None = None
    beta_bound: float | None = None
    seed: int = 0
    replicates: int = 20
    null_model: str = "er"
    null_k: int | None = None
    gof: str | None = None
    level: float = 0.05
    num_graphs: int = 1000
    burn_in: int | None = None
    thin: int | None = None
    max_fibers: int | None = None
    gibbs_iterations: int = 2000
    gibbs_burn_in: int = 500
    workers: int = 1

    def __post_init__(self):
        self.model = Model.parse(self.model).value
        self.null_model = Model.parse(self.null_model).value
        if self.n < 2 or self.k < 1 or self.replicates < 1:
            raise ValueError("need n >= 2, k >= 1 and at least one replicate")
        if self.regime not in (DENSE, SPARSE):
            raise ValueError(f"regime must be {DENSE!r} or {SPARSE!r}")
        base = REGIMES.get((Model(self.model), self.regime), {})
        if self.Q is None and "Q" in base and self.k == 2:
            self.Q = base["Q"]
        if self.alpha is None and "alpha" in base and self.k == 2:
            self.alpha = base["alpha"]
        if self.model in ("er", "add"):
            if self.Q is None:
                raise ValueError(f"no default Q for k={self.k}; pass one explicitly")
            q = np.asarray(self.Q, dtype=float)
            if q.shape != (self.k, self.k) or np.any((q < 0) | (q > 1)):
                raise ValueError("Q must be a k x k matrix of probabilities")
        elif self.alpha is None:
            raise ValueError(f"no default alpha for k={self.k}; pass one explicitly")

    @classmethod
    def from_json(cls, data) -> "SimulationConfig":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(**data)

    def to_json(self) -> dict:
        return asdict(self)

    def params(self, rng) -> object:
        """Generating parameters for one replicate (node parameters are redrawn each time)."""
        if self.model == "er":
            return ErParams(self.Q)
        if self.model == "add":
            alpha = np.asarray(self.alpha, dtype=float) if self.alpha is not None else None
            return AddParams(alpha if alpha is not None and alpha.ndim == 1
                             else additive_alpha_from_q(self.Q))
        bound = self.n if self.beta_bound is None else self.beta_bound
        return BetaParams(self.alpha, rng.uniform(-bound, bound, size=self.n))

    def test_settings(self) -> TestSettings:
        return TestSettings(num_graphs=self.num_graphs, burn_in=self.burn_in, thin=self.thin,
                            max_fibers=self.max_fibers)


@dataclass
class ReplicateResult:
    index: int
    seed: int
    p_value: float | None
    density: float
    num_fibers: int = 0
    error: str | None = None


@dataclass
class ExperimentResult:
    config: SimulationConfig
    replicates: list = field(default_factory=list)

    @property
    def p_values(self) -> list[float]:
        return [r.p_value for r in self.replicates if r.p_value is not None]

    @property
    def failures(self) -> int:
        return sum(r.error is not None for r in self.replicates)

    @property
    def rejection_rate(self) -> float:
        ps = self.p_values
        return float(np.mean([p < self.config.level for p in ps])) if ps else float("nan")

    def to_json(self) -> dict:
        return {"config": self.config.to_json(), "rejection_rate": self.rejection_rate,
                "failures": self.failures, "replicates": [asdict(r) for r in self.replicates]}


def run_replicate(config: SimulationConfig, index: int, seed: int) -> ReplicateResult:
    gen = np.random.default_rng(seed)
    z = simulate_assignment(config.n, config.k, gen)
    g = simulate_graph(z, config.params(gen), gen)
    density = g.num_edges / max(g.dyads.shape[0], 1)
    try:
        report = test_latent(g, config.null_model, config.gof, config.null_k or config.k, "gibbs",
                             config.test_settings(), gen,
                             {"iterations": config.gibbs_iterations, "burn_in": config.gibbs_burn_in})
    except Exception as exc:  # one bad replicate must not sink the table
        return ReplicateResult(index, seed, None, density, 0, f"{type(exc).__name__}: {exc}")
    return ReplicateResult(index, seed, report.p_value, density, len(report.fibers))


def _run_one(args):
    return run_replicate(*args)


def replicate_seeds(seed: int, replicates: int) -> list[int]:
    children = np.random.SeedSequence(seed).spawn(replicates)
    return [int(c.generate_state(2, np.uint64)[0] >> np.uint64(2)) for c in children]


def run_experiment(config: SimulationConfig) -> ExperimentResult:
    """Simulate ``config.replicates`` graphs and run the latent-block test on each.

    Replicate ``i`` is seeded from the ``i``-th child of the master seed, so
    results do not depend on ``workers``.
    """
    jobs = [(config, i, s) for i, s in enumerate(replicate_seeds(config.seed, config.replicates))]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    return ExperimentResult(config, results)
