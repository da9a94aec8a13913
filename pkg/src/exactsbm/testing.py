"""Exact conditional goodness-of-fit tests with known and latent block assignments.

With known blocks, the test walks the fiber of the observed graph and
reports the share of sampled graphs whose statistic is at least the
observed one. With latent blocks, it averages such fiber p-values over a
distribution of block assignments, weighting each by its probability.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import EmptyBlockError, NonexistenceError
from .estimators import AssignmentDistribution, gibbs_posterior, spectral_estimate
from .gof import CHI2_BC, CHI2_PEARSON, chi2_bc_batch, chi2_pearson_batch
from .graph import BlockAssignment, Graph, Model, _check, dyad_endpoints
from .models import dyad_probabilities, mle_add, mle_beta, mle_er, ErParams
from .polytopes import mle_exists
from .sampler import WalkSettings, walk

DEFAULT_GOF = {Model.ER: CHI2_BC, Model.ADD: CHI2_BC, Model.BETA: CHI2_PEARSON}

#: relative slack in the ">=" comparison so the observed graph always counts itself
TIE_RTOL = 1e-12

EXTENDED = "extended"
CONSERVATIVE = "conservative"


class GofDegeneracyWarning(UserWarning):
    """The chosen statistic is constant on the model's fibers."""


@dataclass
class Fit:
    """Parameter estimates a statistic needs, fitted once on the observed graph."""

    model: Model
    gof: str
    qhat: np.ndarray | None = None
    fitted: np.ndarray | None = None  # packed dyad probabilities


@dataclass
class GofStatistic:
    model: Model
    gof: str
    fit: Callable[[Graph, BlockAssignment], Fit]

    def evaluator(self, fit: Fit, z: BlockAssignment,
                  on_zero: str = "raise") -> Callable[[np.ndarray], np.ndarray]:
        if self.gof == CHI2_BC:
            return lambda states: chi2_bc_batch(states, z, fit.qhat, on_zero)
        return lambda states: chi2_pearson_batch(states, fit.fitted, on_zero)


def _packed(p: np.ndarray) -> np.ndarray:
    iu, iv = dyad_endpoints(p.shape[0])
    return p[iu, iv]


def gof_dispatch(model, gof: str | None = None) -> GofStatistic:
    """Pair a model with a statistic; defaults are chi2_bc for ER and additive, Pearson for beta.

    Pearson with the ER model is allowed but warns, since it is constant on ER fibers.
    """
    model = Model.parse(model)
    gof = DEFAULT_GOF[model] if gof is None else gof
    if gof not in (CHI2_BC, CHI2_PEARSON):
        raise ValueError(f"unknown goodness-of-fit statistic {gof!r}")
    if model is Model.ER and gof == CHI2_PEARSON:
        warnings.warn("Pearson chi-square is constant on ER-SBM fibers; every p-value will be 1",
                      GofDegeneracyWarning, stacklevel=2)

    def fit(g: Graph, z: BlockAssignment) -> Fit:
        if gof == CHI2_BC:
            qhat = mle_add(g, z) if model is Model.ADD else mle_er(g, z).Q
            return Fit(model, gof, qhat=qhat)
        if model is Model.BETA:
            p = dyad_probabilities(mle_beta(g, z), z)
        elif model is Model.ADD:
            p = dyad_probabilities(ErParams(mle_add(g, z)), z)
        else:
            p = dyad_probabilities(mle_er(g, z), z)
        return Fit(model, gof, fitted=_packed(p))

    return GofStatistic(model, gof, fit)


@dataclass
class TestSettings:
    """Knobs for both tests.

    ``plus_one`` switches the p-value from count/N to (count+1)/(N+1).
    ``refit_per_fiber=False`` reuses the estimates fitted under the top
    assignment for every fiber of a latent test. ``max_fibers`` keeps only the
    heaviest atoms of the assignment distribution.

    ``boundary`` decides what a latent test does with a fiber whose ER or
    additive statistic sits on the polytope boundary. ``"extended"`` still
    tests it with the closed-form estimates (some fitted probabilities are 0
    or 1 and those cells drop out of the statistic); ``"conservative"`` gives
    it p = 1. A beta-SBM fit that diverges always gives p = 1.
    """

    __test__ = False

    num_graphs: int = 1000
    burn_in: int | None = None
    thin: int | None = None
    check_every: int = 10_000
    plus_one: bool = False
    refit_per_fiber: bool = True
    max_fibers: int | None = None
    boundary: str = EXTENDED

    def __post_init__(self):
        if self.boundary not in (EXTENDED, CONSERVATIVE):
            raise ValueError(f"boundary must be {EXTENDED!r} or {CONSERVATIVE!r}")

    def walk_settings(self) -> WalkSettings:
        return WalkSettings(self.num_graphs, self.burn_in, self.thin, self.check_every)


@dataclass
class FiberRecord:
    assignment: BlockAssignment
    weight: float
    observed: float
    p_value: float
    samples: np.ndarray
    flags: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def to_json(self, include_samples: bool = False) -> dict:
        out = {"z": [int(x) + 1 for x in self.assignment.z], "weight": self.weight,
               "observed": self.observed, "p_value": self.p_value, "flags": self.flags,
               "diagnostics": self.diagnostics}
        if include_samples:
            out["samples"] = [float(v) if np.isfinite(v) else None for v in self.samples]
        return out


@dataclass
class TestReport:
    __test__ = False

    p_value: float
    model: str
    gof: str
    mode: str
    fibers: list
    settings: dict
    seed: int | None = None

    def to_json(self, include_samples: bool = False) -> dict:
        return {"p_value": self.p_value, "model": self.model, "gof": self.gof, "mode": self.mode,
                "settings": self.settings, "seed": self.seed,
                "fibers": [f.to_json(include_samples) for f in self.fibers]}

    def write_samples(self, directory) -> list[Path]:
        """One CSV column of GoF samples per fiber, each with a JSON sidecar."""
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for i, f in enumerate(self.fibers):
            path = out / f"fiber_{i}.csv"
            with path.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow([self.gof])
                w.writerows([[repr(float(v))] for v in f.samples])
            sidecar = {"statistic": self.gof, "observed": f.observed, "fiber": i,
                       "weight": f.weight, "p_value": f.p_value,
                       "z": [int(x) + 1 for x in f.assignment.z]}
            (out / f"fiber_{i}.json").write_text(json.dumps(sidecar, indent=2))
            written.append(path)
        return written


def p_value_from_samples(samples: np.ndarray, observed: float, plus_one: bool = False) -> float:
    samples = np.asarray(samples, dtype=float)
    count = int(np.sum(samples >= observed - TIE_RTOL * abs(observed)))
    if plus_one:
        return (count + 1) / (samples.shape[0] + 1)
    return count / samples.shape[0]


def _check_existence(model: Model, g: Graph, z: BlockAssignment) -> None:
    if model is Model.BETA:
        mle_beta(g, z)
        return
    ok, verdict = mle_exists(model, g, z)
    if not ok:
        raise NonexistenceError(
            f"the {model.value} MLE does not exist: observed statistic is on the "
            f"{verdict.verdict} of the model polytope", verdict)


def _fiber_test(g_obs, z, stat: GofStatistic, fit: Fit, settings: TestSettings, rng) -> FiberRecord:
    sample = walk(g_obs, z, stat.model, settings.walk_settings(), rng)
    observed = float(stat.evaluator(fit, z)(g_obs.dyads)[0])
    # fiber members that are impossible under the fit score inf, i.e. count as extreme
    values = stat.evaluator(fit, z, on_zero="inf")(sample.states)
    flags = []
    if sample.stuck:
        flags.append("degenerate_fiber")
    p = 1.0 if sample.stuck else p_value_from_samples(values, observed, settings.plus_one)
    return FiberRecord(z, 1.0, observed, p, values, flags, sample.diagnostics())


def test_known(g_obs: Graph, z: BlockAssignment, model, gof: str | None = None,
               settings: TestSettings | None = None, rng=None, fit: Fit | None = None) -> TestReport:
    """Exact conditional test of ``model`` with the block assignment ``z`` taken as known.

    Raises :class:`NonexistenceError` when the MLE does not exist for ``(g_obs, z)``.
    """
    _check(g_obs, z)
    settings = settings or TestSettings()
    stat = gof_dispatch(model, gof)
    if fit is None:
        _check_existence(stat.model, g_obs, z)
        fit = stat.fit(g_obs, z)
    seed = int(np.random.default_rng(rng).integers(0, 2**62))
    record = _fiber_test(g_obs, z, stat, fit, settings, np.random.default_rng(seed))
    return TestReport(record.p_value, stat.model.value, stat.gof, "known", [record],
                      asdict(settings), seed)


test_known.__test__ = False


def estimate_assignments(g: Graph, k: int, estimator="gibbs", rng=None, **options) -> AssignmentDistribution:
    if isinstance(estimator, AssignmentDistribution):
        return estimator
    if isinstance(estimator, BlockAssignment):
        return AssignmentDistribution.point(estimator)
    if estimator == "spectral":
        return spectral_estimate(g, k, rng=rng, **options)
    if estimator == "gibbs":
        return gibbs_posterior(g, k, rng=rng, **options)
    raise ValueError(f"unknown block estimator {estimator!r}")


def _skipped(z, flag: str, exc: Exception) -> FiberRecord:
    verdict = getattr(exc, "verdict", None)
    return FiberRecord(z, 1.0, float("nan"), 1.0, np.empty(0), [flag],
                       {"reason": str(exc), "verdict": verdict.to_json() if verdict is not None else None})


def _latent_fiber(g_obs, z, stat: GofStatistic, settings: TestSettings, seed, fit) -> FiberRecord:
    try:
        return test_known(g_obs, z, stat.model, stat.gof, settings, seed, fit=fit).fibers[0]
    except NonexistenceError as exc:
        if settings.boundary == CONSERVATIVE or stat.model is Model.BETA or exc.verdict is None:
            return _skipped(z, "mle_nonexistence", exc)
        boundary = exc
    try:
        fit = stat.fit(g_obs, z)
    except (EmptyBlockError, NonexistenceError) as exc:
        return _skipped(z, "mle_nonexistence", exc)
    rec = test_known(g_obs, z, stat.model, stat.gof, settings, seed, fit=fit).fibers[0]
    rec.flags.append("mle_boundary")
    rec.diagnostics["verdict"] = boundary.verdict.to_json()
    return rec


def test_latent(g_obs: Graph, model, gof: str | None = None, k: int = 2, estimator="gibbs",
                settings: TestSettings | None = None, rng=None, estimator_options: dict | None = None
                ) -> TestReport:
    """Goodness-of-fit test with a latent block assignment.

    Estimates a distribution over assignments, runs the known-block test on the
    fiber of each atom, and returns the weight-averaged p-value. Fibers whose
    MLE does not exist are handled as ``settings.boundary`` says and flagged.

    Seeds: the master generator first drives the estimator, then hands one
    seed per atom (heaviest first) to :func:`test_known`.
    """
    settings = settings or TestSettings()
    gen = np.random.default_rng(rng)
    stat = gof_dispatch(model, gof)
    dist = estimate_assignments(g_obs, k, estimator, gen, **(estimator_options or {}))
    dist = dist.top(settings.max_fibers)
    seeds = [int(gen.integers(0, 2**62)) for _ in dist.atoms]

    shared_fit = None
    if not settings.refit_per_fiber:
        shared_fit = stat.fit(g_obs, dist.mode)

    records = []
    for (z, w), seed in zip(dist.atoms, seeds):
        rec = _latent_fiber(g_obs, z, stat, settings, seed, shared_fit)
        rec.weight = w
        records.append(rec)
    p = float(sum(r.weight * r.p_value for r in records))
    out = asdict(settings)
    out.update(k=k, estimator=estimator if isinstance(estimator, str) else dist.provenance,
               num_fibers=len(records))
    return TestReport(min(p, 1.0), stat.model.value, stat.gof, "latent", records, out, None)


test_latent.__test__ = False
