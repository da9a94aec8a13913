"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 bad input data, 3 the MLE does not
exist for a known-block test.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .errors import NonexistenceError
from .estimators import AssignmentDistribution, gibbs_posterior, spectral_estimate
from .graph import BlockAssignment, Model, sufficient_statistic
from .io import format_edge_list, read_blocks, read_edge_list
from .polytopes import add_membership, er_membership, mle_exists
from .sampler import WalkSettings, enumerate_fiber, walk
from .synth import SimulationConfig, run_experiment, simulate_assignment, simulate_graph
from .testing import CONSERVATIVE, EXTENDED, TestSettings, test_known, test_latent

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NONEXISTENCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(suppress: bool) -> argparse.ArgumentParser:
    d = (lambda value: argparse.SUPPRESS) if suppress else (lambda value: value)
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--seed", type=int, default=d(None), help="master random seed")
    g.add_argument("--model", choices=["er", "add", "beta"], default=d("er"))
    g.add_argument("--gof", choices=["chi2_bc", "chi2_pearson"], default=d(None),
                   help="statistic (default depends on the model)")
    g.add_argument("--num-graphs", type=int, default=d(1000), help="graphs sampled per fiber")
    g.add_argument("--burn-in", type=int, default=d(None), help="walk steps before the first sample")
    g.add_argument("--thin", type=int, default=d(None), help="walk steps between samples")
    g.add_argument("--format", choices=["json", "csv"], default=d("json"))
    g.add_argument("--out", default=d(None), help="output file (default: stdout)")
    g.add_argument("--text-hist", action="store_true", default=d(False),
                   help="print a 20-bin ASCII histogram of GoF samples to stderr")
    return p


def _settings(args, **extra) -> TestSettings:
    return TestSettings(num_graphs=args.num_graphs, burn_in=args.burn_in, thin=args.thin, **extra)


def _emit(args, payload, rows=None, header=None) -> None:
    if args.format == "csv" and rows is not None:
        buf = io.StringIO()
        w = csv.writer(buf)
        if header:
            w.writerow(header)
        w.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def text_histogram(values, observed=None, bins: int = 20, width: int = 50) -> str:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return "(no samples)\n"
    infinite = int(np.sum(~np.isfinite(values)))
    values = values[np.isfinite(values)]
    if values.size == 0:
        return f"(all {infinite} samples infinite)\n"
    lo, hi = float(values.min()), float(values.max())
    if observed is not None and np.isfinite(observed):
        lo, hi = min(lo, observed), max(hi, observed)
    if hi == lo:
        hi = lo + 1.0
    counts, edges = np.histogram(values, bins=bins, range=(lo, hi))
    top = max(int(counts.max()), 1)
    lines = []
    for c, a, b in zip(counts, edges[:-1], edges[1:]):
        mark = " <- observed" if observed is not None and a <= observed <= b else ""
        lines.append(f"{a:12.4g} | {'#' * round(width * c / top):<{width}} {c}{mark}")
    if infinite:
        lines.append(f"{'inf':>12} | {infinite} samples impossible under the fit")
    return "\n".join(lines) + "\n"


def _report_out(args, report) -> None:
    if args.text_hist:
        for i, f in enumerate(report.fibers):
            sys.stderr.write(f"fiber {i}  weight {f.weight:.4f}  observed {f.observed:.4g}  p {f.p_value:.4g}\n")
            sys.stderr.write(text_histogram(f.samples, f.observed))
    if getattr(args, "samples_dir", None):
        report.write_samples(args.samples_dir)
    rows = [[i, f.weight, f.observed, f.p_value, ";".join(f.flags)] for i, f in enumerate(report.fibers)]
    _emit(args, report.to_json(), rows, ["fiber", "weight", "observed", "p_value", "flags"])


def cmd_simulate(args) -> None:
    if args.config:
        cfg = SimulationConfig.from_json(Path(args.config).read_text())
    else:
        cfg = SimulationConfig(model=args.model, n=args.n, k=args.k, regime=args.regime,
                               seed=args.seed or 0, replicates=1)
    gen = np.random.default_rng(args.seed if args.seed is not None else cfg.seed)
    z = simulate_assignment(cfg.n, cfg.k, gen)
    g = simulate_graph(z, cfg.params(gen), gen)
    if args.blocks_out:
        Path(args.blocks_out).write_text("\n".join(str(int(x) + 1) for x in z.z) + "\n")
    if args.format == "csv":
        rows = [[u + 1, v + 1] for u, v in g.edges()]
        _emit(args, None, rows, ["u", "v"])
    elif args.out and not args.out.endswith(".json"):
        Path(args.out).write_text(format_edge_list(g))
    else:
        _emit(args, {"n": g.n, "edges": [[u + 1, v + 1] for u, v in g.edges()],
                     "z": [int(x) + 1 for x in z.z]})


def cmd_estimate_blocks(args) -> None:
    g = read_edge_list(args.graph)
    if args.estimator == "spectral":
        dist = spectral_estimate(g, args.k, rng=args.seed)
    else:
        dist = gibbs_posterior(g, args.k, iterations=args.iterations, burn_in=args.gibbs_burn_in,
                               rng=args.seed)
    rows = [[w] + [int(x) + 1 for x in z.z] for z, w in dist.atoms]
    _emit(args, dist.to_json(), rows, ["weight"] + [f"z{u + 1}" for u in range(g.n)])


def cmd_test_known(args) -> None:
    g = read_edge_list(args.graph)
    z = read_blocks(args.blocks, k=args.k)
    report = test_known(g, z, args.model, args.gof, _settings(args, plus_one=args.plus_one),
                        args.seed)
    _report_out(args, report)


def cmd_test_latent(args) -> None:
    g = read_edge_list(args.graph)
    settings = _settings(args, plus_one=args.plus_one, refit_per_fiber=not args.fit_once,
                         max_fibers=args.max_fibers, boundary=args.boundary)
    estimator = args.estimator
    options = {}
    if args.assignments:
        estimator = AssignmentDistribution.from_json(Path(args.assignments).read_text(), k=args.k)
    elif estimator == "gibbs":
        options = {"iterations": args.iterations, "burn_in": args.gibbs_burn_in}
    report = test_latent(g, args.model, args.gof, args.k, estimator, settings, args.seed, options)
    _report_out(args, report)


def cmd_sample_fiber(args) -> None:
    g = read_edge_list(args.graph)
    z = read_blocks(args.blocks, k=args.k)
    ws = WalkSettings(args.num_graphs, args.burn_in, args.thin)
    sample = walk(g, z, args.model, ws, args.seed, audit=bool(args.audit))
    if args.audit:
        Path(args.audit).write_text(sample.audit_lines())
    if args.format == "csv":
        _emit(args, None, sample.states.tolist(), None)
    else:
        _emit(args, {"diagnostics": sample.diagnostics(),
                     "graphs": [[[u + 1, v + 1] for u, v in h.edges()] for h in sample.graphs()]})


def cmd_polytope_check(args) -> None:
    model = Model.parse(args.model)
    if model is Model.BETA:
        raise UsageError("polytope-check supports the er and add models")
    if args.graph:
        if not args.blocks:
            raise UsageError("--graph needs --blocks")
        g = read_edge_list(args.graph)
        z = read_blocks(args.blocks, k=args.k)
        _, verdict = mle_exists(model, g, z)
        t = list(sufficient_statistic(g, z, model).values)
    else:
        if not (args.stat and args.sizes):
            raise UsageError("give --graph/--blocks or --stat/--sizes")
        t = [int(x) for x in args.stat.split(",")]
        sizes = [int(x) for x in args.sizes.split(",")]
        verdict = (er_membership if model is Model.ER else add_membership)(t, sizes)
    out = verdict.to_json()
    out["statistic"] = t
    _emit(args, out, [[verdict.verdict, len(verdict.tight), len(verdict.violated), verdict.parity_ok]],
          ["verdict", "tight", "violated", "parity_ok"])


def cmd_experiment(args) -> None:
    if args.config:
        data = json.loads(Path(args.config).read_text())
    else:
        data = {"model": args.model, "n": args.n, "k": args.k, "regime": args.regime,
                "replicates": args.replicates, "num_graphs": args.num_graphs,
                "burn_in": args.burn_in, "thin": args.thin, "max_fibers": args.max_fibers,
                "workers": args.workers, "gof": args.gof}
        if args.seed is not None:
            data["seed"] = args.seed
    configs = data if isinstance(data, list) else [data]
    results = [run_experiment(SimulationConfig(**c)) for c in configs]
    rows = [[r.config.model, r.config.n, r.config.regime, r.rejection_rate, r.failures,
             len(r.p_values)] for r in results]
    _emit(args, [r.to_json() for r in results], rows,
          ["model", "n", "regime", "rejection_rate", "failures", "replicates"])


def cmd_fiber_enum(args) -> None:
    g = read_edge_list(args.graph)
    z = read_blocks(args.blocks, k=args.k)
    fiber = enumerate_fiber(g, z, args.model)
    if args.format == "csv":
        _emit(args, None, [h.dyads.tolist() for h in fiber], None)
    else:
        _emit(args, {"size": len(fiber),
                     "graphs": [[[u + 1, v + 1] for u, v in h.edges()] for h in fiber]})


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="exactsbm", parents=[_common(False)],
                     description="Exact goodness-of-fit tests for stochastic block models.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common(True)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    def graph_args(p, blocks=True):
        p.add_argument("--graph", required=True, help="edge-list file (1-based)")
        if blocks:
            p.add_argument("--blocks", required=True, help="block file (1-based labels)")
        p.add_argument("--k", type=int, default=None, help="number of blocks")

    def gibbs_args(p):
        p.add_argument("--iterations", type=int, default=2000, help="Gibbs draws kept")
        p.add_argument("--gibbs-burn-in", type=int, default=500, help="Gibbs sweeps discarded")

    p = add("simulate", cmd_simulate, "simulate a block-model graph")
    p.add_argument("--n", type=int, default=27)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--regime", choices=["dense", "sparse"], default="dense")
    p.add_argument("--config", help="JSON simulation config")
    p.add_argument("--blocks-out", help="write the planted assignment here")

    p = add("estimate-blocks", cmd_estimate_blocks, "estimate the block assignment")
    p.add_argument("--graph", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--estimator", choices=["gibbs", "spectral"], default="gibbs")
    gibbs_args(p)

    p = add("test-known", cmd_test_known, "exact test with a known block assignment")
    graph_args(p)
    p.add_argument("--plus-one", action="store_true", help="report (count+1)/(N+1)")
    p.add_argument("--samples-dir", help="write per-fiber GoF samples (CSV + JSON sidecar)")

    p = add("test-latent", cmd_test_latent, "test with a latent block assignment")
    p.add_argument("--graph", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--estimator", choices=["gibbs", "spectral"], default="gibbs")
    p.add_argument("--assignments", help="JSON assignment distribution to use instead of an estimator")
    p.add_argument("--max-fibers", type=int, default=None, help="test only the heaviest fibers")
    p.add_argument("--boundary", choices=[EXTENDED, CONSERVATIVE], default=EXTENDED)
    p.add_argument("--fit-once", action="store_true",
                   help="fit estimates once under the top assignment instead of per fiber")
    p.add_argument("--plus-one", action="store_true")
    p.add_argument("--samples-dir")
    gibbs_args(p)

    p = add("sample-fiber", cmd_sample_fiber, "random walk on the fiber of a graph")
    graph_args(p)
    p.add_argument("--audit", help="write applied moves as JSON lines here")

    p = add("polytope-check", cmd_polytope_check, "model polytope membership / MLE existence")
    p.add_argument("--graph")
    p.add_argument("--blocks")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--stat", help="comma-separated sufficient statistic")
    p.add_argument("--sizes", help="comma-separated block sizes")

    p = add("experiment", cmd_experiment, "rejection rates over simulated replicates")
    p.add_argument("--config", help="JSON config (object or list of objects)")
    p.add_argument("--n", type=int, default=27)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--regime", choices=["dense", "sparse"], default="dense")
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--max-fibers", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)

    p = add("fiber-enum", cmd_fiber_enum, "enumerate a small fiber by brute force")
    graph_args(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"exactsbm: error: {exc}\n")
        return EXIT_USAGE
    except NonexistenceError as exc:
        sys.stderr.write(f"exactsbm: {exc}\n")
        return EXIT_NONEXISTENCE
    except (OSError, ValueError) as exc:
        sys.stderr.write(f"exactsbm: {exc}\n")
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
