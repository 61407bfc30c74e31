"""Command line entry point: ``graph-gen``, ``design`` and ``experiment``.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .config import ConfigError, experiment_config, read_kv
from .evaluation import (build_prior, run_experiment, trial_seeds, write_aggregate_csv,
                         write_trials_csv)
from .graphcore import (DisconnectedGraphError, build_knn_sensor_graph, laplacian,
                        load_graph, save_graph, save_matrix, spectral_decomposition)
from .partition import load_partition, make_design, save_partition
from .solver import SolverDivergenceError, design_sampling_operator, write_trace_csv

log = logging.getLogger("gssdc")


class UsageError(Exception):
    pass


def _seed_override():
    val = os.environ.get("GSSDC_SEED")
    if val is None:
        return None
    try:
        return int(val)
    except ValueError:
        raise UsageError(f"GSSDC_SEED must be an integer, got {val!r}") from None


def cmd_graph_gen(args) -> int:
    if args.n < 2 or not 1 <= args.k < args.n:
        raise UsageError(f"need n >= 2 and 1 <= k < n (got n={args.n}, k={args.k})")
    g = build_knn_sensor_graph(args.n, args.k, args.seed)
    save_graph(args.out, g)
    log.info("wrote %d-vertex graph to %s", g.n_vertices, args.out)
    return 0


def _load_cfg(path, **overrides):
    values = read_kv(path) if path else {}
    return experiment_config(values, seed=_seed_override(), **overrides)


def cmd_design(args) -> int:
    cfg = _load_cfg(args.config, prior=args.prior)
    if not Path(args.graph).is_file():
        raise UsageError(f"graph file not found: {args.graph}")
    try:
        graph = load_graph(args.graph)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    basis = spectral_decomposition(laplacian(graph))
    try:
        prior = build_prior(cfg, basis)
        _, s_design, s_solver, _, _ = trial_seeds(cfg.seed, 5)
        if args.partition:
            part = load_partition(args.partition)
        else:
            part = make_design(cfg.design, prior.B, cfg.n_mandatory, cfg.n_forbidden,
                               cfg.z, s_design)
        solver_cfg = cfg.solver_config(s_solver)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    op, trace = design_sampling_operator(prior.B, part, cfg.n_samples, solver_cfg)
    save_matrix(args.out, op.s)
    if args.trace:
        write_trace_csv(args.trace, trace)
    if args.partition_out:
        save_partition(args.partition_out, part)
    log.info("designed %s operator in %d iterations (converged=%s, sigma_min=%.3g)",
             op.shape, trace.iterations, trace.converged, trace.final_sigma_min)
    return 0


def cmd_experiment(args) -> int:
    cfg = _load_cfg(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    res = run_experiment(cfg, jobs=args.jobs)
    write_trials_csv(out / "trials.csv", res.trials)
    write_aggregate_csv(out / "aggregate.csv", res.aggregate)
    failed = [r for r in res.trials if not r.ok]
    if failed:
        with open(out / "errors.txt", "w", encoding="utf-8") as fh:
            for r in failed:
                fh.write(f"{r.trial},{r.seed},{r.error}\n")
    if res.aggregate["n_ok"] == 0:
        log.error("all %d trials failed", len(res.trials))
        return 1
    log.info("mean MSE %.3f dB over %d trials", res.aggregate["mse_db"], res.aggregate["n_ok"])
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gssdc", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("graph-gen", help="random kNN sensor graph")
    g.add_argument("--n", type=int, default=256)
    g.add_argument("--k", type=int, default=6)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_graph_gen)

    d = sub.add_parser("design", help="design a sampling operator")
    d.add_argument("--graph", required=True)
    d.add_argument("--prior", required=True, choices=["sb", "sm", "st"])
    d.add_argument("--config")
    d.add_argument("--partition", help="partition file to use instead of a generated design")
    d.add_argument("--partition-out")
    d.add_argument("--out", required=True)
    d.add_argument("--trace")
    d.set_defaults(func=cmd_design)

    e = sub.add_parser("experiment", help="run repeated sampling/recovery trials")
    e.add_argument("--config", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--jobs", type=int, default=1)
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"gssdc: error: {exc}", file=sys.stderr)
        return 2
    except (DisconnectedGraphError, SolverDivergenceError, OSError) as exc:
        print(f"gssdc: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
