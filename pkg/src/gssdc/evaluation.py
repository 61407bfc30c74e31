"""Metrics, per-trial orchestration and CSV reporting for sampling experiments."""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

from .graphcore import (GraphSpec, build_knn_sensor_graph, laplacian, load_graph,
                        load_matrix, spectral_decomposition)
from .partition import make_design
from .priors import (SignalInstance, StochasticPrior, SubspacePrior, add_noise,
                     gen_gmrf_signal, gen_pgs_signal, make_smoothness_prior,
                     make_stochastic_prior, make_subspace_prior, parse_response)
from .proxops import row_norms
from .recovery import recover, sample, selection_operator
from .solver import PARAMETER_PRESETS, SolverConfig, design_sampling_operator

__all__ = [
    "mse_db",
    "count_contributive",
    "ExperimentConfig",
    "TrialResult",
    "ExperimentResult",
    "build_prior",
    "run_trial",
    "run_experiment",
    "trial_seeds",
    "ingest_signals",
    "aggregate",
    "write_trials_csv",
    "write_aggregate_csv",
    "TRIAL_HEADER",
]

log = logging.getLogger(__name__)

TRIAL_HEADER = ["trial", "prior", "design", "seed", "mse_db", "contributive",
                "converged", "iters"]

DEFAULT_RESPONSES = {
    "sb": "pgs_exp{c=1.5}",
    "sm": "sm_ratio{eps=0.1}",
    "st": "st_gauss{}",
}


def mse_db(x_hat, x) -> float:
    """``10 log10(||x_hat - x||^2 / N)``; ``-inf`` for an exact match."""
    x_hat = np.asarray(x_hat, dtype=float)
    x = np.asarray(x, dtype=float)
    if x_hat.shape != x.shape:
        raise ValueError(f"length mismatch: {x_hat.shape} vs {x.shape}")
    err = float(np.sum((x_hat - x) ** 2)) / x.size
    return -math.inf if err == 0 else 10.0 * math.log10(err)


def count_contributive(s_op, rel_tol: float = 1e-8) -> int:
    """Rows whose norm exceeds ``rel_tol`` times the largest row norm."""
    S = getattr(s_op, "s", s_op)
    nrm = row_norms(np.asarray(S, dtype=float))
    if nrm.size == 0 or nrm.max() == 0:
        return 0
    return int(np.sum(nrm > rel_tol * nrm.max()))


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce a batch of sampling/recovery trials.

    Solver parameters left as ``None`` fall back to the per-prior presets.
    ``sampler="random"`` replaces the designed operator with vertex-wise
    sampling of the mandatory set topped up with random undecided vertices.
    """

    prior: str = "sb"
    n_vertices: int = 256
    knn: int = 6
    graph_file: Optional[str] = None
    K: int = 16
    response: Optional[str] = None
    signal_power: str = "gmrf_lowpass{a=0.1}"
    design: str = "i"
    n_mandatory: int = 16
    n_forbidden: int = 16
    z: int = 32
    n_samples: int = 32
    lam: Optional[float] = None
    delta: Optional[float] = None
    gamma1: Optional[float] = None
    gamma2: Optional[float] = None
    decay: float = 0.9999
    tol: float = 1e-5
    max_iters: int = 200_000
    dual_init: str = "forward"
    trials: int = 20
    noise_variance: float = 0.0
    seed: int = 0
    contributive_tol: float = 1e-8
    sampler: str = "designed"
    signals_file: Optional[str] = None
    covariance_file: Optional[str] = None

    def __post_init__(self):
        if self.prior not in DEFAULT_RESPONSES:
            raise ValueError(f"prior must be one of {sorted(DEFAULT_RESPONSES)}, got {self.prior!r}")
        if self.sampler not in ("designed", "random"):
            raise ValueError(f"sampler must be 'designed' or 'random', got {self.sampler!r}")
        if self.trials < 1:
            raise ValueError(f"trials must be positive, got {self.trials}")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be nonnegative")
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")

    def solver_config(self, seed: int = 0) -> SolverConfig:
        base = PARAMETER_PRESETS[self.prior]
        pick = lambda v, d: d if v is None else v  # noqa: E731
        return SolverConfig(
            lam=pick(self.lam, base.lam), delta=pick(self.delta, base.delta),
            gamma1=pick(self.gamma1, base.gamma1), gamma2=pick(self.gamma2, base.gamma2),
            decay=self.decay, tol=self.tol, max_iters=self.max_iters, seed=seed,
            dual_init=self.dual_init)


@dataclass
class TrialResult:
    trial: int
    prior: str
    design: str
    seed: int
    mse_db: float = math.nan
    mse: float = math.nan
    contributive: int = -1
    converged: bool = False
    iters: int = 0
    sigma_min: float = math.nan
    rank_deficient: bool = False
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class ExperimentResult:
    trials: list
    aggregate: dict = field(default_factory=dict)


def trial_seeds(master_seed: int, n: int) -> list:
    """Per-trial seeds split deterministically from the master seed."""
    children = np.random.SeedSequence(master_seed).spawn(n)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]


def ingest_signals(path, n_vertices: int) -> list:
    """Load signals stored one per column in a matrix file."""
    X = load_matrix(path)
    if X.shape[0] != n_vertices:
        raise ValueError(f"{path}: {X.shape[0]} rows but the graph has {n_vertices} vertices")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{path}: signals contain NaN or infinite entries")
    return [SignalInstance(X[:, j].copy(), {"source": str(path), "column": j})
            for j in range(X.shape[1])]


def build_prior(cfg: ExperimentConfig, basis):
    resp = parse_response(cfg.response or DEFAULT_RESPONSES[cfg.prior])
    if cfg.prior == "sb":
        return make_subspace_prior(basis, cfg.K, resp)
    if cfg.prior == "sm":
        return make_smoothness_prior(basis, resp)
    Rn = cfg.noise_variance * np.eye(cfg.n_samples)
    if cfg.covariance_file:
        Rx = load_matrix(cfg.covariance_file)
        if Rx.shape != (basis.n_vertices,) * 2:
            raise ValueError(f"covariance file has shape {Rx.shape}, expected "
                             f"{(basis.n_vertices,) * 2}")
        w, V = np.linalg.eigh(0.5 * (Rx + Rx.T))
        w = np.maximum(w, 0.0)
        return StochasticPrior(Rx=Rx, Rn=Rn, Q=np.sqrt(w)[:, None] * V.T)
    return make_stochastic_prior(basis, resp, Rn)


def _draw_signal(cfg, prior, basis, seed):
    if isinstance(prior, SubspacePrior):
        return gen_pgs_signal(prior, seed)
    if cfg.prior == "sm":
        return gen_gmrf_signal(basis, parse_response(cfg.signal_power), seed)
    if cfg.covariance_file:
        x = prior.Q.T @ np.random.default_rng(seed).standard_normal(prior.Q.shape[0])
        return SignalInstance(x, {"prior": "st", "seed": seed})
    return gen_gmrf_signal(basis, parse_response(cfg.response or DEFAULT_RESPONSES["st"]), seed)


def run_trial(cfg: ExperimentConfig, seed: int, trial: int = 0,
              graph: Optional[GraphSpec] = None, signals=None) -> TrialResult:
    """One graph / prior / partition / operator / signal draw, reproducible from ``seed``."""
    res = TrialResult(trial=trial, prior=cfg.prior, design=cfg.design, seed=seed)
    try:
        s_graph, s_design, s_solver, s_signal, s_noise = trial_seeds(seed, 5)
        if graph is None:
            graph = (load_graph(cfg.graph_file) if cfg.graph_file
                     else build_knn_sensor_graph(cfg.n_vertices, cfg.knn, s_graph))
        basis = spectral_decomposition(laplacian(graph))
        prior = build_prior(cfg, basis)
        part = make_design(cfg.design, prior.B, cfg.n_mandatory, cfg.n_forbidden, cfg.z, s_design)
        if cfg.sampler == "designed":
            op, trace = design_sampling_operator(prior.B, part, cfg.n_samples,
                                                 cfg.solver_config(s_solver),
                                                 record_objective=False)
            S = op.s
            res.converged, res.iters = trace.converged, trace.iterations
        else:
            rng = np.random.default_rng(s_solver)
            m = min(cfg.n_samples, part.mandatory.size)
            extra = cfg.n_samples - m
            if extra > part.undecided.size:
                raise ValueError("not enough undecided vertices for the random sampler")
            verts = np.concatenate([rng.choice(part.mandatory, m, replace=False),
                                    rng.choice(part.undecided, extra, replace=False)])
            S = selection_operator(part.n_vertices, np.sort(verts))
            res.converged = True
        BS = prior.B @ S
        res.sigma_min = float(np.linalg.svd(BS, compute_uv=False)[-1]) if BS.size else 0.0
        res.contributive = count_contributive(S, cfg.contributive_tol)

        if signals is None:
            signals = [_draw_signal(cfg, prior, basis, s_signal)]
        noise_seeds = trial_seeds(s_noise, len(signals))
        errs, deficient = [], False
        for sig, ns in zip(signals, noise_seeds):
            c = add_noise(sample(S, sig.x), cfg.noise_variance, ns)
            rec = recover(S, prior, c)
            deficient |= rec.rank_deficient
            errs.append(float(np.mean((rec.x_hat - sig.x) ** 2)))
        res.mse = float(np.mean(errs))
        res.mse_db = -math.inf if res.mse == 0 else 10.0 * math.log10(res.mse)
        res.rank_deficient = deficient
    except Exception as exc:  # recorded per trial; the batch keeps going
        log.warning("trial %d (seed %d) failed: %s", trial, seed, exc)
        res.error = f"{type(exc).__name__}: {exc}"
    return res


def _trial_job(args):
    return run_trial(*args)


def aggregate(results) -> dict:
    """Mean and standard deviation over successful trials.

    ``mse_db`` summarises as the dB value of the mean linear MSE;
    ``mean_of_db`` is the plain average of per-trial dB values.
    """
    ok = [r for r in results if r.ok]
    out = {"n_trials": len(results), "n_ok": len(ok)}
    if not ok:
        return out
    mse = np.array([r.mse for r in ok])
    db = np.array([r.mse_db for r in ok])
    cnt = np.array([r.contributive for r in ok], dtype=float)
    iters = np.array([r.iters for r in ok], dtype=float)
    conv = np.array([r.converged for r in ok], dtype=float)
    mean_mse = float(np.mean(mse))
    with np.errstate(invalid="ignore"):
        out.update(
            mse_linear_mean=mean_mse,
            mse_linear_std=float(np.std(mse)),
            mse_db=-math.inf if mean_mse == 0 else 10.0 * math.log10(mean_mse),
            mean_of_db=float(np.mean(db)),
            std_of_db=float(np.std(db)) if np.all(np.isfinite(db)) else math.nan,
            contributive_mean=float(np.mean(cnt)),
            contributive_std=float(np.std(cnt)),
            iters_mean=float(np.mean(iters)),
            iters_std=float(np.std(iters)),
            converged_frac=float(np.mean(conv)),
        )
    return out


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    """Run ``cfg.trials`` independent trials and aggregate them.

    With ``signals_file`` set, every trial evaluates all file signals with its
    own designed operator and reports their mean MSE.
    """
    seeds = trial_seeds(cfg.seed, cfg.trials)
    graph = load_graph(cfg.graph_file) if cfg.graph_file else None
    signals = None
    if cfg.signals_file:
        if graph is None:
            raise ValueError("signals_file requires graph_file")
        signals = ingest_signals(cfg.signals_file, graph.n_vertices)
    args = [(cfg, s, t, graph, signals) for t, s in enumerate(seeds)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_trial_job, args))
    else:
        results = [_trial_job(a) for a in args]
    return ExperimentResult(results, aggregate(results))


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def write_trials_csv(path, results) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRIAL_HEADER)
        for r in results:
            row = asdict(r)
            w.writerow([_fmt(row[k]) for k in TRIAL_HEADER])


def write_aggregate_csv(path, agg: dict) -> None:
    """Rows ``mean``, ``stddev`` and ``mean_of_db`` over the trial metrics."""
    cols = ["stat", "mse_db", "mse_linear", "contributive", "iters", "converged",
            "n_ok", "n_trials"]
    g = lambda k: agg.get(k, math.nan)  # noqa: E731
    rows = [
        ["mean", g("mse_db"), g("mse_linear_mean"), g("contributive_mean"),
         g("iters_mean"), g("converged_frac"), agg["n_ok"], agg["n_trials"]],
        ["stddev", g("std_of_db"), g("mse_linear_std"), g("contributive_std"),
         g("iters_std"), math.nan, agg["n_ok"], agg["n_trials"]],
        ["mean_of_db", g("mean_of_db"), math.nan, math.nan, math.nan, math.nan,
         agg["n_ok"], agg["n_trials"]],
    ]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
