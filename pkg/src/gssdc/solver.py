"""Sampling-operator design by the general double-proximal gradient DC iteration.

The designer minimises, over ``S`` of shape ``(N, M)``::

    iota(S[forbidden] = 0) + lam * sum_{i in U} ||S_i|| + delta/2 ||S||_F^2
        - ||B S||_* - lam * Omega_K'(S[U])

where ``Omega_K'`` sums the ``K' = z - |mandatory|`` largest row norms. With
the linear map ``L S = [B S; S[U]]`` the iteration alternates a primal prox
step on the first bracket and a conjugate prox step on the second.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .partition import VertexPartition
from .proxops import (DualBlock, nuclear_norm, prox_f2, prox_h_conj, row_norms,
                      topk_row_norm_sum)

__all__ = [
    "SolverConfig",
    "SamplingOperator",
    "SolverTrace",
    "SolverDivergenceError",
    "PARAMETER_PRESETS",
    "objective_value",
    "design_sampling_operator",
    "write_trace_csv",
]

log = logging.getLogger(__name__)


DUAL_INITS = ("forward", "subgradient", "zero")


class SolverDivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    lam: float
    delta: float
    gamma1: float
    gamma2: float
    decay: float = 0.9999
    tol: float = 1e-5
    max_iters: int = 200_000
    seed: int = 0
    dual_init: str = "forward"

    def __post_init__(self):
        for name in ("lam", "delta", "gamma1", "gamma2", "tol"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v}")
        if not 0 < self.decay <= 1:
            raise ValueError(f"decay must lie in (0, 1], got {self.decay}")
        if self.dual_init not in DUAL_INITS:
            raise ValueError(f"dual_init must be one of {DUAL_INITS}, got {self.dual_init!r}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be at least 1, got {self.max_iters}")

    def with_(self, **kw) -> "SolverConfig":
        return replace(self, **kw)


# (lam, delta, gamma1, gamma2) used for the synthetic and real-data runs
PARAMETER_PRESETS = {
    "sb": SolverConfig(1.05, 1e-1, 1e-3, 1e-5),
    "sm": SolverConfig(5.1, 1e-1, 1e-2, 1e-2),
    "st": SolverConfig(0.75, 1e-6, 1e-3, 1e-5),
    "sm_real": SolverConfig(24.29, 1e-6, 1e-3, 1e-5),
    "st_real": SolverConfig(6.03, 1e-1, 1e-3, 1e-5),
}


@dataclass
class SamplingOperator:
    """Dense sampling matrix ``S`` (samples are ``S.T @ x``)."""

    s: np.ndarray
    partition: VertexPartition | None = None

    @property
    def shape(self):
        return self.s.shape


@dataclass
class SolverTrace:
    iterations: int = 0
    objective_values: list = field(default_factory=list)
    rel_changes: list = field(default_factory=list)
    gamma1: list = field(default_factory=list)
    gamma2: list = field(default_factory=list)
    max_frobenius: float = 0.0
    final_sigma_min: float = float("nan")
    converged: bool = False
    zero_iterate: bool = False


def _check_shapes(S, B, part):
    if S.ndim != 2 or S.shape[0] != part.n_vertices:
        raise ValueError(f"operator shape {S.shape} does not match N={part.n_vertices}")
    if B.ndim != 2 or B.shape[1] != S.shape[0]:
        raise ValueError(f"B with shape {B.shape} cannot act on {S.shape[0]} rows")


def _h_subgradient(Y: DualBlock, lam: float, K: int) -> DualBlock:
    """An element of the subdifferential of ``h`` at ``Y``."""
    z1 = np.zeros_like(Y.z1)
    if Y.z1.size:
        U, s, Vt = np.linalg.svd(Y.z1, full_matrices=False)
        r = int(np.sum(s > max(Y.z1.shape) * np.finfo(float).eps * s[0])) if s[0] > 0 else 0
        z1 = U[:, :r] @ Vt[:r]
    z2 = np.zeros_like(Y.z2)
    if K > 0 and Y.z2.size:
        nrm = row_norms(Y.z2)
        top = np.argsort(-nrm, kind="stable")[:K]
        top = top[nrm[top] > 0]
        z2[top] = lam * Y.z2[top] / nrm[top, None]
    return DualBlock(z1, z2)


def objective_value(S, B, part: VertexPartition, lam: float, delta: float) -> float:
    """DC objective of the design problem; ``inf`` if a forbidden row is nonzero."""
    S = np.asarray(S, dtype=float)
    B = np.asarray(B, dtype=float)
    _check_shapes(S, B, part)
    if np.any(S[part.forbidden] != 0):
        return float("inf")
    SU = S[part.undecided]
    return (lam * float(np.sum(row_norms(SU)))
            + 0.5 * delta * float(np.sum(S**2))
            - nuclear_norm(B @ S)
            - lam * topk_row_norm_sum(SU, part.k_prime))


def design_sampling_operator(B, part: VertexPartition, n_samples: int, cfg: SolverConfig,
                             record_objective: bool = True, callback=None):
    """Design an ``N x n_samples`` sampling operator.

    Parameters
    ----------
    B : ndarray, shape (R, N)
        Rank-certificate matrix of the signal prior.
    part : VertexPartition
        Mandatory / forbidden / undecided vertices and budget.
    n_samples : int
        Number of samples ``M`` (columns of ``S``).
    cfg : SolverConfig
        Penalty weights, initial step sizes, decay and stopping rule.
    record_objective : bool
        Evaluate the objective at every iterate (one extra SVD per step).
    callback : callable, optional
        Called as ``callback(t, S)`` after each primal update.

    Returns
    -------
    op : SamplingOperator
    trace : SolverTrace
    """
    B = np.asarray(B, dtype=float)
    N = part.n_vertices
    if B.ndim != 2 or B.shape[1] != N:
        raise ValueError(f"B must have N={N} columns, got shape {B.shape}")
    if n_samples < 1:
        raise ValueError(f"n_samples must be positive, got {n_samples}")
    U = part.undecided
    K = part.k_prime
    lam, delta = cfg.lam, cfg.delta

    def forward(S):
        return DualBlock(B @ S, S[U])

    def adjoint(Z):
        out = B.T @ Z.z1
        out[U] += Z.z2
        return out

    rng = np.random.default_rng(cfg.seed)
    S = rng.standard_normal((N, n_samples))
    S[part.forbidden] = 0.0
    Z = forward(S)
    if cfg.dual_init == "zero":
        Z = Z * 0.0
    elif cfg.dual_init == "subgradient":
        Z = _h_subgradient(Z, lam, K)
    g1, g2 = cfg.gamma1, cfg.gamma2
    trace = SolverTrace(max_frobenius=float(np.linalg.norm(S)))

    def diverged(t):
        return SolverDivergenceError(
            f"non-finite iterate at iteration {t} (gamma1={g1:.3g}, gamma2={g2:.3g})")

    for t in range(1, cfg.max_iters + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            S_new = prox_f2(S + g1 * adjoint(Z), part, g1, lam, delta)
            if not np.all(np.isfinite(S_new)):
                raise diverged(t)
            Y = Z + g2 * forward(S_new)
        if not (np.all(np.isfinite(Y.z1)) and np.all(np.isfinite(Y.z2))):
            raise diverged(t)
        try:
            Z = prox_h_conj(Y, g2, lam, K)
        except np.linalg.LinAlgError as exc:
            raise diverged(t) from exc
        if callback is not None:
            callback(t, S_new)
        nrm_old = np.linalg.norm(S)
        diff = np.linalg.norm(S_new - S)
        S = S_new
        nrm = np.linalg.norm(S)
        trace.max_frobenius = max(trace.max_frobenius, float(nrm))
        trace.iterations = t
        trace.gamma1.append(g1)
        trace.gamma2.append(g2)
        if nrm_old == 0:
            trace.rel_changes.append(0.0 if diff == 0 else float("inf"))
        else:
            trace.rel_changes.append(float(diff / nrm_old))
        if record_objective:
            trace.objective_values.append(objective_value(S, B, part, lam, delta))
        if nrm_old == 0 and diff == 0:
            trace.converged = trace.zero_iterate = True
            break
        if trace.rel_changes[-1] <= cfg.tol:
            trace.converged = True
            break
        g1 *= cfg.decay
        g2 *= cfg.decay

    if not record_objective:
        trace.objective_values.append(objective_value(S, B, part, lam, delta))
    BS = B @ S
    trace.final_sigma_min = float(np.linalg.svd(BS, compute_uv=False)[-1]) if BS.size else 0.0
    if not trace.converged:
        log.warning("designer stopped at max_iters=%d without meeting tol=%g",
                    cfg.max_iters, cfg.tol)
    return SamplingOperator(S, part), trace


def write_trace_csv(path, trace: SolverTrace) -> None:
    """CSV with columns ``iter,objective,rel_change,gamma1,gamma2``."""
    n = trace.iterations
    obj = trace.objective_values if len(trace.objective_values) == n else [float("nan")] * n
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", "objective", "rel_change", "gamma1", "gamma2"])
        for t in range(n):
            w.writerow([t + 1] + [format(v, ".17g") for v in
                                  (obj[t], trace.rel_changes[t], trace.gamma1[t], trace.gamma2[t])])
