"""Sampling and prior-specific recovery ``x_hat = D H c``."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .priors import SmoothnessPrior, StochasticPrior, SubspacePrior
from .proxops import pseudo_inverse, matrix_rank
from .solver import SamplingOperator

__all__ = ["Recovery", "sample", "selection_operator", "recover_subspace",
           "recover_smoothness", "recover_stochastic", "recover"]


class Recovery(NamedTuple):
    x_hat: np.ndarray
    # the corrected Gram matrix lost rank, so recovery is not the best possible
    rank_deficient: bool


def _matrix(s_op):
    return s_op.s if isinstance(s_op, SamplingOperator) else np.asarray(s_op, dtype=float)


def sample(s_op, x) -> np.ndarray:
    """Samples ``c = S.T @ x``."""
    S = _matrix(s_op)
    x = np.asarray(x, dtype=float)
    if x.shape[0] != S.shape[0]:
        raise ValueError(f"signal of length {x.shape[0]} does not match operator with "
                         f"{S.shape[0]} rows")
    return S.T @ x


def selection_operator(n_vertices: int, vertices) -> np.ndarray:
    """Vertex-wise sampling matrix whose columns are the unit vectors of ``vertices``."""
    v = np.asarray(vertices, dtype=np.int64)
    S = np.zeros((n_vertices, v.size))
    S[v, np.arange(v.size)] = 1.0
    return S


def _check_samples(S, c):
    c = np.asarray(c, dtype=float)
    if c.shape[0] != S.shape[1]:
        raise ValueError(f"{c.shape[0]} samples given for an operator with {S.shape[1]} columns")
    return c


def recover_subspace(s_op, prior: SubspacePrior, c) -> Recovery:
    """``x_hat = A pinv(S.T A) c``."""
    if not isinstance(prior, SubspacePrior):
        raise TypeError(f"expected a subspace prior, got {type(prior).__name__}")
    S = _matrix(s_op)
    c = _check_samples(S, c)
    G = S.T @ prior.A
    x_hat = prior.A @ (pseudo_inverse(G) @ c)
    return Recovery(x_hat, matrix_rank(G) < prior.K)


def recover_smoothness(s_op, prior: SmoothnessPrior, c) -> Recovery:
    """``x_hat = W pinv(S.T W) c`` with ``W = (Lstar.T Lstar)^-1 S``."""
    if not isinstance(prior, SmoothnessPrior):
        raise TypeError(f"expected a smoothness prior, got {type(prior).__name__}")
    S = _matrix(s_op)
    c = _check_samples(S, c)
    W = prior.gram_inverse @ S
    G = S.T @ W
    x_hat = W @ (pseudo_inverse(G) @ c)
    return Recovery(x_hat, matrix_rank(G) < S.shape[1])


def recover_stochastic(s_op, prior: StochasticPrior, c_noisy) -> Recovery:
    """``x_hat = Rx S pinv(S.T Rx S + Rn) c``."""
    if not isinstance(prior, StochasticPrior):
        raise TypeError(f"expected a stochastic prior, got {type(prior).__name__}")
    S = _matrix(s_op)
    c = _check_samples(S, c_noisy)
    if prior.Rn.shape != (S.shape[1], S.shape[1]):
        raise ValueError(f"noise covariance {prior.Rn.shape} does not match "
                         f"{S.shape[1]} samples")
    RxS = prior.Rx @ S
    G = S.T @ RxS + prior.Rn
    x_hat = RxS @ (pseudo_inverse(G) @ c)
    return Recovery(x_hat, matrix_rank(G) < S.shape[1])


def recover(s_op, prior, c) -> Recovery:
    """Dispatch on the prior type."""
    if isinstance(prior, SubspacePrior):
        return recover_subspace(s_op, prior, c)
    if isinstance(prior, SmoothnessPrior):
        return recover_smoothness(s_op, prior, c)
    if isinstance(prior, StochasticPrior):
        return recover_stochastic(s_op, prior, c)
    raise TypeError(f"unsupported prior {type(prior).__name__}")
