"""Signal priors, their rank-certificate matrix ``B`` and synthetic generators.

Three prior families are supported. Each carries the matrix ``B`` for which
full column rank of ``B @ S`` guarantees that the corrected Gram matrix of a
sampling operator ``S`` is invertible:

* subspace, ``x = A d``: ``B = A.T``
* smoothness, ``||Lstar x||`` small: ``B = Sigma^-1 V.T`` from ``Lstar = U Sigma V.T``
* stochastic, ``cov(x) = Rx = Q.T Q``: ``B = Q``

Spectral responses are callables of the full eigenvalue vector, so presets are
free to normalise by the largest graph frequency.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .graphcore import SpectralBasis

__all__ = [
    "SubspacePrior",
    "SmoothnessPrior",
    "StochasticPrior",
    "PriorModel",
    "SignalInstance",
    "make_subspace_prior",
    "make_smoothness_prior",
    "make_stochastic_prior",
    "gen_pgs_signal",
    "gen_gmrf_signal",
    "add_noise",
    "pgs_exp",
    "sm_ratio",
    "st_gauss",
    "gmrf_lowpass",
    "parse_response",
    "RESPONSE_PRESETS",
]

Response = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SubspacePrior:
    A: np.ndarray
    tag = "sb"

    @property
    def B(self) -> np.ndarray:
        return self.A.T

    @property
    def K(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True)
class SmoothnessPrior:
    Lstar: np.ndarray
    # singular values and right singular vectors of Lstar
    sigma: np.ndarray
    V: np.ndarray
    tag = "sm"

    @property
    def B(self) -> np.ndarray:
        return self.V.T / self.sigma[:, None]

    @property
    def gram_inverse(self) -> np.ndarray:
        """``(Lstar.T Lstar)^-1`` assembled from the SVD factors."""
        return (self.V / self.sigma**2) @ self.V.T


@dataclass(frozen=True)
class StochasticPrior:
    Rx: np.ndarray
    Rn: np.ndarray
    Q: np.ndarray
    tag = "st"

    @property
    def B(self) -> np.ndarray:
        return self.Q


PriorModel = Union[SubspacePrior, SmoothnessPrior, StochasticPrior]


@dataclass
class SignalInstance:
    x: np.ndarray
    meta: dict = field(default_factory=dict)


def _evaluate(response, lam: np.ndarray, what: str) -> np.ndarray:
    vals = np.broadcast_to(np.asarray(response(lam), dtype=float), lam.shape).copy()
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"{what} is not finite on the graph spectrum")
    return vals


def make_subspace_prior(basis: SpectralBasis, K: int, response: Response) -> SubspacePrior:
    """Periodic-graph-spectrum generator ``A = U_g Ahat``.

    Column ``c`` of the spectral generator ``Ahat`` holds ``response(lam_i)``
    on every graph frequency with ``i % K == c`` and zero elsewhere.
    """
    N = basis.n_vertices
    if not 1 <= K <= N:
        raise ValueError(f"K must satisfy 1 <= K <= N={N}, got {K}")
    vals = _evaluate(response, basis.eigenvalues, "generator response")
    ahat = np.zeros((N, K))
    i = np.arange(N)
    ahat[i, i % K] = vals
    A = basis.eigenvectors @ ahat
    smin = np.linalg.svd(A, compute_uv=False)[-1]
    if smin <= 1e-10:
        raise ValueError(f"generator matrix is rank deficient (sigma_K={smin:.3g})")
    return SubspacePrior(A)


def make_smoothness_prior(basis: SpectralBasis, response: Response) -> SmoothnessPrior:
    F = _evaluate(response, basis.eigenvalues, "smoothness response")
    if np.any(F <= 0):
        raise ValueError("smoothness response must be strictly positive "
                         "(the smoothness operator has to be invertible)")
    U = basis.eigenvectors
    return SmoothnessPrior(Lstar=(U * F) @ U.T, sigma=F, V=U)


def _check_psd(R, name, tol=1e-10):
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ValueError(f"{name} must be square, got shape {R.shape}")
    scale = max(1.0, float(np.max(np.abs(R), initial=0.0)))
    if np.max(np.abs(R - R.T), initial=0.0) > tol * scale:
        raise ValueError(f"{name} is not symmetric")
    if R.size and np.linalg.eigvalsh(R)[0] < -1e-8 * scale:
        raise ValueError(f"{name} is not positive semidefinite")
    return R


def make_stochastic_prior(basis: SpectralBasis, power: Response, Rn) -> StochasticPrior:
    """GWSS prior with covariance ``U_g diag(p) U_g.T`` and noise covariance ``Rn``."""
    p = _evaluate(power, basis.eigenvalues, "power spectrum")
    if np.any(p < 0):
        raise ValueError("power spectrum must be nonnegative")
    Rn = _check_psd(Rn, "Rn")
    U = basis.eigenvectors
    Q = np.sqrt(p)[:, None] * U.T
    return StochasticPrior(Rx=(U * p) @ U.T, Rn=Rn, Q=Q)


def gen_pgs_signal(prior: SubspacePrior, seed, mean: float = 1.0,
                   std: float = 1.0) -> SignalInstance:
    """``x = A d`` with i.i.d. ``d_i ~ N(mean, std**2)``."""
    if not isinstance(prior, SubspacePrior):
        raise TypeError(f"PGS signals need a subspace prior, got {type(prior).__name__}")
    d = np.random.default_rng(seed).normal(mean, std, size=prior.K)
    return SignalInstance(prior.A @ d, {"prior": "sb", "seed": seed})


def gen_gmrf_signal(basis: SpectralBasis, power: Response, seed) -> SignalInstance:
    """Gaussian signal with covariance ``U_g diag(p) U_g.T``."""
    p = _evaluate(power, basis.eigenvalues, "power spectrum")
    if np.any(p < 0):
        raise ValueError("power spectrum must be nonnegative")
    w = np.random.default_rng(seed).standard_normal(basis.n_vertices)
    return SignalInstance(basis.eigenvectors @ (np.sqrt(p) * w), {"prior": "gmrf", "seed": seed})


def add_noise(c, variance: float, seed) -> np.ndarray:
    if variance < 0:
        raise ValueError(f"noise variance must be nonnegative, got {variance}")
    c = np.asarray(c, dtype=float)
    if variance == 0:
        return c.copy()
    return c + np.random.default_rng(seed).normal(0.0, np.sqrt(variance), size=c.shape)


# spectral response presets

def pgs_exp(c: float = 1.5) -> Response:
    """``exp(-c lam / lam_max)``."""
    return lambda lam: np.exp(-c * lam / lam.max())


def sm_ratio(eps: float = 0.1) -> Response:
    """``lam / lam_max + eps``."""
    return lambda lam: lam / lam.max() + eps


def st_gauss() -> Response:
    """``exp(-((2 lam - lam_max) / sqrt(lam_max))**2)``."""
    def power(lam):
        lmax = lam.max()
        return np.exp(-(((2.0 * lam - lmax) / np.sqrt(lmax)) ** 2))
    return power


def gmrf_lowpass(a: float = 0.1) -> Response:
    """``a / (lam + a)``."""
    return lambda lam: a / (lam + a)


RESPONSE_PRESETS = {
    "pgs_exp": pgs_exp,
    "sm_ratio": sm_ratio,
    "st_gauss": st_gauss,
    "gmrf_lowpass": gmrf_lowpass,
}

_PRESET_RE = re.compile(r"^\s*(\w+)\s*(?:\{(.*)\})?\s*$")


def parse_response(text: str) -> Response:
    """Build a response from a preset string such as ``pgs_exp{c=1.5}``."""
    m = _PRESET_RE.match(text)
    if not m or m.group(1) not in RESPONSE_PRESETS:
        raise ValueError(f"unknown spectral response {text!r}; "
                         f"choose from {sorted(RESPONSE_PRESETS)}")
    kwargs = {}
    for item in filter(None, (s.strip() for s in (m.group(2) or "").split(","))):
        key, sep, val = item.partition("=")
        if not sep:
            raise ValueError(f"malformed parameter {item!r} in {text!r}")
        try:
            kwargs[key.strip()] = float(val)
        except ValueError:
            raise ValueError(f"non-numeric parameter {item!r} in {text!r}") from None
    try:
        return RESPONSE_PRESETS[m.group(1)](**kwargs)
    except TypeError:
        raise ValueError(f"bad parameters for {m.group(1)}: {sorted(kwargs)}") from None
