"""Graph construction, combinatorial Laplacian, spectral basis and matrix files."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

__all__ = [
    "GraphSpec",
    "SpectralBasis",
    "DisconnectedGraphError",
    "build_knn_sensor_graph",
    "laplacian",
    "spectral_decomposition",
    "save_matrix",
    "load_matrix",
    "save_graph",
    "load_graph",
]

EIGEN_CLAMP = 1e-12


class DisconnectedGraphError(RuntimeError):
    """Raised when the random sensor graph stays disconnected after all retries."""


@dataclass(frozen=True)
class GraphSpec:
    """Weighted undirected graph given by its dense weight matrix."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"weight matrix must be square, got shape {w.shape}")
        object.__setattr__(self, "weights", w)

    @property
    def n_vertices(self) -> int:
        return self.weights.shape[0]

    def validate(self, tol: float = 1e-12) -> "GraphSpec":
        w = self.weights
        if not np.all(np.isfinite(w)):
            raise ValueError("weight matrix contains non-finite entries")
        if np.max(np.abs(w - w.T), initial=0.0) > tol:
            raise ValueError("weight matrix is not symmetric")
        if np.any(np.diag(w) != 0):
            raise ValueError("weight matrix must have a zero diagonal")
        if np.any(w < 0):
            raise ValueError("edge weights must be nonnegative")
        return self

    def is_connected(self) -> bool:
        n_comp, _ = connected_components(self.weights > 0, directed=False)
        return n_comp == 1


@dataclass(frozen=True)
class SpectralBasis:
    """Laplacian eigenpairs, eigenvalues ascending, eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n_vertices(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    def gft(self, x):
        """Graph Fourier transform of a signal (or signals stacked as columns)."""
        return self.eigenvectors.T @ x

    def igft(self, xhat):
        return self.eigenvectors @ xhat


def build_knn_sensor_graph(n: int, k: int = 6, seed: int = 0,
                           max_retries: int = 20) -> GraphSpec:
    """Random sensor graph on ``n`` points drawn uniformly in the unit square.

    Every point is linked to its ``k`` nearest neighbours with Gaussian weight
    ``exp(-d**2 / (2 theta**2))`` where ``theta`` is the mean kNN distance; the
    adjacency is symmetrised with an elementwise maximum. Disconnected draws
    are discarded and redrawn from the same seeded stream.

    Parameters
    ----------
    n : int
        Number of vertices, at least 2.
    k : int
        Neighbours per vertex, ``1 <= k < n``.
    seed : int
        Seed for the point cloud.
    max_retries : int
        Number of redraws allowed before giving up.

    Returns
    -------
    GraphSpec
    """
    if n < 2:
        raise ValueError(f"need at least 2 vertices, got n={n}")
    if k < 1 or k >= n:
        raise ValueError(f"k must satisfy 1 <= k < n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    for _ in range(max_retries + 1):
        pts = rng.uniform(0.0, 1.0, size=(n, 2))
        dist, idx = cKDTree(pts).query(pts, k=k + 1)
        # column 0 is the point itself
        dist, idx = dist[:, 1:], idx[:, 1:]
        theta = dist.mean()
        w = np.zeros((n, n))
        rows = np.repeat(np.arange(n), k)
        w[rows, idx.ravel()] = np.exp(-dist.ravel() ** 2 / (2.0 * theta**2))
        w = np.maximum(w, w.T)
        np.fill_diagonal(w, 0.0)
        g = GraphSpec(w)
        if g.is_connected():
            return g
    raise DisconnectedGraphError(
        f"sensor graph (n={n}, k={k}) still disconnected after "
        f"{max_retries} retries for seed={seed}")


def laplacian(g: GraphSpec) -> np.ndarray:
    """Combinatorial Laplacian ``D - W``."""
    w = g.weights
    return np.diag(w.sum(axis=1)) - w


def spectral_decomposition(L: np.ndarray, sym_tol: float = 1e-10) -> SpectralBasis:
    """Eigendecomposition of a symmetric PSD matrix with a fixed sign convention.

    Eigenvalues below ``1e-12`` are set to zero. Each eigenvector is flipped so
    that its largest-magnitude entry (first one on ties) is positive.
    """
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {L.shape}")
    if np.max(np.abs(L - L.T), initial=0.0) > sym_tol:
        raise ValueError("matrix is not symmetric")
    lam, U = np.linalg.eigh(0.5 * (L + L.T))
    lam = np.where(lam < EIGEN_CLAMP, 0.0, lam)
    pivot = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[pivot, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return SpectralBasis(lam, U * signs)


def save_matrix(path, M) -> None:
    """Write a matrix as ``# rows cols`` followed by comma separated rows.

    Values are printed with 17 significant digits so that reading the file
    back reproduces every double exactly. 1-D input is stored as a column.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    if M.ndim != 2:
        raise ValueError(f"expected a 1-D or 2-D array, got {M.ndim}-D")
    lines = [f"# {M.shape[0]} {M.shape[1]}"]
    lines += [",".join(format(v, ".17g") for v in row) for row in M]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_matrix(path) -> np.ndarray:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or not text[0].startswith("#"):
        raise ValueError(f"{path}: missing '# rows cols' header")
    try:
        rows, cols = (int(t) for t in text[0][1:].split())
    except ValueError:
        raise ValueError(f"{path}: malformed header {text[0]!r}") from None
    body = text[1:1 + rows]
    if len(body) != rows:
        raise ValueError(f"{path}: expected {rows} rows, found {len(body)}")
    out = np.empty((rows, cols))
    for i, line in enumerate(body):
        fields = line.split(",") if cols else []
        if len(fields) != cols:
            raise ValueError(f"{path}: row {i} has {len(fields)} values, expected {cols}")
        try:
            out[i] = [float(f) for f in fields]
        except ValueError:
            raise ValueError(f"{path}: row {i} has a non-numeric value") from None
    return out


def save_graph(path, g: GraphSpec) -> None:
    save_matrix(path, g.weights)


def load_graph(path, validate: bool = True) -> GraphSpec:
    g = GraphSpec(load_matrix(path))
    return g.validate() if validate else g
