"""Vertex pre-selection: mandatory, forbidden and undecided sets.

Vertex indices are 0-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["VertexPartition", "greedy_select", "make_design", "save_partition",
           "load_partition"]


def _as_index(v) -> np.ndarray:
    return np.unique(np.asarray(v, dtype=np.int64).ravel())


@dataclass(frozen=True)
class VertexPartition:
    """Disjoint vertex sets plus the sample-contributive budget ``z``.

    Attributes
    ----------
    mandatory : ndarray of int
        Vertices that must contribute to the samples.
    forbidden : ndarray of int
        Vertices whose rows of the sampling operator must vanish.
    undecided : ndarray of int
        Remaining vertices, free to be activated by the designer.
    z : int
        Upper limit on the number of sample-contributive vertices.
    """

    mandatory: np.ndarray
    forbidden: np.ndarray
    undecided: np.ndarray
    z: int

    def __post_init__(self):
        for name in ("mandatory", "forbidden", "undecided"):
            object.__setattr__(self, name, _as_index(getattr(self, name)))
        allv = np.concatenate([self.mandatory, self.forbidden, self.undecided])
        n = allv.size
        if np.unique(allv).size != n:
            raise ValueError("vertex sets overlap")
        if n and (allv.min() != 0 or allv.max() != n - 1):
            raise ValueError("vertex sets must cover 0..N-1 exactly")
        if not 0 <= self.z <= n:
            raise ValueError(f"budget z={self.z} outside [0, N={n}]")
        if not 0 <= self.k_prime <= self.undecided.size:
            raise ValueError(f"residual budget z - |mandatory| = {self.k_prime} "
                             f"outside [0, |undecided|={self.undecided.size}]")

    @classmethod
    def from_sets(cls, n_vertices: int, mandatory, forbidden, z: int) -> "VertexPartition":
        mandatory, forbidden = _as_index(mandatory), _as_index(forbidden)
        for s in (mandatory, forbidden):
            if s.size and (s.min() < 0 or s.max() >= n_vertices):
                raise ValueError(f"vertex index out of range for N={n_vertices}")
        rest = np.setdiff1d(np.arange(n_vertices), np.union1d(mandatory, forbidden))
        return cls(mandatory, forbidden, rest, z)

    @property
    def n_vertices(self) -> int:
        return self.mandatory.size + self.forbidden.size + self.undecided.size

    @property
    def k_prime(self) -> int:
        return self.z - self.mandatory.size

    def labels(self) -> np.ndarray:
        """Per-vertex code: 0 undecided, 1 mandatory, 2 forbidden."""
        out = np.zeros(self.n_vertices, dtype=np.int8)
        out[self.mandatory] = 1
        out[self.forbidden] = 2
        return out


def _smallest_sv(M) -> float:
    if M.size == 0:
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False)[-1])


def greedy_select(B, m: int, forbidden=()) -> np.ndarray:
    """Greedily choose ``m`` columns of ``B`` maximising the smallest singular value.

    At every step the column that maximises the smallest singular value of the
    selected column submatrix is added; ties go to the lowest index. Columns in
    ``forbidden`` are never chosen. Returns the indices in selection order.
    """
    B = np.asarray(B, dtype=float)
    N = B.shape[1]
    banned = set(int(i) for i in np.ravel(forbidden))
    pool = [i for i in range(N) if i not in banned]
    if not 0 <= m <= len(pool):
        raise ValueError(f"cannot select {m} vertices out of {len(pool)} allowed")
    chosen = []
    for _ in range(m):
        best, best_val = None, -np.inf
        for j in pool:
            val = _smallest_sv(B[:, chosen + [j]])
            if best is None or val > best_val + 1e-12 * max(1.0, abs(best_val)):
                best, best_val = j, val
        chosen.append(best)
        pool.remove(best)
    return np.array(chosen, dtype=np.int64)


def make_design(kind: str, B, n_mandatory: int, n_forbidden: int, z: int,
                seed) -> VertexPartition:
    """Pre-selection patterns used in the synthetic experiments.

    ``"i"``: mandatory set from the greedy selector, forbidden set drawn at
    random from the rest. ``"ii"``: both drawn at random. ``"iii"``: mandatory
    set drawn at random from a greedy pool of size ``2 * n_mandatory``,
    forbidden set drawn from outside that pool.
    """
    B = np.asarray(B, dtype=float)
    N = B.shape[1]
    if n_mandatory < 0 or n_forbidden < 0 or n_mandatory + n_forbidden > N:
        raise ValueError(f"|mandatory|={n_mandatory} + |forbidden|={n_forbidden} exceeds N={N}")
    if n_mandatory > z:
        raise ValueError(f"|mandatory|={n_mandatory} exceeds budget z={z}")
    rng = np.random.default_rng(seed)
    allv = np.arange(N)
    kind = str(kind).lower()
    if kind == "i":
        mandatory = greedy_select(B, n_mandatory)
        rest = np.setdiff1d(allv, mandatory)
    elif kind == "ii":
        mandatory = rng.choice(N, size=n_mandatory, replace=False)
        rest = np.setdiff1d(allv, mandatory)
    elif kind == "iii":
        if 2 * n_mandatory + n_forbidden > N:
            raise ValueError(f"design iii needs 2*|mandatory| + |forbidden| <= N={N}")
        pool = greedy_select(B, 2 * n_mandatory)
        mandatory = rng.choice(pool, size=n_mandatory, replace=False)
        rest = np.setdiff1d(allv, pool)
    else:
        raise ValueError(f"unknown design {kind!r}; expected 'i', 'ii' or 'iii'")
    forbidden = rng.choice(rest, size=n_forbidden, replace=False)
    return VertexPartition.from_sets(N, mandatory, forbidden, z)


def save_partition(path, part: VertexPartition) -> None:
    """Three comma separated index lines (mandatory, forbidden, undecided) and ``z=``."""
    lines = [",".join(str(int(i)) for i in s)
             for s in (part.mandatory, part.forbidden, part.undecided)]
    lines.append(f"z={part.z}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_partition(path) -> VertexPartition:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if len(lines) < 4 or not lines[3].startswith("z="):
        raise ValueError(f"{path}: expected three index lines and a 'z=' line")
    try:
        sets = [[int(t) for t in line.split(",") if t.strip()] for line in lines[:3]]
        z = int(lines[3][2:])
    except ValueError:
        raise ValueError(f"{path}: malformed partition file") from None
    return VertexPartition(*sets, z=z)
