"""Mutually-nearest-neighbor partition of a configuration into singles and
cooperating pairs.

Two nearest-neighbor backends exist: a compiled cell-grid kernel
(``mnncoop._nncore``) and a KD-tree fallback (``mnncoop._nnpure``).  The
compiled kernel is preferred at import; set ``MNNCOOP_FORCE_PURE=1`` to force
the fallback.  Correctness is defined by the O(n^2) distance-matrix algorithm
(``nn_indices_bruteforce``), which the accelerated backends must reproduce
exactly.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .pointproc import Configuration

if os.environ.get("MNNCOOP_FORCE_PURE"):
    from ._nnpure import nn_indices

    BACKEND = "pure"
else:
    try:
        from ._nncore import nn_indices

        BACKEND = "compiled"
    except ImportError:  # extension not built
        from ._nnpure import nn_indices

        BACKEND = "pure"


class TieError(ValueError):
    """Exact nearest-neighbor distance tie: uniqueness violated."""


def nn_indices_bruteforce(pts: np.ndarray) -> np.ndarray:
    """Reference O(n^2) all-nearest-neighbor via the full distance matrix."""
    n = len(pts)
    if n < 2:
        raise ValueError("need at least 2 atoms for nearest-neighbor search")
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=2)
    np.fill_diagonal(d2, np.inf)
    best = d2.min(axis=1)
    counts = (d2 == best[:, None]).sum(axis=1)
    if np.any(counts > 1):
        i = int(np.nonzero(counts > 1)[0][0])
        raise TieError(f"nearest-neighbor tie at atom {i} violates uniqueness")
    return d2.argmin(axis=1).astype(np.int64)


def _nn(pts: np.ndarray, use_bruteforce: bool) -> np.ndarray:
    if use_bruteforce:
        return nn_indices_bruteforce(pts)
    try:
        return nn_indices(np.ascontiguousarray(pts, dtype=float))
    except ValueError as exc:
        raise TieError(str(exc)) from None


def nearest_neighbor(config: Configuration, i: int) -> int:
    """Index of the nearest neighbor of atom i."""
    return int(_nn(config.points, use_bruteforce=False)[i])


@dataclass
class Partition:
    """MNNR decomposition: singles plus unordered mutually-nearest pairs."""

    singles: np.ndarray  # (k,) atom indices
    pairs: np.ndarray  # (m, 2) atom index pairs, i < j
    source: Configuration

    @property
    def paired_flags(self) -> np.ndarray:
        """Boolean per atom: member of a pair."""
        flags = np.zeros(len(self.source), dtype=bool)
        if len(self.pairs):
            flags[self.pairs.ravel()] = True
        return flags

    @property
    def partner(self) -> np.ndarray:
        """Partner index per atom (-1 for singles)."""
        out = np.full(len(self.source), -1, dtype=np.int64)
        for i, j in self.pairs:
            out[i] = j
            out[j] = i
        return out

    def save_csv(self, path, interior: np.ndarray | None = None) -> None:
        n = len(self.source)
        if interior is None:
            interior = np.ones(n, dtype=bool)
        partner = self.partner
        with open(path, "w") as fh:
            fh.write("atom_index,role,partner_index,interior\n")
            for i in range(n):
                role = "paired" if partner[i] >= 0 else "single"
                fh.write(f"{i},{role},{partner[i]},{int(interior[i])}\n")


def mnnr_partition(config: Configuration, use_bruteforce: bool = False) -> Partition:
    """Partition a configuration: (i, j) is a pair iff each is the other's
    nearest neighbor; everything else is single."""
    n = len(config)
    if n == 0:
        raise ValueError("empty configuration")
    if n == 1:
        return Partition(np.array([0], dtype=np.int64), np.empty((0, 2), dtype=np.int64), config)
    v = _nn(config.points, use_bruteforce)
    idx = np.arange(n)
    mutual = v[v] == idx
    paired = mutual
    lower = idx[paired & (idx < v)]
    pairs = np.column_stack([lower, v[lower]]).astype(np.int64)
    singles = idx[~paired].astype(np.int64)
    return Partition(singles, pairs, config)


def indicator_vectors(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-atom indicators over a finite configuration: H[i] = 1 iff atom i is
    in a mutually-nearest pair, I = 1 - H."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n == 0:
        raise ValueError("empty configuration")
    if n == 1:
        return np.zeros(1, dtype=np.int64), np.ones(1, dtype=np.int64)
    v = nn_indices_bruteforce(pts)
    h = (v[v] == np.arange(n)).astype(np.int64)
    return h, 1 - h


def indicator_vectors_batch(batch: np.ndarray) -> np.ndarray:
    """Paired-indicator H for a batch of small configurations, shape (B, n, 2)
    -> (B, n).  Raises on exact ties."""
    b, n, _ = batch.shape
    if n == 1:
        return np.zeros((b, 1), dtype=np.int64)
    d2 = np.sum((batch[:, :, None, :] - batch[:, None, :, :]) ** 2, axis=3)
    ii = np.arange(n)
    d2[:, ii, ii] = np.inf
    best = d2.min(axis=2)
    if np.any((d2 == best[:, :, None]).sum(axis=2) > 1):
        raise TieError("nearest-neighbor tie in batch")
    v = d2.argmin(axis=2)
    vv = np.take_along_axis(v, v, axis=1)
    return (vv == ii[None, :]).astype(np.int64)


def interior_mask(config: Configuration, margin: float) -> np.ndarray:
    """Boolean per atom: at least ``margin`` from the window boundary."""
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    return config.window.boundary_distance(config.points) >= margin
