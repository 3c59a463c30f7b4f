"""Pure-Python nearest-neighbor search (scipy KD-tree), used when the compiled
kernel is unavailable or explicitly disabled."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree


def nn_indices(pts: np.ndarray) -> np.ndarray:
    n = len(pts)
    if n < 2:
        raise ValueError("need at least 2 atoms for nearest-neighbor search")
    tree = cKDTree(pts)
    k = min(3, n)
    dist, idx = tree.query(pts, k=k)
    # column 0 is the point itself
    if k > 2:
        ties = dist[:, 1] == dist[:, 2]
        if np.any(ties):
            i = int(np.nonzero(ties)[0][0])
            raise ValueError(f"nearest-neighbor tie at atom {i} violates uniqueness")
    return idx[:, 1].astype(np.int64)
