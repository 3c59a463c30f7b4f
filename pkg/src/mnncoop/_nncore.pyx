# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cell-grid accelerated all-nearest-neighbor search (compiled hot kernel).

Returns, for each point, the index of its nearest neighbor, and raises on an
exact distance tie (which violates the uniqueness assumption the pairing
relies on).
"""

import numpy as np

cimport numpy as cnp

from libc.math cimport floor, sqrt


def nn_indices(cnp.ndarray[cnp.float64_t, ndim=2] pts not None):
    cdef Py_ssize_t n = pts.shape[0]
    if n < 2:
        raise ValueError("need at least 2 atoms for nearest-neighbor search")
    cdef cnp.ndarray[cnp.float64_t, ndim=2] p = np.ascontiguousarray(pts)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(n, dtype=np.int64)

    cdef double xmin = p[0, 0], xmax = p[0, 0], ymin = p[0, 1], ymax = p[0, 1]
    cdef Py_ssize_t i, j, k
    for i in range(1, n):
        if p[i, 0] < xmin: xmin = p[i, 0]
        if p[i, 0] > xmax: xmax = p[i, 0]
        if p[i, 1] < ymin: ymin = p[i, 1]
        if p[i, 1] > ymax: ymax = p[i, 1]

    cdef Py_ssize_t ng = <Py_ssize_t>sqrt(n / 2.0) + 1
    if ng < 1: ng = 1
    cdef double wx = (xmax - xmin), wy = (ymax - ymin)
    if wx <= 0: wx = 1.0
    if wy <= 0: wy = 1.0
    cdef double csx = wx / ng, csy = wy / ng
    cdef double cell = csx if csx < csy else csy  # lower bound on cell size

    # counting sort of points into grid cells
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cx = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cy = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] start = np.zeros(ng * ng + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] order = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t ix, iy, c
    for i in range(n):
        ix = <Py_ssize_t>floor((p[i, 0] - xmin) / csx)
        iy = <Py_ssize_t>floor((p[i, 1] - ymin) / csy)
        if ix >= ng: ix = ng - 1
        if iy >= ng: iy = ng - 1
        cx[i] = ix
        cy[i] = iy
        start[ix * ng + iy + 1] += 1
    for c in range(1, ng * ng + 1):
        start[c] += start[c - 1]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] fill = start[:ng * ng].copy()
    for i in range(n):
        c = cx[i] * ng + cy[i]
        order[fill[c]] = i
        fill[c] += 1

    cdef double best, d2, dx, dy, lb
    cdef Py_ssize_t besti, ring, gx, gy, lo, hi
    cdef bint tie
    for i in range(n):
        best = -1.0
        besti = -1
        tie = False
        ring = 0
        while True:
            # lower bound on the distance to any point in ring `ring`
            if ring > 0 and best >= 0.0:
                lb = (ring - 1) * cell
                if lb * lb > best:
                    break
            if ring > ng * 2:
                break
            for gx in range(cx[i] - ring, cx[i] + ring + 1):
                if gx < 0 or gx >= ng:
                    continue
                for gy in range(cy[i] - ring, cy[i] + ring + 1):
                    if gy < 0 or gy >= ng:
                        continue
                    # only the ring boundary cells
                    if ring > 0 and gx != cx[i] - ring and gx != cx[i] + ring \
                            and gy != cy[i] - ring and gy != cy[i] + ring:
                        continue
                    c = gx * ng + gy
                    lo = start[c]
                    hi = start[c + 1]
                    for k in range(lo, hi):
                        j = order[k]
                        if j == i:
                            continue
                        dx = p[i, 0] - p[j, 0]
                        dy = p[i, 1] - p[j, 1]
                        d2 = dx * dx + dy * dy
                        if best < 0.0 or d2 < best:
                            best = d2
                            besti = j
                            tie = False
                        elif d2 == best and j != besti:
                            tie = True
            ring += 1
        if tie:
            raise ValueError(
                "nearest-neighbor tie at atom %d violates uniqueness" % i
            )
        out[i] = besti
    return out
