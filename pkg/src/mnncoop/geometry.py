"""Planar primitives: distances, disc/lens areas and the three-disc residual area.

All lengths are in km, areas in km^2.  The key constant is ``GAMMA``, the
surface (divided by pi) of the intersection of two unit discs whose centres
lie on each other's circumference.  The region emptied by a mutually-nearest
pair at distance d has area ``pi * d**2 * (2 - GAMMA)``.
"""

from __future__ import annotations

import math

import numpy as np

GAMMA = 2.0 / 3.0 - math.sqrt(3.0) / (2.0 * math.pi)


def lens_gamma() -> float:
    """Lens constant gamma = 2/3 - sqrt(3)/(2*pi) ~ 0.3910."""
    return GAMMA


def distance(p, q) -> float:
    """Euclidean distance between two planar points."""
    return math.hypot(p[0] - q[0], p[1] - q[1])


def pair_region_area(x, y) -> float:
    """Area of the union of the two discs B(x,d) and B(y,d) with d = |x-y|.

    This is the region that must be empty of other atoms for x and y to be
    mutually nearest neighbors.  Equals pi * d^2 * (2 - gamma).
    """
    d = distance(x, y)
    if d == 0.0:
        raise ValueError("coincident atoms")
    return math.pi * d * d * (2.0 - GAMMA)


def circle_lens_area(d: float, r1: float, r2: float) -> float:
    """Area of the intersection of two discs with radii r1, r2 and centre
    separation d."""
    if r1 <= 0.0 or r2 <= 0.0:
        return 0.0
    if d >= r1 + r2:
        return 0.0
    if d <= abs(r1 - r2):
        rmin = min(r1, r2)
        return math.pi * rmin * rmin
    # standard circular-lens formula
    a1 = (d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)
    a2 = (d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)
    a1 = min(1.0, max(-1.0, a1))
    a2 = min(1.0, max(-1.0, a2))
    tri = 0.5 * math.sqrt(
        max(0.0, (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2))
    )
    return r1 * r1 * math.acos(a1) + r2 * r2 * math.acos(a2) - tri


def disc_union_area(c1, r1: float, c2, r2: float) -> float:
    """Area of the union of two discs (inclusion-exclusion with the lens)."""
    if r1 < 0.0 or r2 < 0.0:
        raise ValueError("negative radius")
    d = distance(c1, c2)
    return math.pi * (r1 * r1 + r2 * r2) - circle_lens_area(d, r1, r2)


def _interval_in_disc(centre_proj: np.ndarray, centre_norm2: float, radius: float):
    """Radial interval, per direction, along which a ray from the origin lies
    inside the disc B(c, radius).

    ``centre_proj`` holds c . e_v for each direction v.  Returns (lo, hi)
    arrays; empty directions get lo > hi.
    """
    disc = centre_proj * centre_proj - (centre_norm2 - radius * radius)
    ok = disc > 0.0
    root = np.sqrt(np.where(ok, disc, 0.0))
    lo = np.where(ok, centre_proj - root, 1.0)
    hi = np.where(ok, centre_proj + root, 0.0)
    lo = np.maximum(lo, 0.0)
    return lo, hi


def _triple_disc_area(x, y, rho: float, r: float, n_angles: int) -> float:
    """Area of B(x,rho) & B(y,rho) & B(0,r) by an angular sweep.

    For each direction from the origin the admissible radii form an interval
    (intersection of three quadratic constraints), so the area reduces to a
    1-D integral of (hi^2 - lo^2)/2 over the angle.
    """
    v = (np.arange(n_angles) + 0.5) * (2.0 * math.pi / n_angles)
    ev = np.stack([np.cos(v), np.sin(v)], axis=1)
    px = ev[:, 0] * x[0] + ev[:, 1] * x[1]
    py = ev[:, 0] * y[0] + ev[:, 1] * y[1]
    lox, hix = _interval_in_disc(px, float(x[0] ** 2 + x[1] ** 2), rho)
    loy, hiy = _interval_in_disc(py, float(y[0] ** 2 + y[1] ** 2), rho)
    lo = np.maximum(lox, loy)
    hi = np.minimum(np.minimum(hix, hiy), r)
    seg = np.where(hi > lo, 0.5 * (hi * hi - lo * lo), 0.0)
    return float(seg.sum()) * (2.0 * math.pi / n_angles)


def three_disc_residual_area(r: float, s: float, theta: float, phi: float) -> float:
    """Area of (B(x,rho) | B(y,rho)) \\ B(0,r) with x = (r,theta), y = (s,phi)
    in polar coordinates and rho = |x - y|.

    This is the region that must be empty for the nearest atom x of the origin
    to be mutually paired with y.  When rho >= 2r the disc B(0,r) is contained
    in B(x,rho) and the closed form pi*rho^2*(2-gamma) - pi*r^2 applies;
    otherwise the triple overlap is evaluated by an adaptive angular sweep.
    """
    if r <= 0.0 or s <= 0.0:
        raise ValueError("nonpositive radius")
    rho2 = r * r + s * s - 2.0 * r * s * math.cos(theta - phi)
    rho = math.sqrt(max(rho2, 0.0))
    if rho == 0.0:
        raise ValueError("coincident atoms")
    union = math.pi * rho * rho * (2.0 - GAMMA)
    if rho >= 2.0 * r:
        return union - math.pi * r * r
    x = np.array([r * math.cos(theta), r * math.sin(theta)])
    y = np.array([s * math.cos(phi), s * math.sin(phi)])
    # intersection of the union with B(0,r), via inclusion-exclusion
    lens_x = circle_lens_area(r, rho, r)  # |x| = r
    lens_y = circle_lens_area(s, rho, r)  # |y| = s
    n = 256
    prev = _triple_disc_area(x, y, rho, r, n)
    while n < 1 << 16:
        n *= 2
        cur = _triple_disc_area(x, y, rho, r, n)
        if abs(cur - prev) <= 1e-6 * max(abs(cur), 1e-12):
            prev = cur
            break
        prev = cur
    inter = lens_x + lens_y - prev
    return union - inter


def _lens_area_vec(d, r1, r2):
    """Vectorized circular-lens area over broadcastable (d, r1, r2)."""
    d, r1, r2 = np.broadcast_arrays(
        np.asarray(d, dtype=float), np.asarray(r1, dtype=float), np.asarray(r2, dtype=float)
    )
    out = np.zeros(d.shape)
    contained = d <= np.abs(r1 - r2)
    out[contained] = math.pi * np.minimum(r1, r2)[contained] ** 2
    partial = ~contained & (d < r1 + r2)
    dd, a, b = d[partial], r1[partial], r2[partial]
    c1 = np.clip((dd * dd + a * a - b * b) / (2.0 * dd * a), -1.0, 1.0)
    c2 = np.clip((dd * dd + b * b - a * a) / (2.0 * dd * b), -1.0, 1.0)
    tri = 0.5 * np.sqrt(
        np.maximum(0.0, (-dd + a + b) * (dd + a - b) * (dd - a + b) * (dd + a + b))
    )
    out[partial] = a * a * np.arccos(c1) + b * b * np.arccos(c2) - tri
    return out


def three_disc_residual_area_batch(r: float, s: float, psi, n_angles: int = 2048):
    """Vectorized ``three_disc_residual_area(r, s, 0, psi)`` over an array of
    relative angles, fixed angular-sweep resolution instead of the adaptive
    loop of the scalar version."""
    if r <= 0.0 or s <= 0.0:
        raise ValueError("nonpositive radius")
    psi = np.asarray(psi, dtype=float)
    rho2 = r * r + s * s - 2.0 * r * s * np.cos(psi)
    rho = np.sqrt(np.maximum(rho2, 0.0))
    if np.any(rho == 0.0):
        raise ValueError("coincident atoms")
    union = math.pi * rho * rho * (2.0 - GAMMA)
    out = union - math.pi * r * r
    near = rho < 2.0 * r
    if near.any():
        rho_n = rho[near]
        psi_n = psi[near]
        lens_x = _lens_area_vec(r, rho_n, r)
        lens_y = _lens_area_vec(s, rho_n, r)
        v = (np.arange(n_angles) + 0.5) * (2.0 * math.pi / n_angles)
        cv, sv = np.cos(v), np.sin(v)
        # x = (r, 0), y = s (cos psi, sin psi); project on each direction
        px = r * cv[None, :]
        py = s * (np.cos(psi_n)[:, None] * cv[None, :] + np.sin(psi_n)[:, None] * sv[None, :])
        rho_c = rho_n[:, None]
        disc_x = px * px - (r * r - rho_c * rho_c)
        disc_y = py * py - (s * s - rho_c * rho_c)
        ok = (disc_x > 0.0) & (disc_y > 0.0)
        lox = np.maximum(px - np.sqrt(np.maximum(disc_x, 0.0)), 0.0)
        loy = np.maximum(py - np.sqrt(np.maximum(disc_y, 0.0)), 0.0)
        hix = px + np.sqrt(np.maximum(disc_x, 0.0))
        hiy = py + np.sqrt(np.maximum(disc_y, 0.0))
        lo = np.maximum(lox, loy)
        hi = np.minimum(np.minimum(hix, hiy), r)
        seg = np.where(ok & (hi > lo), 0.5 * (hi * hi - lo * lo), 0.0)
        triple = seg.sum(axis=1) * (2.0 * math.pi / n_angles)
        out[near] = union[near] - (lens_x + lens_y - triple)
    return out
