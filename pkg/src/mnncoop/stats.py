"""Structural statistics of the pairing: paired fraction, Voronoi share of the
paired process, pair-distance law, empty-space and J functions."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .geometry import GAMMA, three_disc_residual_area_batch
from .mnnr import Partition, interior_mask, mnnr_partition
from .pointproc import Configuration, Window, sample_ppp

DELTA = 1.0 / (2.0 - GAMMA)


@dataclass
class Estimate:
    """Replicated scalar estimate with its standard error."""

    estimate: float
    stderr: float
    n_reps: int
    seed: int | None = None

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(
                {
                    "estimate": self.estimate,
                    "stderr": self.stderr,
                    "n_reps": self.n_reps,
                    "seed": self.seed,
                },
                fh,
                indent=2,
            )


def _pooled(vals, seed=None) -> Estimate:
    vals = np.asarray(vals, dtype=float)
    se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else float("nan")
    return Estimate(float(vals.mean()), se, len(vals), seed)


def fraction_paired(
    lam: float,
    window: Window,
    margin: float,
    n_reps: int,
    rng: np.random.Generator,
    seed: int | None = None,
) -> Estimate:
    """Interior fraction of atoms that end up in pairs, replicated."""
    vals = []
    for _ in range(n_reps):
        cfg = sample_ppp(lam, window, rng)
        while len(cfg) < 2:
            cfg = sample_ppp(lam, window, rng)
        part = mnnr_partition(cfg)
        mask = interior_mask(cfg, margin)
        if mask.sum() == 0:
            continue
        vals.append(part.paired_flags[mask].mean())
    if not vals:
        raise ValueError("no interior atoms in any replication")
    return _pooled(vals, seed)


def voronoi_share_pairs(
    lam: float,
    window: Window,
    margin: float,
    n_reps: int,
    rng: np.random.Generator,
    seed: int | None = None,
) -> Estimate:
    """Probability that a uniform probe's closest atom is a paired one,
    estimated with probes in the eroded window (closest-atom search over the
    whole configuration to avoid boundary bias)."""
    vals = []
    for _ in range(n_reps):
        cfg = sample_ppp(lam, window, rng)
        while len(cfg) < 2:
            cfg = sample_ppp(lam, window, rng)
        part = mnnr_partition(cfg)
        probes = _interior_probes(window, margin, 2000, rng)
        tree = cKDTree(cfg.points)
        _, owner = tree.query(probes)
        vals.append(part.paired_flags[owner].mean())
    return _pooled(vals, seed)


def _interior_probes(window: Window, margin: float, n: int, rng) -> np.ndarray:
    pts = np.empty((0, 2))
    while len(pts) < n:
        cand = window.sample_uniform(2 * n, rng)
        keep = window.boundary_distance(cand) >= margin
        pts = np.vstack([pts, cand[keep]])
    return pts[:n]


def voronoi_pair_integral(lam: float = 1.0, n_r=72, n_s=72, n_psi=48) -> float:
    """Probability that the origin's closest atom is paired, as a repeated
    integral over the closest atom at radius r, its pair partner at radius s
    and relative angle (necessarily s >= r, else y would be closer), weighted
    by the void probability of the disc plus the residual pair region:

        lam^2 2 pi int_0^inf int_r^inf int_0^{2 pi}
            r s e^{-lam pi r^2 - lam F(r, s, 0, psi)} dpsi ds dr

    where F is the two-disc pair-union area seen beyond the probe's disc and
    rotational symmetry collapsed the position angle into the 2 pi factor.
    The value is scale invariant in lam.
    """
    if lam <= 0:
        raise ValueError("intensity must be positive")
    scale = 1.0 / math.sqrt(lam)
    hi_r = 3.2 * scale  # e^{-lam pi r^2} < 1e-14 beyond
    xr, wr = np.polynomial.legendre.leggauss(n_r)
    r_nodes = 0.5 * hi_r * (xr + 1.0)
    wr = 0.5 * hi_r * wr
    xs, ws = np.polynomial.legendre.leggauss(n_s)
    xp, wp = np.polynomial.legendre.leggauss(n_psi)
    # F is even in psi; integrate (0, pi) and double
    psi_nodes = 0.5 * math.pi * (xp + 1.0)
    wp = 0.5 * math.pi * wp
    total = 0.0
    for i, r in enumerate(r_nodes):
        # pair-void area grows like rho^2; beyond s - r ~ 2 scale the
        # integrand is negligible
        hi_s = r + 2.5 * scale
        s_nodes = 0.5 * (hi_s + r) + 0.5 * (hi_s - r) * xs
        ws_i = 0.5 * (hi_s - r) * ws
        acc_r = 0.0
        for j, s in enumerate(s_nodes):
            f_vals = three_disc_residual_area_batch(r, s, psi_nodes)
            inner = 2.0 * float(wp @ np.exp(-lam * f_vals))
            acc_r += ws_i[j] * s * inner
        total += wr[i] * r * math.exp(-lam * math.pi * r * r) * acc_r
    return lam**2 * 2.0 * math.pi * total


def pair_distances(partitions: list[Partition], margin: float) -> np.ndarray:
    """Distances of pairs with both members in the window interior."""
    out = []
    for part in partitions:
        if not len(part.pairs):
            continue
        pts = part.source.points
        mask = interior_mask(part.source, margin)
        keep = mask[part.pairs[:, 0]] & mask[part.pairs[:, 1]]
        d = np.linalg.norm(pts[part.pairs[keep, 0]] - pts[part.pairs[keep, 1]], axis=1)
        out.append(d)
    return np.concatenate(out) if out else np.empty(0)


def pair_distance_cdf(lam: float, r) -> np.ndarray:
    """Law of the distance between the members of a typical pair:
    G(r) = 1 - e^{-lam pi r^2 (2 - gamma)}."""
    r = np.asarray(r, dtype=float)
    return -np.expm1(-lam * math.pi * r * r * (2.0 - GAMMA))


def ks_statistic(samples: np.ndarray, cdf) -> float:
    """Kolmogorov-Smirnov distance between an empirical sample and a CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    if n == 0:
        raise ValueError("empty sample")
    f = np.asarray(cdf(x), dtype=float)
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    return float(max(np.max(upper - f), np.max(f - lower)))


class EmpiricalCdf:
    """Step-function empirical CDF over a sample."""

    def __init__(self, samples):
        self.x = np.sort(np.asarray(samples, dtype=float))
        if len(self.x) == 0:
            raise ValueError("empty sample")

    def __call__(self, t):
        return np.searchsorted(self.x, np.asarray(t, dtype=float), side="right") / len(self.x)


def empirical_nn_cdf(partitions: list[Partition], which: str, margin: float, r_grid):
    """Empirical nearest-neighbor distance CDF of the singles or paired
    sub-configuration, from interior reference atoms (neighbor search over the
    full sub-configuration).  Returns (values, counts)."""
    r_grid = np.asarray(r_grid, dtype=float)
    hits = np.zeros((len(partitions), len(r_grid)))
    weights = np.zeros(len(partitions))
    for k, part in enumerate(partitions):
        sub = part.singles if which == "singles" else np.unique(part.pairs.ravel())
        if len(sub) < 2:
            continue
        pts = part.source.points[sub]
        mask = interior_mask(part.source, margin)[sub]
        if mask.sum() == 0:
            continue
        tree = cKDTree(pts)
        d, _ = tree.query(pts[mask], k=2)
        nn = d[:, 1]
        hits[k] = (nn[:, None] <= r_grid[None, :]).mean(axis=0)
        weights[k] = mask.sum()
    if weights.sum() == 0:
        raise ValueError("no usable replications")
    return hits, weights


def empirical_es(
    partitions: list[Partition], which: str, margin: float, r_grid, n_probes: int, rng
):
    """Empty-space function of a sub-configuration: per-replication probability
    that a probe's distance to the sub-configuration is <= r."""
    r_grid = np.asarray(r_grid, dtype=float)
    hits = np.zeros((len(partitions), len(r_grid)))
    ok = np.zeros(len(partitions), dtype=bool)
    for k, part in enumerate(partitions):
        sub = part.singles if which == "singles" else np.unique(part.pairs.ravel())
        if len(sub) == 0:
            continue
        pts = part.source.points[sub]
        probes = _interior_probes(part.source.window, margin, n_probes, rng)
        d, _ = cKDTree(pts).query(probes)
        hits[k] = (d[:, None] <= r_grid[None, :]).mean(axis=0)
        ok[k] = True
    return hits, ok


def j_function(
    lam: float,
    which: str,
    window: Window,
    margin: float,
    n_reps: int,
    r_grid,
    rng: np.random.Generator,
    n_probes: int = 2000,
):
    """Ratio J(r) = (1 - G(r)) / (1 - F(r)) of the singles or pairs process,
    with nearest-neighbor CDF G and empty-space CDF F, replicated for a
    standard error.  Returns (r_grid, j_mean, j_stderr)."""
    r_grid = np.asarray(r_grid, dtype=float)
    parts = []
    for _ in range(n_reps):
        cfg = sample_ppp(lam, window, rng)
        while len(cfg) < 2:
            cfg = sample_ppp(lam, window, rng)
        parts.append(mnnr_partition(cfg))
    g_hits, g_w = empirical_nn_cdf(parts, which, margin, r_grid)
    f_hits, f_ok = empirical_es(parts, which, margin, r_grid, n_probes, rng)
    usable = (g_w > 0) & f_ok
    g = g_hits[usable]
    f = f_hits[usable]
    with np.errstate(divide="ignore", invalid="ignore"):
        j_rep = (1.0 - g) / (1.0 - f)
    j_rep = np.where(np.isfinite(j_rep), j_rep, np.nan)
    j_mean = np.nanmean(j_rep, axis=0)
    n_eff = np.sum(~np.isnan(j_rep), axis=0)
    j_se = np.nanstd(j_rep, axis=0, ddof=1) / np.sqrt(np.maximum(n_eff, 1))
    return r_grid, j_mean, j_se


def save_curve_csv(path, r, value, stderr) -> None:
    with open(path, "w") as fh:
        fh.write("r_km,value,stderr\n")
        for a, b, c in zip(r, value, stderr):
            fh.write(f"{a},{b},{c}\n")
