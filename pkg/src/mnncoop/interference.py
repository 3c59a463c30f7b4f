"""Interference fields of the pairing model: Monte Carlo fields, closed-form /
quadrature expectations, empirical intensities, and the finite-window Laplace
functional series."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import i0e
from scipy.stats import poisson

from .geometry import GAMMA
from .mnnr import Partition, indicator_vectors_batch, interior_mask, mnnr_partition
from .pointproc import Configuration, Window
from .signals import PathLoss, SignalModel, pair_signal, single_signal

DELTA = 1.0 / (2.0 - GAMMA)


@dataclass
class InterferenceSample:
    i1: float
    i2: float
    exclusion_radius: float


def mc_interference(
    config: Configuration,
    partition: Partition,
    model: SignalModel,
    pl: PathLoss,
    r_excl: float,
    rng: np.random.Generator,
    conditional: bool = False,
) -> InterferenceSample:
    """One draw of the interference at the origin: singles beyond the
    exclusion radius emit individually; a pair emits once (per the scheme)
    when both members are beyond it.

    With ``conditional=True`` the fading is averaged out analytically given
    the geometry, a variance reduction that leaves the mean unchanged."""
    if r_excl < 0:
        raise ValueError("exclusion radius must be nonnegative")
    pts = config.points
    radii = np.hypot(pts[:, 0], pts[:, 1])
    i1 = 0.0
    sing = partition.singles[radii[partition.singles] > r_excl] if len(partition.singles) else partition.singles
    if len(sing):
        rs = radii[sing]
        if conditional:
            i1 = float(np.sum(pl.p / rs**pl.beta))
        else:
            i1 = float(single_signal(pl, rs, rng).sum())
    i2 = 0.0
    if len(partition.pairs):
        ra = radii[partition.pairs[:, 0]]
        rb = radii[partition.pairs[:, 1]]
        keep = (ra > r_excl) & (rb > r_excl)
        if keep.any():
            if conditional:
                i2 = float(np.sum(_mean_pair_signal(model, pl, ra[keep], rb[keep])))
            else:
                i2 = float(pair_signal(model, pl, ra[keep], rb[keep], rng).sum())
    return InterferenceSample(i1, i2, r_excl)


def expected_interference_singles(lam: float, pl: PathLoss, r_excl: float) -> float:
    """Mean interference from the singles beyond R, exponential fading:
    (1 - delta) lam 2 pi p R^{2-beta} / (beta - 2)."""
    if r_excl <= 0:
        raise ValueError("divergent integral: exclusion radius must be positive")
    return (
        (1.0 - DELTA)
        * lam
        * 2.0
        * math.pi
        * pl.p
        / (pl.beta - 2.0)
        * r_excl ** (2.0 - pl.beta)
    )


def _mean_pair_signal(model: SignalModel, pl: PathLoss, r, z):
    a = pl.p / r**pl.beta
    b = pl.p / z**pl.beta
    if model.kind == "nsc" or model.kind == "ph":
        return a + b
    if model.kind == "off":
        return model.q * a + (1.0 - model.q) * b
    if model.kind == "max":
        return a + b - a * b / (a + b)
    raise ValueError(f"no mean formula for model {model.kind!r}")


def expected_interference_pairs(
    lam: float, model: SignalModel, pl: PathLoss, r_excl: float, n_r=200, n_z=120
) -> float:
    """Mean interference from pairs with both members beyond R.

    The planar double integral reduces by isotropy to

        (1/2) lam^2 (2 pi)^2 int_R^inf int_R^inf r z E[g(r, z)]
            I0(2 c r z) e^{-c (r - z)^2} dz dr,   c = lam pi (2 - gamma),

    where the angular integral produced the Bessel factor.  The kernel
    concentrates near z = r with width ~ 1/sqrt(c r).
    """
    if r_excl <= 0:
        raise ValueError("divergent integral: exclusion radius must be positive")
    c = lam * math.pi * (2.0 - GAMMA)
    # radial extent: integrand decays like r^{1-beta} once the kernel width is
    # integrated out
    hi = r_excl + max(40.0 / math.sqrt(lam), 10.0)
    xr, wr = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * (hi + r_excl) + 0.5 * (hi - r_excl) * xr
    wr = 0.5 * (hi - r_excl) * wr
    width = 12.0 / np.sqrt(2.0 * c * np.maximum(r, 0.3))
    lo_z = np.maximum(r_excl, r - width)
    hi_z = r + width
    xz, wz = np.polynomial.legendre.leggauss(n_z)
    z = 0.5 * (hi_z + lo_z)[:, None] + 0.5 * (hi_z - lo_z)[:, None] * xz[None, :]
    wzz = 0.5 * (hi_z - lo_z)[:, None] * wz[None, :]
    rr = r[:, None]
    kernel = i0e(2.0 * c * rr * z) * np.exp(-c * (rr - z) ** 2)
    mean_g = _mean_pair_signal(model, pl, rr, z)
    inner = np.sum(wzz * z * mean_g * kernel, axis=1)
    return 0.5 * lam**2 * (2.0 * math.pi) ** 2 * float(wr @ (r * inner))


def intensity_check(partitions: list[Partition], margin: float) -> tuple[float, float]:
    """Empirical interior intensities of singles and paired atoms."""
    if not partitions:
        raise ValueError("need at least one replication")
    n1 = n2 = 0
    area = 0.0
    for part in partitions:
        cfg = part.source
        mask = interior_mask(cfg, margin)
        paired = part.paired_flags
        n2 += int((paired & mask).sum())
        n1 += int((~paired & mask).sum())
        if cfg.window.shape == "rect":
            x0, x1, y0, y1 = cfg.window.params
            area += max(0.0, (x1 - x0 - 2 * margin)) * max(0.0, (y1 - y0 - 2 * margin))
        else:
            _, _, rad = cfg.window.params
            area += math.pi * max(0.0, rad - margin) ** 2
    return n1 / area, n2 / area


def laplace_window_series(
    lam: float,
    window: Window,
    f,
    which: str,
    n_max: int,
    mc_per_term: int,
    rng: np.random.Generator,
    tolerance: float | None = None,
):
    """Truncated Laplace-functional series of the finite-window singles or
    pairs process.

    Conditioned on n atoms, the atoms are i.i.d. uniform; the n-th term is
    (lam^n / n!) |A|^n E[e^{-sum_i f(x_i) w_i}] with w the per-atom indicator
    of contributing to the chosen process (singles: atom is single within the
    n-configuration; pairs: atom is in a mutually-nearest pair).  The n-fold
    integrals are estimated by uniform Monte Carlo.  Returns (value, tail)
    where tail = P(Poisson(lam |A|) > n_max) bounds the truncation error of
    the e^{lam |A|}-normalized series.
    """
    if which not in ("singles", "pairs"):
        raise ValueError("which must be 'singles' or 'pairs'")
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    area = window.area
    mean_n = lam * area
    tail = float(poisson.sf(n_max, mean_n))
    if tolerance is not None and tail > tolerance:
        raise ValueError(
            f"truncation bound {tail:.3e} exceeds requested tolerance {tolerance:.3e}"
        )
    total = 1.0  # n = 0 term
    for n in range(1, n_max + 1):
        pts = window.sample_uniform(n * mc_per_term, rng).reshape(mc_per_term, n, 2)
        if n == 1:
            weights = np.zeros((mc_per_term, 1)) if which == "pairs" else np.ones((mc_per_term, 1))
        else:
            h = indicator_vectors_batch(pts)
            weights = h if which == "pairs" else 1 - h
        vals = np.exp(-np.sum(f(pts) * weights, axis=1))
        est = float(vals.mean())
        log_coef = n * math.log(lam * area) - math.lgamma(n + 1)
        total += math.exp(log_coef) * est
    value = math.exp(-mean_n) * total
    return value, tail


def direct_window_lt_mc(
    lam: float,
    window: Window,
    f,
    which: str,
    reps: int,
    rng: np.random.Generator,
) -> float:
    """Direct simulation oracle for the window Laplace functional: sample the
    window PPP, partition it, and average e^{-sum f over the chosen atoms}."""
    acc = 0.0
    for _ in range(reps):
        n = rng.poisson(lam * window.area)
        if n == 0:
            acc += 1.0
            continue
        pts = window.sample_uniform(n, rng)
        if n == 1:
            h = np.zeros(1)
        else:
            h = indicator_vectors_batch(pts[None, :, :])[0]
        w = h if which == "pairs" else 1 - h
        acc += math.exp(-float(np.sum(f(pts[None, :, :])[0] * w)))
    return acc / reps


def window_convergence_check(
    lam: float,
    radii,
    statistic,
    rng: np.random.Generator,
    reps: int = 20,
):
    """Evaluate a per-configuration statistic on growing disc windows.

    ``statistic(partition, mask)`` maps to a float; returns a list of
    (radius, mean, stderr) rows."""
    rows = []
    for rad in radii:
        win = Window.disc(0.0, 0.0, rad)
        margin = min(3.0 / math.sqrt(lam), 0.45 * rad)
        vals = []
        for _ in range(reps):
            cfg = None
            while cfg is None or len(cfg) < 2:
                cfg = _sample_ppp_retry(lam, win, rng)
            part = mnnr_partition(cfg)
            mask = interior_mask(cfg, margin)
            if mask.any():
                vals.append(statistic(part, mask))
        vals = np.asarray(vals)
        rows.append((rad, float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals)))))
    return rows


def _sample_ppp_retry(lam, win, rng):
    from .pointproc import sample_ppp

    return sample_ppp(lam, win, rng)
