"""Two-PPP approximation of the pairing model: an independent PPP of singles
plus a PPP of pair "parents", each parent carrying a daughter station whose
distance from the origin is Rice distributed.

Also hosts the interference Laplace transforms of the two fields with an
exclusion radius, used by the analytic coverage formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import i0e
from scipy.stats import rice as rice_dist

from .geometry import GAMMA
from .pointproc import Configuration, Window, sample_ppp
from .signals import PathLoss, SignalModel, pair_lt, rice_pdf

DELTA = 1.0 / (2.0 - GAMMA)


@dataclass(frozen=True)
class SuperParams:
    """Scale constants of the superposition model for a given density."""

    lam: float
    gamma: float
    delta: float
    alpha: float  # Rayleigh scale of the pair separation
    xi: float  # Rayleigh scale of the nearest-single distance
    zeta: float  # Rayleigh scale of the nearest-parent distance


def derive_params(lam: float) -> SuperParams:
    if lam <= 0:
        raise ValueError("intensity must be positive")
    alpha = (2.0 * lam * math.pi * (2.0 - GAMMA)) ** -0.5
    xi = ((1.0 - DELTA) * 2.0 * lam * math.pi) ** -0.5
    zeta = (DELTA * lam * math.pi) ** -0.5
    return SuperParams(lam, GAMMA, DELTA, alpha, xi, zeta)


@dataclass
class MarkedConfiguration:
    """Singles plus (parent, daughter) couples; daughters may fall outside the
    sampling window."""

    singles: Configuration
    parents: Configuration
    daughters: np.ndarray  # (m, 2)


def sample_superposition(
    params: SuperParams, window: Window, rng: np.random.Generator
) -> MarkedConfiguration:
    """Singles ~ PPP((1-delta) lam); parents ~ PPP(delta lam / 2); each
    daughter is the parent displaced by a Rayleigh(alpha) radius and uniform
    angle, which makes the daughter's distance from the origin Rice given the
    parent's."""
    singles = sample_ppp((1.0 - params.delta) * params.lam, window, rng)
    parents = sample_ppp(0.5 * params.delta * params.lam, window, rng)
    m = len(parents)
    w = rng.rayleigh(params.alpha, m)
    ang = rng.uniform(0.0, 2.0 * math.pi, m)
    daughters = parents.points + np.column_stack([w * np.cos(ang), w * np.sin(ang)])
    return MarkedConfiguration(singles, parents, daughters)


def save_marked_csv(marked: MarkedConfiguration, path) -> None:
    with open(path, "w") as fh:
        fh.write("x_km,y_km,role,parent_index\n")
        for x, y in marked.singles.points:
            fh.write(f"{x},{y},single,-1\n")
        for i, (x, y) in enumerate(marked.parents.points):
            fh.write(f"{x},{y},parent,-1\n")
        for i, (x, y) in enumerate(marked.daughters):
            fh.write(f"{x},{y},daughter,{i}\n")


def joint_density_r2_z2(params: SuperParams, r, z):
    """Joint density of (nearest-parent radius, its daughter's radius).

    f(r, z) = r z / (alpha zeta)^2 * exp(-r^2/2 (1/a^2 + 1/zeta^2) - z^2/(2 a^2))
              * I0(r z / a^2),
    evaluated in log space with the scaled Bessel function.
    """
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    a2 = params.alpha**2
    z2 = params.zeta**2
    log_bessel_arg = r * z / a2
    expo = -0.5 * r * r * (1.0 / a2 + 1.0 / z2) - 0.5 * z * z / a2 + log_bessel_arg
    pref = r * z / (a2 * z2)
    return pref * np.exp(expo) * i0e(log_bessel_arg)


def z2_marginal_scale(params: SuperParams) -> float:
    """The daughter-of-nearest-parent radius is Rayleigh with this scale."""
    return math.sqrt(params.alpha**2 + params.zeta**2)


def rayleigh_cdf(x, scale):
    x = np.asarray(x, dtype=float)
    return -np.expm1(-x * x / (2.0 * scale**2))


def joint_cdf_r2_z2(params: SuperParams, r, z, n_nodes=80) -> float:
    """P(R2 <= r, Z2 <= z) by nested Gauss-Legendre quadrature of the joint
    density."""
    if r <= 0 or z <= 0:
        return 0.0
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    rr = 0.5 * r * (x + 1.0)
    wr = 0.5 * r * w
    zz = 0.5 * z * (x + 1.0)
    wz = 0.5 * z * w
    grid = joint_density_r2_z2(params, rr[:, None], zz[None, :])
    return float(wr @ grid @ wz)


def _tail_cutoff(pl: PathLoss, s: float, scale: float) -> float:
    """Radius beyond which the LT exponent integrand tail (~ s p r^{1-beta})
    contributes less than ~1e-8 of the exponent."""
    base = (s * pl.p) ** (1.0 / pl.beta) if s > 0 else 0.0
    return max(30.0 * scale, 10.0 * base, 1.0)


def lt_interference_singles(
    params: SuperParams, pl: PathLoss, s, rho: float, n_nodes=256
):
    """LT of the interference from all singles beyond radius rho, exponential
    fading: exp(-2 pi lam (1-delta) int_rho^inf (1 - r^b/(sp + r^b)) r dr).

    Vectorized over s; returns a float for scalar s."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr < 0) or rho < 0:
        raise ValueError("invalid parameters")
    s_max = float(s_arr.max())
    if s_max == 0.0:
        out = np.ones_like(s_arr)
        return float(out[0]) if np.isscalar(s) else out
    sp = s_arr[:, None] * pl.p
    hi = rho + _tail_cutoff(pl, s_max, 1.0 / math.sqrt(params.lam))
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    r = 0.5 * (hi + rho) + 0.5 * (hi - rho) * x
    wr = 0.5 * (hi - rho) * w
    rb = r**pl.beta
    integral = (sp / (sp + rb[None, :]) * r[None, :]) @ wr
    # analytic tail: sp r^{1-beta} - (sp)^2 r^{1-2 beta} + O(r^{1-3 beta})
    integral += sp[:, 0] * hi ** (2.0 - pl.beta) / (pl.beta - 2.0)
    integral -= sp[:, 0] ** 2 * hi ** (2.0 - 2.0 * pl.beta) / (2.0 * pl.beta - 2.0)
    out = np.exp(-2.0 * math.pi * params.lam * (1.0 - params.delta) * integral)
    out[s_arr == 0.0] = 1.0
    return float(out[0]) if np.isscalar(s) else out


def lt_singles_closed_form(params: SuperParams, pl: PathLoss, s: float) -> float:
    """Closed form of the singles LT at rho = 0 (exponential fading):
    exp(-lam (1-delta) 2 pi^2 (s p)^{2/beta} csc(2 pi / beta) / beta)."""
    if s == 0:
        return 1.0
    b = pl.beta
    return math.exp(
        -params.lam
        * (1.0 - params.delta)
        * 2.0
        * math.pi**2
        * (s * pl.p) ** (2.0 / b)
        / (b * math.sin(2.0 * math.pi / b))
    )


def rice_survival(rho: float, r, alpha: float):
    """P(Rice(r, alpha) > rho)."""
    if rho <= 0:
        return np.ones_like(np.asarray(r, dtype=float))
    return rice_dist.sf(rho, np.asarray(r, dtype=float) / alpha, scale=alpha)


def lt_interference_pairs(
    params: SuperParams,
    model: SignalModel,
    pl: PathLoss,
    s,
    rho: float,
    n_r=160,
    n_z=96,
    chunk=256,
):
    """LT of the interference from pair clusters whose parent and daughter both
    lie beyond rho:

        exp(-pi lam delta int_rho^inf (P(Z_r > rho) - L_g(s; r, rho)) r dr)

    with L_g(s; r, rho) = E[e^{-s g(r, Z_r)} 1{Z_r > rho}].  At rho = 0 the
    survival factor is 1 and this reduces to the familiar 1 - L_g integrand.

    Vectorized over s (chunked to bound the quadrature tensor); returns a
    float for scalar s.
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr < 0) or rho < 0:
        raise ValueError("invalid parameters")
    s_max = float(s_arr.max())
    if s_max == 0.0:
        out = np.ones_like(s_arr)
        return float(out[0]) if np.isscalar(s) else out
    alpha = params.alpha
    hi = rho + _tail_cutoff(pl, s_max, 1.0 / math.sqrt(params.lam)) + 12.0 * alpha
    xr, wr = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * (hi + rho) + 0.5 * (hi - rho) * xr
    wr = 0.5 * (hi - rho) * wr
    # inner expectation over the daughter radius, batched across all r nodes
    lo_z = np.maximum(rho, np.maximum(0.0, r - 9.0 * alpha))
    hi_z = r + 9.0 * alpha
    xz, wz = np.polynomial.legendre.leggauss(n_z)
    z = 0.5 * (hi_z + lo_z)[:, None] + 0.5 * (hi_z - lo_z)[:, None] * xz[None, :]
    wzz = 0.5 * (hi_z - lo_z)[:, None] * wz[None, :]
    rice_w = wzz * rice_pdf(z, r[:, None], alpha)
    surv = rice_survival(rho, r, alpha)
    out = np.empty_like(s_arr)
    for k in range(0, len(s_arr), chunk):
        sk = s_arr[k : k + chunk]
        lt_vals = pair_lt(model, pl, r[None, :, None], z[None, :, :], sk[:, None, None])
        lg = np.sum(rice_w[None, :, :] * lt_vals, axis=2)
        q = np.maximum(surv[None, :] - lg, 0.0)
        integral = q @ (wr * r)
        # algebraic r^{-beta} tail beyond the truncation radius
        integral += q[:, -1] * r[-1] ** 2 / (pl.beta - 2.0)
        out[k : k + chunk] = np.exp(-math.pi * params.lam * params.delta * integral)
    out[s_arr == 0.0] = 1.0
    return float(out[0]) if np.isscalar(s) else out
