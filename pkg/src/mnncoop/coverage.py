"""Coverage probability under both association policies: analytic formulas on
the superposition model, Monte Carlo on both the superposition and the true
pairing model, and the non-cooperative baseline.

Monte Carlo replications average the exact conditional coverage probability
given the interference draw (the serving signal's fading is integrated out via
its CCDF), which keeps curves monotone in T and cuts the variance hard.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .geometry import GAMMA
from .mnnr import mnnr_partition
from .pointproc import Window, sample_ppp
from .signals import PathLoss, SignalModel, pair_ccdf, pair_lt, pair_signal
from .superposition import (
    SuperParams,
    joint_cdf_r2_z2,
    joint_density_r2_z2,
    lt_interference_pairs,
    lt_interference_singles,
    rayleigh_cdf,
    sample_superposition,
    z2_marginal_scale,
)

DELTA = 1.0 / (2.0 - GAMMA)


def default_t_grid(lo_db: float = -10.0, hi_db: float = 20.0, step_db: float = 1.0):
    """Linear thresholds on the default dB grid."""
    db = np.arange(lo_db, hi_db + 0.5 * step_db, step_db)
    return 10.0 ** (db / 10.0)


@dataclass
class CoverageCurve:
    thresholds: np.ndarray  # linear T
    values: np.ndarray
    stderr: np.ndarray
    meta: dict = field(default_factory=dict)

    def save_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("T_linear,T_dB,coverage,stderr\n")
            for t, v, e in zip(self.thresholds, self.values, self.stderr):
                fh.write(f"{t},{10.0 * math.log10(t)},{v},{e}\n")
        with open(str(path) + ".meta.json", "w") as fh:
            json.dump(self.meta, fh, indent=2)


def coverage_fixed_analytic(
    params: SuperParams, model: SignalModel, pl: PathLoss, r0: float, sigma2: float, t
):
    """Success probability for a fixed external transmitter at distance r0:
    e^{-T sigma^2 r0^b / p} L_I1(T r0^b / p) L_I2(T r0^b / p), no exclusion."""
    if r0 <= 0:
        raise ValueError("transmitter distance must be positive")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise ValueError("threshold must be nonnegative")
    s = t * r0**pl.beta / pl.p
    out = (
        np.exp(-s * sigma2)
        * lt_interference_singles(params, pl, s, 0.0)
        * lt_interference_pairs(params, model, pl, s, 0.0)
    )
    return out


def coverage_closest_analytic(
    params: SuperParams,
    model: SignalModel,
    pl: PathLoss,
    sigma2: float,
    t,
    n_r1=64,
    n_r2=56,
    n_z=48,
    return_terms: bool = False,
):
    """Closest-cluster association coverage, E[G(R1)] + E[H(R2,Z2)] + E[K(R2,Z2)].

    G = G~ G^ weights the single-serving event against the pair-cluster
    distances; H (z > r) and K (r > z) split the pair-serving event by which
    member is closest.  The hat factors evaluate the interference LTs at the
    branch-specific exclusion radii; the serving pair's fading enters through
    the tail-form coefficients of its CCDF.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise ValueError("threshold must be nonnegative")
    xi, zeta, alpha = params.xi, params.zeta, params.alpha
    z2_scale = z2_marginal_scale(params)

    # E[G(R1)]: serving single at r, pair clusters entirely farther
    hi1 = 6.0 * max(xi, zeta, z2_scale)
    x, w = np.polynomial.legendre.leggauss(n_r1)
    r1 = 0.5 * hi1 * (x + 1.0)
    w1 = 0.5 * hi1 * w
    f_r1 = r1 / xi**2 * np.exp(-(r1**2) / (2.0 * xi**2))
    joint_at_rr = np.array([joint_cdf_r2_z2(params, r, r) for r in r1])
    g_tilde = 1.0 - rayleigh_cdf(r1, zeta) - rayleigh_cdf(r1, z2_scale) + joint_at_rr
    eg = np.zeros(len(t))
    for i, r in enumerate(r1):
        if g_tilde[i] <= 0 or f_r1[i] < 1e-300:
            continue
        s = t * r**pl.beta / pl.p
        g_hat = (
            np.exp(-s * sigma2)
            * lt_interference_singles(params, pl, s, r)
            * lt_interference_pairs(params, model, pl, s, r)
        )
        eg += w1[i] * f_r1[i] * g_tilde[i] * g_hat

    # E[H] (daughter farther, serve from parent radius r) and E[K] (parent
    # farther); both share the pairs-LT at exclusion radius r
    from .signals import tail_terms

    hi2 = 6.0 * max(zeta, z2_scale)
    x2, w2 = np.polynomial.legendre.leggauss(n_r2)
    r2 = 0.5 * hi2 * (x2 + 1.0)
    wr2 = 0.5 * hi2 * w2
    xz, wz = np.polynomial.legendre.leggauss(n_z)
    eh = np.zeros(len(t))
    ek = np.zeros(len(t))
    for i, r in enumerate(r2):
        lo = max(0.0, r - 8.0 * alpha)
        hi = r + 8.0 * alpha
        z = 0.5 * (hi + lo) + 0.5 * (hi - lo) * xz
        wzz = 0.5 * (hi - lo) * wz
        dens = joint_density_r2_z2(params, r, z)
        c, d, _ = tail_terms(model, pl, r, z)  # (n_terms, n_z)
        s_flat = (t[:, None, None] * d[None, :, :]).ravel()  # (n_t * n_terms * n_z)
        l1_r = lt_interference_singles(params, pl, s_flat, r).reshape(len(t), *d.shape)
        l1_z = np.empty_like(l1_r)
        for j in range(len(z)):
            s_j = t[:, None] * d[:, j][None, :]
            l1_z[:, :, j] = lt_interference_singles(params, pl, s_j.ravel(), z[j]).reshape(
                len(t), d.shape[0]
            )
        l2_r = lt_interference_pairs(params, model, pl, s_flat, r).reshape(
            len(t), *d.shape
        )
        noise = np.exp(-t[:, None, None] * d[None, :, :] * sigma2)
        h_hat = np.sum(c[None, :, :] * noise * l1_r * l2_r, axis=1)  # (n_t, n_z)
        k_hat = np.sum(c[None, :, :] * noise * l1_z * l2_r, axis=1)
        h_tilde = np.exp(-(r**2) / (2.0 * xi**2)) * (z > r)
        k_tilde = np.exp(-(z**2) / (2.0 * xi**2)) * (r > z)
        eh += wr2[i] * np.sum(wzz * dens * h_tilde * h_hat, axis=1)
        ek += wr2[i] * np.sum(wzz * dens * k_tilde * k_hat, axis=1)

    total = eg + eh + ek
    if return_terms:
        return total, (eg, eh, ek)
    return total


def _far_field_mean(lam: float, pl: PathLoss, w_radius: float, factor: float) -> float:
    """Mean interference from emitters beyond the simulation window, added as
    a deterministic compensation (the far field is an average of many weak
    contributors)."""
    return factor * lam * 2.0 * math.pi * pl.p * w_radius ** (2.0 - pl.beta) / (
        pl.beta - 2.0
    )


def _pair_emission_factor(model: SignalModel) -> float:
    """Far-field mean of the pair emission relative to a single's p/r^beta."""
    if model.kind in ("nsc", "ph"):
        return 2.0
    if model.kind == "off":
        return 1.0
    if model.kind == "max":
        return 1.5
    raise ValueError(f"no far-field factor for model {model.kind!r}")


def _interference_scheme(model: SignalModel) -> SignalModel:
    """Scheme used by non-serving pairs: OFF(1/2) for the maxoff composite,
    otherwise the serving scheme itself."""
    if model.kind == "maxoff":  # pragma: no cover - guarded by _split_scheme
        return SignalModel("off", q=0.5)
    return model


def _split_scheme(scheme: str):
    """Map a scheme token to (serving model, interfering-pair model).

    'none' disables cooperation entirely; 'maxoff' serves with MAX while
    non-serving pairs interfere as OFF(1/2)."""
    if scheme == "none":
        return None, None
    if scheme == "maxoff":
        from .signals import parse_model

        return parse_model("max"), parse_model("off:q=0.5")
    from .signals import parse_model

    m = parse_model(scheme)
    return m, m


def _cond_cover_single(pl: PathLoss, r: float, u: np.ndarray) -> np.ndarray:
    """P(p h / r^beta > u), exponential fading, vectorized over u."""
    return np.exp(-u * r**pl.beta / pl.p)


def mc_coverage_superposition(
    params: SuperParams,
    model: SignalModel,
    pl: PathLoss,
    sigma2: float,
    t_grid,
    reps: int,
    rng: np.random.Generator,
    w_radius: float | None = None,
    association: str = "closest",
    r0: float = 1.0,
    seed: int | None = None,
) -> CoverageCurve:
    """Coverage on the sampled superposition model: either the closest-cluster
    rule with its branch-specific exclusion radii, or a fixed external
    transmitter at r0 with the whole field interfering."""
    if association not in ("fixed", "closest"):
        raise ValueError("association must be 'fixed' or 'closest'")
    if reps < 1:
        raise ValueError("need at least one replication")
    t_grid = np.asarray(t_grid, dtype=float)
    if w_radius is None:
        w_radius = 30.0 / math.sqrt(params.lam)
    win = Window.disc(0.0, 0.0, w_radius)
    far1 = _far_field_mean(params.lam * (1.0 - params.delta), pl, w_radius, 1.0)
    far2 = _far_field_mean(
        0.5 * params.delta * params.lam, pl, w_radius, _pair_emission_factor(model)
    )
    acc = np.zeros((reps, len(t_grid)))
    for k in range(reps):
        marked = sample_superposition(params, win, rng)
        rs = np.hypot(*marked.singles.points.T) if len(marked.singles) else np.empty(0)
        rp = np.hypot(*marked.parents.points.T) if len(marked.parents) else np.empty(0)
        rd = np.hypot(*marked.daughters.T) if len(marked.daughters) else np.empty(0)
        if association == "fixed":
            jp = -1
            rho1 = rho2 = 0.0
            serve = ("single", r0)
        else:
            r1 = rs.min() if len(rs) else np.inf
            if len(rp):
                jp = int(rp.argmin())
                r2, z2 = float(rp[jp]), float(rd[jp])
            else:
                jp, r2, z2 = -1, np.inf, np.inf
            if not np.isfinite(min(r1, r2, z2)):
                continue
            if r1 < min(r2, z2):
                rho1 = rho2 = r1
                serve = ("single", r1)
            else:
                serve = ("pair", r2, z2)
                if r2 < z2:
                    rho1 = rho2 = r2
                else:
                    rho1, rho2 = z2, r2
        keep_s = rs > rho1
        interf = 0.0
        if keep_s.any():
            interf += float(
                np.sum(pl.p * rng.exponential(1.0, keep_s.sum()) / rs[keep_s] ** pl.beta)
            )
        keep_p = (rp > rho2) & (rd > rho2)
        if jp >= 0 and serve[0] == "pair":
            keep_p[jp] = False
        if keep_p.any():
            interf += float(
                pair_signal(model, pl, rp[keep_p], rd[keep_p], rng).sum()
            )
        u = t_grid * (sigma2 + interf + far1 + far2)
        if serve[0] == "single":
            acc[k] = _cond_cover_single(pl, serve[1], u)
        else:
            acc[k] = pair_ccdf(model, pl, serve[1], serve[2], u)
    values = acc.mean(axis=0)
    stderr = acc.std(axis=0, ddof=1) / math.sqrt(reps)
    meta = {
        "model": "superposition",
        "association": association,
        "r0": r0 if association == "fixed" else None,
        "scheme": model.kind,
        "lambda": params.lam,
        "beta": pl.beta,
        "p": pl.p,
        "sigma2": sigma2,
        "seed": seed,
        "method": "mc",
        "reps": reps,
        "window_radius_km": w_radius,
    }
    return CoverageCurve(t_grid, values, stderr, meta)


def mc_coverage_mnnr(
    lam: float,
    scheme: str,
    pl: PathLoss,
    association: str,
    sigma2: float,
    t_grid,
    reps: int,
    rng: np.random.Generator,
    r0: float = 1.0,
    w_radius: float | None = None,
    seed: int | None = None,
) -> CoverageCurve:
    """Coverage on the true pairing model.

    association 'fixed': an external transmitter at distance r0 serves; every
    atom of the sampled process interferes.  association 'closest': the
    closest atom serves, together with its mutual partner if it has one.
    Scheme tokens as in ``_split_scheme`` ('none' = no cooperation anywhere).
    """
    if association not in ("fixed", "closest"):
        raise ValueError("association must be 'fixed' or 'closest'")
    if reps < 1:
        raise ValueError("need at least one replication")
    t_grid = np.asarray(t_grid, dtype=float)
    if w_radius is None:
        w_radius = 30.0 / math.sqrt(lam)
    win = Window.disc(0.0, 0.0, w_radius)
    serve_model, interf_model = _split_scheme(scheme)
    if serve_model is None:
        far_factor = 1.0
    else:
        far_factor = (1.0 - DELTA) + 0.5 * DELTA * _pair_emission_factor(interf_model)
    far = _far_field_mean(lam, pl, w_radius, far_factor)
    acc = np.zeros((reps, len(t_grid)))
    for k in range(reps):
        cfg = sample_ppp(lam, win, rng)
        while len(cfg) < 2:
            cfg = sample_ppp(lam, win, rng)
        radii = np.hypot(cfg.points[:, 0], cfg.points[:, 1])
        if serve_model is None:
            # no cooperation: every atom emits individually
            if association == "fixed":
                interf = float(
                    np.sum(pl.p * rng.exponential(1.0, len(radii)) / radii**pl.beta)
                )
                u = t_grid * (sigma2 + interf + far)
                acc[k] = _cond_cover_single(pl, r0, u)
            else:
                j = int(radii.argmin())
                mask = np.ones(len(radii), dtype=bool)
                mask[j] = False
                interf = float(
                    np.sum(pl.p * rng.exponential(1.0, mask.sum()) / radii[mask] ** pl.beta)
                )
                u = t_grid * (sigma2 + interf + far)
                acc[k] = _cond_cover_single(pl, float(radii[j]), u)
            continue
        part = mnnr_partition(cfg)
        partner = part.partner
        if association == "fixed":
            serving_idx = np.empty(0, dtype=np.int64)
        else:
            j = int(radii.argmin())
            serving_idx = (
                np.array([j, partner[j]]) if partner[j] >= 0 else np.array([j])
            )
        non_serving = np.ones(len(radii), dtype=bool)
        non_serving[serving_idx] = False
        interf = 0.0
        sing = part.singles[non_serving[part.singles]]
        if len(sing):
            interf += float(
                np.sum(pl.p * rng.exponential(1.0, len(sing)) / radii[sing] ** pl.beta)
            )
        if len(part.pairs):
            keep = non_serving[part.pairs[:, 0]] & non_serving[part.pairs[:, 1]]
            if keep.any():
                interf += float(
                    pair_signal(
                        interf_model,
                        pl,
                        radii[part.pairs[keep, 0]],
                        radii[part.pairs[keep, 1]],
                        rng,
                    ).sum()
                )
        u = t_grid * (sigma2 + interf + far)
        if association == "fixed":
            acc[k] = _cond_cover_single(pl, r0, u)
        elif len(serving_idx) == 1:
            acc[k] = _cond_cover_single(pl, float(radii[serving_idx[0]]), u)
        else:
            ra, rb = float(radii[serving_idx[0]]), float(radii[serving_idx[1]])
            acc[k] = pair_ccdf(serve_model, pl, ra, rb, u)
    values = acc.mean(axis=0)
    stderr = acc.std(axis=0, ddof=1) / math.sqrt(reps)
    meta = {
        "model": "mnnr",
        "association": association,
        "scheme": scheme,
        "lambda": lam,
        "beta": pl.beta,
        "p": pl.p,
        "sigma2": sigma2,
        "r0": r0 if association == "fixed" else None,
        "seed": seed,
        "method": "mc",
        "reps": reps,
        "window_radius_km": w_radius,
    }
    return CoverageCurve(t_grid, values, stderr, meta)


def coverage_baseline_nocoop(lam: float, pl: PathLoss, t_grid) -> CoverageCurve:
    """Closest-transmitter, Rayleigh-fading, interference-limited PPP coverage:
    1 / (1 + T^{2/b} int_{T^{-2/b}}^inf du / (1 + u^{b/2})).  Independent of
    lam in the noiseless regime."""
    t_grid = np.asarray(t_grid, dtype=float)
    b = pl.beta
    vals = np.empty(len(t_grid))
    for i, t in enumerate(t_grid):
        if t == 0:
            vals[i] = 1.0
            continue
        lo = t ** (-2.0 / b)
        integral, _ = quad(lambda u: 1.0 / (1.0 + u ** (b / 2.0)), lo, np.inf)
        vals[i] = 1.0 / (1.0 + t ** (2.0 / b) * integral)
    meta = {
        "model": "baseline",
        "association": "closest",
        "scheme": "none",
        "lambda": lam,
        "beta": b,
        "p": pl.p,
        "sigma2": 0.0,
        "seed": None,
        "method": "analytic",
    }
    return CoverageCurve(t_grid, vals, np.zeros(len(t_grid)), meta)


def coverage_baseline_fixed(lam: float, pl: PathLoss, r0: float, t_grid) -> CoverageCurve:
    """Fixed external transmitter at r0 over a non-cooperative PPP: the full
    shot-noise LT of the whole process evaluated at T r0^b / p."""
    if r0 <= 0:
        raise ValueError("transmitter distance must be positive")
    t_grid = np.asarray(t_grid, dtype=float)
    b = pl.beta
    s = t_grid * r0**b / pl.p
    expo = lam * 2.0 * math.pi**2 * (s * pl.p) ** (2.0 / b) / (b * math.sin(2.0 * math.pi / b))
    vals = np.exp(-expo)
    meta = {
        "model": "baseline",
        "association": "fixed",
        "scheme": "none",
        "lambda": lam,
        "beta": b,
        "p": pl.p,
        "sigma2": 0.0,
        "r0": r0,
        "seed": None,
        "method": "analytic",
    }
    return CoverageCurve(t_grid, vals, np.zeros(len(t_grid)), meta)
