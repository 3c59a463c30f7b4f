"""Command-line experiment runner.

Each subcommand binds the library modules to a reproducible run directory:
``<out>/data/*.csv`` (and ``*.json``) plus a ``manifest.json`` echoing the
resolved configuration.  Monte Carlo commands require ``--seed``; every
replication draws its generator from ``SeedSequence(seed).spawn(reps)`` and
replications are combined by index, so results do not depend on the worker
count.

Units: lengths in km, intensities in km^-2, powers in W, thresholds in dB.
Exit codes: 0 success, 2 invalid parameters, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .coverage import (
    CoverageCurve,
    _far_field_mean,
    _split_scheme,
    coverage_baseline_fixed,
    coverage_baseline_nocoop,
    coverage_closest_analytic,
    coverage_fixed_analytic,
    default_t_grid,
    mc_coverage_mnnr,
    mc_coverage_superposition,
)
from .interference import (
    direct_window_lt_mc,
    expected_interference_pairs,
    expected_interference_singles,
    laplace_window_series,
    mc_interference,
    window_convergence_check,
)
from .mnnr import TieError, interior_mask, mnnr_partition
from .pointproc import Configuration, Window, sample_hex_grid, sample_ppp
from .signals import PathLoss, pair_lt, parse_model
from .stats import (
    EmpiricalCdf,
    empirical_es,
    empirical_nn_cdf,
    ks_statistic,
    pair_distance_cdf,
    pair_distances,
    voronoi_pair_integral,
)
from .superposition import (
    derive_params,
    lt_interference_pairs,
    lt_interference_singles,
    lt_singles_closed_form,
    sample_superposition,
)


class ValidationError(Exception):
    pass


class NumericalError(Exception):
    pass


# ---------------------------------------------------------------------------
# plumbing


def _rng(seed_seq) -> np.random.Generator:
    return np.random.default_rng(seed_seq)


def _child_seeds(seed: int, n: int):
    return np.random.SeedSequence(seed).spawn(n)


def _pmap(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


def _pooled(vals):
    vals = np.asarray(vals, dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    mean = vals.mean(axis=0)
    se = (
        vals.std(axis=0, ddof=1) / math.sqrt(len(vals))
        if len(vals) > 1
        else np.full(vals.shape[1], np.nan)
    )
    return mean, se


def _square(side: float) -> Window:
    return Window.rect(0.0, side, 0.0, side)


def _parse_floats(text: str):
    try:
        vals = [float(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad numeric list {text!r}") from exc
    if not vals:
        raise ValidationError(f"empty numeric list {text!r}")
    return vals


def _write_csv(path, header: str, rows) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _check_finite(name: str, values) -> None:
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        bad = int(np.sum(~np.isfinite(arr)))
        raise NumericalError(f"{name}: {bad}/{arr.size} non-finite values")


class RunDir:
    def __init__(self, command: str, params: dict):
        out = params.get("out")
        if out is None:
            root = os.environ.get("MNNCOOP_OUTPUT_ROOT", "runs")
            tag = f"-s{params['seed']}" if params.get("seed") is not None else ""
            out = os.path.join(root, command + tag)
        self.path = out
        self.command = command
        self.params = params
        self.outputs: list[str] = []
        self.t0 = time.monotonic()
        os.makedirs(os.path.join(self.path, "data"), exist_ok=True)

    def data_path(self, name: str) -> str:
        self.outputs.append(os.path.join("data", name))
        return os.path.join(self.path, "data", name)

    def finish(self) -> None:
        manifest = {
            "command": self.command,
            "params": {k: v for k, v in self.params.items() if k != "out"},
            "version": __version__,
            "outputs": self.outputs,
            "wall_time_s": round(time.monotonic() - self.t0, 3),
        }
        with open(os.path.join(self.path, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"run directory: {self.path}")


# ---------------------------------------------------------------------------
# per-replication workers (module level so process pools can pickle them)


def _rep_fraction(task):
    seed_seq, lam, side, margin = task
    rng = _rng(seed_seq)
    win = _square(side)
    cfg = sample_ppp(lam, win, rng)
    while len(cfg) < 2:
        cfg = sample_ppp(lam, win, rng)
    part = mnnr_partition(cfg)
    mask = interior_mask(cfg, margin)
    if mask.sum() == 0:
        return np.nan
    return float(part.paired_flags[mask].mean())


def _rep_hex_fraction(task):
    seed_seq, spacing, q, side, margin = task
    rng = _rng(seed_seq)
    cfg = sample_hex_grid(spacing, q, _square(side), rng)
    if len(cfg) < 2:
        return np.nan
    try:
        part = mnnr_partition(cfg)
    except TieError:
        # unperturbed lattice: equidistant neighbors, no mutual pairs
        return 0.0
    mask = interior_mask(cfg, margin)
    if mask.sum() == 0:
        return np.nan
    return float(part.paired_flags[mask].mean())


def _rep_voronoi_probe(task):
    seed_seq, lam, side, margin, n_probes = task
    from scipy.spatial import cKDTree

    rng = _rng(seed_seq)
    win = _square(side)
    cfg = sample_ppp(lam, win, rng)
    while len(cfg) < 2:
        cfg = sample_ppp(lam, win, rng)
    part = mnnr_partition(cfg)
    probes = np.empty((0, 2))
    while len(probes) < n_probes:
        cand = win.sample_uniform(2 * n_probes, rng)
        probes = np.vstack([probes, cand[win.boundary_distance(cand) >= margin]])
    probes = probes[:n_probes]
    _, owner = cKDTree(cfg.points).query(probes)
    return float(part.paired_flags[owner].mean())


def _rep_pair_distances(task):
    seed_seq, lam, side, margin = task
    rng = _rng(seed_seq)
    win = _square(side)
    cfg = sample_ppp(lam, win, rng)
    while len(cfg) < 2:
        cfg = sample_ppp(lam, win, rng)
    return pair_distances([mnnr_partition(cfg)], margin)


def _rep_jfunction(task):
    seed_seq, lam, side, margin, r_grid, n_probes = task
    rng = _rng(seed_seq)
    win = _square(side)
    cfg = sample_ppp(lam, win, rng)
    while len(cfg) < 2:
        cfg = sample_ppp(lam, win, rng)
    part = mnnr_partition(cfg)
    out = {}
    for which in ("singles", "pairs"):
        try:
            g_hits, g_w = empirical_nn_cdf([part], which, margin, r_grid)
        except ValueError:
            out[which] = None
            continue
        f_hits, f_ok = empirical_es([part], which, margin, r_grid, n_probes, rng)
        if g_w[0] == 0 or not f_ok[0]:
            out[which] = None
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            j = (1.0 - g_hits[0]) / (1.0 - f_hits[0])
        out[which] = np.where(np.isfinite(j), j, np.nan)
    return out


def _rep_interference(task):
    seed_seq, lam, beta, power, scheme, r_list, w_radius = task
    rng = _rng(seed_seq)
    win = Window.disc(0.0, 0.0, w_radius)
    cfg = sample_ppp(lam, win, rng)
    while len(cfg) < 2:
        cfg = sample_ppp(lam, win, rng)
    part = mnnr_partition(cfg)
    pl = PathLoss(power, beta)
    model = parse_model(scheme)
    row = []
    for r_excl in r_list:
        smp = mc_interference(cfg, part, model, pl, r_excl, rng, conditional=True)
        row.append((smp.i1, smp.i2))
    return row


def _rep_lt(task):
    seed_seq, lam, beta, power, scheme, s_list, rho, w_radius = task
    rng = _rng(seed_seq)
    params = derive_params(lam)
    pl = PathLoss(power, beta)
    model = parse_model(scheme)
    marked = sample_superposition(params, Window.disc(0.0, 0.0, w_radius), rng)
    rs = np.hypot(*marked.singles.points.T) if len(marked.singles) else np.empty(0)
    rp = np.hypot(*marked.parents.points.T) if len(marked.parents) else np.empty(0)
    rd = np.hypot(*marked.daughters.T) if len(marked.daughters) else np.empty(0)
    rs = rs[rs > rho]
    keep = (rp > rho) & (rd > rho)
    rp, rd = rp[keep], rd[keep]
    out = np.empty((len(s_list), 2))
    for i, s in enumerate(s_list):
        # fading integrated out given the geometry
        l1 = float(np.prod(1.0 / (1.0 + s * power / rs**beta))) if len(rs) else 1.0
        l2 = float(np.prod(pair_lt(model, pl, rp, rd, s))) if len(rp) else 1.0
        out[i] = (l1, l2)
    return out


def _rep_coverage(task):
    import warnings

    seed_seq, model_name, merged, t_grid = task
    rng = _rng(seed_seq)
    warnings.filterwarnings("ignore", category=RuntimeWarning)  # 1-rep stderr slices
    pl = PathLoss(merged["power"], merged["beta"])
    kwargs = dict(
        sigma2=merged["sigma2"],
        t_grid=t_grid,
        reps=1,
        rng=rng,
        association=merged["association"],
        r0=merged["r0"],
        w_radius=merged["w_radius"],
    )
    if model_name == "mnnr":
        curve = mc_coverage_mnnr(merged["lambda"], merged["scheme"], pl, **kwargs)
    else:
        serve_model, _ = _split_scheme(merged["scheme"])
        if serve_model is None:
            raise ValidationError("scheme 'none' has no superposition sampler; use --models mnnr or baseline")
        curve = mc_coverage_superposition(
            derive_params(merged["lambda"]), serve_model, pl, **kwargs
        )
    return curve.values


def _quad_f(coef):
    def f(pts):
        return coef * np.sum(np.asarray(pts) ** 2, axis=-1)

    return f


# ---------------------------------------------------------------------------
# commands


def _cmd_fractions(merged):
    run = RunDir("fractions", merged)
    tasks = [
        (ss, merged["lambda"], merged["side"], merged["margin"])
        for ss in _child_seeds(merged["seed"], merged["reps"])
    ]
    vals = [v for v in _pmap(_rep_fraction, tasks, merged["workers"]) if np.isfinite(v)]
    if not vals:
        raise NumericalError("fractions: every replication had an empty interior")
    mean, se = _pooled(vals)
    _check_finite("fractions", mean)
    _write_json(
        run.data_path("fractions.json"),
        {
            "estimate": float(mean[0]),
            "stderr": float(se[0]),
            "n_reps": len(vals),
            "seed": merged["seed"],
        },
    )
    print(f"paired fraction: {mean[0]:.4f} +/- {se[0]:.4f} ({len(vals)} reps)")
    run.finish()


def _cmd_hexgrid_sweep(merged):
    run = RunDir("hexgrid-sweep", merged)
    spacing = merged["spacing"]
    qs = merged["q_values"]
    seeds = _child_seeds(merged["seed"], merged["reps"] * len(qs))
    tasks = [
        (seeds[i * merged["reps"] + k], spacing, q, merged["side"], merged["margin"])
        for i, q in enumerate(qs)
        for k in range(merged["reps"])
    ]
    flat = _pmap(_rep_hex_fraction, tasks, merged["workers"])
    rows = []
    for i, q in enumerate(qs):
        vals = [v for v in flat[i * merged["reps"] : (i + 1) * merged["reps"]] if np.isfinite(v)]
        if not vals:
            raise NumericalError(f"hexgrid-sweep: no usable replication at q={q}")
        mean, se = _pooled(vals)
        rows.append((q, mean[0], se[0]))
    _check_finite("hexgrid-sweep", [r[1] for r in rows])
    _write_csv(run.data_path("hexgrid_sweep.csv"), "q_km,value,stderr", rows)
    run.finish()


def _cmd_voronoi(merged):
    run = RunDir("voronoi", merged)
    tasks = [
        (ss, merged["lambda"], merged["side"], merged["margin"], merged["probes"])
        for ss in _child_seeds(merged["seed"], merged["reps"])
    ]
    vals = _pmap(_rep_voronoi_probe, tasks, merged["workers"])
    mean, se = _pooled(vals)
    _check_finite("voronoi probe", mean)
    out = {
        "probe_estimate": float(mean[0]),
        "probe_stderr": float(se[0]),
        "complement_estimate": float(1.0 - mean[0]),
        "n_reps": merged["reps"],
        "seed": merged["seed"],
        "integral": None,
    }
    if merged["integral"] == "yes":
        out["integral"] = voronoi_pair_integral(merged["lambda"])
        _check_finite("voronoi integral", out["integral"])
    _write_json(run.data_path("voronoi.json"), out)
    print(f"voronoi pair share: probe {mean[0]:.4f} +/- {se[0]:.4f}, integral {out['integral']}")
    run.finish()


def _cmd_nn_cdf(merged):
    run = RunDir("nn-cdf", merged)
    lam = merged["lambda"]
    tasks = [
        (ss, lam, merged["side"], merged["margin"])
        for ss in _child_seeds(merged["seed"], merged["reps"])
    ]
    chunks = _pmap(_rep_pair_distances, tasks, merged["workers"])
    samples = np.concatenate([c for c in chunks if len(c)])
    if len(samples) == 0:
        raise NumericalError("nn-cdf: no interior pairs observed")
    # grid out to where the analytic CDF reaches ~1 - 1e-3
    r_max = math.sqrt(7.0 / (lam * math.pi * 2.0))
    r_grid = np.linspace(r_max / merged["grid_points"], r_max, merged["grid_points"])
    emp = EmpiricalCdf(samples)(r_grid)
    ana = pair_distance_cdf(lam, r_grid)
    ks = ks_statistic(samples, lambda x: pair_distance_cdf(lam, x))
    _check_finite("nn-cdf", emp)
    _write_csv(
        run.data_path("pair_distance.csv"),
        "r_km,empirical,analytic",
        zip(r_grid, emp, ana),
    )
    _write_json(
        run.data_path("nn_cdf.json"),
        {"ks": ks, "n_pairs": int(len(samples)), "seed": merged["seed"]},
    )
    print(f"pair-distance law: KS {ks:.4f} over {len(samples)} pairs")
    run.finish()


def _cmd_jfunction(merged):
    run = RunDir("jfunction", merged)
    lam = merged["lambda"]
    r_max = 1.4 / math.sqrt(lam)
    r_grid = np.linspace(r_max / merged["grid_points"], r_max, merged["grid_points"])
    tasks = [
        (ss, lam, merged["side"], merged["margin"], r_grid, merged["probes"])
        for ss in _child_seeds(merged["seed"], merged["reps"])
    ]
    reps = _pmap(_rep_jfunction, tasks, merged["workers"])
    for which in ("singles", "pairs"):
        rows = [r[which] for r in reps if r[which] is not None]
        if not rows:
            raise NumericalError(f"jfunction: no usable replication for {which}")
        j_rep = np.vstack(rows)
        j_mean = np.nanmean(j_rep, axis=0)
        n_eff = np.sum(~np.isnan(j_rep), axis=0)
        j_se = np.nanstd(j_rep, axis=0, ddof=1) / np.sqrt(np.maximum(n_eff, 1))
        _write_csv(
            run.data_path(f"jfunction_{which}.csv"),
            "r_km,value,stderr",
            zip(r_grid, j_mean, j_se),
        )
    run.finish()


def _cmd_interference_mean(merged):
    run = RunDir("interference-mean", merged)
    lam, beta, power = merged["lambda"], merged["beta"], merged["power"]
    r_list = merged["r_excl"]
    if any(r <= 0 for r in r_list):
        raise ValidationError("exclusion radii must be positive")
    w_radius = merged["w_radius"] or 30.0 / math.sqrt(lam)
    pl = PathLoss(power, beta)
    model = parse_model(merged["scheme"])
    tasks = [
        (ss, lam, beta, power, merged["scheme"], r_list, w_radius)
        for ss in _child_seeds(merged["seed"], merged["reps"])
    ]
    reps = np.asarray(_pmap(_rep_interference, tasks, merged["workers"]))  # (reps, nR, 2)
    rows = []
    for i, r_excl in enumerate(r_list):
        a1 = expected_interference_singles(lam, pl, r_excl)
        a2 = expected_interference_pairs(lam, model, pl, r_excl)
        m1, s1 = _pooled(reps[:, i, 0])
        m2, s2 = _pooled(reps[:, i, 1])
        rows.append((r_excl, m1[0], s1[0], a1, m2[0], s2[0], a2))
    _check_finite("interference-mean", [r[1:] for r in rows])
    _write_csv(
        run.data_path("interference_mean.csv"),
        "r_excl_km,mc_singles,stderr_singles,analytic_singles,mc_pairs,stderr_pairs,analytic_pairs",
        rows,
    )
    for r in rows:
        print(
            f"R={r[0]:g}: singles mc {r[1]:.4g} vs {r[3]:.4g}, pairs mc {r[4]:.4g} vs {r[6]:.4g}"
        )
    run.finish()


def _cmd_laplace_window(merged):
    run = RunDir("laplace-window", merged)
    lam = merged["lambda"]
    side = merged["side"] or math.sqrt(3.0 / lam)
    win = _square(side)
    f = _quad_f(merged["coef"])
    rng = _rng(np.random.SeedSequence(merged["seed"]))
    whichs = ("singles", "pairs") if merged["which"] == "both" else (merged["which"],)
    out = {"lambda": lam, "side": side, "coef": merged["coef"], "seed": merged["seed"]}
    for which in whichs:
        series, tail = laplace_window_series(
            lam, win, f, which, merged["n_max"], merged["mc_per_term"], rng
        )
        direct = direct_window_lt_mc(lam, win, f, which, merged["direct_reps"], rng)
        _check_finite("laplace-window", [series, direct])
        out[which] = {
            "series": series,
            "truncation_tail": tail,
            "direct_mc": direct,
            "rel_gap": abs(series - direct) / direct,
        }
        print(f"{which}: series {series:.6f}, direct {direct:.6f}, tail {tail:.2e}")
    _write_json(run.data_path("laplace_window.json"), out)
    run.finish()


def _cmd_lt_check(merged):
    run = RunDir("lt-check", merged)
    lam, beta, power = merged["lambda"], merged["beta"], merged["power"]
    s_list = merged["s"]
    rho = merged["rho"]
    if rho < 0:
        raise ValidationError("exclusion radius must be nonnegative")
    params = derive_params(lam)
    pl = PathLoss(power, beta)
    model = parse_model(merged["scheme"])
    w_radius = merged["w_radius"] or 30.0 / math.sqrt(lam)
    tasks = [
        (ss, lam, beta, power, merged["scheme"], s_list, rho, w_radius)
        for ss in _child_seeds(merged["seed"], merged["reps"])
    ]
    reps = np.asarray(_pmap(_rep_lt, tasks, merged["workers"]))  # (reps, nS, 2)
    rows = []
    for i, s in enumerate(s_list):
        q1 = lt_interference_singles(params, pl, s, rho)
        q2 = lt_interference_pairs(params, model, pl, s, rho)
        closed = lt_singles_closed_form(params, pl, s) if rho == 0 else float("nan")
        mc, se = _pooled(reps[:, i, 0] * reps[:, i, 1])
        rows.append((s, q1, q2, q1 * q2, closed, mc[0], se[0]))
        print(f"s={s:g}: quad {q1 * q2:.6f}, mc {mc[0]:.6f} +/- {se[0]:.6f}")
    _check_finite("lt-check", [r[1:4] + r[5:] for r in rows])
    _write_csv(
        run.data_path("lt_check.csv"),
        "s,quad_singles,quad_pairs,quad_total,closed_singles,mc_total,mc_stderr",
        rows,
    )
    run.finish()


def _cmd_coverage(merged):
    run = RunDir("coverage", merged)
    lam, beta, power = merged["lambda"], merged["beta"], merged["power"]
    pl = PathLoss(power, beta)
    t_grid = default_t_grid(merged["t_lo_db"], merged["t_hi_db"], merged["t_step_db"])
    merged = dict(merged)
    merged["w_radius"] = merged["w_radius"] or 30.0 / math.sqrt(lam)
    models = [m.strip() for m in merged["models"].split(",") if m.strip()]
    known = {"mnnr", "superposition", "analytic", "baseline"}
    bad = set(models) - known
    if bad:
        raise ValidationError(f"unknown coverage models {sorted(bad)}; choose from {sorted(known)}")
    if "superposition" in models and merged["scheme"] == "none":
        raise ValidationError("scheme 'none' has no superposition sampler; use mnnr or baseline")
    assoc = merged["association"]
    if assoc not in ("fixed", "closest"):
        raise ValidationError("association must be 'fixed' or 'closest'")
    for model_name in models:
        if model_name == "baseline":
            curve = (
                coverage_baseline_fixed(lam, pl, merged["r0"], t_grid)
                if assoc == "fixed"
                else coverage_baseline_nocoop(lam, pl, t_grid)
            )
        elif model_name == "analytic":
            if merged["scheme"] == "none":
                curve = (
                    coverage_baseline_fixed(lam, pl, merged["r0"], t_grid)
                    if assoc == "fixed"
                    else coverage_baseline_nocoop(lam, pl, t_grid)
                )
            else:
                serve_model, interf_model = _split_scheme(merged["scheme"])
                if serve_model.kind != interf_model.kind:
                    raise ValidationError(
                        "analytic coverage needs a single-scheme token (nsc, off:q=, max)"
                    )
                sup = derive_params(lam)
                if assoc == "fixed":
                    vals = coverage_fixed_analytic(
                        sup, serve_model, pl, merged["r0"], merged["sigma2"], t_grid
                    )
                else:
                    vals = coverage_closest_analytic(
                        sup, serve_model, pl, merged["sigma2"], t_grid
                    )
                curve = CoverageCurve(
                    t_grid,
                    np.asarray(vals),
                    np.zeros(len(t_grid)),
                    {
                        "model": "analytic",
                        "association": assoc,
                        "scheme": merged["scheme"],
                        "lambda": lam,
                        "beta": beta,
                        "p": power,
                        "sigma2": merged["sigma2"],
                        "r0": merged["r0"] if assoc == "fixed" else None,
                        "seed": None,
                        "method": "analytic",
                    },
                )
        else:
            seeds = _child_seeds(merged["seed"], merged["reps"])
            tasks = [(ss, model_name, merged, t_grid) for ss in seeds]
            acc = np.vstack(_pmap(_rep_coverage, tasks, merged["workers"]))
            mean, se = _pooled(acc)
            curve = CoverageCurve(
                t_grid,
                mean,
                se,
                {
                    "model": model_name,
                    "association": assoc,
                    "scheme": merged["scheme"],
                    "lambda": lam,
                    "beta": beta,
                    "p": power,
                    "sigma2": merged["sigma2"],
                    "r0": merged["r0"] if assoc == "fixed" else None,
                    "seed": merged["seed"],
                    "method": "mc",
                    "reps": merged["reps"],
                    "window_radius_km": merged["w_radius"],
                },
            )
        _check_finite(f"coverage[{model_name}]", curve.values)
        path = run.data_path(f"coverage_{model_name}.csv")
        run.outputs.append(os.path.join("data", f"coverage_{model_name}.csv.meta.json"))
        curve.save_csv(path)
        peak = float(curve.values.max())
        print(f"{model_name} ({assoc}, {merged['scheme']}): peak coverage {peak:.4f}")
    run.finish()


def _paired_fraction_stat(part, mask):
    return float(part.paired_flags[mask].mean())


def _cmd_convergence(merged):
    run = RunDir("convergence", merged)
    if merged["statistic"] != "paired-fraction":
        raise ValidationError("supported statistics: paired-fraction")
    rng = _rng(np.random.SeedSequence(merged["seed"]))
    rows = window_convergence_check(
        merged["lambda"], merged["radii"], _paired_fraction_stat, rng, merged["reps"]
    )
    _check_finite("convergence", [r[1] for r in rows])
    _write_csv(run.data_path("convergence.csv"), "radius_km,value,stderr", rows)
    for rad, mean, se in rows:
        print(f"radius {rad:g}: {mean:.4f} +/- {se:.4f}")
    run.finish()


# ---------------------------------------------------------------------------
# argument handling

_DEFAULTS = {
    "fractions": {"lambda": 0.25, "side": 100.0, "margin": 6.0, "reps": 50},
    "hexgrid-sweep": {
        "spacing": 2.0,
        "side": 60.0,
        "margin": 6.0,
        "reps": 20,
        "q_values": "0,0.25,0.5,0.75,1,1.5,2,2.5,3",
    },
    "voronoi": {
        "lambda": 1.0,
        "side": 40.0,
        "margin": 3.0,
        "reps": 40,
        "probes": 2000,
        "integral": "yes",
    },
    "nn-cdf": {"lambda": 1.0, "side": 60.0, "margin": 3.0, "reps": 40, "grid_points": 60},
    "jfunction": {
        "lambda": 1.0,
        "side": 40.0,
        "margin": 3.0,
        "reps": 40,
        "probes": 2000,
        "grid_points": 30,
    },
    "interference-mean": {
        "lambda": 1.0,
        "beta": 4.0,
        "power": 1.0,
        "scheme": "nsc",
        "r_excl": "1,2,3",
        "reps": 2000,
        "w_radius": None,
    },
    "laplace-window": {
        "lambda": 1.0,
        "side": None,
        "coef": 0.1,
        "n_max": 15,
        "mc_per_term": 20000,
        "direct_reps": 100000,
        "which": "both",
    },
    "lt-check": {
        "lambda": 0.25,
        "beta": 3.0,
        "power": 1.0,
        "scheme": "nsc",
        "s": "0.1,1,10",
        "rho": 0.0,
        "reps": 2000,
        "w_radius": None,
    },
    "coverage": {
        "lambda": 0.25,
        "beta": 3.0,
        "power": 1.0,
        "sigma2": 0.0,
        "scheme": "nsc",
        "association": "closest",
        "models": "mnnr",
        "r0": 1.0,
        "reps": 2000,
        "t_lo_db": -10.0,
        "t_hi_db": 20.0,
        "t_step_db": 1.0,
        "w_radius": None,
    },
    "convergence": {
        "lambda": 1.0,
        "radii": "6,9,12,16,20",
        "statistic": "paired-fraction",
        "reps": 20,
    },
}

_HANDLERS = {
    "fractions": _cmd_fractions,
    "hexgrid-sweep": _cmd_hexgrid_sweep,
    "voronoi": _cmd_voronoi,
    "nn-cdf": _cmd_nn_cdf,
    "jfunction": _cmd_jfunction,
    "interference-mean": _cmd_interference_mean,
    "laplace-window": _cmd_laplace_window,
    "lt-check": _cmd_lt_check,
    "coverage": _cmd_coverage,
    "convergence": _cmd_convergence,
}

# commands whose outputs are purely analytic never need a seed
_LIST_PARAMS = {"r_excl", "s", "radii", "q_values"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mnncoop",
        description="Pairing-cooperation experiment runner (lengths km, "
        "intensities km^-2, powers W, thresholds dB)",
    )
    sub = parser.add_subparsers(dest="command")
    help_text = {
        "lambda": "process intensity [km^-2]",
        "side": "square window side [km]",
        "margin": "interior margin [km]",
        "reps": "Monte Carlo replications",
        "spacing": "hexagonal grid spacing [km]",
        "q_values": "comma list of perturbation radii [km]",
        "probes": "probe locations per replication",
        "grid_points": "points on the r grid",
        "beta": "path-loss exponent (> 2)",
        "power": "transmit power [W]",
        "scheme": "signal scheme token (single|nsc|off:q=Q|max|ph[:phase]|none|maxoff)",
        "r_excl": "comma list of exclusion radii [km]",
        "w_radius": "simulation disc radius [km] (default 30/sqrt(lambda))",
        "coef": "quadratic exponent coefficient of f(x) = coef * |x|^2",
        "n_max": "series truncation order",
        "mc_per_term": "Monte Carlo draws per series term",
        "direct_reps": "replications of the direct simulation oracle",
        "which": "sub-process: singles, pairs or both",
        "s": "comma list of transform arguments",
        "rho": "exclusion radius [km]",
        "sigma2": "noise power [W]",
        "association": "serving rule: fixed or closest",
        "models": "comma list of curve sources: mnnr, superposition, analytic, baseline",
        "r0": "fixed transmitter distance [km]",
        "t_lo_db": "lowest threshold [dB]",
        "t_hi_db": "highest threshold [dB]",
        "t_step_db": "threshold step [dB]",
        "radii": "comma list of window radii [km]",
        "statistic": "per-window statistic (paired-fraction)",
    }
    for cmd, defaults in _DEFAULTS.items():
        p = sub.add_parser(cmd, help=f"run the {cmd} experiment")
        for key, value in defaults.items():
            flag = "--" + key.replace("_", "-")
            if key in _LIST_PARAMS or isinstance(value, str) or value is None:
                p.add_argument(flag, default=None, help=help_text.get(key, ""))
            elif isinstance(value, int):
                p.add_argument(flag, type=int, default=None, help=help_text.get(key, ""))
            else:
                p.add_argument(flag, type=float, default=None, help=help_text.get(key, ""))
        p.add_argument("--seed", type=int, default=None, help="root RNG seed (required)")
        p.add_argument("--out", default=None, help="run directory (default $MNNCOOP_OUTPUT_ROOT/<command>-s<seed>)")
        p.add_argument("--config", default=None, help="JSON config file; explicit flags win")
        p.add_argument(
            "--workers",
            type=int,
            default=None,
            help="process count for replication-level parallelism (default: all cores)",
        )
    return parser


def _merge(args: argparse.Namespace) -> dict:
    defaults = dict(_DEFAULTS[args.command])
    defaults.update({"seed": None, "out": None, "workers": None})
    merged = dict(defaults)
    if args.config is not None:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config file: {exc}") from exc
        unknown = set(cfg) - set(defaults)
        if unknown:
            raise ValidationError(f"unknown config keys {sorted(unknown)}")
        merged.update(cfg)
    for key in defaults:
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            merged[key] = val
    for key in _LIST_PARAMS & set(merged):
        merged[key] = _parse_floats(merged[key])
    if merged["workers"] is None:
        merged["workers"] = os.cpu_count() or 1
    return merged


def _validate(command: str, merged: dict) -> None:
    def positive(key):
        if key in merged and not (isinstance(merged[key], (int, float)) and merged[key] > 0):
            raise ValidationError(f"--{key.replace('_', '-')} must be positive, got {merged[key]!r}")

    for key in ("lambda", "side", "reps", "power", "probes", "grid_points", "r0",
                "mc_per_term", "direct_reps", "coef", "t_step_db"):
        if merged.get(key) is not None:
            positive(key)
    for key in ("margin", "sigma2", "rho", "spacing"):
        if merged.get(key) is not None and merged[key] < 0:
            raise ValidationError(f"--{key} must be nonnegative")
    if merged.get("beta") is not None and merged["beta"] <= 2:
        raise ValidationError("--beta must exceed 2")
    if merged.get("w_radius") is not None and merged["w_radius"] <= 0:
        raise ValidationError("--w-radius must be positive")
    if merged.get("which") not in (None, "singles", "pairs", "both"):
        raise ValidationError("--which must be singles, pairs or both")
    if merged.get("integral") not in (None, "yes", "no"):
        raise ValidationError("--integral must be yes or no")
    if merged.get("t_lo_db") is not None and merged["t_lo_db"] >= merged["t_hi_db"]:
        raise ValidationError("--t-lo-db must be below --t-hi-db")
    if merged.get("scheme") is not None and merged["scheme"] not in ("none", "maxoff"):
        try:
            parse_model(merged["scheme"])
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc
    needs_seed = not (command == "coverage" and set(merged["models"].split(",")) <= {"analytic", "baseline"})
    if needs_seed and merged["seed"] is None:
        raise ValidationError("--seed is required for Monte Carlo commands")
    if merged["seed"] is not None and merged["seed"] < 0:
        raise ValidationError("--seed must be nonnegative")


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    try:
        merged = _merge(args)
        merged["out"] = args.out
        if args.command == "coverage":
            merged["models"] = ",".join(
                m.strip() for m in str(merged["models"]).split(",") if m.strip()
            )
        _validate(args.command, merged)
        _HANDLERS[args.command](merged)
    except (ValidationError, ValueError) as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return 2
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
