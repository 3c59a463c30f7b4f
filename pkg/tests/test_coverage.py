import json
import math

import numpy as np
import pytest

from mnncoop.coverage import (
    CoverageCurve,
    _pair_emission_factor,
    _split_scheme,
    coverage_baseline_fixed,
    coverage_baseline_nocoop,
    coverage_closest_analytic,
    coverage_fixed_analytic,
    default_t_grid,
    mc_coverage_mnnr,
    mc_coverage_superposition,
)
from mnncoop.pointproc import make_rng
from mnncoop.signals import PathLoss, parse_model
from mnncoop.superposition import derive_params

LAM = 0.25
PARAMS = derive_params(LAM)
PL3 = PathLoss(1.0, 3.0)
PL4 = PathLoss(1.0, 4.0)


def test_default_t_grid():
    t = default_t_grid()
    assert len(t) == 31
    assert t[0] == pytest.approx(0.1)
    assert t[-1] == pytest.approx(100.0)
    db = 10.0 * np.log10(t)
    np.testing.assert_allclose(np.diff(db), 1.0)


def test_curve_csv_roundtrip(tmp_path):
    t = default_t_grid(-2, 2, 2)
    curve = CoverageCurve(t, np.linspace(0.9, 0.3, len(t)), np.full(len(t), 0.01), {"seed": 5})
    path = tmp_path / "cov.csv"
    curve.save_csv(path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "T_linear,T_dB,coverage,stderr"
    assert len(lines) == len(t) + 1
    meta = json.loads((tmp_path / "cov.csv.meta.json").read_text())
    assert meta["seed"] == 5


def test_split_scheme_tokens():
    serve, interf = _split_scheme("maxoff")
    assert serve.kind == "max" and interf.kind == "off" and interf.q == 0.5
    serve, interf = _split_scheme("nsc")
    assert serve.kind == interf.kind == "nsc"
    assert _split_scheme("none") == (None, None)


def test_pair_emission_factors():
    assert _pair_emission_factor(parse_model("nsc")) == 2.0
    assert _pair_emission_factor(parse_model("off:q=0.5")) == 1.0
    assert _pair_emission_factor(parse_model("max")) == 1.5


def test_baseline_nocoop_closed_form():
    # beta = 4, T = 1: the integral evaluates to pi/4
    curve = coverage_baseline_nocoop(LAM, PL4, np.array([1.0]))
    assert curve.values[0] == pytest.approx(1.0 / (1.0 + math.pi / 4.0), rel=1e-8)
    assert curve.meta["method"] == "analytic"


def test_baseline_fixed_closed_form():
    t = np.array([1.0])
    curve = coverage_baseline_fixed(LAM, PL4, 1.0, t)
    expect = math.exp(-LAM * 2.0 * math.pi**2 / (4.0 * math.sin(math.pi / 2.0)))
    assert curve.values[0] == pytest.approx(expect, rel=1e-10)
    with pytest.raises(ValueError):
        coverage_baseline_fixed(LAM, PL4, 0.0, t)


def test_fixed_analytic_monotone_and_bounded():
    t = default_t_grid(-10, 20, 2)
    vals = coverage_fixed_analytic(PARAMS, parse_model("nsc"), PL3, 1.0, 0.0, t)
    assert np.all(np.diff(vals) < 0)
    assert np.all((vals > 0) & (vals < 1))


def test_fixed_analytic_noise_reduces_coverage():
    t = np.array([1.0])
    quiet = coverage_fixed_analytic(PARAMS, parse_model("max"), PL3, 1.0, 0.0, t)
    noisy = coverage_fixed_analytic(PARAMS, parse_model("max"), PL3, 1.0, 0.5, t)
    assert noisy[0] < quiet[0]


def test_closest_analytic_total_probability():
    # at T -> 0 the three association branches sum to one
    total, (eg, eh, ek) = coverage_closest_analytic(
        PARAMS, parse_model("nsc"), PL3, 0.0, np.array([1e-9]), return_terms=True
    )
    assert total[0] == pytest.approx(1.0, abs=2e-3)
    assert eg[0] > 0 and eh[0] > 0 and ek[0] > 0


def test_closest_analytic_scheme_ordering():
    t = default_t_grid(-4, 8, 4)
    nsc = coverage_closest_analytic(PARAMS, parse_model("nsc"), PL3, 0.0, t, n_r1=32, n_r2=24, n_z=24)
    off = coverage_closest_analytic(PARAMS, parse_model("off:q=0.5"), PL3, 0.0, t, n_r1=32, n_r2=24, n_z=24)
    assert np.all(nsc >= off - 1e-6)


def test_mc_superposition_determinism():
    t = default_t_grid(-4, 8, 4)
    model = parse_model("nsc")
    a = mc_coverage_superposition(PARAMS, model, PL3, 0.0, t, 30, make_rng(7), seed=7)
    b = mc_coverage_superposition(PARAMS, model, PL3, 0.0, t, 30, make_rng(7), seed=7)
    np.testing.assert_array_equal(a.values, b.values)
    assert a.meta["seed"] == 7
    assert np.all(np.diff(a.values) <= 1e-12)


def test_mc_superposition_fixed_near_analytic():
    t = default_t_grid(-4, 8, 4)
    model = parse_model("off:q=0.5")
    curve = mc_coverage_superposition(
        PARAMS, model, PL3, 0.0, t, 400, make_rng(8), association="fixed", r0=1.0
    )
    ana = coverage_fixed_analytic(PARAMS, model, PL3, 1.0, 0.0, t)
    assert np.max(np.abs(curve.values - ana)) < 0.04


def test_mc_mnnr_modes():
    t = default_t_grid(-4, 8, 6)
    coop = mc_coverage_mnnr(LAM, "nsc", PL3, "closest", 0.0, t, 60, make_rng(9))
    none = mc_coverage_mnnr(LAM, "none", PL3, "closest", 0.0, t, 60, make_rng(9))
    assert np.all((coop.values >= 0) & (coop.values <= 1))
    # cooperation helps on average over the grid
    assert coop.values.mean() > none.values.mean() - 0.05
    fixed = mc_coverage_mnnr(LAM, "nsc", PL3, "fixed", 0.0, t, 30, make_rng(10), r0=1.0)
    assert fixed.meta["r0"] == 1.0


def test_mc_validation():
    t = default_t_grid(-4, 8, 6)
    with pytest.raises(ValueError):
        mc_coverage_mnnr(LAM, "nsc", PL3, "sideways", 0.0, t, 10, make_rng(0))
    with pytest.raises(ValueError):
        mc_coverage_superposition(PARAMS, parse_model("nsc"), PL3, 0.0, t, 0, make_rng(0))
