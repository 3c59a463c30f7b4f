import math

import numpy as np
import pytest

from mnncoop.geometry import (
    GAMMA,
    _lens_area_vec,
    circle_lens_area,
    disc_union_area,
    distance,
    lens_gamma,
    pair_region_area,
    three_disc_residual_area,
    three_disc_residual_area_batch,
)


def test_gamma_constant():
    assert lens_gamma() == GAMMA
    assert GAMMA == pytest.approx(2.0 / 3.0 - math.sqrt(3.0) / (2.0 * math.pi), rel=0, abs=0)
    assert 0.39 < GAMMA < 0.392


def test_pair_region_area_closed_form():
    x, y = (0.0, 0.0), (1.3, 0.0)
    assert pair_region_area(x, y) == pytest.approx(math.pi * 1.3**2 * (2.0 - GAMMA))
    with pytest.raises(ValueError):
        pair_region_area(x, x)


def test_lens_area_limits():
    # disjoint, nested and the symmetric unit-distance case
    assert circle_lens_area(3.0, 1.0, 1.0) == 0.0
    assert circle_lens_area(0.1, 2.0, 0.5) == pytest.approx(math.pi * 0.25)
    # two unit discs at unit separation: lens area = pi * gamma by definition
    assert circle_lens_area(1.0, 1.0, 1.0) == pytest.approx(math.pi * GAMMA, rel=1e-12)
    assert circle_lens_area(0.7, 1.2, 0.9) == pytest.approx(circle_lens_area(0.7, 0.9, 1.2))


def test_lens_area_monte_carlo():
    rng = np.random.default_rng(5)
    d, r1, r2 = 0.8, 1.1, 0.7
    pts = rng.uniform(-1.5, 2.5, (400000, 2))
    inside = (np.hypot(pts[:, 0], pts[:, 1]) < r1) & (np.hypot(pts[:, 0] - d, pts[:, 1]) < r2)
    mc = inside.mean() * 4.0**2
    assert circle_lens_area(d, r1, r2) == pytest.approx(mc, rel=0.02)


def test_union_area_inclusion_exclusion():
    c1, c2 = (0.0, 0.0), (0.9, 0.4)
    d = distance(c1, c2)
    got = disc_union_area(c1, 1.0, c2, 0.8)
    assert got == pytest.approx(math.pi * (1.0 + 0.64) - circle_lens_area(d, 1.0, 0.8))


def test_lens_vec_matches_scalar():
    rng = np.random.default_rng(11)
    d = rng.uniform(0.0, 3.0, 200)
    r1 = rng.uniform(0.1, 1.5, 200)
    r2 = rng.uniform(0.1, 1.5, 200)
    vec = _lens_area_vec(d, r1, r2)
    ref = np.array([circle_lens_area(a, b, c) for a, b, c in zip(d, r1, r2)])
    np.testing.assert_allclose(vec, ref, rtol=1e-12, atol=1e-12)


def test_residual_area_far_branch():
    # partner far away: probe disc fully inside the pair union
    r, s, psi = 0.5, 3.0, 1.0
    rho = math.sqrt(r * r + s * s - 2 * r * s * math.cos(psi))
    expect = math.pi * rho * rho * (2.0 - GAMMA) - math.pi * r * r
    assert three_disc_residual_area(r, s, 0.0, psi) == pytest.approx(expect, rel=1e-12)


def test_residual_area_bounds():
    rng = np.random.default_rng(3)
    for _ in range(40):
        r = rng.uniform(0.2, 1.5)
        s = rng.uniform(r, r + 2.0)
        psi = rng.uniform(0.05, math.pi)
        rho = math.sqrt(r * r + s * s - 2 * r * s * math.cos(psi))
        area = three_disc_residual_area(r, s, 0.0, psi)
        union = math.pi * rho * rho * (2.0 - GAMMA)
        # 1e-5 slack absorbs the angular-sweep discretization
        assert union - math.pi * r * r - 1e-5 <= area <= union + 1e-5


def test_residual_area_batch_matches_scalar():
    rng = np.random.default_rng(7)
    for _ in range(10):
        r = rng.uniform(0.2, 1.2)
        s = rng.uniform(r, r + 1.5)
        psi = rng.uniform(0.05, math.pi, 8)
        batch = three_disc_residual_area_batch(r, s, psi)
        ref = np.array([three_disc_residual_area(r, s, 0.0, p) for p in psi])
        np.testing.assert_allclose(batch, ref, rtol=5e-4)


def test_residual_area_monte_carlo():
    r, s, psi = 0.8, 1.1, 0.9
    rho = math.sqrt(r * r + s * s - 2 * r * s * math.cos(psi))
    x = np.array([r, 0.0])
    y = np.array([s * math.cos(psi), s * math.sin(psi)])
    rng = np.random.default_rng(19)
    lo, hi = -3.0, 4.0
    pts = rng.uniform(lo, hi, (600000, 2))
    in_union = (np.hypot(*(pts - x).T) < rho) | (np.hypot(*(pts - y).T) < rho)
    outside_probe = np.hypot(pts[:, 0], pts[:, 1]) >= r
    mc = (in_union & outside_probe).mean() * (hi - lo) ** 2
    assert three_disc_residual_area(r, s, 0.0, psi) == pytest.approx(mc, rel=0.02)


def test_residual_area_invalid():
    with pytest.raises(ValueError):
        three_disc_residual_area(0.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        three_disc_residual_area_batch(1.0, 1.0, np.array([0.0]))
