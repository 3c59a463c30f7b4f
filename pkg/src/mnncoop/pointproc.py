"""Seeded samplers: homogeneous PPP, perturbed hexagonal grid, and the fading /
mark distributions (Rayleigh, Rice, exponential, Bernoulli, uniform angle).

Randomness flows through numpy Generators backed by the counter-based Philox
bit generator, so replications can be split into independent, reproducible
streams with ``spawn_rngs``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """Deterministic generator for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(seed))


def spawn_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """n independent child streams of a root seed, reproducible per index."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.Generator(np.random.Philox(ss)) for ss in children]


@dataclass(frozen=True)
class Window:
    """Sampling window: axis-aligned rectangle or disc (lengths in km)."""

    shape: str  # "rect" or "disc"
    params: tuple

    @staticmethod
    def rect(x_min, x_max, y_min, y_max) -> "Window":
        if x_max <= x_min or y_max <= y_min:
            raise ValueError("rectangle window must have positive area")
        return Window("rect", (float(x_min), float(x_max), float(y_min), float(y_max)))

    @staticmethod
    def disc(cx, cy, radius) -> "Window":
        if radius <= 0:
            raise ValueError("disc window must have positive radius")
        return Window("disc", (float(cx), float(cy), float(radius)))

    @property
    def area(self) -> float:
        if self.shape == "rect":
            x0, x1, y0, y1 = self.params
            return (x1 - x0) * (y1 - y0)
        _, _, rad = self.params
        return math.pi * rad * rad

    def boundary_distance(self, points: np.ndarray) -> np.ndarray:
        """Distance of each point to the window boundary (0 outside)."""
        pts = np.atleast_2d(points)
        if self.shape == "rect":
            x0, x1, y0, y1 = self.params
            d = np.minimum.reduce(
                [pts[:, 0] - x0, x1 - pts[:, 0], pts[:, 1] - y0, y1 - pts[:, 1]]
            )
            return np.maximum(d, 0.0)
        cx, cy, rad = self.params
        r = np.hypot(pts[:, 0] - cx, pts[:, 1] - cy)
        return np.maximum(rad - r, 0.0)

    def contains(self, points: np.ndarray) -> np.ndarray:
        return self.boundary_distance(points) > 0.0

    def sample_uniform(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.shape == "rect":
            x0, x1, y0, y1 = self.params
            xs = rng.uniform(x0, x1, n)
            ys = rng.uniform(y0, y1, n)
            return np.column_stack([xs, ys])
        cx, cy, rad = self.params
        r = rad * np.sqrt(rng.uniform(0.0, 1.0, n))
        ang = rng.uniform(0.0, 2.0 * math.pi, n)
        return np.column_stack([cx + r * np.cos(ang), cy + r * np.sin(ang)])

    def to_json(self) -> dict:
        return {"shape": self.shape, "params": list(self.params)}

    @staticmethod
    def from_json(obj: dict) -> "Window":
        return Window(obj["shape"], tuple(obj["params"]))


@dataclass
class Configuration:
    """A finite set of planar atoms (BS locations) inside a window."""

    points: np.ndarray  # (n, 2)
    window: Window

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)

    def __len__(self) -> int:
        return len(self.points)

    def save_csv(self, path) -> None:
        np.savetxt(path, self.points, delimiter=",", header="x_km,y_km", comments="")
        with open(str(path) + ".meta.json", "w") as fh:
            json.dump({"window": self.window.to_json()}, fh)

    @staticmethod
    def load_csv(path) -> "Configuration":
        pts = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        with open(str(path) + ".meta.json") as fh:
            meta = json.load(fh)
        return Configuration(pts, Window.from_json(meta["window"]))


def _dedupe(points: np.ndarray, window: Window, rng: np.random.Generator) -> np.ndarray:
    """Resample atoms at exactly coincident coordinates (measure zero, but
    float streams can collide)."""
    while len(points) > 1:
        _, idx = np.unique(points, axis=0, return_index=True)
        if len(idx) == len(points):
            break
        dup = np.setdiff1d(np.arange(len(points)), idx)
        points[dup] = window.sample_uniform(len(dup), rng)
    return points


def sample_ppp(lam: float, window: Window, rng: np.random.Generator) -> Configuration:
    """Homogeneous PPP of intensity lam (km^-2) inside the window."""
    if lam <= 0:
        raise ValueError("intensity must be positive")
    n = rng.poisson(lam * window.area)
    pts = _dedupe(window.sample_uniform(n, rng), window, rng)
    return Configuration(pts, window)


def sample_hex_grid(
    spacing: float, q: float, window: Window, rng: np.random.Generator
) -> Configuration:
    """Perturbed hexagonal grid: one atom per hexagon centre in the window,
    displaced by a uniform angle in [0, 2*pi) and a uniform radius in [0, Q]."""
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    if q < 0:
        raise ValueError("perturbation radius must be nonnegative")
    if window.shape == "rect":
        x0, x1, y0, y1 = window.params
    else:
        cx, cy, rad = window.params
        x0, x1, y0, y1 = cx - rad, cx + rad, cy - rad, cy + rad
    dy = spacing * math.sqrt(3.0) / 2.0
    rows = np.arange(math.floor(y0 / dy), math.ceil(y1 / dy) + 1)
    centres = []
    for j in rows:
        off = 0.5 * spacing if j % 2 else 0.0
        cols = np.arange(
            math.floor((x0 - off) / spacing), math.ceil((x1 - off) / spacing) + 1
        )
        xs = cols * spacing + off
        ys = np.full_like(xs, j * dy, dtype=float)
        centres.append(np.column_stack([xs, ys]))
    centres = np.concatenate(centres)
    centres = centres[window.contains(centres)]
    n = len(centres)
    ang = rng.uniform(0.0, 2.0 * math.pi, n)
    rad = rng.uniform(0.0, q, n) if q > 0 else np.zeros(n)
    pts = centres + np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    return Configuration(pts, window)


def sample_rayleigh(scale: float, rng: np.random.Generator, size=None):
    if scale <= 0:
        raise ValueError("scale must be positive")
    return rng.rayleigh(scale, size)


def sample_rice(nu: float, scale: float, rng: np.random.Generator, size=None):
    """Rice(nu, scale) by the Gaussian construction: norm of
    (nu + N(0, scale^2), N(0, scale^2))."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    if nu < 0:
        raise ValueError("noncentrality must be nonnegative")
    gx = rng.normal(nu, scale, size)
    gy = rng.normal(0.0, scale, size)
    return np.hypot(gx, gy)


def sample_exp(rate: float, rng: np.random.Generator, size=None):
    if rate <= 0:
        raise ValueError("rate must be positive")
    return rng.exponential(1.0 / rate, size)


def sample_bernoulli(q: float, rng: np.random.Generator, size=None):
    if not 0.0 < q < 1.0:
        raise ValueError("q must be in (0, 1)")
    return rng.random(size) < q


def sample_uniform_angle(rng: np.random.Generator, size=None):
    return rng.uniform(0.0, 2.0 * math.pi, size)
