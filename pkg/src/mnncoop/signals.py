"""Signal and fading models: single-station signal, the four cooperative
pair schemes, and their CCDF / Laplace-transform closed forms.

The NSC tail probability is implemented as the standard two-coefficient
hypoexponential CCDF.  The single-prefactor variant sometimes quoted for this
scheme goes negative for r < z; the two-coefficient form is the inverse
transform of the (correct) product Laplace transform and matches Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import i0e

KINDS = ("single", "nsc", "off", "max", "ph", "tailform")


@dataclass(frozen=True)
class PathLoss:
    """Transmit power p [W] and path-loss exponent beta (> 2)."""

    p: float
    beta: float

    def __post_init__(self):
        if self.p <= 0:
            raise ValueError("power must be positive")
        if self.beta <= 2:
            raise ValueError("path-loss exponent must exceed 2")


@dataclass(frozen=True)
class SignalModel:
    """Cooperative-scheme selector.

    kind: one of 'single', 'nsc', 'off', 'max', 'ph', 'tailform'.
    q: Bernoulli activity probability (off scheme).
    phase: 'uniform' or 'coherent' (ph scheme).
    terms: sequence of (c_i(r, z, pl), d_i(r, z, pl)) callables (tailform).
    """

    kind: str
    q: float = 0.5
    phase: str = "uniform"
    terms: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown signal model {self.kind!r}")
        if self.kind == "off" and not 0.0 < self.q < 1.0:
            raise ValueError("q must be in (0, 1)")
        if self.kind == "ph" and self.phase not in ("uniform", "coherent"):
            raise ValueError("phase law must be 'uniform' or 'coherent'")


def parse_model(token: str) -> SignalModel:
    """Parse CLI tokens: single | nsc | off:q=0.5 | max | ph:coherent | ph:uniform."""
    token = token.strip().lower()
    if token.startswith("off"):
        q = 0.5
        if ":" in token:
            key, _, val = token.partition(":")[2].partition("=")
            if key != "q":
                raise ValueError(f"bad off-scheme option {token!r}")
            q = float(val)
        return SignalModel("off", q=q)
    if token.startswith("ph"):
        phase = token.partition(":")[2] or "uniform"
        return SignalModel("ph", phase=phase)
    return SignalModel(token)


def _rates(pl: PathLoss, r, z):
    return np.broadcast_arrays(
        np.asarray(r, dtype=float) ** pl.beta / pl.p,
        np.asarray(z, dtype=float) ** pl.beta / pl.p,
    )


def single_signal(pl: PathLoss, r, rng, size=None):
    """One draw of the exponentially-faded single-station signal p*h/r^beta."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("distance must be positive")
    return pl.p * rng.exponential(1.0, size=size if size is not None else r.shape or None) / r**pl.beta


def pair_signal(model: SignalModel, pl: PathLoss, r, z, rng, size=None):
    """One draw of the cooperative pair signal g(r, z) under the scheme."""
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(r <= 0) or np.any(z <= 0):
        raise ValueError("distances must be positive")
    shape = size if size is not None else np.broadcast(r, z).shape or None
    sr = pl.p * rng.exponential(1.0, shape) / r**pl.beta
    sz = pl.p * rng.exponential(1.0, shape) / z**pl.beta
    if model.kind == "nsc":
        return sr + sz
    if model.kind == "off":
        on = rng.random(shape) < model.q
        return np.where(on, sr, sz)
    if model.kind == "max":
        return np.maximum(sr, sz)
    if model.kind == "ph":
        if model.phase == "coherent":
            cos_d = 1.0
        else:
            cos_d = np.cos(rng.uniform(0.0, 2.0 * math.pi, shape) - rng.uniform(0.0, 2.0 * math.pi, shape))
        return sr + sz + 2.0 * np.sqrt(sr * sz) * cos_d
    raise ValueError(f"no pair sampler for model {model.kind!r}")


def tail_terms(model: SignalModel, pl: PathLoss, r, z):
    """Tail-form decomposition of the pair CCDF: P(g > T) = sum c_i e^{-d_i T}.

    Returns (c, d) arrays with a leading term axis.  Only schemes with a
    closed tail form are supported (nsc, off, max, tailform).
    """
    mu1, mu2 = _rates(pl, r, z)
    if model.kind == "nsc":
        diff = mu2 - mu1
        # guard the equal-rate degeneracy; callers on continuous grids never
        # hit it, samplers perturb instead
        tiny = np.abs(diff) < 1e-9 * np.abs(mu1)
        safe = np.where(tiny, 1.0, diff)
        c = np.stack([mu2 / safe, -mu1 / safe])
        d = np.stack([mu1, mu2])
        return c, d, np.any(tiny)
    if model.kind == "off":
        c = np.stack([np.full_like(mu1, model.q), np.full_like(mu2, 1.0 - model.q)])
        return c, np.stack([mu1, mu2]), False
    if model.kind == "max":
        one = np.ones_like(mu1)
        return np.stack([one, one, -one]), np.stack([mu1, mu2, mu1 + mu2]), False
    if model.kind == "tailform":
        c = np.stack([np.broadcast_to(ci(r, z, pl), np.shape(mu1)) for ci, _ in model.terms])
        d = np.stack([np.broadcast_to(di(r, z, pl), np.shape(mu1)) for _, di in model.terms])
        return c, d, False
    raise ValueError(f"no closed tail form for model {model.kind!r}")


def pair_ccdf(model: SignalModel, pl: PathLoss, r, z, t):
    """CCDF P(g(r, z) > T), vectorized over T."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("threshold must be nonnegative")
    mu1, mu2 = _rates(pl, r, z)
    if model.kind == "nsc" and abs(mu2 - mu1) < 1e-9 * abs(mu1):
        mu = 0.5 * (mu1 + mu2)  # Erlang limit
        return (1.0 + mu * t) * np.exp(-mu * t)
    c, d, _ = tail_terms(model, pl, r, z)
    return np.sum(c[..., None] * np.exp(-d[..., None] * t), axis=0).reshape(t.shape)


def pair_lt(model: SignalModel, pl: PathLoss, r, z, s):
    """Laplace transform E[e^{-s g(r, z)}], vectorized over broadcastable
    (r, z, s)."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("transform argument must be nonnegative")
    mu1, mu2 = _rates(pl, r, z)
    l1 = mu1 / (s + mu1)
    l2 = mu2 / (s + mu2)
    if model.kind == "nsc":
        return l1 * l2
    if model.kind == "off":
        return model.q * l1 + (1.0 - model.q) * l2
    if model.kind == "max":
        return l1 + l2 - (mu1 + mu2) / (s + mu1 + mu2)
    if model.kind == "tailform":
        # LT of a tail-form CCDF: E[e^{-sX}] = 1 - s * integral e^{-sT} CCDF(T) dT
        c, d, _ = tail_terms(model, pl, r, z)
        return 1.0 - np.sum(c * s / (s + d), axis=0)
    raise ValueError(f"no closed LT for model {model.kind!r}")


def rice_pdf(z, r, alpha):
    """Rice(r, alpha) density, overflow-safe via the scaled Bessel i0e."""
    z = np.asarray(z, dtype=float)
    return (
        z / alpha**2 * np.exp(-((z - r) ** 2) / (2.0 * alpha**2)) * i0e(z * r / alpha**2)
    )


def _rice_nodes(r, rho, alpha, n):
    """Gauss-Legendre nodes/weights on the effective Rice support above rho."""
    lo = max(rho, max(0.0, r - 9.0 * alpha))
    hi = r + 9.0 * alpha
    if hi <= lo:
        return None
    x, w = np.polynomial.legendre.leggauss(n)
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    return mid + half * x, half * w


def pair_lt_conditional(model: SignalModel, pl: PathLoss, s, r, rho, alpha, n_nodes=96):
    """E[e^{-s g(r, Z_r)} 1{Z_r > rho}] with Z_r ~ Rice(r, alpha), by
    quadrature against the Rice density (tail truncated below 1e-10)."""
    if r <= 0 or alpha <= 0 or rho < 0:
        raise ValueError("invalid parameters")
    nodes = _rice_nodes(r, rho, alpha, n_nodes)
    if nodes is None:
        return 0.0
    z, w = nodes
    vals = pair_lt(model, pl, r, z, np.asarray(s, dtype=float))
    return float(np.sum(w * rice_pdf(z, r, alpha) * vals))
