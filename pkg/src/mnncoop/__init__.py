"""Static base-station cooperation via the mutually-nearest-neighbor pairing:
point-process samplers, structural statistics, interference fields, and
coverage-probability analytics."""

__version__ = "0.1.0"

from .geometry import GAMMA, lens_gamma
from .pointproc import Configuration, Window, make_rng, spawn_rngs

DELTA = 1.0 / (2.0 - GAMMA)
