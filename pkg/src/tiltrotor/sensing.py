"""Measurement noise and first-order digital low-pass filtering.

Noise comes from the Philox4x64-10 counter-based generator (numpy's
implementation, keyed directly by the 64-bit seed, counter starting at zero).
Each raw 64-bit word is mapped to a double in [0, 1) through its top 53 bits,
and consecutive uniform pairs (u1, u2) are turned into two standard normals by
Box-Muller:

    z0 = sqrt(-2 ln(1 - u1)) * cos(2 pi u2)
    z1 = sqrt(-2 ln(1 - u1)) * sin(2 pi u2)

z0 is consumed first, then z1. Axes draw in the fixed order Z, X_dot, theta
every sample, including axes whose noise scale is zero, so switching one axis
off does not shift the stream seen by the others.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigValidationError

PRNG_NAME = "philox4x64-10"
PRNG_VERSION = 1
AXES = ("Z", "X_dot", "theta")

_BLOCK = 1024
_TWO_PI = 2.0 * math.pi
_INV_2_53 = 1.0 / 9007199254740992.0


@dataclass(frozen=True)
class NoiseModel:
    kappa_z: float = 0.05       # m
    kappa_x: float = 0.05       # m/s
    kappa_theta: float = 0.005  # rad
    seed: int = 0

    def __post_init__(self):
        for name in ("kappa_z", "kappa_x", "kappa_theta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigValidationError(f"noise.{name}", "must be finite and >= 0")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigValidationError("noise.seed", "must be an unsigned 64-bit integer")

    @property
    def scales(self):
        return (self.kappa_z, self.kappa_x, self.kappa_theta)


class GaussianStream:
    """Reproducible standard-normal samples (Philox uniforms through Box-Muller)."""

    def __init__(self, seed):
        self._bits = np.random.Philox(key=int(seed))
        self._uniforms = []
        self._pos = 0
        self._spare = None

    def _uniform(self):
        if self._pos >= len(self._uniforms):
            raw = self._bits.random_raw(_BLOCK)
            self._uniforms = ((raw >> np.uint64(11)).astype(np.float64) * _INV_2_53).tolist()
            self._pos = 0
        u = self._uniforms[self._pos]
        self._pos += 1
        return u

    def normal(self):
        if self._spare is not None:
            z, self._spare = self._spare, None
            return z
        u1 = self._uniform()
        u2 = self._uniform()
        radius = math.sqrt(-2.0 * math.log(1.0 - u1))
        angle = _TWO_PI * u2
        self._spare = radius * math.sin(angle)
        return radius * math.cos(angle)


def measure(state, noise, rng):
    """Corrupt (Z, X_dot, theta) with scaled Gaussian noise."""
    n_z, n_x, n_theta = rng.normal(), rng.normal(), rng.normal()
    return (state.Z + noise.kappa_z * n_z,
            state.X_dot + noise.kappa_x * n_x,
            state.theta + noise.kappa_theta * n_theta)


@dataclass
class FilterState:
    """Per-axis first-order low-pass filter memory.

    ``cutoffs`` holds omega_0 in rad/s; ``None`` on an axis passes the
    measurement through unchanged. Previous values start unset so that the
    first measurement initialises the filter.
    """

    cutoffs: dict = field(default_factory=lambda: {axis: 1.0 for axis in AXES})
    previous: dict = field(default_factory=dict)

    def __post_init__(self):
        for axis, omega in self.cutoffs.items():
            if omega is not None and not omega > 0:
                raise ConfigValidationError(f"cutoff[{axis}]", "must be > 0")


def filter_step(fs, axis, r_measured, dt):
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    omega = fs.cutoffs.get(axis)
    prev = fs.previous.get(axis)
    if omega is None or prev is None:
        out = r_measured
    else:
        a = dt * omega
        # Same as (prev + a r) / (1 + a), but exact when r equals prev.
        out = prev + a * (r_measured - prev) / (1.0 + a)
    fs.previous[axis] = out
    return out
