"""Planar finger model.

A finger is a chain of K phalanxes on the complex plane.  Phalanx k has
length ``1/rho**k`` and its direction is the initial orientation rotated by
the accumulated controls::

    x_0 = 0
    x_k = x_{k-1} + rho**-k * exp(-1j * (theta0 + chirality * omega * (v_1 + ... + v_k)))

Controls live in [0, 1]; a control of 1 rotates a phalanx by the maximal
angle ``omega`` relative to the previous one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


class BudgetError(RuntimeError):
    """Raised when an enumeration would exceed its configured point budget."""


@dataclass(frozen=True)
class ControlSet:
    """Admissible rotation controls.

    Either an explicit finite set ``0 = r_0 < ... < r_n = 1`` or the interval
    [0, 1] sampled uniformly at ``resolution`` points.
    """

    values: tuple[float, ...] = (0.0, 1.0)
    resolution: int | None = None

    def __post_init__(self):
        if self.resolution is not None:
            if int(self.resolution) != self.resolution or self.resolution < 2:
                raise ValueError(f"resolution must be an integer >= 2, got {self.resolution!r}")
            m = int(self.resolution)
            object.__setattr__(self, "resolution", m)
            object.__setattr__(self, "values", tuple(j / (m - 1) for j in range(m)))
            return
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 2:
            raise ValueError("a finite control set needs at least the two values 0 and 1")
        if vals[0] != 0.0 or vals[-1] != 1.0:
            raise ValueError("a finite control set must start at 0 and end at 1")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("control values must be strictly increasing")
        object.__setattr__(self, "values", vals)

    @classmethod
    def interval(cls, resolution: int) -> "ControlSet":
        return cls(resolution=resolution)

    @classmethod
    def finite(cls, values: Sequence[float]) -> "ControlSet":
        return cls(values=tuple(values))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class FingerSpec:
    """Parameters of one planar finger.

    ``theta0`` is the initial orientation as an angle in radians (0 points
    along the positive real axis).  ``chirality`` is the sense of rotation:
    +1 curls clockwise, -1 counter-clockwise.
    """

    rho: float = GOLDEN
    omega: float = math.pi / 6
    theta0: float = 0.0
    chirality: int = 1
    K: int = 4
    control_set: ControlSet = field(default_factory=lambda: ControlSet.interval(8))

    def __post_init__(self):
        if not (math.isfinite(self.rho) and self.rho > 1.0):
            raise ValueError(f"rho must be > 1, got {self.rho!r}")
        if not (0.0 < self.omega < 2 * math.pi) or self.omega == math.pi:
            raise ValueError(f"omega must lie in (0, 2*pi) minus {{pi}}, got {self.omega!r}")
        if self.chirality not in (1, -1):
            raise ValueError(f"chirality must be +1 or -1, got {self.chirality!r}")
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"phalanx count K must be a positive integer, got {self.K!r}")
        if not math.isfinite(self.theta0):
            raise ValueError("theta0 must be finite")

    @property
    def reach_bound(self) -> float:
        """Supremum of ``|x_k|`` over all configurations: ``1/(rho - 1)``."""
        return 1.0 / (self.rho - 1.0)

    def mirrored(self) -> "FingerSpec":
        """The finger reflected across the imaginary axis (``x -> -conj(x)``)."""
        theta = math.remainder(math.pi - self.theta0, 2 * math.pi)
        return FingerSpec(self.rho, self.omega, theta, -self.chirality, self.K, self.control_set)

    def with_K(self, K: int) -> "FingerSpec":
        return FingerSpec(self.rho, self.omega, self.theta0, self.chirality, K, self.control_set)


def validate_controls(spec: FingerSpec, seq: Sequence[float]) -> np.ndarray:
    v = np.asarray(seq, dtype=float)
    if v.ndim != 1 or v.shape[0] != spec.K:
        raise ValueError(f"control sequence has length {v.size}, finger has K={spec.K}")
    if not np.all(np.isfinite(v)) or np.any(v < 0.0) or np.any(v > 1.0):
        raise ValueError(f"controls must lie in [0, 1], got {v.tolist()}")
    return v


def phalanx_directions(spec: FingerSpec, seq: Sequence[float]) -> np.ndarray:
    """Direction vectors ``x_k - x_{k-1}`` for k = 1..K."""
    v = validate_controls(spec, seq)
    k = np.arange(1, spec.K + 1)
    angle = spec.theta0 + spec.chirality * spec.omega * np.cumsum(v)
    return spec.rho ** (-k.astype(float)) * np.exp(-1j * angle)


def junction_positions(spec: FingerSpec, seq: Sequence[float]) -> np.ndarray:
    """Junctions ``x_0 .. x_K`` as a complex array of length K+1."""
    d = phalanx_directions(spec, seq)
    return np.concatenate(([0j], np.cumsum(d)))


def phalanx_segment(spec: FingerSpec, seq: Sequence[float], k: int) -> tuple[complex, complex, complex]:
    """Endpoints and direction of phalanx ``k`` (1-based).

    Points of the phalanx are ``a + t * direction`` for t in [0, 1].
    """
    if int(k) != k or not 1 <= k <= spec.K:
        raise ValueError(f"phalanx index must be in 1..{spec.K}, got {k!r}")
    d = phalanx_directions(spec, seq)
    x = np.concatenate(([0j], np.cumsum(d)))
    return complex(x[k - 1]), complex(x[k]), complex(d[k - 1])


def apply_map(v: float, rho: float, omega: float, x):
    """One IFS map: ``f_v(x) = exp(-1j*omega*v) * (x + 1) / rho``.

    Works elementwise on arrays.
    """
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"control must lie in [0, 1], got {v!r}")
    if not rho > 1.0:
        raise ValueError(f"rho must be > 1, got {rho!r}")
    return np.exp(-1j * omega * v) / rho * (np.asarray(x) + 1)
