"""Hybrid simulation of the digital tendon locking mechanism (TLM).

Modes:

* ``FREE`` - toe controls follow a user-supplied control law.
* ``ENGAGED`` - some first phalanx touched the obstacle; every phalanx of
  every toe is driven by the same involuntary profile ``v(elapsed)``.
* ``LOCKED`` - reached once ``elapsed >= T``; absorbing, nothing moves.

Time stepping is explicit and fixed-step.  The dynamics are algebraic in
the controls, so ``dt`` only affects when contact is noticed; the contact
time itself is refined by bisection inside the crossing step.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .finger import FingerSpec, junction_positions, validate_controls
from .foot import FootSpec, embed_finger
from .perch import CylinderBranch

DISCONTINUITY_TOL = 1e-12


class GuardPersistenceWarning(UserWarning):
    """The obstacle stopped touching every first phalanx while engaged."""


class Mode(str, enum.Enum):
    FREE = "free"
    ENGAGED = "engaged"
    LOCKED = "locked"


def _point_segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(ab @ ab)
    s = 0.0 if denom == 0.0 else min(1.0, max(0.0, float((p - a) @ ab) / denom))
    return float(np.linalg.norm(a + s * ab - p))


@dataclass(frozen=True)
class Sphere:
    center: tuple[float, float, float]
    radius: float
    convex: bool = field(default=True, init=False)

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("sphere radius must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    def segment_distance(self, a, b) -> float:
        """Signed gap between the segment and the solid ball (<= 0 means contact)."""
        return _point_segment_distance(np.asarray(self.center), np.asarray(a, float), np.asarray(b, float)) - self.radius


@dataclass(frozen=True)
class CylinderObstacle:
    """Solid cylinder with axis parallel to y."""

    branch: CylinderBranch
    convex: bool = field(default=True, init=False)

    def segment_distance(self, a, b) -> float:
        a, b = np.asarray(a, float), np.asarray(b, float)
        axis = np.array([self.branch.axis_x, self.branch.axis_z])
        return _point_segment_distance(axis, a[[0, 2]], b[[0, 2]]) - self.branch.radius


@dataclass(frozen=True)
class TlmProfile:
    """Piecewise-linear, non-decreasing contraction profile on [0, T]."""

    T: float
    times: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("engagement time T must be positive")
        times = tuple(float(t) for t in self.times) or (0.0, float(self.T))
        values = tuple(float(v) for v in self.values) or (0.0, 1.0)
        if len(times) != len(values) or len(times) < 2:
            raise ValueError("profile needs matching time/value samples (at least two)")
        if times[0] != 0.0 or abs(times[-1] - self.T) > 1e-12 * max(1.0, self.T):
            raise ValueError("profile samples must span exactly [0, T]")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("profile sample times must be strictly increasing")
        if values[0] != 0.0:
            raise ValueError("profile must start at v(0) = 0")
        if any(b < a for a, b in zip(values, values[1:])) or values[-1] > 1.0:
            raise ValueError("profile values must be non-decreasing and at most 1")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def linear(cls, T: float) -> "TlmProfile":
        return cls(T)

    def __call__(self, elapsed: float) -> float:
        return float(np.interp(min(max(elapsed, 0.0), self.T), self.times, self.values))

    @property
    def final(self) -> float:
        return self.values[-1]


@dataclass(frozen=True)
class HybridState:
    time: float
    mode: Mode
    controls: tuple[tuple[float, ...], ...]
    junctions: tuple[np.ndarray, ...]
    base: np.ndarray
    engaged_steps: int = 0
    dt: float = 0.0

    @property
    def elapsed(self) -> float:
        return self.engaged_steps * self.dt

    def talons(self) -> np.ndarray:
        return np.array([j[-1] for j in self.junctions])

    def same_configuration(self, other: "HybridState") -> bool:
        return (self.mode == other.mode and self.controls == other.controls
                and all(np.array_equal(a, b) for a, b in zip(self.junctions, other.junctions))
                and np.array_equal(self.base, other.base))


@dataclass(frozen=True)
class Event:
    kind: str
    step: int
    time: float
    detail: float | None = None


ControlFn = Callable[[float], Sequence[Sequence[float]]]
ApproachFn = Callable[[float], Sequence[float]]


def constant_controls(foot: FootSpec, value: float = 0.0) -> ControlFn:
    seqs = tuple(tuple([float(value)] * f.K) for f in foot.fingers)
    return lambda t: seqs


def linear_approach(velocity: Sequence[float], start: Sequence[float] = (0.0, 0.0, 0.0)) -> ApproachFn:
    v = np.asarray(velocity, float)
    p0 = np.asarray(start, float)
    return lambda t: p0 + t * v


def engaged_positions(spec: FingerSpec, v: float) -> np.ndarray:
    """Junctions when every phalanx carries the same control ``v``."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"engaged control must lie in [0, 1], got {v!r}")
    return junction_positions(spec, [v] * spec.K)


def _pose(foot: FootSpec, controls, base: np.ndarray) -> tuple[np.ndarray, ...]:
    out = []
    for f, seq, w in zip(foot.fingers, controls, foot.plane_angles):
        out.append(embed_finger(junction_positions(f, seq), w).points + base)
    return tuple(out)


def _check_free(foot: FootSpec, controls) -> tuple[tuple[float, ...], ...]:
    controls = tuple(controls)
    if len(controls) != 4:
        raise ValueError("free control law must return one sequence per toe")
    return tuple(tuple(float(v) for v in validate_controls(f, s)) for f, s in zip(foot.fingers, controls))


def _uniform(foot: FootSpec, v: float) -> tuple[tuple[float, ...], ...]:
    return tuple(tuple([v] * f.K) for f in foot.fingers)


def initial_state(foot: FootSpec, free_control_fn: ControlFn, approach: ApproachFn | None = None,
                  dt: float = 0.0) -> HybridState:
    base = np.asarray(approach(0.0), float) if approach else np.zeros(3)
    controls = _check_free(foot, free_control_fn(0.0))
    return HybridState(0.0, Mode.FREE, controls, _pose(foot, controls, base), base, 0, dt)


def first_phalanx_segment(foot: FootSpec, h: int, state: HybridState) -> tuple[np.ndarray, np.ndarray]:
    """Endpoints of toe ``h``'s first phalanx (1-based toe index)."""
    foot.finger(h)  # validates the index
    j = state.junctions[h - 1]
    return j[0], j[1]


def _touches(junctions, obstacle) -> bool:
    return min(obstacle.segment_distance(j[0], j[1]) for j in junctions) <= 0.0


def guard(foot: FootSpec, state: HybridState, obstacle) -> bool:
    """True iff some first phalanx meets the (closed) obstacle."""
    return _touches(state.junctions, obstacle)


def step(foot: FootSpec, state: HybridState, dt: float, free_control_fn: ControlFn,
         profile: TlmProfile, obstacle, approach: ApproachFn | None = None) -> HybridState:
    """Advance the hybrid state by one step of length ``dt``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    t = state.time + dt
    if state.mode is Mode.LOCKED:
        return replace(state, time=t)
    if state.mode is Mode.ENGAGED:
        n = state.engaged_steps + 1
        elapsed = n * dt
        v = profile(elapsed)
        controls = _uniform(foot, v)
        done = elapsed >= profile.T * (1 - 1e-12)
        return HybridState(t, Mode.LOCKED if done else Mode.ENGAGED, controls,
                           _pose(foot, controls, state.base), state.base, n, dt)
    base = np.asarray(approach(t), float) if approach else state.base
    controls = _check_free(foot, free_control_fn(t))
    junctions = _pose(foot, controls, base)
    if not _touches(junctions, obstacle):
        return HybridState(t, Mode.FREE, controls, junctions, base, 0, dt)
    controls = _uniform(foot, profile(0.0))
    return HybridState(t, Mode.ENGAGED, controls, _pose(foot, controls, base), base, 0, dt)


@dataclass
class Scenario:
    duration: float
    dt: float
    profile: TlmProfile
    obstacle: object
    free_control_fn: ControlFn | None = None
    approach: ApproachFn | None = None
    name: str = ""


@dataclass
class Trajectory:
    snapshots: list[HybridState]
    events: list[Event]
    guard_violations: list[Event] = field(default_factory=list)

    @property
    def switches(self) -> list[Event]:
        return [e for e in self.events if e.kind in ("engaged", "locked")]


def _refine_contact(foot, obstacle, free_control_fn, approach, base, lo: float, hi: float, tol: float) -> float:
    def touching(t):
        b = np.asarray(approach(t), float) if approach else base
        return _touches(_pose(foot, _check_free(foot, free_control_fn(t)), b), obstacle)

    if touching(lo):
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if touching(mid):
            hi = mid
        else:
            lo = mid
    return hi


def simulate(foot: FootSpec, scenario: Scenario) -> Trajectory:
    """Run a scenario and record every step plus mode-switch events.

    The foot base follows ``scenario.approach`` until contact and then
    stays put.  Guard persistence is checked on every engaged step; a
    violation emits :class:`GuardPersistenceWarning` and is recorded.
    """
    if not scenario.duration > 0 or not scenario.dt > 0:
        raise ValueError("duration and dt must be positive")
    dt = scenario.dt
    control_fn = scenario.free_control_fn or constant_controls(foot, 0.0)
    state = initial_state(foot, control_fn, scenario.approach, dt)
    snapshots = [state]
    events: list[Event] = []
    violations: list[Event] = []
    n_steps = int(math.ceil(scenario.duration / dt - 1e-9))
    for i in range(1, n_steps + 1):
        prev = state
        state = step(foot, prev, dt, control_fn, scenario.profile, scenario.obstacle, scenario.approach)
        if prev.mode is Mode.FREE and state.mode is not Mode.FREE:
            t_hit = _refine_contact(foot, scenario.obstacle, control_fn, scenario.approach, prev.base,
                                    prev.time, state.time, dt * 1e-6)
            events.append(Event("engaged", i, t_hit))
            # Compare against the free pose at the same instant.
            free_pose = _pose(foot, _check_free(foot, control_fn(state.time)), state.base)
            jump = max(float(np.max(np.linalg.norm(a - b, axis=1))) for a, b in zip(free_pose, state.junctions))
            if jump > DISCONTINUITY_TOL:
                events.append(Event("discontinuity", i, state.time, jump))
        if state.mode is Mode.LOCKED and prev.mode is not Mode.LOCKED:
            events.append(Event("locked", i, state.time, state.elapsed))
        if prev.mode is not Mode.FREE and state.mode is not Mode.FREE and not guard(foot, state, scenario.obstacle):
            ev = Event("guard_violation", i, state.time)
            violations.append(ev)
            warnings.warn(f"obstacle lost contact with every first phalanx at t={state.time:.6g}",
                          GuardPersistenceWarning, stacklevel=2)
        snapshots.append(state)
    return Trajectory(snapshots, events, violations)


def engaged_lipschitz(spec: FingerSpec) -> float:
    """Bound on |d talon / dv| for the engaged map: ``omega * sum_k k / rho**k``."""
    return spec.omega * sum(k / spec.rho**k for k in range(1, spec.K + 1))
