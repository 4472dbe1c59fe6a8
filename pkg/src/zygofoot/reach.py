"""Reachable sets of a finger via Hutchinson-operator iteration.

The extremal junction after k phalanxes ranges over

    R_k = exp(-1j*theta0) * F^k({0}),   F(S) = union_v f_v(S),

where ``f_v(x) = exp(-1j*chirality*omega*v) * (x + 1) / rho`` and v runs
over the control set.  ``reachable_set_bruteforce`` enumerates the same set
directly from the junction formula and serves as an oracle.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .finger import BudgetError, ControlSet, FingerSpec

DEFAULT_BUDGET = 10**7


@dataclass(frozen=True)
class PointCloud2:
    """A finite planar point set stored as a complex array."""

    points: np.ndarray
    depth: int | None = None
    resolution: int | None = None

    def __post_init__(self):
        pts = np.atleast_1d(np.asarray(self.points, dtype=complex))
        if pts.ndim != 1:
            raise ValueError("PointCloud2 expects a flat array of complex points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point cloud contains non-finite values")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.size

    def sorted(self) -> np.ndarray:
        return np.sort_complex(self.points)


@dataclass(frozen=True)
class AttractorApprox:
    cloud: PointCloud2
    depth: int
    successive_gap: float
    certified_bound: float
    converged: bool


def _as_points(cloud) -> np.ndarray:
    """Coerce a cloud or array-like into a real (n, d) array."""
    pts = cloud.points if hasattr(cloud, "points") else cloud
    pts = np.asarray(pts)
    if np.iscomplexobj(pts) or pts.ndim == 1:
        pts = np.atleast_1d(pts).astype(complex)
        pts = np.column_stack([pts.real, pts.imag])
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("Hausdorff distance needs two non-empty point sets")
    return pts.astype(float)


def control_values(spec: FingerSpec, resolution=None) -> np.ndarray:
    """Materialize the controls used for a computation.

    ``resolution`` may be an integer m (uniform samples of [0, 1]), a
    ControlSet, an explicit sequence of values in [0, 1], or None for the
    finger's own control set.
    """
    if resolution is None:
        return spec.control_set.as_array()
    if isinstance(resolution, ControlSet):
        return resolution.as_array()
    if np.isscalar(resolution):
        return ControlSet.interval(int(resolution)).as_array()
    vals = np.asarray(resolution, dtype=float)
    if vals.ndim != 1 or vals.size == 0 or np.any(vals < 0) or np.any(vals > 1):
        raise ValueError("explicit controls must be a non-empty list of values in [0, 1]")
    return vals


def _check_budget(m: int, k: int, budget: int) -> None:
    # Compare in log space; m**k overflows floats before it overflows ints.
    if k > 0 and m > 1 and k * math.log(m) > math.log(budget) + 1e-12:
        raise BudgetError(f"{m}**{k} points exceeds the budget of {budget} points")


def hutchinson_step(maps: Sequence[tuple[float, float, float]], cloud) -> PointCloud2:
    """Apply the Hutchinson operator of ``maps`` to ``cloud`` once.

    Each map is a ``(v, rho, omega)`` triple, i.e. ``f(x) = exp(-1j*omega*v)(x+1)/rho``.
    Only bit-identical duplicates are removed.
    """
    maps = list(maps)
    pts = cloud.points if isinstance(cloud, PointCloud2) else np.atleast_1d(np.asarray(cloud, dtype=complex))
    if not maps:
        raise ValueError("Hutchinson step needs at least one map")
    if pts.size == 0:
        raise ValueError("Hutchinson step needs a non-empty cloud")
    for v, rho, _ in maps:
        if not 0.0 <= v <= 1.0 or not rho > 1.0:
            raise ValueError(f"invalid map (v={v}, rho={rho})")
    mult = np.array([cmath.exp(-1j * omega * v) / rho for v, rho, omega in maps])
    return PointCloud2(_step(mult, pts))


def _step(mult: np.ndarray, pts: np.ndarray) -> np.ndarray:
    return np.unique((mult[:, None] * (pts[None, :] + 1.0)).ravel())


def _maps_for(spec: FingerSpec, controls: np.ndarray) -> np.ndarray:
    return np.exp(-1j * spec.chirality * spec.omega * controls) / spec.rho


def _iterate(spec: FingerSpec, controls: np.ndarray, k: int, budget: int) -> Iterable[np.ndarray]:
    """Yield ``F^j({0})`` for j = 0..k (without the orientation prefactor)."""
    mult = _maps_for(spec, controls)
    pts = np.zeros(1, dtype=complex)
    yield pts
    for _ in range(k):
        if pts.size * mult.size > budget:
            raise BudgetError(f"next iterate has up to {pts.size * mult.size} points, budget is {budget}")
        pts = _step(mult, pts)
        yield pts


def reachable_set(spec: FingerSpec, k: int, resolution=None, budget: int = DEFAULT_BUDGET) -> PointCloud2:
    """Reachable set of the extremal junction after ``k`` phalanxes (IFS route)."""
    if int(k) != k or k < 0:
        raise ValueError(f"depth must be a non-negative integer, got {k!r}")
    controls = control_values(spec, resolution)
    _check_budget(controls.size, k, budget)
    *_, pts = _iterate(spec, controls, int(k), budget)
    return PointCloud2(np.exp(-1j * spec.theta0) * pts, depth=int(k), resolution=controls.size)


def reachable_set_bruteforce(spec: FingerSpec, k: int, resolution=None,
                             budget: int = DEFAULT_BUDGET, chunk: int = 2**16) -> PointCloud2:
    """Enumerate every control tuple in ``controls**k`` and sum the junction formula."""
    if int(k) != k or k < 0:
        raise ValueError(f"depth must be a non-negative integer, got {k!r}")
    k = int(k)
    controls = control_values(spec, resolution)
    m = controls.size
    _check_budget(m, k, budget)
    if k == 0:
        return PointCloud2(np.zeros(1, dtype=complex), depth=0, resolution=m)
    lengths = spec.rho ** -np.arange(1, k + 1, dtype=float)
    total = m**k
    out = []
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        # Mixed-radix digits of idx give one control tuple per row.
        digits = (idx[:, None] // (m ** np.arange(k - 1, -1, -1))[None, :]) % m
        angle = spec.theta0 + spec.chirality * spec.omega * np.cumsum(controls[digits], axis=1)
        out.append((lengths[None, :] * np.exp(-1j * angle)).sum(axis=1))
    return PointCloud2(np.unique(np.concatenate(out)), depth=k, resolution=m)


def directed_hausdorff(A, B) -> float:
    """``max_{a in A} min_{b in B} |a - b|`` (exact nearest neighbours)."""
    a, b = _as_points(A), _as_points(B)
    if a.shape[1] != b.shape[1]:
        raise ValueError("point sets live in different dimensions")
    if a.shape[0] * b.shape[0] <= 4_000_000:
        best = np.empty(a.shape[0])
        step = max(1, 4_000_000 // b.shape[0] // 8)
        for i in range(0, a.shape[0], step):
            diff = a[i:i + step, None, :] - b[None, :, :]
            best[i:i + step] = np.sqrt((diff**2).sum(axis=2)).min(axis=1)
        return float(best.max())
    dist, _ = cKDTree(b).query(a, k=1)
    return float(np.max(dist))


def hausdorff_distance(A, B) -> float:
    """Symmetric Hausdorff distance between two finite point sets.

    Accepts PointCloud2/PointCloud3 objects, complex arrays, or real (n, d)
    arrays.
    """
    return max(directed_hausdorff(A, B), directed_hausdorff(B, A))


def merge_close(cloud: PointCloud2, tol: float) -> PointCloud2:
    """Post-processing: greedily merge points closer than ``tol``."""
    pts = cloud.sorted()
    tree = cKDTree(np.column_stack([pts.real, pts.imag]))
    keep = np.ones(pts.size, dtype=bool)
    for i in range(pts.size):
        if keep[i]:
            for j in tree.query_ball_point([pts[i].real, pts[i].imag], tol):
                if j > i:
                    keep[j] = False
    return PointCloud2(pts[keep], depth=cloud.depth, resolution=cloud.resolution)


def attractor_approx(spec: FingerSpec, resolution=None, tol: float = 1e-3,
                     max_depth: int = 40, budget: int = DEFAULT_BUDGET) -> AttractorApprox:
    """Iterate from {0} until the successive gap certifies ``tol``.

    Stops once ``gap * rho / (rho - 1) <= tol``; the returned bound on the
    distance to the attractor is ``gap / (rho - 1)``.  Hitting ``max_depth``
    or the point budget returns the last iterate with ``converged=False``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    controls = control_values(spec, resolution)
    rot = cmath.exp(-1j * spec.theta0)
    prev = None
    gap = math.inf
    depth = 0
    converged = False
    it = _iterate(spec, controls, max_depth, budget)
    pts = next(it)
    while True:
        if prev is not None:
            gap = hausdorff_distance(pts, prev)
            if gap * spec.rho / (spec.rho - 1) <= tol:
                converged = True
                break
        if depth >= max_depth:
            break
        try:
            nxt = next(it)
        except BudgetError:
            break
        prev, pts = pts, nxt
        depth += 1
    bound = gap / (spec.rho - 1) if math.isfinite(gap) else math.inf
    return AttractorApprox(PointCloud2(rot * pts, depth=depth, resolution=controls.size),
                           depth, gap, bound, converged)


def successive_gaps(spec: FingerSpec, resolution=None, depth: int = 6) -> list[float]:
    """Hausdorff gaps ``d(F^j, F^{j-1})`` for j = 1..depth."""
    controls = control_values(spec, resolution)
    iterates = list(_iterate(spec, controls, depth, DEFAULT_BUDGET))
    return [hausdorff_distance(b, a) for a, b in zip(iterates, iterates[1:])]
