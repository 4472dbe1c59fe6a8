"""Perching and grasping on a cylindrical branch.

Two coplanar, opposable fingers are laid on a branch modelled as a cylinder
with axis parallel to the y-axis.  In the finger plane the branch becomes an
ellipse, ``gamma(theta) = center + a cos(theta) + 1j * b sin(theta)``.  A
phalanx is tangent to the branch when some point of it lies on the ellipse
(incidence) and its direction is parallel to the ellipse tangent there.

Residual vectors are ``(Re, Im)`` of the incidence gap followed by the sine
of the angle between phalanx direction and ellipse tangent.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .finger import BudgetError, FingerSpec, phalanx_segment, validate_controls
from .reach import control_values

MODES = ("paper", "geometric")

TANGENCY_TOL = 1e-10
JOINT_TOL = 1e-8
MAX_ITER = 100
DAMPING_FLOOR = 2.0**-20
SINGULAR_RCOND = 1e-9
T_SLACK = 1e-12
POLISH = 1e-4
MIN_RADIUS = 1e-6
STALL_WINDOW = 10
STALL_RATIO = 0.99


@dataclass(frozen=True)
class CylinderBranch:
    """Branch of radius ``radius`` whose axis is the line x = axis_x, z = axis_z."""

    radius: float
    axis_x: float = 0.0
    axis_z: float = -1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"branch radius must be positive, got {self.radius!r}")


def section_scale(plane_angle: float, mode: str = "paper") -> float:
    """Ratio of the in-plane horizontal semi-axis to the branch radius.

    ``paper`` uses ``cos(W)``; ``geometric`` is the true planar cut of the
    cylinder, ``1/cos(W)``.  Both agree at W = 0.
    """
    if mode == "paper":
        return math.cos(plane_angle)
    if mode == "geometric":
        return 1.0 / math.cos(plane_angle)
    raise ValueError(f"unknown ellipse mode {mode!r}; expected one of {MODES}")


@dataclass(frozen=True)
class EllipseSection:
    center: complex
    semi_axis_a: float
    semi_axis_b: float
    plane_angle: float = 0.0
    mode: str = "paper"

    def __post_init__(self):
        if not (self.semi_axis_a > 0 and self.semi_axis_b > 0):
            raise ValueError("ellipse semi-axes must be positive")
        if self.mode not in MODES:
            raise ValueError(f"unknown ellipse mode {self.mode!r}")

    @classmethod
    def from_branch(cls, branch: CylinderBranch, plane_angle: float = 0.0, mode: str = "paper") -> "EllipseSection":
        s = section_scale(plane_angle, mode)
        center = complex(branch.axis_x * s, branch.axis_z)
        return cls(center, branch.radius * s, branch.radius, plane_angle, mode)


def ellipse_point(e: EllipseSection, theta):
    return e.center + e.semi_axis_a * np.cos(theta) + 1j * e.semi_axis_b * np.sin(theta)


def ellipse_tangent(e: EllipseSection, theta):
    return -e.semi_axis_a * np.sin(theta) + 1j * e.semi_axis_b * np.cos(theta)


@dataclass(frozen=True)
class TangencySolution:
    t: float
    theta: float
    residual_norm: float
    converged: bool
    in_range: bool
    iterations: int = 0

    @property
    def stable(self) -> bool:
        return self.converged and self.in_range


@dataclass(frozen=True)
class BranchSolution:
    cylinder: CylinderBranch
    tangency_fwd: TangencySolution
    tangency_bwd: TangencySolution
    k_fwd: int
    k_bwd: int
    residual_norm: float
    converged: bool
    grasping: bool
    singular: bool = False
    controls_fwd: tuple[float, ...] = ()
    controls_bwd: tuple[float, ...] = ()
    direction_fwd: complex = 0j
    direction_bwd: complex = 0j
    plane_angle: float = 0.0
    mode: str = "paper"

    @property
    def stable(self) -> bool:
        return self.converged

    @property
    def r(self) -> float:
        return self.cylinder.radius

    @property
    def c_z(self) -> float:
        return self.cylinder.axis_z


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------

def _parallel(dhat: complex, g: complex, gd: complex) -> tuple[float, float]:
    """Sine of the angle from g to dhat, and its derivative along g -> g + gd."""
    ng = abs(g)
    cross = (dhat * g.conjugate()).imag
    dcross = (dhat * gd.conjugate()).imag
    s = cross / ng
    ds = dcross / ng - cross * (g * gd.conjugate()).real / ng**3
    return s, ds


def _line_residual(a: complex, d: complex, e: EllipseSection, t: float, theta: float, jac: bool = True):
    """Residual and (3, 2) Jacobian wrt (t, theta) for a fixed ellipse."""
    A, B = e.semi_axis_a, e.semi_axis_b
    c, s = math.cos(theta), math.sin(theta)
    gap = a + t * d - (e.center + A * c + 1j * B * s)
    g = complex(-A * s, B * c)
    gd = complex(-A * c, -B * s)
    par, dpar = _parallel(d / abs(d), g, gd)
    F = np.array([gap.real, gap.imag, par])
    if not jac:
        return F
    J = np.array([[d.real, -g.real], [d.imag, -g.imag], [0.0, dpar]])
    return F, J


def tangency_residual(spec: FingerSpec, seq: Sequence[float], k: int, e: EllipseSection,
                      t: float, theta: float) -> np.ndarray:
    """Incidence (Re, Im) and parallelism residuals of phalanx ``k`` against ``e``."""
    a, _, d = phalanx_segment(spec, seq, k)
    return _line_residual(a, d, e, t, theta)[0]


# ---------------------------------------------------------------------------
# damped Newton / Gauss-Newton
# ---------------------------------------------------------------------------

def _damped_newton(fun, z0: np.ndarray, tol: float, max_iter: int = MAX_ITER):
    """Minimize ||F|| with lstsq steps and step halving down to DAMPING_FLOOR.

    Stops early when ten iterations shrink the residual by less than 1%.
    Returns (z, F, J, iterations).  Works for square and overdetermined systems.
    """
    z = np.array(z0, dtype=float)
    F, J = fun(z)
    norm = _norm(F)
    square = J.shape[0] == J.shape[1]
    history = [norm]
    it = 0
    for it in range(1, max_iter + 1):
        # Keep polishing past tol; Newton is quadratic there and it costs a step or two.
        if norm <= POLISH * tol:
            it -= 1
            break
        step = None
        if square:
            try:
                step = np.linalg.solve(J, -F)
            except np.linalg.LinAlgError:
                pass
        if step is None or not np.all(np.isfinite(step)):
            step = np.linalg.lstsq(J, -F, rcond=None)[0]
        lam = 1.0
        while lam >= DAMPING_FLOOR:
            z_new = z + lam * step
            F_new = fun(z_new, False)
            n_new = _norm(F_new)
            if n_new < norm:
                break
            lam *= 0.5
        else:
            break
        moved = _norm(z_new - z)
        z, norm = z_new, n_new
        F, J = fun(z)
        history.append(norm)
        if moved <= 1e-15 * (1.0 + _norm(z)):
            break
        # Creeping along a near-singular valley: give up rather than burn the budget.
        if len(history) > STALL_WINDOW and norm > STALL_RATIO * history[-1 - STALL_WINDOW] and norm > tol:
            break
    return z, F, J, it


def _norm(v: np.ndarray) -> float:
    n = math.sqrt(float(v @ v))
    return n if math.isfinite(n) else math.inf


def _is_singular(J: np.ndarray) -> bool:
    sv = np.linalg.svd(J, compute_uv=False)
    return sv[-1] <= SINGULAR_RCOND * sv[0]


def _newton_with_retry(fun, z0, tol, max_iter=MAX_ITER):
    """Newton; on a stall at a singular Jacobian, perturb once and retry."""
    z, F, J, it = _damped_newton(fun, z0, tol, max_iter)
    if np.linalg.norm(F) > tol and _is_singular(J):
        bump = 1e-6 * np.where(np.arange(z.size) % 2 == 0, 1.0, -1.0)
        z2, F2, J2, it2 = _damped_newton(fun, z + bump, tol, max_iter)
        if np.linalg.norm(F2) < np.linalg.norm(F):
            return z2, F2, J2, it + it2
    return z, F, J, it


def _in_unit(t: float) -> bool:
    return -T_SLACK <= t <= 1.0 + T_SLACK


def _wrap(theta: float) -> float:
    w = math.fmod(theta, 2 * math.pi)
    return w + 2 * math.pi if w < 0 else w


# ---------------------------------------------------------------------------
# single tangency, fixed branch
# ---------------------------------------------------------------------------

def _solve_line_tangency(a: complex, d: complex, e: EllipseSection, starts, tol: float) -> TangencySolution:
    def fun(z, jac=True):
        return _line_residual(a, d, e, z[0], z[1], jac)

    best = None
    for t0, th0 in starts:
        z, F, _, it = _newton_with_retry(fun, np.array([t0, th0]), tol)
        norm = float(np.linalg.norm(F))
        if best is None or norm < best[0]:
            best = (norm, z, it)
    norm, z, it = best
    return TangencySolution(float(z[0]), _wrap(float(z[1])), norm, norm <= tol, _in_unit(float(z[0])), it)


def _grid_starts(a, d, e, grid: tuple[int, int], keep: int):
    nt, nth = grid
    ts = np.linspace(0.0, 1.0, nt)
    ths = np.linspace(0.0, 2 * math.pi, nth, endpoint=False)
    scored = []
    for t0 in ts:
        for th0 in ths:
            scored.append((float(np.linalg.norm(_line_residual(a, d, e, t0, th0)[0])), t0, th0))
    scored.sort()
    return [(t0, th0) for _, t0, th0 in scored[:keep]]


def _parallel_starts(a: complex, d: complex, e: EllipseSection):
    """The two ellipse parameters whose tangent is parallel to d, with t from projection."""
    A, B = e.semi_axis_a, e.semi_axis_b
    th = math.atan2(-B * d.real, A * d.imag)
    out = []
    for cand in (th, th + math.pi):
        p = ellipse_point(e, cand)
        t0 = ((p - a) * d.conjugate()).real / abs(d) ** 2
        out.append((t0, cand))
    return out


def solve_tangency(spec: FingerSpec, seq: Sequence[float], k: int, e: EllipseSection,
                   initial: tuple[float, float] | Sequence[tuple[float, float]] | None = None,
                   grid: tuple[int, int] = (8, 16), n_starts: int = 16,
                   tol: float = TANGENCY_TOL) -> TangencySolution:
    """Least-squares tangency of phalanx ``k`` with a fixed ellipse.

    Without ``initial`` the best ``n_starts`` points of a (t, theta) grid seed
    the solver; the lowest residual wins.
    """
    a, _, d = phalanx_segment(spec, seq, k)
    if initial is None:
        starts = _grid_starts(a, d, e, grid, n_starts)
    elif np.ndim(initial) == 1:
        starts = [tuple(initial)]
    else:
        starts = [tuple(s) for s in initial]
    return _solve_line_tangency(a, d, e, starts, tol)


# ---------------------------------------------------------------------------
# joint two-finger branch problem
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Contact:
    """A finger with fixed controls and the index of the phalanx that touches."""

    spec: FingerSpec
    seq: tuple[float, ...]
    k: int

    def __post_init__(self):
        object.__setattr__(self, "seq", tuple(float(v) for v in validate_controls(self.spec, self.seq)))
        phalanx_segment(self.spec, self.seq, self.k)

    def line(self) -> tuple[complex, complex]:
        a, _, d = phalanx_segment(self.spec, self.seq, self.k)
        return a, d


def _branch_system(lines, alpha: float, touch_origin: bool):
    """Residual/Jacobian builder for unknowns (t_f, th_f, t_b, th_b, c, r).

    With ``touch_origin`` the centre is tied to c = -r and r is the last unknown.
    """
    (af, df), (ab, db) = lines
    dhat = (df / abs(df), db / abs(db))
    bases, dirs = (af, ab), (df, db)

    def fun(z, jac=True):
        if touch_origin:
            r = z[4]
            c = -r
        else:
            c, r = z[4], z[5]
        F = np.empty(6)
        J = np.zeros((6, 5 if touch_origin else 6)) if jac else None
        for i in range(2):
            t, th = z[2 * i], z[2 * i + 1]
            cs, sn = math.cos(th), math.sin(th)
            u = complex(alpha * cs, sn)
            du = complex(-alpha * sn, cs)
            gap = bases[i] + t * dirs[i] - (1j * c + r * u)
            par, dpar = _parallel(dhat[i], du, -u)
            F[3 * i:3 * i + 3] = (gap.real, gap.imag, par)
            if not jac:
                continue
            J[3 * i, 2 * i], J[3 * i + 1, 2 * i] = dirs[i].real, dirs[i].imag
            J[3 * i, 2 * i + 1], J[3 * i + 1, 2 * i + 1] = -r * du.real, -r * du.imag
            J[3 * i + 2, 2 * i + 1] = dpar
            if touch_origin:
                dr = 1j - u
                J[3 * i, 4], J[3 * i + 1, 4] = dr.real, dr.imag
            else:
                J[3 * i, 4], J[3 * i + 1, 4] = 0.0, -1.0
                J[3 * i, 5], J[3 * i + 1, 5] = -u.real, -u.imag
        return (F, J) if jac else F

    return fun


def _branch_starts(lines, alpha: float, grid: tuple[int, int], touch_origin: bool):
    (af, df), (ab, db) = lines
    nt, nth = grid
    starts = []
    for t0 in np.linspace(0.0, 1.0, nt):
        for thf in np.linspace(0.0, 2 * math.pi, nth, endpoint=False):
            thb = math.pi - thf
            pf, pb = af + t0 * df, ab + t0 * db
            uf = complex(alpha * math.cos(thf), math.sin(thf))
            ub = complex(alpha * math.cos(thb), math.sin(thb))
            # Incidence is linear in (c, r) once t and theta are fixed.
            M = np.array([[0.0, uf.real], [1.0, uf.imag], [0.0, ub.real], [1.0, ub.imag]])
            rhs = np.array([pf.real, pf.imag, pb.real, pb.imag])
            c0, r0 = np.linalg.lstsq(M, rhs, rcond=None)[0]
            r0 = max(abs(r0), 0.05)
            z = [t0, thf, t0, thb, r0] if touch_origin else [t0, thf, t0, thb, c0, r0]
            starts.append(np.array(z))
    return starts


def grasp_condition(dir_fwd: complex, dir_bwd: complex, strictness: float = 0.0) -> bool:
    """True iff the real dot product of the two directions is below ``-strictness``."""
    if dir_fwd == 0 or dir_bwd == 0:
        raise ValueError("grasp condition needs two non-zero directions")
    dot = dir_fwd.real * dir_bwd.real + dir_fwd.imag * dir_bwd.imag
    return dot < -strictness


def _grasps(p_fwd: complex, d_fwd: complex, p_bwd: complex, d_bwd: complex, strictness: float) -> bool:
    # Two tangencies at one point (e.g. both fingers flat on a branch top at
    # the foot base) give no opposing contacts, whatever the directions.
    return abs(p_fwd - p_bwd) > JOINT_TOL and grasp_condition(d_fwd, d_bwd, strictness)


def _package(z, F, J, touch_origin, contacts, plane_angle, mode, tol, strictness, it):
    fwd, bwd = contacts
    z = np.array(z, dtype=float)
    if touch_origin:
        c, r = -z[4], z[4]
        radius_ok = r > MIN_RADIUS
    else:
        c, r = z[4], z[5]
        if r < 0:
            # (c, -r, theta + pi) describes the same ellipse.
            r = -r
            z[1] += math.pi
            z[3] += math.pi
        radius_ok = r > MIN_RADIUS
    res_f = float(np.linalg.norm(F[:3]))
    res_b = float(np.linalg.norm(F[3:]))
    norm = float(np.linalg.norm(F))
    singular = norm <= tol and _is_singular(J)
    tf = TangencySolution(float(z[0]), _wrap(float(z[1])), res_f, res_f <= tol, _in_unit(float(z[0])), it)
    tb = TangencySolution(float(z[2]), _wrap(float(z[3])), res_b, res_b <= tol, _in_unit(float(z[2])), it)
    converged = norm <= tol and not singular and radius_ok and tf.in_range and tb.in_range
    af, df = fwd.line()
    ab, db = bwd.line()
    grasping = converged and _grasps(af + tf.t * df, df, ab + tb.t * db, db, strictness)
    return BranchSolution(
        cylinder=CylinderBranch(max(abs(float(r)), 1e-300), 0.0, float(c)),
        tangency_fwd=tf, tangency_bwd=tb, k_fwd=fwd.k, k_bwd=bwd.k,
        residual_norm=norm, converged=converged,
        grasping=grasping, singular=singular,
        controls_fwd=fwd.seq, controls_bwd=bwd.seq, direction_fwd=df, direction_bwd=db,
        plane_angle=plane_angle, mode=mode,
    )


def _rank_key(s: BranchSolution):
    # Residuals below tolerance are all round-off, so converged solutions rank by radius.
    if s.converged:
        return (0, s.r, s.residual_norm)
    return (1, s.residual_norm, s.r)


def solve_branch_all(fwd: Contact, bwd: Contact, plane_angle: float, mode: str = "paper",
                     initial: Sequence[float] | None = None, grid: tuple[int, int] = (8, 16),
                     touch_origin: bool = False, tol: float = TANGENCY_TOL,
                     strictness: float = 0.0) -> list[BranchSolution]:
    """Every distinct solution found from the multistart, best first."""
    alpha = section_scale(plane_angle, mode)
    lines = (fwd.line(), bwd.line())
    fun = _branch_system(lines, alpha, touch_origin)
    starts = [np.asarray(initial, dtype=float)] if initial is not None else _branch_starts(lines, alpha, grid, touch_origin)
    found: dict[tuple, BranchSolution] = {}
    for z0 in starts:
        z, F, J, it = _newton_with_retry(fun, z0, tol)
        sol = _package(z, F, J, touch_origin, (fwd, bwd), plane_angle, mode, tol, strictness, it)
        key = (round(sol.tangency_fwd.t, 7), round(sol.tangency_fwd.theta % (2 * math.pi), 7),
               round(sol.tangency_bwd.t, 7), round(sol.tangency_bwd.theta % (2 * math.pi), 7),
               round(sol.c_z, 7), round(sol.r, 7))
        if key not in found or _rank_key(sol) < _rank_key(found[key]):
            found[key] = sol
    return sorted(found.values(), key=lambda s: (_rank_key(s), s.tangency_fwd.t, s.tangency_bwd.t))


def solve_branch(fwd: Contact, bwd: Contact, plane_angle: float, mode: str = "paper",
                 initial: Sequence[float] | None = None, grid: tuple[int, int] = (8, 16),
                 touch_origin: bool = False, tol: float = TANGENCY_TOL,
                 strictness: float = 0.0) -> BranchSolution:
    """Find a branch (centre on x = 0, radius r) tangent to both contacts.

    Unknowns are (t, theta) per contact plus the branch depth ``c_z`` and
    radius; the six equations are two incidence pairs and two parallelism
    conditions.  ``touch_origin=True`` ties the branch top to the foot base
    (``c_z = -r``) and solves the resulting overdetermined system in the
    least-squares sense.

    Solutions on a continuum (singular Jacobian, e.g. mirror-image contacts
    with a free centre) are reported with ``singular=True`` and not counted
    as converged.
    """
    return solve_branch_all(fwd, bwd, plane_angle, mode, initial, grid, touch_origin, tol, strictness)[0]


def solve_branch_indices(fwd_spec: FingerSpec, fwd_seq, bwd_spec: FingerSpec, bwd_seq,
                         plane_angle: float, mode: str = "paper", touch_origin: bool = False,
                         grid: tuple[int, int] = (8, 16), tol: float = TANGENCY_TOL) -> list[BranchSolution]:
    """Run :func:`solve_branch_all` for every phalanx pair (k_fwd, k_bwd)."""
    out = []
    for kf in range(1, fwd_spec.K + 1):
        for kb in range(1, bwd_spec.K + 1):
            out.extend(solve_branch_all(Contact(fwd_spec, fwd_seq, kf), Contact(bwd_spec, bwd_seq, kb),
                                        plane_angle, mode, grid=grid, touch_origin=touch_origin, tol=tol))
    return sorted(out, key=lambda s: (_rank_key(s), s.k_fwd, s.k_bwd))


# ---------------------------------------------------------------------------
# fixed-branch search over control grids
# ---------------------------------------------------------------------------

def search_grasp(fwd_spec: FingerSpec, bwd_spec: FingerSpec, branch: CylinderBranch,
                 plane_angle: float, resolution=2, mode: str = "paper",
                 phalanx_pairs: Sequence[tuple[int, int]] | None = None,
                 tol: float = JOINT_TOL, budget: int = 10**6,
                 strictness: float = 0.0) -> list[BranchSolution]:
    """All grid control pairs with a phalanx pair tangent to ``branch``.

    With the branch fixed the two fingers decouple, so each finger's
    least-squares tangency is solved once per distinct phalanx.  A pair is
    reported when the joint residual is at most ``tol`` and both tangency
    points lie on their phalanges (t in [0, 1]); the ``grasping`` flag is
    attached.  Sorted by (residual, controls, indices).
    """
    grid = control_values(fwd_spec, resolution)
    m = grid.size
    n_combos = m ** (fwd_spec.K + bwd_spec.K)
    if n_combos > budget:
        raise BudgetError(f"{m}**{fwd_spec.K + bwd_spec.K} control pairs exceeds the budget of {budget}")
    e = EllipseSection.from_branch(branch, plane_angle, mode)
    if phalanx_pairs is None:
        phalanx_pairs = [(kf, kb) for kf in range(1, fwd_spec.K + 1) for kb in range(1, bwd_spec.K + 1)]

    cache: dict[tuple, tuple[TangencySolution, complex]] = {}

    def tangency(spec, seq, k, tag):
        key = (tag, k, seq[:k])
        if key not in cache:
            a, _, d = phalanx_segment(spec, seq, k)
            cache[key] = (_solve_line_tangency(a, d, e, _parallel_starts(a, d, e), TANGENCY_TOL), a, d)
        return cache[key]

    seqs_f = list(itertools.product(grid.tolist(), repeat=fwd_spec.K))
    seqs_b = list(itertools.product(grid.tolist(), repeat=bwd_spec.K))
    out = []
    for sf in seqs_f:
        for sb in seqs_b:
            for kf, kb in phalanx_pairs:
                tf, af, df = tangency(fwd_spec, sf, kf, "f")
                if tf.residual_norm > tol or not tf.in_range:
                    continue
                tb, ab, db = tangency(bwd_spec, sb, kb, "b")
                norm = math.hypot(tf.residual_norm, tb.residual_norm)
                if norm > tol or not tb.in_range:
                    continue
                out.append(BranchSolution(
                    cylinder=branch, tangency_fwd=tf, tangency_bwd=tb, k_fwd=kf, k_bwd=kb,
                    residual_norm=norm, converged=True,
                    grasping=_grasps(af + tf.t * df, df, ab + tb.t * db, db, strictness),
                    controls_fwd=tuple(sf), controls_bwd=tuple(sb), direction_fwd=df, direction_bwd=db,
                    plane_angle=plane_angle, mode=mode,
                ))
    out.sort(key=lambda s: (s.residual_norm, s.controls_fwd, s.controls_bwd, s.k_fwd, s.k_bwd))
    return out
