"""Acceptance gate: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python3 tests/test_acceptance.py``.  Every tolerance is pinned below.
"""

import cmath
import hashlib
import itertools
import json
import math
import sys
import tempfile
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))
import oracles  # noqa: E402

from zygofoot import io  # noqa: E402
from zygofoot.cli import load_scenario, list_scenarios, main  # noqa: E402
from zygofoot.finger import GOLDEN, FingerSpec  # noqa: E402
from zygofoot.foot import default_parrot_foot, embed_finger, foot_reachable  # noqa: E402
from zygofoot.perch import (CylinderBranch, EllipseSection, grasp_condition, search_grasp,  # noqa: E402
                            solve_branch_indices, solve_tangency)
from zygofoot.reach import hausdorff_distance, reachable_set, reachable_set_bruteforce, successive_gaps  # noqa: E402
from zygofoot.tlm import GuardPersistenceWarning, Mode, Scenario, Sphere, TlmProfile, simulate  # noqa: E402

# criterion 1
REF_PERCH_R_RANGE = (0.53, 0.63)
REF_PERCH_CENTER_TOL = 0.05
REF_PERCH_RESIDUAL = 1e-8
REF_PERCH_SECONDS = 5.0
# criterion 2
ORACLE_TOL = 1e-12
ORACLE_SECONDS = 60.0
GRID_RHO = (1.2, GOLDEN, 2.0)
GRID_OMEGA = (math.pi / 12, math.pi / 6, math.pi / 2)
GRID_M = (2, 3, 4)
GRID_K = (1, 2, 3, 4, 5)
# criterion 3
CONTRACTION_SLACK = 1e-12
N_RANDOM_SPECS = 20
# criterion 4
REACH_SLACK = 1e-9
# criterion 5
VERIFY_TOL = 1e-8
# criterion 6
N_ROTATIONS = 100
# criterion 7
FAR_STEPS = 10**4
SWITCH_JUMP = 1e-12

W = math.pi / 12
FWD = FingerSpec(rho=GOLDEN, omega=math.pi / 6, theta0=0.0, chirality=1, K=4)
BWD = FingerSpec(rho=GOLDEN, omega=math.pi / 6, theta0=math.pi, chirality=-1, K=2)
FOOT = default_parrot_foot()


def _grid():
    return itertools.product(GRID_RHO, GRID_OMEGA, GRID_M, GRID_K)


# ---------------------------------------------------------------------------

def reference_perch_solutions():
    sols = []
    for touch in (False, True):
        sols += solve_branch_indices(FWD, [1] * 4, BWD, [1] * 2, W, "paper", touch_origin=touch)
    return sols


def criterion_1():
    t0 = time.perf_counter()
    sols = reference_perch_solutions()
    elapsed = time.perf_counter() - t0
    lo, hi = REF_PERCH_R_RANGE

    def ok(s):
        return (s.converged and s.residual_norm <= REF_PERCH_RESIDUAL and lo <= s.r <= hi
                and s.cylinder.axis_x == 0 and abs(s.c_z + s.r) <= REF_PERCH_CENTER_TOL)

    hits = [s for s in sols if ok(s)]
    conv = [s for s in sols if s.converged]
    near = min(conv, key=lambda s: max(0, lo - s.r, s.r - hi) + max(0, abs(s.c_z + s.r) - REF_PERCH_CENTER_TOL))
    detail = (f"{len(conv)} converged of {len(sols)}; nearest r={near.r:.4f} c_z={near.c_z:.4f} "
              f"k=({near.k_fwd},{near.k_bwd}); {elapsed:.2f}s")
    return bool(hits) and elapsed < REF_PERCH_SECONDS, detail


def criterion_2():
    t0 = time.perf_counter()
    worst = 0.0
    for rho, omega, m, k in _grid():
        spec = FingerSpec(rho=rho, omega=omega)
        worst = max(worst, hausdorff_distance(reachable_set(spec, k, m), reachable_set_bruteforce(spec, k, m)))
    elapsed = time.perf_counter() - t0
    return worst <= ORACLE_TOL and elapsed < ORACLE_SECONDS, f"max d_H={worst:.3g} over 135 cases; {elapsed:.2f}s"


def criterion_3():
    rng = np.random.default_rng(20240601)
    worst = -math.inf
    for _ in range(N_RANDOM_SPECS):
        spec = FingerSpec(rho=float(rng.uniform(1.1, 3.0)), omega=float(rng.uniform(0.05, 2 * math.pi - 0.05)),
                          theta0=float(rng.uniform(-math.pi, math.pi)), chirality=int(rng.choice([1, -1])))
        if abs(spec.omega - math.pi) < 1e-9:
            continue
        gaps = successive_gaps(spec, int(rng.integers(2, 5)), depth=7)
        for g0, g1 in zip(gaps, gaps[1:]):
            worst = max(worst, g1 - g0 / spec.rho)
    return worst <= CONTRACTION_SLACK, f"max(gap_k+1 - gap_k/rho)={worst:.3g}"


def criterion_4():
    worst = -math.inf
    for rho, omega, m, k in _grid():
        spec = FingerSpec(rho=rho, omega=omega)
        bound = spec.reach_bound
        for cloud in (reachable_set(spec, k, m), reachable_set_bruteforce(spec, k, m)):
            worst = max(worst, np.abs(cloud.points).max() - bound,
                        np.linalg.norm(embed_finger(cloud, W).points, axis=1).max() - bound)
    for omega in (math.pi / 12, math.pi / 6):
        foot = default_parrot_foot(omega=omega)
        cloud = foot_reachable(foot, 3, 4, 8)
        worst = max(worst, np.linalg.norm(cloud.points, axis=1).max() - foot.finger(3).reach_bound)
    return worst <= REACH_SLACK, f"max(|x| - 1/(rho-1))={worst:.3g}"


def criterion_5():
    checked, worst = 0, 0.0
    # single tangencies on a few ellipses
    for r, cz, seq, k in [(0.6, -0.7, [1, 1, 1, 1], 2), (0.5, -0.5, [0, 0.5, 1, 0], 3), (1.0, -1.1, [1, 0, 1, 0], 1)]:
        e = EllipseSection.from_branch(CylinderBranch(r, 0.0, cz), W, "paper")
        s = solve_tangency(FWD, seq, k, e)
        if s.converged:
            worst = max(worst, *oracles.check_tangency(GOLDEN, math.pi / 6, 0.0, 1, seq, k, cz, r, W, "paper",
                                                       s.t, s.theta))
            checked += 1
    branch_sols = [s for s in reference_perch_solutions() if s.converged]
    branch_sols += search_grasp(FWD, BWD, CylinderBranch(0.6512, 0.0, -0.6512), W, 2)
    branch_sols += search_grasp(FWD, BWD, CylinderBranch(0.5 * math.cos(math.pi / 6), 0.0, -0.5), 0.0, 2)
    for s in branch_sols:
        if not s.converged:
            continue
        for spec, seq, k, tan in ((FWD, s.controls_fwd, s.k_fwd, s.tangency_fwd),
                                  (BWD, s.controls_bwd, s.k_bwd, s.tangency_bwd)):
            worst = max(worst, *oracles.check_tangency(spec.rho, spec.omega, spec.theta0, spec.chirality, seq, k,
                                                       s.c_z, s.r, s.plane_angle, s.mode, tan.t, tan.theta))
        checked += 1
    return checked > 0 and worst <= VERIFY_TOL, f"{checked} solutions re-checked; worst residual {worst:.3g}"


def criterion_6():
    ok = grasp_condition(1, -1) and not grasp_condition(1, 1j)
    rng = np.random.default_rng(7)
    flips = 0
    for _ in range(N_ROTATIONS):
        a = complex(*rng.normal(size=2))
        b = complex(*rng.normal(size=2))
        rot = cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        flips += grasp_condition(a, b) != grasp_condition(a * rot, b * rot)
        flips += grasp_condition(a, b) != grasp_condition(b, a)
    return ok and flips == 0, f"antipodal/orthogonal ok={ok}; {flips} flag changes under {N_ROTATIONS} rotations"


def _tlm_runs():
    far = Scenario(duration=FAR_STEPS * 0.01, dt=0.01, profile=TlmProfile.linear(1.0), obstacle=Sphere((10, 10, 10), 1))
    origin = Scenario(duration=2.0, dt=0.01, profile=TlmProfile.linear(1.0), obstacle=Sphere((0, 0, 0), 0.3))
    return {"far": simulate(FOOT, far), "origin": simulate(FOOT, origin),
            **{name: simulate(FOOT, load_scenario(name)) for name in list_scenarios()}}


def criterion_7():
    notes = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", GuardPersistenceWarning)
        runs = _tlm_runs()
    far, origin = runs["far"], runs["origin"]
    a = far.events == [] and len(far.snapshots) == FAR_STEPS + 1
    kinds = [e.kind for e in origin.events]
    b = kinds == ["engaged", "locked"] and abs(origin.events[1].detail - 1.0) <= 0.01
    post = origin.snapshots[origin.events[1].step:]
    c = all(s.same_configuration(post[0]) for s in post)
    strike = runs["strike_sphere"]
    i = strike.events[0].step
    jump = np.abs((strike.snapshots[i].talons() - strike.snapshots[i].base)
                  - (strike.snapshots[i - 1].talons() - strike.snapshots[i - 1].base)).max()
    d = jump <= SWITCH_JUMP
    e = not caught and all(not runs[n].guard_violations and len(runs[n].switches) == 2 for n in list_scenarios())
    for tag, flag in zip("abcde", (a, b, c, d, e)):
        notes.append(f"{tag}={'ok' if flag else 'FAIL'}")
    return all((a, b, c, d, e)), " ".join(notes) + f"; switch jump {jump:.2g}"


def _digest(paths):
    h = hashlib.sha256()
    for p in sorted(paths):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return h.hexdigest()


def _artifacts(root: Path):
    root.mkdir(parents=True, exist_ok=True)
    # criterion 1: the perch report
    io._write_text(root / "reference_perch.json", io.dump_json(io.perch_report("solve-branch", reference_perch_solutions(), {})))
    # criterion 2: every cloud pair of the oracle grid
    lines = []
    for rho, omega, m, k in _grid():
        spec = FingerSpec(rho=rho, omega=omega)
        lines.append(io.cloud_to_csv(reachable_set(spec, k, m)))
        lines.append(io.cloud_to_csv(reachable_set_bruteforce(spec, k, m)))
    (root / "grid.csv").write_text("".join(lines), newline="\n")
    # criterion 7: trajectories through the CLI
    for name in list_scenarios():
        main(["tlm", "--scenario", name, "-o", str(root / name)])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for name, traj in _tlm_runs().items():
            (root / f"{name}.csv").write_text(io.trajectory_to_csv(traj), newline="\n")
    return [p for p in root.rglob("*") if p.is_file()]


def criterion_8():
    with tempfile.TemporaryDirectory() as tmp:
        first = _digest(_artifacts(Path(tmp) / "one"))
        second = _digest(_artifacts(Path(tmp) / "two"))
    return first == second, f"sha256 {first[:12]} vs {second[:12]}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


def _report(n, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    return line


@pytest.mark.parametrize("n", range(1, len(CRITERIA) + 1))
def test_criterion(n, capsys):
    ok, detail = CRITERIA[n - 1]()
    with capsys.disabled():
        print("\n" + _report(n, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for n, fn in enumerate(CRITERIA, start=1):
        ok, detail = fn()
        results.append(ok)
        print(_report(n, ok, detail), flush=True)
    sys.exit(0 if all(results) else 1)
