import math
import warnings

import numpy as np
import pytest

from zygofoot.cli import list_scenarios, load_scenario
from zygofoot.finger import GOLDEN, FingerSpec, junction_positions
from zygofoot.foot import default_parrot_foot
from zygofoot.perch import CylinderBranch
from zygofoot.tlm import (CylinderObstacle, GuardPersistenceWarning, Mode, Scenario, Sphere, TlmProfile,
                          constant_controls, engaged_lipschitz, engaged_positions, first_phalanx_segment, guard,
                          initial_state, linear_approach, simulate, step)

FOOT = default_parrot_foot()
FREE0 = constant_controls(FOOT, 0.0)


def state0(fn=FREE0, approach=None):
    return initial_state(FOOT, fn, approach, 0.01)


def test_first_phalanx_straight():
    a, b = first_phalanx_segment(FOOT, 1, state0())
    np.testing.assert_allclose(a, 0, atol=0)
    w = math.pi / 12
    np.testing.assert_allclose(b, [math.cos(w) / GOLDEN, math.sin(w) / GOLDEN, 0], atol=1e-15)
    for h in range(1, 5):
        a, b = first_phalanx_segment(FOOT, h, state0(constant_controls(FOOT, 0.7)))
        assert np.linalg.norm(b - a) == pytest.approx(1 / GOLDEN, abs=1e-15)
    with pytest.raises(ValueError):
        first_phalanx_segment(FOOT, 0, state0())


def test_guard_cases():
    s = state0()
    assert not guard(FOOT, s, Sphere((10, 10, 10), 1))
    assert guard(FOOT, s, Sphere((0.1, -0.2, 0.05), 0.5))
    # Tangent at the origin: distance exactly zero counts as contact.
    assert guard(FOOT, s, Sphere((0, 0, -1), 1))
    assert not guard(FOOT, s, Sphere((0, 0, -1), 1 - 1e-12))
    assert guard(FOOT, s, CylinderObstacle(CylinderBranch(0.5, 0, -0.5)))


def test_obstacle_validation():
    with pytest.raises(ValueError):
        Sphere((0, 0, 0), 0)


def test_engaged_positions():
    spec = FingerSpec(rho=2, omega=math.pi / 2, K=2)
    np.testing.assert_allclose(engaged_positions(spec, 0), [0, 0.5, 0.75])
    assert abs(engaged_positions(spec, 1)[-1] - (-0.25 - 0.5j)) < 1e-15
    rng = np.random.default_rng(0)
    for v in rng.uniform(0, 1, 10):
        np.testing.assert_allclose(engaged_positions(FOOT.finger(4), v), junction_positions(FOOT.finger(4), [v] * 5),
                                   atol=1e-15)
    with pytest.raises(ValueError):
        engaged_positions(spec, 1.5)


def test_profile_validation():
    assert TlmProfile.linear(2.0)(1.0) == 0.5
    assert TlmProfile(1.0, (0, 0.5, 1), (0, 0.8, 0.9))(0.75) == pytest.approx(0.85)
    for bad in [dict(T=0), dict(T=1, times=(0, 1), values=(0.1, 1)), dict(T=1, times=(0, 1), values=(0.5, 0.4)),
                dict(T=1, times=(0, 0.5), values=(0, 1)), dict(T=1, times=(0, 1), values=(0, 1.2))]:
        with pytest.raises(ValueError):
            TlmProfile(**bad)


def test_step_errors():
    prof = TlmProfile.linear(1.0)
    far = Sphere((10, 10, 10), 1)
    with pytest.raises(ValueError):
        step(FOOT, state0(), 0.0, FREE0, prof, far)
    with pytest.raises(ValueError):
        step(FOOT, state0(), 0.1, constant_controls(FOOT, 1.5), prof, far)


def test_far_obstacle_stays_free():
    sc = Scenario(duration=100.0, dt=0.01, profile=TlmProfile.linear(1.0), obstacle=Sphere((10, 10, 10), 1))
    traj = simulate(FOOT, sc)
    assert len(traj.snapshots) == 10**4 + 1
    assert traj.events == []
    assert all(s.mode is Mode.FREE for s in traj.snapshots)
    assert all(np.array_equal(s.talons(), traj.snapshots[0].talons()) for s in traj.snapshots)


def test_origin_obstacle_engages_then_locks():
    T, dt = 1.0, 0.01
    sc = Scenario(duration=2.0, dt=dt, profile=TlmProfile.linear(T), obstacle=Sphere((0, 0, 0), 0.3))
    traj = simulate(FOOT, sc)
    assert [e.kind for e in traj.events] == ["engaged", "locked"]
    engaged, locked = traj.events
    assert engaged.step == 1
    assert locked.step - engaged.step == math.ceil(T / dt)
    assert locked.detail == pytest.approx(T, abs=dt)
    after = traj.snapshots[locked.step:]
    assert all(s.same_configuration(after[0]) for s in after)
    assert all(s.mode is Mode.LOCKED for s in after)
    assert after[0].controls == tuple((1.0,) * f.K for f in FOOT.fingers)


def test_mode_sequence_is_monotone():
    traj = simulate(FOOT, load_scenario("strike_sphere"))
    order = {Mode.FREE: 0, Mode.ENGAGED: 1, Mode.LOCKED: 2}
    ranks = [order[s.mode] for s in traj.snapshots]
    assert ranks == sorted(ranks)
    assert set(ranks) == {0, 1, 2}


def test_flight_contact_time():
    # Spread talons stay in the base plane, so contact happens when the base
    # reaches the sphere top: z = -1.5 + 0.5 under unit descent.
    sc = load_scenario("strike_sphere")
    traj = simulate(FOOT, sc)
    hit = traj.events[0]
    assert hit.kind == "engaged"
    assert abs(hit.time - 1.0) <= sc.dt
    assert abs(hit.time - 1.0) <= 1e-6


def test_linear_profile_controls():
    T, dt = 1.0, 0.1
    sc = Scenario(duration=2.0, dt=dt, profile=TlmProfile.linear(T), obstacle=Sphere((0, 0, 0), 0.3))
    traj = simulate(FOOT, sc)
    engaged = [s for s in traj.snapshots if s.mode is not Mode.FREE]
    for s in engaged:
        expected = min(s.elapsed / T, 1.0)
        assert all(v == pytest.approx(expected, abs=1e-15) for seq in s.controls for v in seq)


@pytest.mark.parametrize("T", [0.5, 1.0, 3.0])
def test_engaged_displacement_bound(T):
    dt = 0.01
    sc = Scenario(duration=T + 0.5, dt=dt, profile=TlmProfile.linear(T), obstacle=Sphere((0, 0, 0), 0.3))
    traj = simulate(FOOT, sc)
    bounds = np.array([engaged_lipschitz(f) for f in FOOT.fingers])
    for a, b in zip(traj.snapshots, traj.snapshots[1:]):
        if a.mode is Mode.FREE:
            continue
        dv = b.controls[0][0] - a.controls[0][0]
        disp = np.linalg.norm(b.talons() - a.talons(), axis=1)
        assert np.all(disp <= bounds * dv + 1e-12)
        if T >= 1:
            assert np.all(disp <= bounds * dt + 1e-12)


def test_lipschitz_constant_formula():
    spec = FingerSpec(rho=2, omega=1.0, K=3)
    assert engaged_lipschitz(spec) == pytest.approx(1 / 2 + 2 / 4 + 3 / 8)


def test_switch_is_continuous_from_spread_talons():
    traj = simulate(FOOT, load_scenario("strike_sphere"))
    i = traj.events[0].step
    jump = np.abs(traj.snapshots[i].talons() - traj.snapshots[i - 1].talons() -
                  (traj.snapshots[i].base - traj.snapshots[i - 1].base)).max()
    assert jump <= 1e-12
    assert not any(e.kind == "discontinuity" for e in traj.events)


def test_nonzero_free_controls_record_discontinuity():
    sc = Scenario(duration=0.5, dt=0.01, profile=TlmProfile.linear(1.0), obstacle=Sphere((0, 0, 0), 0.3),
                  free_control_fn=constant_controls(FOOT, 0.5))
    traj = simulate(FOOT, sc)
    kinds = [e.kind for e in traj.events]
    assert kinds[:2] == ["engaged", "discontinuity"]
    assert traj.events[1].detail > 0.1


@pytest.mark.parametrize("name", ["perch_origin", "strike_sphere", "land_branch"])
def test_canonical_scenarios_keep_contact(name):
    assert name in list_scenarios()
    with warnings.catch_warnings():
        warnings.simplefilter("error", GuardPersistenceWarning)
        traj = simulate(FOOT, load_scenario(name))
    assert traj.guard_violations == []
    assert [e.kind for e in traj.events] == ["engaged", "locked"]


def test_guard_violation_is_reported():
    # A small ball at a spread talon tip: the curling phalanx swings away from it.
    w = math.pi / 12
    tip = np.array([math.cos(w), math.sin(w), 0.0]) / GOLDEN
    sc = Scenario(duration=0.5, dt=0.01, profile=TlmProfile.linear(1.0), obstacle=Sphere(tuple(tip), 0.01))
    with pytest.warns(GuardPersistenceWarning):
        traj = simulate(FOOT, sc)
    assert traj.guard_violations


def test_base_freezes_on_contact():
    traj = simulate(FOOT, load_scenario("land_branch"))
    i = traj.events[0].step
    bases = np.array([s.base for s in traj.snapshots[i:]])
    assert np.all(bases == bases[0])
    assert traj.snapshots[i - 1].base[2] > bases[0][2]


def test_determinism():
    a = simulate(FOOT, load_scenario("land_branch"))
    b = simulate(FOOT, load_scenario("land_branch"))
    assert a.events == b.events
    assert all(x.same_configuration(y) and x.time == y.time for x, y in zip(a.snapshots, b.snapshots))


def test_approach_function():
    f = linear_approach((1, 0, -2), start=(0, 0, 1))
    np.testing.assert_allclose(f(0.5), [0.5, 0, 0])
