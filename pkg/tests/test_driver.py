from __future__ import annotations

import math

import numpy as np
import pytest

from burgers_freeze.config import SolverConfig, preset
from burgers_freeze.driver import (
    ARS_DELTA,
    ARS_GAMMA,
    BlowUpError,
    FreezingIntegrator,
    FreezingState,
    TimeBudgetError,
    cfl_dt,
    direct_solve,
    direct_step,
    make_equation,
    make_phase_condition,
    reconstruct_on,
    run,
    run_until_time,
    verify_equivalence,
)
from burgers_freeze.grid import Grid, mass, sample_function
from burgers_freeze.lie_group import GroupElement
from burgers_freeze.reconstruction import mass_law_check
from burgers_freeze.spatial import CoMovingRHS


def small_config(**kw):
    base = dict(d=1, p=2.0, nu=0.4, lo=[-8.0], hi=[8.0], n=[200], tau_end=1.0, snapshot_every=0.25)
    base.update(kw)
    return SolverConfig(**base)


def test_ars_tableau_is_second_order_and_stiffly_accurate():
    g, dl = ARS_GAMMA, ARS_DELTA
    b = np.array([0.0, 1.0 - g, g])
    c = np.array([0.0, g, 1.0])
    assert b.sum() == pytest.approx(1.0)
    assert b @ c == pytest.approx(0.5)
    be = np.array([dl, 1.0 - dl, 0.0])
    ce = np.array([0.0, g, 1.0])
    assert be.sum() == pytest.approx(1.0)
    assert be @ ce == pytest.approx(0.5)


def test_cfl_dt_examples():
    grid = Grid([-8.0], [8.0], [1600])
    eq = CoMovingRHS(grid, 2.0, 0.4)
    v = sample_function(grid, lambda x: 2.0 * np.exp(-x ** 2))
    dt = cfl_dt(eq, v, None, 0.45)
    assert 0.45 * 0.01 / 2.0 <= dt <= 0.45 * 0.01 / 1.99
    assert cfl_dt(eq, v, None, 0.45, dt_max=1e-4) == 1e-4
    zero = sample_function(grid, lambda x: 0 * x)
    assert cfl_dt(eq, zero, None, 0.45, dt_max=0.1) == 0.1
    for bad in (0.0, 1.0, -0.2):
        with pytest.raises(ValueError):
            cfl_dt(eq, v, None, bad)


def test_direct_step_matches_hand_assembled_ars():
    grid = Grid([-8.0], [8.0], [200])
    eq = CoMovingRHS(grid, 2.0, 0.4)
    u = sample_function(grid, lambda x: np.exp(-x ** 2) * (1 + 0.3 * x))
    dt = 0.03
    g = 1.0 - 1.0 / math.sqrt(2.0)
    dl = 1.0 - 1.0 / (2.0 * g)
    e1 = eq.explicit_rhs(u)
    u2 = eq.diffusion_solve(u + g * dt * e1, g * dt)
    e2 = eq.explicit_rhs(u2)
    stage = u + dt * (dl * e1 + (1 - dl) * e2) + (1 - g) * dt * eq.diffusion_apply(u2)
    u3 = eq.diffusion_solve(stage, g * dt)
    np.testing.assert_array_equal(direct_step(eq, u, dt).values, u3.values)


def test_direct_solve_conserves_mass():
    grid = Grid([-8.0], [8.0], [200])
    eq = CoMovingRHS(grid, 2.0, 0.4)
    u0 = sample_function(grid, lambda x: np.exp(-x ** 2) * (1 + 0.3 * x))
    u = direct_solve(eq, u0, 1.0)
    assert mass(u) == pytest.approx(mass(u0), abs=1e-13)


def time_convergence_orders(stepper, dts, ref_dt):
    ref = stepper(ref_dt)
    errs = np.array([(stepper(dt) - ref).norm() for dt in dts])
    return np.log2(errs[:-1] / errs[1:])


def test_direct_scheme_is_second_order_in_time():
    grid = Grid([-8.0], [8.0], [100])
    eq = CoMovingRHS(grid, 2.0, 0.4)
    u0 = sample_function(grid, lambda x: np.exp(-x ** 2))

    def stepper(dt):
        u = u0
        for _ in range(int(round(0.4 / dt))):
            u = direct_step(eq, u, dt)
        return u

    orders = time_convergence_orders(stepper, [0.04, 0.02, 0.01], 0.00125)
    assert np.all(orders >= 1.8)


def test_freezing_step_is_second_order_in_time():
    cfg = small_config(n=[100], phase="orthogonal")
    u0 = cfg.initial_field()

    def final(dt):
        integ = FreezingIntegrator(make_equation(cfg), make_phase_condition(cfg, u0))
        s = integ.initial_state(u0)
        for _ in range(int(round(0.4 / dt))):
            s, _ = integ.step(s, dt)
        return s

    ref = final(0.00125)
    states = [final(dt) for dt in (0.04, 0.02, 0.01)]
    ev = np.array([(s.v - ref.v).norm() for s in states])
    eb = np.array([abs(s.g.b[0] - ref.g.b[0]) + abs(s.g.alpha - ref.g.alpha) + abs(s.rho - ref.rho)
                   for s in states])
    assert np.all(np.log2(ev[:-1] / ev[1:]) >= 1.8)
    assert np.all(np.log2(eb[:-1] / eb[1:]) >= 1.8)


def test_run_snapshots_and_series():
    cfg = small_config()
    seen = []
    traj = run(cfg, callback=seen.append)
    np.testing.assert_allclose([s.tau for s in traj.snapshots], [0.0, 0.25, 0.5, 0.75, 1.0], atol=0)
    assert [s.tau for s in seen] == [s.tau for s in traj.snapshots]
    assert len(traj.series) == len(traj.stats) + 1
    rho = traj.column("t")
    assert rho[0] == 0.0 and np.all(np.diff(rho) > 0)
    assert np.all(traj.column("alpha") > 0)
    assert traj.column("tau")[-1] == 1.0
    assert mass_law_check(traj) <= 1e-6


def test_run_tau_end_zero():
    traj = run(small_config(tau_end=0.0))
    assert len(traj.snapshots) == 1
    s = traj.final
    assert s.tau == 0.0 and s.rho == 0.0 and s.g.is_identity()


def test_run_rejects_foreign_grid():
    cfg = small_config()
    with pytest.raises(ValueError):
        run(cfg, sample_function(Grid([-8.0], [8.0], [100]), lambda x: np.exp(-x ** 2)))


def test_fixed_phase_keeps_constraint():
    cfg = small_config(phase="fixed")
    traj = run(cfg)
    drift = max(s.constraint_drift for s in traj.stats)
    ref = traj.final.v  # the pairings scale like the squared norm of the profile
    assert drift <= 1e-3 * ref.norm() ** 2
    assert max(s.phase_residual for s in traj.stats) <= 1e-9


def test_blowup_is_reported_with_last_state():
    cfg = small_config()
    u0 = cfg.initial_field()
    integ = FreezingIntegrator(make_equation(cfg), make_phase_condition(cfg, u0), blowup=0.5)
    with pytest.raises(BlowUpError) as info:
        run(cfg, u0, integrator=integ)
    assert info.value.state is not None and info.value.state.tau == 0.0


def test_step_rejects_non_positive_dt():
    cfg = small_config()
    u0 = cfg.initial_field()
    integ = FreezingIntegrator(make_equation(cfg), make_phase_condition(cfg, u0))
    with pytest.raises(ValueError):
        integ.step(integ.initial_state(u0), 0.0)


def test_run_until_time_hits_target_and_budget():
    cfg = small_config(phase="orthogonal")
    u0 = cfg.initial_field()
    integ = FreezingIntegrator(make_equation(cfg), make_phase_condition(cfg, u0))
    s = run_until_time(integ, integ.initial_state(u0), 2.0)
    assert s.rho == pytest.approx(2.0, rel=1e-12)
    with pytest.raises(TimeBudgetError):
        run_until_time(integ, integ.initial_state(u0), 1e9, tau_budget=0.5)


def test_equivalence_p2():
    rep = verify_equivalence(small_config(n=[400], phase="fixed"), None, 1.0)
    assert rep.relative_error <= 1e-3
    assert verify_equivalence(small_config(), None, 0.0).relative_error == 0.0


def test_equivalence_p25_needs_action_compatible_translation():
    """Freezing + reconstruction matches a direct solve only with b' = alpha^(p-1) Q mu3."""
    cfg = preset("1d-p2.5-nu0.4", lo=[-10.0], hi=[10.0], n=[400])
    rep = verify_equivalence(cfg, None, 3.0)
    assert rep.relative_error <= 1e-3

    # translation integrated with the plain group law b' = alpha mu3
    u0 = cfg.initial_field()
    integ = FreezingIntegrator(make_equation(cfg), make_phase_condition(cfg, u0), cfg.cfl, cfg.dt_max)
    s = integ.initial_state(u0)
    b_alt = 0.0
    while 3.0 - s.rho > 1e-13:
        dt = min(integ.stable_dt(s), (3.0 - s.rho) / s.g.alpha ** 3)
        new, _ = integ.step(s, dt)
        b_alt += 0.5 * dt * (s.g.alpha * s.mu.mu3[0] + new.g.alpha * new.mu.mu3[0])
        s = new
    alt = FreezingState(s.tau, s.v, s.mu, GroupElement(1, s.g.alpha, 0.0, [b_alt]), s.rho)
    u_dir = direct_solve(make_equation(cfg), u0, 3.0, cfg.cfl, cfg.dt_max)
    err_alt = (u_dir - reconstruct_on(alt, u0.grid, cfg.p)).norm() / u_dir.norm()
    assert err_alt > 10 * rep.relative_error
