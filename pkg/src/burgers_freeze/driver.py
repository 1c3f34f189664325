"""Time integration of the freezing system and of the unfrozen equation.

One step of size ``dt`` uses the second-order IMEX Runge-Kutta pair
ARS(2,2,2) with ``gamma = 1 - 1/sqrt(2)`` and ``delta = 1 - 1/(2 gamma)``::

    implicit (diffusion)          explicit (transport + source)
    0     | 0  0      0           0     | 0      0        0
    gamma | 0  gamma  0           gamma | gamma  0        0
    1     | 0  1-g    gamma       1     | delta  1-delta  0
    ------+---------------        ------+--------------------
          | 0  1-g    gamma             | delta  1-delta  0

The algebraic variables ``mu`` are recomputed from the phase condition at
every explicit stage.  The group element is advanced on the group,
``g <- g * exp(dt (mu_n + mu_{n+1}) / 2)`` with the product and exponential
under which ``a`` is a left action (:func:`action.action_compose`), and the
original time by the trapezoidal rule for ``rho' = alpha^(2p-2)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .action import GeneratorSet, action_compose, action_exp, apply_action
from .config import SolverConfig
from .grid import Field, Grid, mass, resample
from .lie_group import GroupElement, LieAlgebraElement
from .phase import PhaseCondition, PhaseSolution, zero_phase_solution
from .spatial import CoMovingRHS

logger = logging.getLogger(__name__)

ARS_GAMMA = 1.0 - 1.0 / math.sqrt(2.0)
ARS_DELTA = 1.0 - 1.0 / (2.0 * ARS_GAMMA)
ARS_IMPLICIT_A = np.array([[0.0, 0.0, 0.0], [0.0, ARS_GAMMA, 0.0], [0.0, 1.0 - ARS_GAMMA, ARS_GAMMA]])
ARS_EXPLICIT_A = np.array([[0.0, 0.0, 0.0], [ARS_GAMMA, 0.0, 0.0], [ARS_DELTA, 1.0 - ARS_DELTA, 0.0]])

SPEED_FLOOR = 1e-12


class BlowUpError(FloatingPointError):
    """The profile became non-finite or exceeded the blow-up bound."""

    def __init__(self, message: str, state: FreezingState | None = None):
        super().__init__(message)
        self.state = state


class TimeBudgetError(RuntimeError):
    """The original time did not reach the requested value within the scaled-time budget."""


@dataclass(frozen=True, eq=False)
class FreezingState:
    tau: float
    v: Field
    mu: LieAlgebraElement
    g: GroupElement
    rho: float

    @property
    def t(self) -> float:
        return self.rho


@dataclass(frozen=True)
class StepStats:
    dt_used: float
    max_wave_speed: float
    phase_residual: float
    constraint_drift: float
    implicit_iterations: int
    reference_updated: bool = False


def cfl_dt(eq: CoMovingRHS, v: Field, mu: LieAlgebraElement | None, cfl: float,
           dt_max: float = math.inf) -> float:
    """``cfl * min(dx) / max local speed``, capped at ``dt_max``."""
    if not 0 < cfl < 1:
        raise ValueError(f"cfl must lie in (0, 1), got {cfl}")
    eq.explicit_rhs(v, mu)
    return _dt_from_speed(eq.grid, eq.max_speed, cfl, dt_max)


def _dt_from_speed(grid: Grid, speed: float, cfl: float, dt_max: float) -> float:
    return min(cfl * min(grid.dx) / max(speed, SPEED_FLOOR), dt_max)


def reconstruction_step(g: GroupElement, rho: float, mu_old: LieAlgebraElement, mu_new: LieAlgebraElement,
                        dt: float, p: float) -> tuple[GroupElement, float]:
    """Advance ``g' = T_1 L_g mu`` (action product) and ``rho' = alpha^(2p-2)`` over one step.

    ``g`` is multiplied by the exponential of the averaged ``mu`` (exact for
    constant ``mu``), ``rho`` uses the trapezoidal rule; both are second order.
    """
    g_new = action_compose(g, action_exp((mu_old + mu_new) * 0.5, dt, p), p)
    k = 2.0 * p - 2.0
    return g_new, rho + 0.5 * dt * (g.alpha ** k + g_new.alpha ** k)


class FreezingIntegrator:
    """Advances the freezing system (or, with ``pc=None``, the original equation).

    The phase-condition solution at the current profile is cached, so each
    step costs three phase solves (two explicit stages and the new profile).
    """

    def __init__(self, eq: CoMovingRHS, pc: PhaseCondition | None, cfl: float = 0.45,
                 dt_max: float = 0.1, blowup: float = 1e6):
        self.eq = eq
        self.pc = pc
        self.cfl = cfl
        self.dt_max = dt_max
        self.blowup = blowup
        self._cache: tuple | None = None

    @property
    def p(self) -> float:
        return self.eq.p

    def phase_solve(self, v: Field) -> PhaseSolution:
        if self._cache is not None and self._cache[0] is v:
            return self._cache[1]
        sol = zero_phase_solution(v, self.eq) if self.pc is None else self.pc.solve(v, self.eq)
        self._cache = (v, sol)
        return sol

    def initial_state(self, u0: Field) -> FreezingState:
        sol = self.phase_solve(u0)
        return FreezingState(0.0, u0, sol.mu, GroupElement.identity(u0.grid.d), 0.0)

    def stable_dt(self, state: FreezingState) -> float:
        sol = self.phase_solve(state.v)
        return _dt_from_speed(self.eq.grid, sol.max_speed, self.cfl, self.dt_max)

    def step(self, state: FreezingState, dt: float) -> tuple[FreezingState, StepStats]:
        if not dt > 0:
            raise ValueError(f"step size must be positive, got {dt}")
        eq = self.eq
        v = state.v
        sol1 = self.phase_solve(v)
        updated = False
        if self.pc is not None and self.pc.kind == "fixed":
            updated = self.pc.maybe_update_reference(v, sol1.generators)
            if updated:
                self._cache = None
                sol1 = self.phase_solve(v)
        g_dt = ARS_GAMMA * dt
        iters = 0
        u2 = eq.diffusion_solve(v + g_dt * sol1.explicit, g_dt)
        iters += eq.last_cg_iterations
        sol2 = self.phase_solve(u2)
        stage = v + dt * (ARS_DELTA * sol1.explicit + (1.0 - ARS_DELTA) * sol2.explicit) \
            + ((1.0 - ARS_GAMMA) * dt) * sol2.diffusion
        u3 = eq.diffusion_solve(stage, g_dt)
        iters += eq.last_cg_iterations
        self._check_profile(u3, state)
        sol3 = self.phase_solve(u3)
        g_new, rho_new = reconstruction_step(state.g, state.rho, sol1.mu, sol3.mu, dt, self.p)
        new = FreezingState(state.tau + dt, u3, sol3.mu, g_new, rho_new)
        residual = max(_relative_residual(sol1), _relative_residual(sol2))
        drift = 0.0
        if self.pc is not None and self.pc.kind == "fixed":
            drift = float(np.max(np.abs(self.pc.constraint_value(u3))))
        stats = StepStats(dt, max(sol1.max_speed, sol2.max_speed), residual, drift, iters, updated)
        return new, stats

    def _check_profile(self, u: Field, state: FreezingState) -> None:
        vmax = float(np.max(np.abs(u.values)))
        if not np.isfinite(vmax) or vmax > self.blowup:
            raise BlowUpError(f"profile blew up at tau={state.tau:.6g} (max |v| = {vmax:.3e})", state)


def _relative_residual(sol: PhaseSolution) -> float:
    if sol.residual.size == 0:
        return 0.0
    return float(np.max(np.abs(sol.residual)) / max(sol.F.norm(), 1e-300))


def imex_step(integrator: FreezingIntegrator, state: FreezingState, dt: float):
    """One freezing step; returns ``(new_state, stats)``."""
    return integrator.step(state, dt)


def direct_step(eq: CoMovingRHS, u: Field, dt: float) -> Field:
    """One IMEX step of the original equation (``mu = 0``)."""
    integ = FreezingIntegrator(eq, None, dt_max=math.inf)
    state = FreezingState(0.0, u, LieAlgebraElement.zero(u.grid.d), GroupElement.identity(u.grid.d), 0.0)
    return integ.step(state, dt)[0].v


def make_phase_condition(config: SolverConfig, u0: Field) -> PhaseCondition:
    gens = GeneratorSet(config.d, config.p)
    if config.phase == "orthogonal":
        return PhaseCondition.orthogonal(gens)
    return PhaseCondition.fixed(gens, u0, config.eta)


def make_equation(config: SolverConfig, grid: Grid | None = None) -> CoMovingRHS:
    return CoMovingRHS(grid or config.grid(), config.p, config.effective_nu, config.theta)


@dataclass
class Trajectory:
    """Result of :func:`run`: field snapshots plus a per-step scalar series."""

    config: SolverConfig
    snapshots: list = field(default_factory=list)
    series: list = field(default_factory=list)
    stats: list = field(default_factory=list)
    n_reference_updates: int = 0

    @property
    def final(self) -> FreezingState:
        return self.snapshots[-1]

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.series])


def series_row(state: FreezingState, sol: PhaseSolution) -> dict:
    """Scalar diagnostics of one state (CSV row)."""
    row = {"tau": state.tau, "t": state.rho}
    d = state.v.grid.d
    row["mu1"] = state.mu.mu1
    for i, c in enumerate(state.mu.mu2):
        row[f"mu2_{i + 1}"] = float(c)
    for i, c in enumerate(state.mu.mu3):
        row[f"mu3_{i + 1}"] = float(c)
    row["alpha"] = state.g.alpha
    if d == 3:
        row["phi"] = state.g.phi
    for i, c in enumerate(state.g.b):
        row[f"b_{i + 1}"] = float(c)
    row["mass"] = mass(state.v)
    row["residual"] = sol.rhs.norm()
    return row


def run(config: SolverConfig, u0: Field | None = None, *, callback=None,
        integrator: FreezingIntegrator | None = None) -> Trajectory:
    """Integrate the freezing system from ``u0`` to ``config.tau_end``.

    Snapshots are taken at multiples of ``config.snapshot_every`` (and at the
    end); the scalar series gets one row per accepted step.
    """
    if u0 is None:
        u0 = config.initial_field()
    if u0.grid != config.grid():
        raise ValueError("initial data is not on the configured grid")
    if integrator is None:
        integrator = FreezingIntegrator(make_equation(config, u0.grid), make_phase_condition(config, u0),
                                        config.cfl, config.dt_max)
    traj = Trajectory(config)
    state = integrator.initial_state(u0)
    traj.snapshots.append(state)
    traj.series.append(series_row(state, integrator.phase_solve(state.v)))
    if callback is not None:
        callback(state)
    tau_end = float(config.tau_end)
    every = float(config.snapshot_every)
    next_snap = every
    eps = 1e-12 * max(1.0, tau_end)
    while state.tau < tau_end - eps:
        dt = integrator.stable_dt(state)
        target = min(next_snap, tau_end)
        if state.tau + dt >= target - eps:
            dt = target - state.tau
        state, stats = integrator.step(state, dt)
        traj.stats.append(stats)
        traj.series.append(series_row(state, integrator.phase_solve(state.v)))
        if stats.reference_updated:
            traj.n_reference_updates += 1
        if abs(state.tau - target) <= eps:
            state = FreezingState(target, state.v, state.mu, state.g, state.rho)
            traj.snapshots.append(state)
            if callback is not None:
                callback(state)
            if target >= next_snap - eps:
                next_snap += every
    if len(traj.snapshots) == 1 or traj.snapshots[-1] is not state:
        if traj.snapshots[-1].tau != state.tau:
            traj.snapshots.append(state)
    return traj


def run_until_time(integrator: FreezingIntegrator, state: FreezingState, t_end: float,
                   tau_budget: float = 1e3, rtol: float = 1e-13) -> FreezingState:
    """Advance until the original time ``rho`` equals ``t_end``."""
    k = 2.0 * integrator.p - 2.0
    tol = rtol * max(t_end, 1.0)
    while t_end - state.rho > tol:
        if state.tau > tau_budget:
            raise TimeBudgetError(f"t(tau) reached only {state.rho:.6g} < {t_end} by tau={state.tau:.6g}")
        dt = integrator.stable_dt(state)
        # first guess from rho' = alpha^k at the current state
        dt_hit = (t_end - state.rho) / state.g.alpha ** k
        if dt < dt_hit:
            state, _ = integrator.step(state, dt)
            continue
        # last step: secant iteration on dt so that rho lands on t_end
        lo_dt, lo_rho = 0.0, state.rho
        trial = dt_hit
        for _ in range(20):
            new, _ = integrator.step(state, trial)
            if abs(new.rho - t_end) <= tol:
                break
            slope = (new.rho - lo_rho) / (trial - lo_dt)
            lo_dt, lo_rho = trial, new.rho
            trial = min(trial + (t_end - new.rho) / slope, dt)
        state = new
    return state


def direct_solve(eq: CoMovingRHS, u0: Field, t_end: float, cfl: float = 0.45, dt_max: float = 0.1) -> Field:
    """Integrate the original equation to ``t_end`` with the same IMEX scheme."""
    integ = FreezingIntegrator(eq, None, cfl, dt_max)
    state = integ.initial_state(u0)
    while t_end - state.tau > 1e-13 * max(t_end, 1.0):
        dt = min(integ.stable_dt(state), t_end - state.tau)
        state, _ = integ.step(state, dt)
    return state.v


@dataclass(frozen=True)
class EquivalenceReport:
    t_end: float
    tau_end: float
    relative_error: float
    direct_norm: float


def reconstruct_on(state: FreezingState, target: Grid, p: float) -> Field:
    """``a(g) v`` sampled on ``target`` (see :func:`reconstruction.reconstruct`)."""
    g = state.g
    if target == state.v.grid:
        return apply_action(g, state.v, p)
    scale = g.alpha ** (1.0 - p)
    rot = g.Q_tilde
    return resample(state.v, target, lambda x: scale * (x - g.b) @ rot) * (1.0 / g.alpha)


def verify_equivalence(config: SolverConfig, u0: Field | None, t_end: float) -> EquivalenceReport:
    """Compare freezing + reconstruction with a direct solve at original time ``t_end``."""
    if u0 is None:
        u0 = config.initial_field()
    eq_direct = make_equation(config, u0.grid)
    if t_end == 0:
        return EquivalenceReport(0.0, 0.0, 0.0, u0.norm())
    integ = FreezingIntegrator(make_equation(config, u0.grid), make_phase_condition(config, u0),
                               config.cfl, config.dt_max)
    state = run_until_time(integ, integ.initial_state(u0), t_end, tau_budget=max(config.tau_end, 1e3))
    u_rec = reconstruct_on(state, u0.grid, config.p)
    u_dir = direct_solve(eq_direct, u0, t_end, config.cfl, config.dt_max)
    err = (u_dir - u_rec).norm() / u_dir.norm()
    return EquivalenceReport(t_end, state.tau, float(err), u_dir.norm())
