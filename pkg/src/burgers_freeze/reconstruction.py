"""Back-transformation to original coordinates and similarity-solution diagnostics."""
from __future__ import annotations

import math

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .driver import FreezingState, Trajectory
from .grid import Field, Grid, resample
from .lie_group import LieAlgebraElement
from .spatial import CoMovingRHS


def original_window(state: FreezingState, p: float) -> tuple:
    """Corners ``alpha^(p-1) lo + b`` and ``alpha^(p-1) hi + b`` of the mapped computational box."""
    g = state.g
    grid = state.v.grid
    s = g.alpha ** (p - 1.0)
    lo = s * (g.Q_tilde @ np.asarray(grid.lo)) + g.b
    hi = s * (g.Q_tilde @ np.asarray(grid.hi)) + g.b
    return tuple(np.minimum(lo, hi)), tuple(np.maximum(lo, hi))


def reconstruct(snapshot: FreezingState, target_grid: Grid | None = None, p: float = 2.0) -> tuple:
    """Solution of the original problem at time ``t = snapshot.rho``.

    Returns ``(u, t)`` with ``u(x) = alpha^-1 v(alpha^(1-p) diag(1,Q)^T (x - b))``
    sampled on ``target_grid``.  The default target is the computational grid
    mapped through ``g`` (same cell count).
    """
    g = snapshot.g
    v = snapshot.v
    if target_grid is None:
        lo, hi = original_window(snapshot, p)
        target_grid = Grid(lo, hi, v.grid.n)
    if target_grid.d != v.grid.d:
        raise ValueError("target grid dimension does not match the snapshot")
    scale = g.alpha ** (1.0 - p)
    rot = g.Q_tilde
    u = resample(v, target_grid, lambda x: scale * (x - g.b) @ rot) * (1.0 / g.alpha)
    return u, snapshot.rho


def sigma_closed_form(mu1: float, p: float, t):
    """Scaled time of a similarity solution with constant ``mu = (mu1, 0, 0)``.

    ``sigma(t) = ln((2p-2) mu1 t + 1) / ((2p-2) mu1)``, and ``sigma = t`` in the
    limit ``(2p-2) mu1 -> 0``.
    """
    k = (2.0 * p - 2.0) * mu1
    t = np.asarray(t, dtype=float)
    if abs(k) < 1e-12:
        return t if t.ndim else float(t)
    arg = k * t + 1.0
    if np.any(arg <= 0):
        raise ValueError(f"(2p-2) mu1 t + 1 must be positive (mu1={mu1}, p={p})")
    out = np.log1p(k * t) / k
    return out if out.ndim else float(out)


def tau_to_time_closed_form(mu1: float, p: float, tau):
    """Inverse of :func:`sigma_closed_form`: ``t = (exp((2p-2) mu1 tau) - 1) / ((2p-2) mu1)``."""
    k = (2.0 * p - 2.0) * mu1
    tau = np.asarray(tau, dtype=float)
    out = tau if abs(k) < 1e-12 else np.expm1(k * tau) / k
    return out if out.ndim else float(out)


def similarity_residual(v: Field, mu: LieAlgebraElement, eq: CoMovingRHS) -> float:
    """L2 norm of the discrete co-moving right-hand side ``F(v) - T_1 a v[mu]``."""
    return eq.comoving_rhs(v, mu).norm()


def mass_law_prediction(tau: np.ndarray, mu1: np.ndarray, mass0: float, d: int, p: float) -> np.ndarray:
    """``mass0 * exp((1 + d - d p) int_0^tau mu1)`` with the trapezoidal integral."""
    integral = cumulative_trapezoid(mu1, tau, initial=0.0)
    return mass0 * np.exp((1.0 + d - d * p) * integral)


def mass_law_check(trajectory: Trajectory) -> float:
    """Largest relative deviation of the recorded mass from the mass law."""
    tau = trajectory.column("tau")
    mu1 = trajectory.column("mu1")
    mass_rec = trajectory.column("mass")
    cfg = trajectory.config
    pred = mass_law_prediction(tau, mu1, mass_rec[0], cfg.d, cfg.p)
    scale = np.maximum(np.abs(pred), math.ulp(1.0))
    return float(np.max(np.abs(mass_rec - pred) / scale))
