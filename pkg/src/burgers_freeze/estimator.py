"""Scikit-learn style front end to the freezing solver."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_field, check_points, check_scalar_range
from .action import action_inverse, apply_action
from .config import SolverConfig
from .driver import make_equation, run
from .grid import interpolate_points
from .reconstruction import similarity_residual


class FreezingBurgers(BaseEstimator):
    """Freezing-method solver for ``u_t + (1/p) d/dx1 |u|^p = nu Lap u``.

    ``fit`` integrates the freezing system from the initial data ``X`` (cell
    values on the configured grid) up to scaled time ``tau_end``.  Afterwards
    the profile, algebraic variables, group element and original time are
    available as fitted attributes.

    Parameters
    ----------
    d : int
        Space dimension (1 or 2).
    p : float
        Flux exponent, ``p > 1``.
    nu : float
        Viscosity.
    lo, hi : sequence of float, optional
        Corners of the computational box.
    n : sequence of int, optional
        Cells per axis.
    phase : {"fixed", "orthogonal"}
    eta : float
        Relative distance at which the fixed-phase template is renewed.
    cfl, dt_max, theta : float
        Time step and limiter controls.
    tau_end, snapshot_every : float
        Final scaled time and snapshot spacing.

    Attributes
    ----------
    profile_ : ndarray
        Final co-moving profile ``v(tau_end)``.
    mu_ : ndarray
        Final algebraic variables (scaling, [rotation], translations).
    group_ : GroupElement
        Accumulated group element ``g(tau_end)``.
    time_ : float
        Original time ``t = rho(tau_end)``.
    residual_ : float
        Similarity residual of the final state.
    trajectory_ : Trajectory
        Snapshots and per-step series.
    grid_ : Grid
    """

    def __init__(self, d=1, p=2.0, nu=0.4, lo=None, hi=None, n=None, phase="fixed", eta=0.15, cfl=0.45,
                 dt_max=0.1, theta=1.5, tau_end=5.0, snapshot_every=0.5):
        self.d = d
        self.p = p
        self.nu = nu
        self.lo = lo
        self.hi = hi
        self.n = n
        self.phase = phase
        self.eta = eta
        self.cfl = cfl
        self.dt_max = dt_max
        self.theta = theta
        self.tau_end = tau_end
        self.snapshot_every = snapshot_every

    def _config(self) -> SolverConfig:
        check_scalar_range(self.p, "p", lower=1.0)
        check_scalar_range(self.nu, "nu", lower=0.0)
        return SolverConfig(d=self.d, p=float(self.p), nu=float(self.nu), lo=self.lo, hi=self.hi, n=self.n,
                            cfl=self.cfl, dt_max=self.dt_max, theta=self.theta, phase=self.phase,
                            eta=self.eta, tau_end=self.tau_end, snapshot_every=self.snapshot_every)

    def fit(self, X, y=None):
        """Run the freezing method from initial data ``X``; ``y`` is ignored."""
        cfg = self._config()
        grid = cfg.grid()
        u0 = check_field(X, grid)
        if not np.any(u0.values):
            raise ValueError("initial data is identically zero; the phase condition is singular")
        traj = run(cfg, u0)
        final = traj.final
        self.config_ = cfg
        self.grid_ = grid
        self.trajectory_ = traj
        self.profile_ = final.v.values.copy()
        self.mu_ = final.mu.coords.copy()
        self.group_ = final.g
        self.time_ = final.rho
        self.tau_ = final.tau
        self.residual_ = similarity_residual(final.v, final.mu, make_equation(cfg, grid))
        self.n_reference_updates_ = traj.n_reference_updates
        return self

    def transform(self, X):
        """Map a field in original coordinates to the co-moving frame, ``a(g)^-1 X``."""
        check_is_fitted(self, "group_")
        u = check_field(X, self.grid_)
        return apply_action(action_inverse(self.group_, self.p), u, self.p).values

    def inverse_transform(self, X):
        """Map a co-moving field to original coordinates, ``a(g) X``, on the same grid."""
        check_is_fitted(self, "group_")
        v = check_field(X, self.grid_)
        return apply_action(self.group_, v, self.p).values

    def predict(self, X):
        """Reconstructed solution ``u(x, time_)`` at points ``X`` of shape ``(N, d)``."""
        check_is_fitted(self, "group_")
        pts = check_points(X, self.grid_.d)
        g = self.group_
        xi = g.alpha ** (1.0 - self.p) * (pts - g.b) @ g.Q_tilde
        v = self.trajectory_.final.v
        return interpolate_points(v, xi) / g.alpha

    def score(self, X=None, y=None):
        """Negative similarity residual of the fitted end state (larger is closer to steady)."""
        check_is_fitted(self, "residual_")
        return -float(self.residual_)
