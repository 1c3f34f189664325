"""Semi-discrete right-hand sides of the co-moving and the original equation.

The co-moving profile equation is written as

    v_t = nu Lap v + sum_k d/dx_k f_k(v, x) + mu1 (1 + d - d p) v

with fluxes

    f_1 = -(1/p)|v|^p + mu1 (p-1) x_1 v + mu3_1 v,
    f_k =               mu1 (p-1) x_k v + mu3_k v      (k >= 2).

Transport is discretised with the second-order central scheme of Kurganov and
Tadmor (minmod-theta reconstruction, local speeds from ``|df/dv|``),
diffusion with the standard centred Laplacian.  All boundaries are no-flux.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded
from scipy.sparse.linalg import cg

from .action import flux_divergence
from .grid import Field, Grid
from .lie_group import LieAlgebraElement


class NonFiniteError(FloatingPointError):
    """Raised when an operator receives NaN or Inf input."""


class ImplicitSolveError(RuntimeError):
    """Raised when the implicit diffusion solve does not converge."""


def minmod3(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    s = np.sign(a)
    same = (s == np.sign(b)) & (s == np.sign(c))
    return np.where(same, s * np.minimum(np.minimum(np.abs(a), np.abs(b)), np.abs(c)), 0.0)


def limited_slopes(q: np.ndarray, axis: int, theta: float) -> np.ndarray:
    """Minmod-theta slopes (per cell, undivided) with reflecting ghost cells."""
    pad = [(0, 0)] * q.ndim
    pad[axis] = (1, 1)
    qe = np.pad(q, pad, mode="edge")
    n = q.shape[axis]
    left = np.take(qe, range(0, n), axis=axis)
    mid = q
    right = np.take(qe, range(2, n + 2), axis=axis)
    return minmod3(theta * (mid - left), 0.5 * (right - left), theta * (right - mid))


@dataclass
class CoMovingRHS:
    """Discrete operators of the co-moving equation for fixed ``(d, p, nu)``.

    ``max_speed`` caches the largest local speed seen by the last call of
    :meth:`explicit_rhs` and feeds the CFL step size.
    """

    grid: Grid
    p: float
    nu: float
    theta: float = 1.5
    cg_rtol: float = 1e-10
    max_speed: float = field(default=0.0, init=False)
    last_cg_iterations: int = field(default=0, init=False)
    _solvers: dict = field(default_factory=dict, init=False, repr=False)
    _laplacian: object = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if not 1.0 <= self.theta <= 2.0:
            raise ValueError(f"theta must lie in [1, 2], got {self.theta}")
        if self.grid.d not in (1, 2):
            raise ValueError("time simulation is implemented for d = 1 and d = 2 only")

    @property
    def d(self) -> int:
        return self.grid.d

    def _flux(self, q, axis, xf, mu1, mu3k):
        f = (mu1 * (self.p - 1.0) * xf + mu3k) * q
        if axis == 0:
            f = f - np.abs(q) ** self.p / self.p
        return f

    def _speed(self, q, axis, xf, mu1, mu3k):
        s = mu1 * (self.p - 1.0) * xf + mu3k
        if axis == 0:
            s = s - np.abs(q) ** (self.p - 1.0) * np.sign(q)
        return np.abs(s)

    def explicit_rhs(self, v: Field, mu: LieAlgebraElement | None = None) -> Field:
        """Transport and source part of the co-moving right-hand side."""
        vals = v.values
        if not np.all(np.isfinite(vals)):
            raise NonFiniteError("explicit_rhs received non-finite values")
        if mu is None:
            mu1, mu3 = 0.0, np.zeros(self.d)
        else:
            mu1, mu3 = mu.mu1, mu.mu3
        g = self.grid
        out = mu1 * (1.0 + self.d - self.d * self.p) * vals
        amax = 0.0
        for ax in range(self.d):
            n = g.n[ax]
            slope = limited_slopes(vals, ax, self.theta)
            # states left (-) and right (+) of interior face i+1/2
            qm = np.take(vals + 0.5 * slope, range(0, n - 1), axis=ax)
            qp = np.take(vals - 0.5 * slope, range(1, n), axis=ax)
            xf = g.face_coordinate(ax)
            a = np.maximum(self._speed(qm, ax, xf, mu1, mu3[ax]), self._speed(qp, ax, xf, mu1, mu3[ax]))
            if a.size:
                amax = max(amax, float(a.max()))
            # numerical flux for v_t = d/dx f: central average plus dissipation
            num = 0.5 * (self._flux(qm, ax, xf, mu1, mu3[ax]) + self._flux(qp, ax, xf, mu1, mu3[ax])) \
                + 0.5 * a * (qp - qm)
            out = out + flux_divergence(num, ax, g.dx[ax])
        self.max_speed = amax
        return Field(g, out)

    def diffusion_apply(self, v: Field) -> Field:
        """``nu`` times the centred Laplacian with homogeneous Neumann ghosts."""
        g = self.grid
        vals = v.values
        out = np.zeros_like(vals)
        for ax in range(self.d):
            grad = np.diff(vals, axis=ax) / g.dx[ax]
            out = out + flux_divergence(grad, ax, g.dx[ax])
        return Field(g, self.nu * out)

    def laplacian_matrix(self) -> sp.csr_matrix:
        """Sparse Neumann Laplacian (cell ordering as ``values.ravel()``)."""
        if self._laplacian is None:
            mats = []
            for ax in range(self.d):
                n = self.grid.n[ax]
                main = -2.0 * np.ones(n)
                main[0] = main[-1] = -1.0
                mats.append(sp.diags([np.ones(n - 1), main, np.ones(n - 1)], [-1, 0, 1]) / self.grid.dx[ax] ** 2)
            if self.d == 1:
                lap = mats[0]
            else:
                lap = sp.kron(mats[0], sp.identity(self.grid.n[1])) + sp.kron(sp.identity(self.grid.n[0]), mats[1])
            self._laplacian = sp.csr_matrix(lap)
        return self._laplacian

    def diffusion_solve(self, rhs: Field, gamma: float) -> Field:
        """Solve ``(I - gamma nu Lap) w = rhs``.

        1d uses a banded (tridiagonal) LU solve, 2d conjugate gradients
        started from ``rhs``.
        """
        if gamma < 0:
            raise ValueError("gamma must be non-negative")
        if gamma == 0:
            return rhs
        g = self.grid
        c = gamma * self.nu
        if self.d == 1:
            h2 = g.dx[0] ** 2
            n = g.n[0]
            ab = np.empty((3, n))
            ab[0, :] = -c / h2
            ab[2, :] = -c / h2
            ab[1, :] = 1.0 + 2.0 * c / h2
            ab[1, 0] = ab[1, -1] = 1.0 + c / h2
            w = solve_banded((1, 1), ab, rhs.values, check_finite=False)
            return Field(g, w)
        A = self._solvers.get(c)
        if A is None:
            if len(self._solvers) > 8:
                self._solvers.clear()
            A = sp.csr_matrix(sp.identity(rhs.values.size) - c * self.laplacian_matrix())
            self._solvers[c] = A
        b = rhs.values.ravel()
        iters = 0

        def count(_):
            nonlocal iters
            iters += 1

        maxiter = 10 * max(g.n)
        w, info = cg(A, b, x0=b.copy(), rtol=self.cg_rtol, atol=0.0, maxiter=maxiter, callback=count)
        self.last_cg_iterations = iters
        if info != 0:
            res = np.linalg.norm(b - A @ w) / max(np.linalg.norm(b), 1e-300)
            raise ImplicitSolveError(f"CG did not converge: {iters} iterations, relative residual {res:.3e}")
        return Field(g, w.reshape(g.shape))

    def original_rhs(self, u: Field) -> Field:
        """Right-hand side of the unfrozen equation (``mu = 0``)."""
        return self.explicit_rhs(u) + self.diffusion_apply(u)

    def comoving_rhs(self, v: Field, mu: LieAlgebraElement) -> Field:
        """Full co-moving right-hand side ``F(v) - T_1 a v[mu]`` as discretised."""
        return self.explicit_rhs(v, mu) + self.diffusion_apply(v)
