"""Action of the symmetry group on grid functions and its discrete generators."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field, resample
from .lie_group import GroupElement, LieAlgebraElement, algebra_dim, exp_group, rotation_dim


def apply_action(g: GroupElement, v: Field, p: float) -> Field:
    """Return ``a(g) v : x -> alpha^-1 v(alpha^(1-p) diag(1,Q)^T (x - b))`` on v's grid."""
    if g.d != v.grid.d:
        raise ValueError(f"group dimension {g.d} does not match field dimension {v.grid.d}")
    if g.is_identity():
        return v
    scale = g.alpha ** (1.0 - p)
    rot = g.Q_tilde

    def pullback(x):
        return scale * (x - g.b) @ rot

    return resample(v, v.grid, pullback) * (1.0 / g.alpha)


def action_compose(g1: GroupElement, g2: GroupElement, p: float) -> GroupElement:
    """Product under which ``a`` is a left action: ``a(g1 * g2) = a(g1) a(g2)``.

    The translations combine as ``b1 + alpha1^(p-1) diag(1,Q1) b2``; for
    ``p = 2`` this is :func:`lie_group.compose`.  In the variable
    ``beta = alpha^(p-1)`` it is the ordinary product of the group.
    """
    if g1.d != g2.d:
        raise ValueError(f"dimension mismatch: {g1.d} vs {g2.d}")
    b = g1.b + g1.alpha ** (p - 1.0) * (g1.Q_tilde @ g2.b)
    return GroupElement(g1.d, g1.alpha * g2.alpha, g1.phi + g2.phi, b)


def action_inverse(g: GroupElement, p: float) -> GroupElement:
    """Inverse for :func:`action_compose`: ``(1/alpha, Q^T, -alpha^(1-p) diag(1,Q^T) b)``."""
    b = -(g.alpha ** (1.0 - p)) * (g.Q_tilde.T @ g.b)
    return GroupElement(g.d, 1.0 / g.alpha, -g.phi, b)


def action_exp(mu: LieAlgebraElement, t: float, p: float) -> GroupElement:
    """Solution at time ``t`` of ``g' = action_tangent(g, mu, p)``, ``g(0) = 1``."""
    scaled = LieAlgebraElement(mu.d, (p - 1.0) * mu.mu1, mu.mu2, mu.mu3)
    h = exp_group(scaled, t)
    return GroupElement(mu.d, float(np.exp(t * mu.mu1)), h.phi, h.b)


def action_tangent(g: GroupElement, mu: LieAlgebraElement, p: float) -> np.ndarray:
    """Chart velocity ``(alpha mu1, [mu2], alpha^(p-1) diag(1,Q) mu3)`` of the reconstruction ODE."""
    db = g.alpha ** (p - 1.0) * (g.Q_tilde @ mu.mu3)
    return np.concatenate([[g.alpha * mu.mu1], mu.mu2, db])


def m_homomorphism(g: GroupElement, p: float) -> float:
    """Time-scaling homomorphism ``m(g) = alpha^(2 - 2p)``."""
    return g.alpha ** (2.0 - 2.0 * p)


def face_average(q: np.ndarray, axis: int) -> np.ndarray:
    """Arithmetic mean of neighbouring cells at interior faces along ``axis``."""
    n = q.shape[axis]
    lo = np.take(q, range(0, n - 1), axis=axis)
    hi = np.take(q, range(1, n), axis=axis)
    return 0.5 * (lo + hi)


def flux_divergence(flux: np.ndarray, axis: int, dx: float) -> np.ndarray:
    """Difference of interior face fluxes; boundary face fluxes are zero (no-flux)."""
    pad = [(0, 0)] * flux.ndim
    pad[axis] = (1, 1)
    full = np.pad(flux, pad)
    return np.diff(full, axis=axis) / dx


def generator_apply(j: int, v: Field, p: float) -> Field:
    """Discrete generator ``T_1 a v[eps_j]`` (0-based basis index).

    Basis order is (scaling, rotation for d = 3, translations).  Everything is
    written in flux form with centred face values and zero boundary flux, so
    translation and rotation generators have exactly zero discrete mass and
    the scaling generator has mass ``(d p - d - 1) * mass(v)``.
    """
    g = v.grid
    d = g.d
    ndim = algebra_dim(d)
    if not 0 <= j < ndim:
        raise IndexError(f"generator index {j} out of range for d={d} (dim {ndim})")
    vals = v.values
    k_rot = rotation_dim(d)
    if j == 0:
        # -v + (1-p) x.grad v = (d(p-1) - 1) v + (1-p) div(x v)
        out = (d * (p - 1.0) - 1.0) * vals
        for ax in range(d):
            flux = g.face_coordinate(ax) * face_average(vals, ax)
            out = out + (1.0 - p) * flux_divergence(flux, ax, g.dx[ax])
        return Field(g, out)
    if j <= k_rot:
        # z v_y - y v_z = (z v)_y - (y v)_z
        fy = g.axis_coordinate(2) * face_average(vals, 1)
        fz = g.axis_coordinate(1) * face_average(vals, 2)
        return Field(g, flux_divergence(fy, 1, g.dx[1]) - flux_divergence(fz, 2, g.dx[2]))
    ax = j - 1 - k_rot
    return Field(g, -flux_divergence(face_average(vals, ax), ax, g.dx[ax]))


@dataclass(frozen=True)
class GeneratorSet:
    """All ``dim(g)`` generators for dimension ``d`` and exponent ``p``."""

    d: int
    p: float

    @property
    def dim(self) -> int:
        return algebra_dim(self.d)

    def apply(self, v: Field) -> list:
        return [generator_apply(j, v, self.p) for j in range(self.dim)]

    def combine(self, fields: list, mu: LieAlgebraElement) -> Field:
        """``T_1 a v[mu] = sum_j mu_j T_1 a v[eps_j]`` from precomputed generator fields."""
        out = np.zeros(fields[0].grid.shape)
        for c, w in zip(mu.coords, fields):
            out = out + c * w.values
        return Field(fields[0].grid, out)


@dataclass(frozen=True)
class CanonicalReduction:
    """Householder reduction of a general flux direction ``a`` onto ``e1``."""

    a_vec: np.ndarray
    Q_a: np.ndarray
    nu_eff: float

    @property
    def a_norm(self) -> float:
        return float(np.linalg.norm(self.a_vec))

    def to_reduced(self, x: np.ndarray) -> np.ndarray:
        """Reduced coordinate ``y = Q_a x`` (points along the last axis)."""
        return np.asarray(x) @ self.Q_a.T

    def reduced_time(self, t: float) -> float:
        return t * self.a_norm


def canonical_reduce(a_vec, nu: float) -> CanonicalReduction:
    """Map ``u_t + (1/p) div(a |u|^p) = nu Lap u`` onto the form with ``a = e1``.

    With ``q = a - |a| e1`` and ``Q_a = I - 2 q q^T / q^T q`` solutions are
    related by ``u(x, t) = v(Q_a x, |a| t)`` and the reduced viscosity is
    ``nu / |a|``.
    """
    a = np.asarray(a_vec, dtype=float).reshape(-1)
    norm = float(np.linalg.norm(a))
    if norm == 0.0:
        raise ValueError("flux direction a must be nonzero")
    if not nu > 0:
        raise ValueError(f"viscosity must be positive, got {nu}")
    e1 = np.zeros_like(a)
    e1[0] = 1.0
    q = a - norm * e1
    if a[0] > 0:
        # a_0 - |a| without cancellation when a is close to e1
        q[0] = -float(a[1:] @ a[1:]) / (a[0] + norm)
    if np.linalg.norm(q) < 1e-14 * norm:
        Q = np.eye(len(a))
    else:
        Q = np.eye(len(a)) - 2.0 * np.outer(q, q) / (q @ q)
    return CanonicalReduction(a, Q, nu / norm)
