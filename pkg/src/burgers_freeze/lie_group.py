"""Scaling/rotation/translation group ``G = (R+ x SO(d-1)) x| R^d`` for d = 1, 2, 3.

Elements are stored in the chart ``(alpha, phi, b)``.  For ``d = 3`` the
``SO(2)`` factor is the rotation by ``phi`` in the ``(x2, x3)`` plane; for
``d <= 2`` the rotation factor is trivial and ``phi`` is always 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_SERIES_SWITCH = 1e-8


def rotation_dim(d: int) -> int:
    """Dimension of so(d-1) (0 for d <= 2, 1 for d = 3)."""
    _check_dim(d)
    return 1 if d == 3 else 0


def algebra_dim(d: int) -> int:
    _check_dim(d)
    return 1 + rotation_dim(d) + d


def _check_dim(d: int) -> None:
    if d not in (1, 2, 3):
        raise ValueError(f"group dimension must be 1, 2 or 3, got {d}")


def _rot2(phi: float) -> np.ndarray:
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class GroupElement:
    """Group element ``g = (alpha, Q, b)``."""

    d: int
    alpha: float = 1.0
    phi: float = 0.0
    b: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        _check_dim(self.d)
        b = np.zeros(self.d) if self.b is None else np.array(self.b, dtype=float).reshape(-1)
        if b.shape != (self.d,):
            raise ValueError(f"translation must have length {self.d}, got {b.shape}")
        if not self.alpha > 0 or not np.isfinite(self.alpha):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha}")
        if self.d < 3 and self.phi != 0.0:
            raise ValueError("rotation angle must be 0 for d <= 2")
        b.setflags(write=False)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "phi", float(self.phi))

    @classmethod
    def identity(cls, d: int) -> GroupElement:
        return cls(d)

    @property
    def Q(self) -> np.ndarray:
        """Rotation block as a ``(d-1) x (d-1)`` matrix."""
        if self.d == 3:
            return _rot2(self.phi)
        return np.eye(self.d - 1)

    @property
    def Q_tilde(self) -> np.ndarray:
        """Augmented rotation ``diag(1, Q)``."""
        out = np.eye(self.d)
        if self.d == 3:
            out[1:, 1:] = _rot2(self.phi)
        return out

    def is_identity(self) -> bool:
        return self.alpha == 1.0 and self.phi == 0.0 and not np.any(self.b)

    def chart(self) -> np.ndarray:
        """Chart coordinates ``(alpha, [phi], b...)``."""
        return np.concatenate([[self.alpha], [self.phi] * rotation_dim(self.d), self.b])

    @classmethod
    def from_chart(cls, d: int, coords) -> GroupElement:
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (algebra_dim(d),):
            raise ValueError(f"expected {algebra_dim(d)} chart coordinates, got {coords.shape}")
        k = rotation_dim(d)
        phi = coords[1] if k else 0.0
        return cls(d, coords[0], phi, coords[1 + k:])

    def __matmul__(self, other: GroupElement) -> GroupElement:
        return compose(self, other)


@dataclass(frozen=True)
class LieAlgebraElement:
    """Lie algebra element ``mu = (mu1, mu2, mu3)`` in the basis (scaling, rotations, translations)."""

    d: int
    mu1: float = 0.0
    mu2: np.ndarray = field(default=None)  # type: ignore[assignment]
    mu3: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        _check_dim(self.d)
        k = rotation_dim(self.d)
        mu2 = np.zeros(k) if self.mu2 is None else np.array(self.mu2, dtype=float).reshape(-1)
        mu3 = np.zeros(self.d) if self.mu3 is None else np.array(self.mu3, dtype=float).reshape(-1)
        if mu2.shape != (k,):
            raise ValueError(f"mu2 must have length {k} for d={self.d}")
        if mu3.shape != (self.d,):
            raise ValueError(f"mu3 must have length {self.d}")
        mu2.setflags(write=False)
        mu3.setflags(write=False)
        object.__setattr__(self, "mu1", float(self.mu1))
        object.__setattr__(self, "mu2", mu2)
        object.__setattr__(self, "mu3", mu3)

    @classmethod
    def zero(cls, d: int) -> LieAlgebraElement:
        return cls(d)

    @classmethod
    def from_coords(cls, d: int, coords) -> LieAlgebraElement:
        coords = np.asarray(coords, dtype=float).reshape(-1)
        if coords.shape != (algebra_dim(d),):
            raise ValueError(f"expected {algebra_dim(d)} coordinates for d={d}, got {coords.shape}")
        k = rotation_dim(d)
        return cls(d, coords[0], coords[1:1 + k], coords[1 + k:])

    @classmethod
    def basis(cls, d: int, j: int) -> LieAlgebraElement:
        """Canonical basis element ``eps_j`` (0-based index)."""
        e = np.zeros(algebra_dim(d))
        e[j] = 1.0
        return cls.from_coords(d, e)

    @property
    def coords(self) -> np.ndarray:
        return np.concatenate([[self.mu1], self.mu2, self.mu3])

    @property
    def S(self) -> np.ndarray:
        """Rotation generator as a skew ``(d-1) x (d-1)`` matrix."""
        if self.d == 3:
            return self.mu2[0] * np.array([[0.0, -1.0], [1.0, 0.0]])
        return np.zeros((self.d - 1, self.d - 1))

    def matrix(self) -> np.ndarray:
        """Matrix Lie algebra representative, ``[[a,0,v1],[0,aI+S,v_rest],[0,0,0]]``."""
        d = self.d
        m = np.zeros((d + 1, d + 1))
        m[0, 0] = self.mu1
        m[1:d, 1:d] = self.mu1 * np.eye(d - 1) + self.S
        m[:d, d] = self.mu3
        return m

    def __add__(self, other: LieAlgebraElement) -> LieAlgebraElement:
        _same_dim(self, other)
        return LieAlgebraElement.from_coords(self.d, self.coords + other.coords)

    def __mul__(self, s: float) -> LieAlgebraElement:
        return LieAlgebraElement.from_coords(self.d, s * self.coords)

    __rmul__ = __mul__


def _same_dim(a, b) -> None:
    if a.d != b.d:
        raise ValueError(f"dimension mismatch: {a.d} vs {b.d}")


def compose(g1: GroupElement, g2: GroupElement) -> GroupElement:
    """Group product ``g1 . g2 = (a1 a2, Q1 Q2, b1 + a1 diag(1,Q1) b2)``."""
    _same_dim(g1, g2)
    b = g1.b + g1.alpha * (g1.Q_tilde @ g2.b)
    return GroupElement(g1.d, g1.alpha * g2.alpha, g1.phi + g2.phi, b)


def inverse(g: GroupElement) -> GroupElement:
    b = -(g.Q_tilde.T @ g.b) / g.alpha
    return GroupElement(g.d, 1.0 / g.alpha, -g.phi, b)


def _phi1(z, t: float):
    """``(exp(t z) - 1) / z`` with the small-argument series, valid for real or complex z."""
    tz = t * z
    if abs(tz) < _SERIES_SWITCH:
        return t * (1.0 + tz / 2.0 + tz * tz / 6.0)
    if isinstance(tz, complex):
        x, y = tz.real, tz.imag
        # exp(x + iy) - 1 without cancellation
        num = complex(np.expm1(x) * np.cos(y) - 2.0 * np.sin(0.5 * y) ** 2, np.exp(x) * np.sin(y))
        return num / z
    return np.expm1(tz) / z


def exp_group(mu: LieAlgebraElement, t: float = 1.0) -> GroupElement:
    """One-parameter subgroup ``exp(t mu)``.

    The translation part is ``sum_k t^(k+1)/(k+1)! M^k mu3`` with
    ``M = diag(mu1, mu1 I + S)``, summed in closed form.  For ``d = 3`` the
    lower block acts on ``(x2, x3)`` like multiplication by the complex number
    ``mu1 + i mu2``.
    """
    d = mu.d
    alpha = float(np.exp(t * mu.mu1))
    b = np.empty(d)
    b[0] = _phi1(mu.mu1, t) * mu.mu3[0]
    phi = 0.0
    if d == 2:
        b[1] = _phi1(mu.mu1, t) * mu.mu3[1]
    elif d == 3:
        phi = t * mu.mu2[0]
        w = complex(mu.mu3[1], mu.mu3[2]) * _phi1(complex(mu.mu1, mu.mu2[0]), t)
        b[1], b[2] = w.real, w.imag
    return GroupElement(d, alpha, phi, b)


def tangent_left_translate(g: GroupElement, mu: LieAlgebraElement) -> np.ndarray:
    """Right-hand side of ``g' = T_1 L_g mu`` in the chart ``(alpha, [phi], b)``.

    The rotation chart component is ``mu2`` itself, independent of ``g``,
    since ``Q' = mu2 Q J`` reduces to ``phi' = mu2``.
    """
    _same_dim(g, mu)
    db = g.alpha * (g.Q_tilde @ mu.mu3)
    return np.concatenate([[g.alpha * mu.mu1], mu.mu2, db])


def matrix_rep(g: GroupElement) -> np.ndarray:
    """Matrix representation ``[[a,0,b1],[0,aQ,b_rest],[0,0,1]]``."""
    d = g.d
    m = np.eye(d + 1)
    m[0, 0] = g.alpha
    m[1:d, 1:d] = g.alpha * g.Q
    m[:d, d] = g.b
    return m


def from_matrix(m: np.ndarray) -> GroupElement:
    """Inverse of :func:`matrix_rep` for matrices of the group's block form."""
    m = np.asarray(m, dtype=float)
    d = m.shape[0] - 1
    alpha = m[0, 0]
    phi = float(np.arctan2(m[2, 1], m[1, 1])) if d == 3 else 0.0
    return GroupElement(d, alpha, phi, m[:d, d])


def group_distance(g: GroupElement, h: GroupElement) -> float:
    """Max-entry distance of the matrix representations."""
    return float(np.max(np.abs(matrix_rep(g) - matrix_rep(h))))
