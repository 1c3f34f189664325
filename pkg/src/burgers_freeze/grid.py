"""Cell-centred rectangular grids, discrete fields and L2 functionals."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centred grid on the box ``[lo, hi]``.

    Cell ``i`` along axis ``k`` has centre ``lo[k] + (i + 1/2) * dx[k]``.
    Only no-flux boundaries are supported.
    """

    lo: tuple
    hi: tuple
    n: tuple
    bc: str = "noflux"

    def __post_init__(self):
        lo = tuple(float(x) for x in np.atleast_1d(self.lo))
        hi = tuple(float(x) for x in np.atleast_1d(self.hi))
        n = tuple(int(k) for k in np.atleast_1d(self.n))
        if not (len(lo) == len(hi) == len(n)):
            raise ValueError("lo, hi and n must have the same length")
        if not 1 <= len(n) <= 3:
            raise ValueError(f"grid dimension must be 1, 2 or 3, got {len(n)}")
        for a, b in zip(lo, hi):
            if not b > a:
                raise ValueError(f"need hi > lo on every axis, got [{a}, {b}]")
        if min(n) < 4:
            raise ValueError(f"need at least 4 cells per axis, got {n}")
        if self.bc != "noflux":
            raise ValueError(f"unsupported boundary condition {self.bc!r}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "n", n)

    @classmethod
    def uniform(cls, lo: Sequence[float] | float, hi: Sequence[float] | float, dx: float) -> Grid:
        """Grid with (approximately) spacing ``dx`` on every axis."""
        lo_a, hi_a = np.atleast_1d(lo).astype(float), np.atleast_1d(hi).astype(float)
        n = np.rint((hi_a - lo_a) / dx).astype(int)
        return cls(tuple(lo_a), tuple(hi_a), tuple(n))

    @property
    def d(self) -> int:
        return len(self.n)

    @property
    def shape(self) -> tuple:
        return self.n

    @property
    def dx(self) -> tuple:
        return tuple((b - a) / k for a, b, k in zip(self.lo, self.hi, self.n))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.dx))

    def centers(self, axis: int = 0) -> np.ndarray:
        return self.lo[axis] + (np.arange(self.n[axis]) + 0.5) * self.dx[axis]

    def faces(self, axis: int = 0) -> np.ndarray:
        return self.lo[axis] + np.arange(self.n[axis] + 1) * self.dx[axis]

    def mesh(self) -> tuple:
        """Cell-centre coordinate arrays, ``indexing='ij'``."""
        return tuple(np.meshgrid(*(self.centers(k) for k in range(self.d)), indexing="ij"))

    def axis_coordinate(self, axis: int) -> np.ndarray:
        """Cell centres along ``axis`` shaped to broadcast against a field."""
        shape = [1] * self.d
        shape[axis] = self.n[axis]
        return self.centers(axis).reshape(shape)

    def face_coordinate(self, axis: int) -> np.ndarray:
        """Interior face positions along ``axis`` (n-1 of them), broadcastable."""
        shape = [1] * self.d
        shape[axis] = self.n[axis] - 1
        return self.faces(axis)[1:-1].reshape(shape)


@dataclass(frozen=True, eq=False)
class Field:
    """Grid function: one value per cell."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            if values.size == int(np.prod(self.grid.shape)):
                values = values.reshape(self.grid.shape)
            else:
                raise ValueError(f"field shape {values.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", values)

    def with_values(self, values: np.ndarray) -> Field:
        return Field(self.grid, values)

    def __add__(self, other: Field) -> Field:
        _check_same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: Field) -> Field:
        _check_same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, s: float) -> Field:
        return Field(self.grid, s * self.values)

    __rmul__ = __mul__

    def __neg__(self) -> Field:
        return Field(self.grid, -self.values)

    def norm(self) -> float:
        """Discrete L2 norm."""
        return float(np.sqrt(inner_product(self, self)))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


def _check_same_grid(u: Field, v: Field) -> None:
    if u.grid != v.grid:
        raise ValueError("fields live on different grids")


def zeros(grid: Grid) -> Field:
    return Field(grid, np.zeros(grid.shape))


def inner_product(u: Field, v: Field) -> float:
    """Composite-midpoint L2 inner product ``sum(u v) * prod(dx)``."""
    _check_same_grid(u, v)
    return float(np.sum(u.values * v.values) * u.grid.cell_volume)


def mass(v: Field) -> float:
    return float(np.sum(v.values) * v.grid.cell_volume)


def sample_function(grid: Grid, f: Callable) -> Field:
    """Evaluate ``f(x1, ..., xd)`` at the cell centres (``f`` must broadcast)."""
    vals = f(*grid.mesh())
    return Field(grid, np.broadcast_to(np.asarray(vals, dtype=float), grid.shape).copy())


def _cubic_weights(s: np.ndarray):
    """Lagrange weights for nodes 0..3 at local coordinate ``s``."""
    return (
        -(s - 1) * (s - 2) * (s - 3) / 6.0,
        s * (s - 2) * (s - 3) / 2.0,
        -s * (s - 1) * (s - 3) / 2.0,
        s * (s - 1) * (s - 2) / 6.0,
    )


def interpolate_points(v: Field, points: np.ndarray) -> np.ndarray:
    """Evaluate the piecewise interpolant of ``v`` at ``points`` (shape ``(..., d)``).

    Cubic Lagrange on four neighbouring centres in 1d, multilinear otherwise.
    Near the boundary the stencil is shifted inwards, so polynomials of the
    stencil degree are still reproduced exactly.  Points outside ``[lo, hi]``
    evaluate to 0.
    """
    g = v.grid
    pts = np.asarray(points, dtype=float)
    if g.d == 1 and pts.ndim >= 1 and pts.shape[-1] != 1:
        pts = pts[..., None]
    if pts.shape[-1] != g.d:
        raise ValueError(f"points must have trailing dimension {g.d}")
    lead = pts.shape[:-1]
    pts = pts.reshape(-1, g.d)
    inside = np.ones(len(pts), dtype=bool)
    for k in range(g.d):
        inside &= (pts[:, k] >= g.lo[k]) & (pts[:, k] <= g.hi[k])
    out = np.zeros(len(pts))
    if not inside.any():
        return out.reshape(lead)
    p_in = pts[inside]
    # fractional cell-centre index
    s = np.stack([(p_in[:, k] - g.lo[k]) / g.dx[k] - 0.5 for k in range(g.d)], axis=1)
    vals = v.values
    if g.d == 1:
        i0 = np.clip(np.floor(s[:, 0]).astype(int) - 1, 0, g.n[0] - 4)
        w = _cubic_weights(s[:, 0] - i0)
        out[inside] = sum(wk * vals[i0 + k] for k, wk in enumerate(w))
    else:
        i0 = [np.clip(np.floor(s[:, k]).astype(int), 0, g.n[k] - 2) for k in range(g.d)]
        t = [s[:, k] - i0[k] for k in range(g.d)]
        acc = np.zeros(len(p_in))
        for corner in np.ndindex(*(2,) * g.d):
            weight = np.ones(len(p_in))
            idx = []
            for k, c in enumerate(corner):
                weight = weight * (t[k] if c else 1.0 - t[k])
                idx.append(i0[k] + c)
            acc += weight * vals[tuple(idx)]
        out[inside] = acc
    return out.reshape(lead)


def interpolate(v: Field, x) -> float:
    """Interpolant of ``v`` at a single point ``x`` (0 outside the domain)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return float(interpolate_points(v, x.reshape(1, -1))[0])


def resample(v: Field, target: Grid, transform: Callable | None = None) -> Field:
    """Sample the interpolant of ``v`` at the centres of ``target``.

    ``transform`` maps target coordinates (array ``(N, d)``) to source
    coordinates before interpolation.
    """
    pts = np.stack([c.ravel() for c in target.mesh()], axis=1)
    if transform is not None:
        pts = transform(pts)
    return Field(target, interpolate_points(v, pts).reshape(target.shape))
