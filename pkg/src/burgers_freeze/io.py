"""Snapshot files and the scalar time-series CSV.

Snapshot format
---------------
A UTF-8 text header of ``key = value`` lines, terminated by a line ``END``,
followed immediately by the field values as little-endian float64 in C order
(``values.ravel()``).  Floats in the header are written with ``repr`` so a
round trip is bit-exact.  Header keys, in order::

    format  = burgers-freeze-snapshot 1
    d       = 1
    lo      = -8.0
    hi      = 8.0
    n       = 1600
    tau     = ...
    t       = ...
    alpha   = ...
    phi     = ...          (d = 3 only)
    b       = b_1 [b_2 ...]
    mu      = mu1 [mu2] mu3_1 [mu3_2 ...]
    mass    = ...
    residual = ...
    END

List values are space separated.  Files are written to a temporary name in the
target directory and renamed into place.

CSV series
----------
One row per accepted step with columns (see :func:`series_columns`)::

    tau, t, mu1, [mu2_1,] mu3_1..mu3_d, alpha, [phi,] b_1..b_d, mass, residual
"""
from __future__ import annotations

import csv
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .grid import Field, Grid
from .lie_group import GroupElement, LieAlgebraElement, rotation_dim

FORMAT_TAG = "burgers-freeze-snapshot 1"


class SnapshotFormatError(ValueError):
    """Malformed or inconsistent snapshot file."""


@dataclass(frozen=True, eq=False)
class SnapshotRecord:
    tau: float
    t: float
    g: GroupElement
    mu: LieAlgebraElement
    mass: float
    residual: float
    field: Field

    @property
    def grid(self) -> Grid:
        return self.field.grid

    @property
    def alpha(self) -> float:
        return self.g.alpha

    def __eq__(self, other) -> bool:
        if not isinstance(other, SnapshotRecord):
            return NotImplemented
        return (self.tau == other.tau and self.t == other.t and self.mass == other.mass
                and self.residual == other.residual and self.grid == other.grid
                and np.array_equal(self.g.chart(), other.g.chart())
                and np.array_equal(self.mu.coords, other.mu.coords)
                and np.array_equal(self.field.values, other.field.values))


def _fmt(values) -> str:
    return " ".join(repr(float(x)) for x in np.atleast_1d(values))


def _atomic_write(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def encode_snapshot(rec: SnapshotRecord) -> bytes:
    grid = rec.grid
    lines = [
        f"format = {FORMAT_TAG}",
        f"d = {grid.d}",
        f"lo = {_fmt(grid.lo)}",
        f"hi = {_fmt(grid.hi)}",
        "n = " + " ".join(str(k) for k in grid.n),
        f"tau = {rec.tau!r}",
        f"t = {rec.t!r}",
        f"alpha = {rec.g.alpha!r}",
    ]
    if grid.d == 3:
        lines.append(f"phi = {rec.g.phi!r}")
    lines += [
        f"b = {_fmt(rec.g.b)}",
        f"mu = {_fmt(rec.mu.coords)}",
        f"mass = {float(rec.mass)!r}",
        f"residual = {float(rec.residual)!r}",
        "END",
    ]
    header = ("\n".join(lines) + "\n").encode("utf-8")
    payload = np.ascontiguousarray(rec.field.values, dtype="<f8").tobytes()
    return header + payload


def write_snapshot(path: str, rec: SnapshotRecord) -> None:
    _atomic_write(path, encode_snapshot(rec))


def decode_snapshot(data: bytes, source: str = "<bytes>") -> SnapshotRecord:
    marker = b"\nEND\n"
    pos = data.find(marker)
    if pos < 0:
        raise SnapshotFormatError(f"{source}: missing END line")
    header = data[:pos].decode("utf-8").splitlines()
    payload = data[pos + len(marker):]
    meta = {}
    for i, line in enumerate(header, 1):
        key, sep, value = line.partition("=")
        if not sep:
            raise SnapshotFormatError(f"{source}: line {i}: expected 'key = value'")
        meta[key.strip()] = value.strip()
    if meta.get("format") != FORMAT_TAG:
        raise SnapshotFormatError(f"{source}: unsupported format {meta.get('format')!r}")
    try:
        d = int(meta["d"])
        grid = Grid([float(x) for x in meta["lo"].split()], [float(x) for x in meta["hi"].split()],
                    [int(x) for x in meta["n"].split()])
        if grid.d != d:
            raise SnapshotFormatError(f"{source}: header dimension {d} does not match grid")
        phi = float(meta["phi"]) if d == 3 else 0.0
        g = GroupElement(d, float(meta["alpha"]), phi, [float(x) for x in meta["b"].split()])
        mu = LieAlgebraElement.from_coords(d, [float(x) for x in meta["mu"].split()])
        tau, t = float(meta["tau"]), float(meta["t"])
        mass_v, res = float(meta["mass"]), float(meta["residual"])
    except KeyError as exc:
        raise SnapshotFormatError(f"{source}: missing header key {exc.args[0]!r}") from None
    except ValueError as exc:
        if isinstance(exc, SnapshotFormatError):
            raise
        raise SnapshotFormatError(f"{source}: bad header value ({exc})") from None
    expected = 8 * int(np.prod(grid.n))
    if len(payload) != expected:
        raise SnapshotFormatError(f"{source}: payload has {len(payload)} bytes, header implies {expected}")
    values = np.frombuffer(payload, dtype="<f8").reshape(grid.shape).astype(float)
    return SnapshotRecord(tau, t, g, mu, mass_v, res, Field(grid, values))


def read_snapshot(path: str) -> SnapshotRecord:
    with open(path, "rb") as fh:
        return decode_snapshot(fh.read(), path)


def record_from_state(state, residual: float) -> SnapshotRecord:
    from .grid import mass

    return SnapshotRecord(state.tau, state.rho, state.g, state.mu, mass(state.v), residual, state.v)


def series_columns(d: int) -> list:
    """CSV column names for dimension ``d``."""
    cols = ["tau", "t", "mu1"]
    cols += [f"mu2_{i + 1}" for i in range(rotation_dim(d))]
    cols += [f"mu3_{i + 1}" for i in range(d)]
    cols.append("alpha")
    if d == 3:
        cols.append("phi")
    cols += [f"b_{i + 1}" for i in range(d)]
    cols += ["mass", "residual"]
    return cols


def write_series(path: str, rows: list, d: int) -> None:
    """Write the per-step series; floats use ``repr`` so output is deterministic and exact."""
    cols = series_columns(d)
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(repr(float(row[c])) for c in cols))
    _atomic_write(path, ("\n".join(lines) + "\n").encode("utf-8"))


def read_series(path: str) -> dict:
    """Read a series CSV into a dict of float arrays keyed by column name."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(x) for x in row] for row in reader if row], dtype=float)
    if data.size == 0:
        data = data.reshape(0, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}
