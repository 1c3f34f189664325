"""Solver configuration, YAML parsing and the experiment presets.

A configuration file is a flat YAML mapping.  Recognised keys and defaults:

==================  =========================================================
``d``               space dimension, 1 or 2 (required)
``p``               flux exponent, > 1 (required)
``nu``              viscosity, > 0 (required)
``a_vec``           flux direction (optional, reduced to ``e1``)
``lo``, ``hi``      domain corners; default ``[-8]``/``[8]`` (1d), ``[-5,-5]``/``[5,5]`` (2d)
``n``               cells per axis; default ``[1600]`` (1d), ``[150,150]`` (2d)
``cfl``             CFL number in (0, 1); default 0.45
``dt_max``          step size cap; default 0.1
``theta``           minmod parameter in [1, 2]; default 1.5
``phase``           ``fixed`` or ``orthogonal``; default ``fixed``
``eta``             template update threshold (fixed phase); default 0.15
``tau_end``         final scaled time; default 5.0
``snapshot_every``  snapshot spacing in scaled time; default 0.5
``output_dir``      default ``out``
``seed``            default 0
``initial``         ``sine`` (the piecewise sine data), ``expr:<numpy expression in x, y>``
                    or ``file:<snapshot or .npy path>``; default ``sine``
==================  =========================================================
"""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from .action import CanonicalReduction, canonical_reduce
from .grid import Field, Grid, sample_function


class ConfigError(ValueError):
    """Invalid configuration; ``problems`` lists every violation found."""

    def __init__(self, problems):
        self.problems = list(problems) if not isinstance(problems, str) else [problems]
        super().__init__("; ".join(self.problems))


_DEFAULT_DOMAIN = {1: ([-8.0], [8.0], [1600]), 2: ([-5.0, -5.0], [5.0, 5.0], [150, 150])}


@dataclass
class SolverConfig:
    d: int
    p: float
    nu: float
    a_vec: list | None = None
    lo: list | None = None
    hi: list | None = None
    n: list | None = None
    cfl: float = 0.45
    dt_max: float = 0.1
    theta: float = 1.5
    phase: str = "fixed"
    eta: float = 0.15
    tau_end: float = 5.0
    snapshot_every: float = 0.5
    output_dir: str = "out"
    seed: int = 0
    initial: str = "sine"
    reduction: CanonicalReduction | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.d in _DEFAULT_DOMAIN:
            lo, hi, n = _DEFAULT_DOMAIN[self.d]
            self.lo = list(lo) if self.lo is None else [float(x) for x in np.atleast_1d(self.lo)]
            self.hi = list(hi) if self.hi is None else [float(x) for x in np.atleast_1d(self.hi)]
            self.n = list(n) if self.n is None else [int(x) for x in np.atleast_1d(self.n)]
        self.validate()
        if self.a_vec is not None:
            self.a_vec = [float(x) for x in self.a_vec]
            self.reduction = canonical_reduce(self.a_vec, self.nu)

    def validate(self) -> None:
        problems = []
        if self.d not in (1, 2):
            problems.append(f"d must be 1 or 2, got {self.d!r}")
        if not _is_num(self.p) or not self.p > 1:
            problems.append(f"p must exceed 1, got {self.p!r}")
        if not _is_num(self.nu) or not self.nu > 0:
            problems.append(f"nu must be positive, got {self.nu!r}")
        if not _is_num(self.cfl) or not 0 < self.cfl < 1:
            problems.append(f"cfl must lie in (0, 1), got {self.cfl!r}")
        if not _is_num(self.dt_max) or not self.dt_max > 0:
            problems.append(f"dt_max must be positive, got {self.dt_max!r}")
        if not _is_num(self.theta) or not 1 <= self.theta <= 2:
            problems.append(f"theta must lie in [1, 2], got {self.theta!r}")
        if self.phase not in ("fixed", "orthogonal"):
            problems.append(f"phase must be 'fixed' or 'orthogonal', got {self.phase!r}")
        if not _is_num(self.eta) or not self.eta > 0:
            problems.append(f"eta must be positive, got {self.eta!r}")
        if not _is_num(self.tau_end) or not self.tau_end >= 0:
            problems.append(f"tau_end must be non-negative, got {self.tau_end!r}")
        if not _is_num(self.snapshot_every) or not self.snapshot_every > 0:
            problems.append(f"snapshot_every must be positive, got {self.snapshot_every!r}")
        if self.d in (1, 2):
            for name in ("lo", "hi", "n"):
                if len(getattr(self, name)) != self.d:
                    problems.append(f"{name} must have {self.d} entries")
            if len(self.lo) == len(self.hi) == self.d and any(b <= a for a, b in zip(self.lo, self.hi)):
                problems.append("hi must exceed lo on every axis")
            if any(k < 4 for k in self.n):
                problems.append("n must be at least 4 on every axis")
            if self.a_vec is not None:
                a = np.asarray(self.a_vec, dtype=float)
                if a.shape != (self.d,) or not np.any(a):
                    problems.append(f"a_vec must be a nonzero vector of length {self.d}")
        if not isinstance(self.initial, str) or not self.initial:
            problems.append("initial must be a non-empty string")
        if problems:
            raise ConfigError(problems)

    @property
    def effective_nu(self) -> float:
        return self.reduction.nu_eff if self.reduction is not None else float(self.nu)

    def grid(self) -> Grid:
        return Grid(tuple(self.lo), tuple(self.hi), tuple(self.n))

    @property
    def resolved_output_dir(self) -> str:
        return os.environ.get("BURGERS_FREEZE_OUTPUT_DIR", self.output_dir)

    def replace(self, **changes) -> SolverConfig:
        data = self.to_dict()
        data.update(changes)
        return SolverConfig(**data)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self) if f.init}

    def initial_field(self, grid: Grid | None = None) -> Field:
        """Initial data sampled on the configured grid (in reduced coordinates)."""
        grid = grid or self.grid()
        return initial_field(self.initial, grid, self.reduction)


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and np.isfinite(x)


def sine_initial(*xs):
    """Piecewise sine initial data used in all experiments."""
    x = xs[0]
    if len(xs) == 1:
        return np.where((x >= -np.pi / 2) & (x <= 0), np.sin(2 * x),
                        np.where((x > 0) & (x <= np.pi), np.sin(x), 0.0))
    y = xs[1]
    left = (x > -np.pi / 2) & (x < 0) & (y > 0) & (y < np.pi)
    right = (x > 0) & (x < np.pi) & (y > -np.pi / 2) & (y < np.pi / 2)
    return np.where(left, np.sin(2 * x) * np.sin(y), np.where(right, np.sin(x) * np.cos(y), 0.0))


_EXPR_NAMES = {name: getattr(np, name) for name in (
    "sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh", "sinh", "cosh", "where",
    "pi", "minimum", "maximum", "sign", "heaviside")}


def initial_field(spec: str, grid: Grid, reduction: CanonicalReduction | None = None) -> Field:
    """Build initial data from ``sine``, ``expr:...`` or ``file:...``."""
    if spec.startswith("file:"):
        path = spec[5:].strip()
        if path.endswith(".npy"):
            return Field(grid, np.load(path))
        from .io import read_snapshot

        rec = read_snapshot(path)
        if rec.grid != grid:
            raise ConfigError(f"initial file {path} is on a different grid")
        return rec.field
    if spec == "sine":
        f = sine_initial
    elif spec.startswith("expr:"):
        expr = spec[5:].strip()
        try:
            code = compile(expr, "<initial>", "eval")
        except SyntaxError as exc:
            raise ConfigError(f"initial expression {expr!r}: {exc.msg}") from None

        def f(*xs):
            names = dict(_EXPR_NAMES, x=xs[0], y=xs[1] if len(xs) > 1 else 0.0)
            try:
                return eval(code, {"__builtins__": {}}, names)
            except (NameError, TypeError, ValueError, ArithmeticError) as exc:
                raise ConfigError(f"initial expression {expr!r}: {exc}") from None
    else:
        raise ConfigError(f"unknown initial data {spec!r}")
    if reduction is None:
        return sample_function(grid, f)
    Q = reduction.Q_a

    def pulled(*ys):
        # v(y, 0) = u0(Q_a^T y); Q_a is a symmetric reflection
        xs = np.tensordot(Q.T, np.stack(ys), axes=1)
        return f(*xs)

    return sample_function(grid, pulled)


_KEYS = {f.name for f in dataclasses.fields(SolverConfig) if f.init}


def parse_config(text: str) -> SolverConfig:
    """Parse a YAML config document; unknown keys and range violations are errors."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"parse error{where}: {getattr(exc, 'problem', exc)}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping of key: value pairs")
    problems = [f"unknown key {k!r}" for k in data if k not in _KEYS]
    problems += [f"missing required key {k!r}" for k in ("d", "p", "nu") if k not in data]
    if problems:
        raise ConfigError(problems)
    if isinstance(data.get("p"), int) and not isinstance(data["p"], bool):
        data["p"] = float(data["p"])
    return SolverConfig(**data)


def render_config(cfg: SolverConfig) -> str:
    """YAML text that :func:`parse_config` maps back to an equal config."""
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False, default_flow_style=None)


def load_config(path: str) -> SolverConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


PRESETS = {
    "1d-p2-nu0.4-fixed": dict(d=1, p=2.0, nu=0.4, phase="fixed", tau_end=10.0),
    "1d-p2-nu0.4-orth": dict(d=1, p=2.0, nu=0.4, phase="orthogonal", tau_end=10.0),
    "1d-p1.5-nu0.4": dict(d=1, p=1.5, nu=0.4, phase="fixed", tau_end=5.0),
    "1d-p2.5-nu0.4": dict(d=1, p=2.5, nu=0.4, phase="fixed", tau_end=4.0, lo=[-5.0], hi=[5.0], n=[1000]),
    "1d-p2-nu0.01-metastable": dict(d=1, p=2.0, nu=0.01, phase="fixed", tau_end=250.0, snapshot_every=5.0),
    "2d-p1.5-nu0.05-metastable": dict(d=2, p=1.5, nu=0.05, phase="orthogonal", tau_end=140.0,
                                      snapshot_every=5.0),
    "2d-p1.5-nu0.4": dict(d=2, p=1.5, nu=0.4, phase="orthogonal", tau_end=5.0),
    "2d-p2-nu0.4": dict(d=2, p=2.0, nu=0.4, phase="orthogonal", tau_end=5.0),
}


def preset(name: str, **overrides) -> SolverConfig:
    try:
        base = dict(PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
    base.update(overrides)
    return SolverConfig(**base)
