"""Fast internal consistency checks used by ``burgers-freeze selftest``."""
from __future__ import annotations

import numpy as np

from .action import GeneratorSet, generator_apply
from .grid import Grid, mass, sample_function
from .io import decode_snapshot, encode_snapshot, record_from_state
from .lie_group import GroupElement, LieAlgebraElement, compose, exp_group, group_distance, inverse
from .phase import PhaseCondition
from .spatial import CoMovingRHS


def _random_element(rng, d):
    return GroupElement(d, float(np.exp(rng.normal())), float(rng.normal()) if d == 3 else 0.0, rng.normal(size=d))


def run_selftest(seed: int = 0) -> list:
    """Return ``(name, ok, detail)`` triples."""
    rng = np.random.default_rng(seed)
    out = []

    worst = 0.0
    for d in (1, 2, 3):
        for _ in range(20):
            g, h, k = (_random_element(rng, d) for _ in range(3))
            worst = max(worst, group_distance(compose(compose(g, h), k), compose(g, compose(h, k))),
                        group_distance(compose(g, inverse(g)), GroupElement.identity(d)))
    out.append(("group-laws", worst <= 1e-12, f"max error {worst:.2e}"))

    mu = LieAlgebraElement(3, 0.3, [0.7], [1.0, -0.5, 0.2])
    err = group_distance(exp_group(mu, 0.4), compose(exp_group(mu, 0.15), exp_group(mu, 0.25)))
    out.append(("one-parameter-subgroup", err <= 1e-10, f"error {err:.2e}"))

    grid = Grid([-8.0], [8.0], [400])
    v = sample_function(grid, lambda x: np.exp(-x ** 2) * (1 + 0.3 * x))
    m = mass(v)
    e_scale = abs(mass(generator_apply(0, v, 2.5)) - (2.5 - 2.0) * m)
    e_trans = abs(mass(generator_apply(1, v, 2.5)))
    out.append(("generator-mass", max(e_scale, e_trans) <= 1e-12, f"errors {e_scale:.1e}, {e_trans:.1e}"))

    eq = CoMovingRHS(grid, 2.0, 0.4)
    pc = PhaseCondition.orthogonal(GeneratorSet(1, 2.0))
    sol = pc.solve(v, eq)
    rel = float(np.max(np.abs(sol.residual)) / sol.F.norm())
    out.append(("phase-residual", rel <= 1e-9, f"relative residual {rel:.1e}"))

    from .driver import FreezingState

    state = FreezingState(0.5, v, sol.mu, GroupElement(1, 1.5, 0.0, [0.25]), 0.75)
    rec = record_from_state(state, 1.0)
    ok = decode_snapshot(encode_snapshot(rec)) == rec
    out.append(("snapshot-roundtrip", ok, "bit-exact" if ok else "mismatch"))
    return out
