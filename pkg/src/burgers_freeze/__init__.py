"""Freezing method for the generalized multi-dimensional Burgers equation.

The scaling/rotation/translation symmetry of
``u_t + (1/p) div(a |u|^p) = nu Lap u`` is factored out: the solver evolves a
co-moving profile ``v`` together with algebraic variables ``mu``, a group
element ``g`` and the original time ``t``, so that similarity solutions become
steady states on a fixed bounded domain.
"""
from .action import (CanonicalReduction, GeneratorSet, action_compose, action_exp, action_inverse,
                     action_tangent, apply_action, canonical_reduce, generator_apply, m_homomorphism)
from .config import PRESETS, ConfigError, SolverConfig, load_config, parse_config, preset, render_config
from .driver import (BlowUpError, FreezingIntegrator, FreezingState, StepStats, Trajectory, cfl_dt,
                     direct_solve, direct_step, imex_step, reconstruction_step, run, verify_equivalence)
from .estimator import FreezingBurgers
from .grid import Field, Grid, inner_product, interpolate, mass, sample_function
from .io import SnapshotRecord, read_series, read_snapshot, write_series, write_snapshot
from .lie_group import (GroupElement, LieAlgebraElement, compose, exp_group, inverse, matrix_rep,
                        tangent_left_translate)
from .phase import PhaseCondition, SingularPhaseError, gram_matrix, solve_mu_fixed, solve_mu_orthogonal
from .reconstruction import mass_law_check, reconstruct, sigma_closed_form, similarity_residual
from .spatial import CoMovingRHS

__version__ = "0.1.0"

__all__ = [
    "BlowUpError", "CanonicalReduction", "CoMovingRHS", "ConfigError", "Field", "FreezingBurgers",
    "FreezingIntegrator", "FreezingState", "GeneratorSet", "Grid", "GroupElement", "LieAlgebraElement",
    "PRESETS", "PhaseCondition", "SingularPhaseError", "SnapshotRecord", "SolverConfig", "StepStats",
    "Trajectory", "action_compose", "action_exp", "action_inverse", "action_tangent", "apply_action",
    "canonical_reduce", "cfl_dt", "compose", "direct_solve", "direct_step", "exp_group", "generator_apply",
    "gram_matrix", "imex_step", "inner_product", "interpolate", "inverse", "load_config", "m_homomorphism",
    "mass", "mass_law_check", "matrix_rep", "parse_config", "preset", "read_series", "read_snapshot",
    "reconstruct", "reconstruction_step", "render_config", "run", "sample_function", "sigma_closed_form", "similarity_residual",
    "solve_mu_fixed", "solve_mu_orthogonal", "tangent_left_translate", "verify_equivalence", "write_series",
    "write_snapshot",
]
