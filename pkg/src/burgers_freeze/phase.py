"""Phase conditions that determine the algebraic variables ``mu``.

Two choices are supported:

``orthogonal``
    ``<T_1 a v[eps_j], v_tau> = 0``: the profile moves orthogonally to its
    group orbit.
``fixed``
    ``<T_1 a u_ref[eps_j], v - u_ref> = 0`` for a template ``u_ref``.  This
    constraint is enforced through its time derivative
    ``<T_1 a u_ref[eps_j], v_tau> = 0`` (index reduction); the remaining drift
    of the undifferentiated constraint is monitored, and the template is
    replaced by the current profile when it has moved too far away.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .action import GeneratorSet
from .grid import Field, inner_product
from .lie_group import LieAlgebraElement

logger = logging.getLogger(__name__)

SINGULAR_COND = 1e12


class SingularPhaseError(np.linalg.LinAlgError):
    """The phase-condition matrix is singular or too ill-conditioned."""


def gram_matrix(w: list, z: list) -> np.ndarray:
    """Matrix of pairings ``G[j, k] = <w_j, z_k>``."""
    if len(w) != len(z):
        raise ValueError(f"need lists of equal length, got {len(w)} and {len(z)}")
    return np.array([[inner_product(wj, zk) for zk in z] for wj in w])


def pairings(w: list, f: Field) -> np.ndarray:
    return np.array([inner_product(wj, f) for wj in w])


def _solve_small(A: np.ndarray, b: np.ndarray, what: str) -> np.ndarray:
    cond = np.linalg.cond(A) if np.all(np.isfinite(A)) else np.inf
    if not np.isfinite(cond) or cond > SINGULAR_COND:
        raise SingularPhaseError(f"{what} matrix is singular (condition estimate {cond:.3e})")
    # LAPACK gesv: LU with partial pivoting
    return np.linalg.solve(A, b)


def solve_mu_orthogonal(v: Field, rhs_F: Field, gens: GeneratorSet, v_gens: list | None = None) -> LieAlgebraElement:
    """Solve the orthogonal phase condition for ``mu`` given ``F(v)``."""
    if v_gens is None:
        v_gens = gens.apply(v)
    G = gram_matrix(v_gens, v_gens)
    r = pairings(v_gens, rhs_F)
    return LieAlgebraElement.from_coords(gens.d, _solve_small(G, r, "Gram"))


def solve_mu_fixed(v: Field, rhs_F: Field, pc: PhaseCondition, gens: GeneratorSet,
                   v_gens: list | None = None) -> LieAlgebraElement:
    """Solve the differentiated fixed phase condition for ``mu`` given ``F(v)``."""
    if pc.kind != "fixed":
        raise ValueError("solve_mu_fixed needs a fixed phase condition")
    if v_gens is None:
        v_gens = gens.apply(v)
    M = gram_matrix(pc.reference_generators, v_gens)
    b = pairings(pc.reference_generators, rhs_F)
    return LieAlgebraElement.from_coords(gens.d, _solve_small(M, b, "fixed phase"))


@dataclass
class PhaseSolution:
    """Result of :meth:`PhaseCondition.solve` at one profile."""

    mu: LieAlgebraElement
    explicit: Field
    diffusion: Field
    F: Field
    generators: list
    residual: np.ndarray
    max_speed: float
    iterations: int

    @property
    def rhs(self) -> Field:
        """Discrete co-moving right-hand side at the solved ``mu``."""
        return self.explicit + self.diffusion


@dataclass
class PhaseCondition:
    """Phase condition state (template and cached template generators for ``fixed``)."""

    kind: str
    gens: GeneratorSet
    reference: Field | None = None
    eta: float = 0.15
    cond_trigger: float = 1e8
    max_correction: int = 8
    correction_tol: float = 1e-13
    reference_generators: list = field(default_factory=list, init=False)
    n_updates: int = field(default=0, init=False)

    def __post_init__(self):
        if self.kind not in ("orthogonal", "fixed"):
            raise ValueError(f"unknown phase condition {self.kind!r}")
        if self.kind == "fixed":
            if self.reference is None:
                raise ValueError("fixed phase condition needs a reference function")
            self._set_reference(self.reference)

    @classmethod
    def orthogonal(cls, gens: GeneratorSet) -> PhaseCondition:
        return cls("orthogonal", gens)

    @classmethod
    def fixed(cls, gens: GeneratorSet, reference: Field, eta: float = 0.15) -> PhaseCondition:
        return cls("fixed", gens, reference, eta)

    def _set_reference(self, ref: Field) -> None:
        self.reference = ref
        self.reference_generators = self.gens.apply(ref)

    def constraint_value(self, v: Field) -> np.ndarray:
        """``Psi_fix(v) = <T_1 a u_ref[eps_j], v - u_ref>`` (zeros for orthogonal)."""
        if self.kind != "fixed":
            return np.zeros(self.gens.dim)
        return pairings(self.reference_generators, v - self.reference)

    def test_fields(self, v_gens: list) -> list:
        return v_gens if self.kind == "orthogonal" else self.reference_generators

    def maybe_update_reference(self, v: Field, v_gens: list | None = None) -> bool:
        """Replace the template by ``v`` if it drifted too far; return whether it did."""
        if self.kind != "fixed":
            return False
        ref_norm = self.reference.norm()
        dist = (v - self.reference).norm()
        trigger = dist > self.eta * ref_norm
        if not trigger:
            if v_gens is None:
                v_gens = self.gens.apply(v)
            M = gram_matrix(self.reference_generators, v_gens)
            cond = np.linalg.cond(M) if np.all(np.isfinite(M)) else np.inf
            trigger = not cond <= self.cond_trigger
        if trigger:
            self._set_reference(v)
            self.n_updates += 1
            logger.info("phase reference updated (update %d, relative distance %.3g)",
                        self.n_updates, dist / max(ref_norm, 1e-300))
        return bool(trigger)

    def solve_linear(self, v: Field, rhs_F: Field, v_gens: list | None = None) -> LieAlgebraElement:
        if self.kind == "orthogonal":
            return solve_mu_orthogonal(v, rhs_F, self.gens, v_gens)
        return solve_mu_fixed(v, rhs_F, self, self.gens, v_gens)

    def solve(self, v: Field, eq) -> PhaseSolution:
        """Determine ``mu`` at ``v`` for the discrete co-moving operator ``eq``.

        The linear solve uses ``F(v) - sum_j mu_j T_1 a v[eps_j]``.  The upwind
        dissipation of the transport scheme depends weakly on ``mu``, so the
        solution is then corrected by a few defect-correction sweeps until
        ``<w_j, eq.comoving_rhs(v, mu)> = 0`` holds to round-off.
        """
        v_gens = self.gens.apply(v)
        W = self.test_fields(v_gens)
        diffusion = eq.diffusion_apply(v)
        F = eq.explicit_rhs(v) + diffusion
        A = gram_matrix(W, v_gens)
        b = pairings(W, F)
        coords = _solve_small(A, b, "phase")
        scale = np.array([w.norm() for w in W]) * max(F.norm(), 1e-300)
        for it in range(self.max_correction + 1):
            mu = LieAlgebraElement.from_coords(self.gens.d, coords)
            explicit = eq.explicit_rhs(v, mu)
            speed = eq.max_speed
            r = pairings(W, explicit + diffusion)
            if np.all(np.abs(r) <= self.correction_tol * scale) or it == self.max_correction:
                break
            coords = coords + np.linalg.solve(A, r)
        return PhaseSolution(mu, explicit, diffusion, F, v_gens, r, speed, it)


def zero_phase_solution(v: Field, eq) -> PhaseSolution:
    """Stand-in for runs without symmetry reduction (``mu = 0``)."""
    d = v.grid.d
    explicit = eq.explicit_rhs(v)
    speed = eq.max_speed
    diffusion = eq.diffusion_apply(v)
    return PhaseSolution(LieAlgebraElement.zero(d), explicit, diffusion, explicit + diffusion, [],
                         np.zeros(0), speed, 0)
