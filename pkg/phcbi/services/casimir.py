"""Casimir synthesis for LTI plants and the dissipation-obstacle classifier.

For an LTI plant the Casimir C(x, ξ) = ξ − S(x) is linear, S(x) = Kᵀx, and
the matching equations reduce to matrix equations in K:

    Kᵀ(J − R) = Gc Gᵀ                      (conservation, plant part)
    Kᵀ G Gcᵀ + (Jc − Rc) = 0                (conservation, controller part)

With the port gain Gc fixed the first equation is linear in K; the second
then holds by choosing Rc = −KᵀRK and Jc = KᵀJK. Rc is allowed to be
indefinite or negative, which is what lets K depend on dissipative
coordinates.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from phcbi.core.config import Tolerances, resolve_tolerances
from phcbi.core.logging import get_logger
from phcbi.services.ph_core import (
    Array,
    LtiPhSystem,
    QuadraticHamiltonian,
    as_matrix,
    as_vector,
    frozen_array,
    reciprocal_condition,
    skew_part,
    sup_norm,
    symmetrize,
    validate_structure,
)

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class CasimirSolution:
    """Linear Casimir S(x) = Kᵀx with its controller structure."""

    K: Array
    Gc: Array
    kappa: Array
    Jc: Array
    Rc: Array
    residual_pde1: float
    residual_pde2: float
    exact: bool = True
    least_squares: bool = False

    @property
    def n(self) -> int:
        return int(self.K.shape[0])

    @property
    def n_c(self) -> int:
        return int(self.K.shape[1])

    def S(self, x: ArrayLike) -> Array:
        return self.K.T @ as_vector(x, self.n, "x")

    def evaluate(self, x: ArrayLike, xi: ArrayLike) -> Array:
        """Casimir value C(x, ξ) = ξ − Kᵀx."""
        return as_vector(xi, self.n_c, "xi") - self.S(x)

    def with_kappa(self, kappa: ArrayLike) -> "CasimirSolution":
        return replace(self, kappa=frozen_array(as_vector(kappa, self.n_c, "kappa")))

    def as_dict(self) -> dict[str, Any]:
        return {
            "K": self.K.tolist(),
            "Gc": self.Gc.tolist(),
            "kappa": self.kappa.tolist(),
            "Jc": self.Jc.tolist(),
            "Rc": self.Rc.tolist(),
            "residual_pde1": self.residual_pde1,
            "residual_pde2": self.residual_pde2,
            "exact": self.exact,
            "least_squares": self.least_squares,
        }


class ObstacleClass(str, Enum):
    CLASSICAL = "classical"
    BEYOND_OBSTACLE = "beyond-obstacle"


@dataclass(frozen=True)
class ObstacleReport:
    """Norms of the classical chain; all within chain_tol means the passive route works."""

    norm_RK: float
    norm_Rc: float
    norm_JK_plus_GGc: float
    norm_Jc_match: float
    classical_chain_holds: bool
    classification: ObstacleClass
    chain_tol: float

    def as_dict(self) -> dict[str, Any]:
        return {
            "norm_RK": self.norm_RK,
            "norm_Rc": self.norm_Rc,
            "norm_JK_plus_GGc": self.norm_JK_plus_GGc,
            "norm_Jc_match": self.norm_Jc_match,
            "classical_chain_holds": self.classical_chain_holds,
            "classification": self.classification.value,
            "chain_tol": self.chain_tol,
        }


def chain_tolerance(plant: LtiPhSystem, tol: Tolerances | None = None) -> float:
    """Absolute tolerance chain_tol·(1+‖J‖∞+‖R‖∞) for this plant."""
    return resolve_tolerances(tol).chain_tol * (1.0 + sup_norm(plant.J) + sup_norm(plant.R))


def induced_structure(plant: LtiPhSystem, K: ArrayLike) -> tuple[Array, Array]:
    """(Jc, Rc) = (KᵀJK, −KᵀRK), with round-off removed by (anti)symmetrization."""
    K_arr = as_matrix(K, plant.n, None, "K")
    Jc = skew_part(K_arr.T @ plant.J @ K_arr)
    Rc = symmetrize(-(K_arr.T @ plant.R @ K_arr))
    return Jc, Rc


def pde_residuals(
    plant: LtiPhSystem, K: Array, Gc: Array, Jc: Array, Rc: Array
) -> tuple[float, float]:
    """Sup-norm defects of the two conservation equations."""
    pde1 = sup_norm(K.T @ (plant.J - plant.R) - Gc @ plant.G.T)
    pde2 = sup_norm(K.T @ plant.G @ Gc.T + (Jc - Rc))
    return pde1, pde2


def casimir_level(K: ArrayLike, x0: ArrayLike, xi0: ArrayLike) -> Array:
    """κ = ξ0 − Kᵀx0, the level set through a given initial condition."""
    K_arr = np.asarray(K, dtype=float)
    return as_vector(xi0, K_arr.shape[1], "xi0") - K_arr.T @ as_vector(x0, K_arr.shape[0], "x0")


def casimir_from_gradient(
    plant: LtiPhSystem,
    K: ArrayLike,
    Gc: ArrayLike,
    kappa: ArrayLike | None = None,
    tol: Tolerances | None = None,
    least_squares: bool = False,
) -> CasimirSolution:
    """Assemble a solution for a given Casimir gradient K and report its residuals."""
    K_arr = as_matrix(K, plant.n, None, "K")
    n_c = K_arr.shape[1]
    Gc_arr = as_matrix(Gc, n_c, plant.m, "Gc")
    kappa_arr = np.zeros(n_c) if kappa is None else as_vector(kappa, n_c, "kappa")

    Jc, Rc = induced_structure(plant, K_arr)
    pde1, pde2 = pde_residuals(plant, K_arr, Gc_arr, Jc, Rc)
    exact = pde1 <= chain_tolerance(plant, tol)
    if not exact:
        logger.warning("Casimir equations not satisfied", residual_pde1=pde1, residual_pde2=pde2)

    return CasimirSolution(
        K=frozen_array(K_arr),
        Gc=frozen_array(Gc_arr),
        kappa=frozen_array(kappa_arr),
        Jc=frozen_array(Jc),
        Rc=frozen_array(Rc),
        residual_pde1=pde1,
        residual_pde2=pde2,
        exact=exact,
        least_squares=least_squares,
    )


def solve_casimir(
    plant: LtiPhSystem,
    Gc: ArrayLike,
    kappa: ArrayLike | None = None,
    tol: Tolerances | None = None,
) -> CasimirSolution:
    """K = −(J+R)⁻¹GGcᵀ, or the minimum-norm least-squares K when J+R is singular."""
    tol = resolve_tolerances(tol)
    Gc_arr = np.asarray(Gc, dtype=float)
    if Gc_arr.ndim < 2:
        Gc_arr = Gc_arr.reshape(-1, plant.m) if Gc_arr.size else np.zeros((0, plant.m))
    Gc_arr = as_matrix(Gc_arr, None, plant.m, "Gc")

    JpR = plant.J + plant.R
    rhs = -(plant.G @ Gc_arr.T)
    rcond = reciprocal_condition(JpR)
    if rcond >= tol.cond_tol:
        K = np.linalg.solve(JpR, rhs)
        fallback = False
    else:
        K = np.linalg.lstsq(JpR, rhs, rcond=None)[0]
        fallback = True
        logger.warning("J+R is singular, using minimum-norm least squares", rcond=rcond)

    sol = casimir_from_gradient(plant, K, Gc_arr, kappa, tol, least_squares=fallback)
    logger.debug(
        "Solved Casimir equations",
        n_c=sol.n_c,
        residual_pde1=sol.residual_pde1,
        residual_pde2=sol.residual_pde2,
        least_squares=fallback,
    )
    return sol


def obstacle_check(
    plant: LtiPhSystem, sol: CasimirSolution, tol: Tolerances | None = None
) -> ObstacleReport:
    """Evaluate the passive (classical) chain for a solution.

    The chain asks RK = 0, Rc = 0, JK = −GGcᵀ and KᵀJK = Jc. Any violation
    means the Casimir relies on an active controller.
    """
    band = chain_tolerance(plant, tol)
    norm_RK = sup_norm(plant.R @ sol.K)
    norm_Rc = sup_norm(sol.Rc)
    norm_JK = sup_norm(plant.J @ sol.K + plant.G @ sol.Gc.T)
    norm_Jc = sup_norm(sol.K.T @ plant.J @ sol.K - sol.Jc)
    holds = max(norm_RK, norm_Rc, norm_JK, norm_Jc) <= band
    return ObstacleReport(
        norm_RK=norm_RK,
        norm_Rc=norm_Rc,
        norm_JK_plus_GGc=norm_JK,
        norm_Jc_match=norm_Jc,
        classical_chain_holds=holds,
        classification=ObstacleClass.CLASSICAL if holds else ObstacleClass.BEYOND_OBSTACLE,
        chain_tol=band,
    )


def build_controller(
    sol: CasimirSolution, Hc: QuadraticHamiltonian, tol: Tolerances | None = None
) -> LtiPhSystem:
    """Controller (Jc, Rc, Gc, Hc); its `passive` verdict usually is not PSD here."""
    return validate_structure(sol.Jc, sol.Rc, sol.Gc, Hc, tol)
