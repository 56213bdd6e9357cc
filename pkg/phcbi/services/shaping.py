"""Closed-loop plant dynamics on the Casimir leaf and their shaped-energy forms.

On the leaf ξ = Kᵀx + κ the plant evolves as ẋ = Ax + c. Two routes turn this
into (Jd − Rd)∇Hd:

* energy shaping (ES): keep (J, R) and read the remaining term as a gradient,
  which requires J − R invertible and a symmetric Jacobian (the Poincaré test);
* IDA: fix the Hessian W of Hd and split A·W⁻¹ into skew and symmetric parts.

Either way a positive-definite Hessian together with positive-semidefinite
damping makes the minimizer a stable equilibrium.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any, NamedTuple

import numpy as np
from numpy.typing import ArrayLike

from phcbi.core.config import Tolerances, resolve_tolerances
from phcbi.core.exceptions import DimensionMismatch, NotSymmetric, SingularA, SingularJR, SingularW
from phcbi.core.logging import get_logger
from phcbi.services.casimir import CasimirSolution
from phcbi.services.ph_core import (
    Array,
    DefinitenessVerdict,
    LtiPhSystem,
    QuadraticHamiltonian,
    as_matrix,
    as_vector,
    definiteness,
    frozen_array,
    skew_part,
    solve_checked,
    sup_norm,
    symmetrize,
)

logger = get_logger(__name__)


class AffineDynamics(NamedTuple):
    """ẋ = Ax + c."""

    A: Array
    c: Array


class ShapingMethod(str, Enum):
    ES = "ES"
    IDA = "IDA"


@dataclass(frozen=True, eq=False)
class PoincareReport:
    M: Array
    asym_defect: float
    integrable: bool
    tol_used: float

    def as_dict(self) -> dict[str, Any]:
        return {
            "M": self.M.tolist(),
            "asym_defect": self.asym_defect,
            "integrable": self.integrable,
            "tol_used": self.tol_used,
        }


@dataclass(frozen=True, eq=False)
class ShapedDynamics:
    """(Jd − Rd)∇Hd with Hd(x) = ½(x − x_bar)ᵀW(x − x_bar)."""

    Jd: Array
    Rd: Array
    W: Array
    x_bar: Array
    match_residual: float
    rd_verdict: DefinitenessVerdict
    hessian_verdict: DefinitenessVerdict
    method: ShapingMethod = ShapingMethod.IDA

    @property
    def hamiltonian(self) -> QuadraticHamiltonian:
        return QuadraticHamiltonian(
            self.W, -self.W @ self.x_bar, 0.5 * float(self.x_bar @ self.W @ self.x_bar)
        )

    def gradient(self, x: ArrayLike) -> Array:
        return self.W @ (as_vector(x, self.x_bar.shape[0], "x") - self.x_bar)

    def vector_field(self, x: ArrayLike) -> Array:
        return (self.Jd - self.Rd) @ self.gradient(x)

    def as_dict(self) -> dict[str, Any]:
        return {
            "method": self.method.value,
            "Jd": self.Jd.tolist(),
            "Rd": self.Rd.tolist(),
            "W": self.W.tolist(),
            "x_bar": self.x_bar.tolist(),
            "match_residual": self.match_residual,
            "rd_verdict": self.rd_verdict.as_dict(),
            "hessian_verdict": self.hessian_verdict.as_dict(),
        }


@dataclass(frozen=True)
class StabilityVerdict:
    declared: bool
    reasons: tuple[str, ...]

    @property
    def label(self) -> str:
        return "stable-declared" if self.declared else "not-declared"


def _check_dims(plant: LtiPhSystem, sol: CasimirSolution, Hc: QuadraticHamiltonian) -> None:
    if sol.n != plant.n:
        raise DimensionMismatch(f"Casimir gradient has {sol.n} rows, plant has n={plant.n}", field="K")
    if Hc.dim != sol.n_c:
        raise DimensionMismatch(
            f"Controller Hamiltonian has dimension {Hc.dim}, Casimir has n_c={sol.n_c}", field="Hc"
        )


def closed_loop_plant_affine(
    plant: LtiPhSystem, sol: CasimirSolution, Hc: QuadraticHamiltonian
) -> AffineDynamics:
    """A = (J−R)Q + (J+R)K·A1·Kᵀ, c = (J−R)b + (J+R)K(A1κ + a2)."""
    _check_dims(plant, sol, Hc)
    coupling = (plant.J + plant.R) @ sol.K
    A = plant.drift_matrix + coupling @ Hc.Q @ sol.K.T
    c = (plant.J - plant.R) @ plant.ham.b + coupling @ (Hc.Q @ sol.kappa + Hc.b)
    return AffineDynamics(A, c)


def _es_transfer(plant: LtiPhSystem, sol: CasimirSolution, tol: Tolerances | None) -> Array:
    """(J−R)⁻¹(J+R)K."""
    return solve_checked(plant.J - plant.R, (plant.J + plant.R) @ sol.K, "J-R", SingularJR, tol)


def es_gradient(
    plant: LtiPhSystem,
    sol: CasimirSolution,
    Hc: QuadraticHamiltonian,
    x: ArrayLike,
    tol: Tolerances | None = None,
) -> Array:
    """Candidate ∇Hd(x) = ∇H(x) + (J−R)⁻¹(J+R)K·∇Hc(S(x)+κ)."""
    _check_dims(plant, sol, Hc)
    xv = as_vector(x, plant.n, "x")
    transfer = _es_transfer(plant, sol, tol)
    return plant.ham.gradient(xv) + transfer @ Hc.gradient(sol.S(xv) + sol.kappa)


def poincare_check(
    plant: LtiPhSystem,
    sol: CasimirSolution,
    Hc: QuadraticHamiltonian,
    tol: Tolerances | None = None,
) -> PoincareReport:
    """Jacobian M of the candidate gradient field and its asymmetry."""
    _check_dims(plant, sol, Hc)
    tol = resolve_tolerances(tol)
    M = plant.ham.Q + _es_transfer(plant, sol, tol) @ Hc.Q @ sol.K.T
    defect = sup_norm(M - M.T)
    band = tol.structural(sup_norm(M))
    return PoincareReport(frozen_array(M), defect, defect <= band, band)


def probe_points(center: ArrayLike) -> list[Array]:
    """Center and ± unit offsets along each axis."""
    c = np.asarray(center, dtype=float)
    points = [c.copy()]
    for i in range(c.shape[0]):
        step = np.zeros_like(c)
        step[i] = 1.0
        points.extend([c + step, c - step])
    return points


def match_residual(Jd: Array, Rd: Array, W: Array, x_bar: Array, A: Array, c: Array) -> float:
    """max over probes of ‖(Jd−Rd)W(x−x_bar) − (Ax+c)‖∞."""
    return max(
        sup_norm((Jd - Rd) @ W @ (x - x_bar) - (A @ x + c)) for x in probe_points(x_bar)
    )


def ida_decompose(
    A: ArrayLike, c: ArrayLike, W: ArrayLike, tol: Tolerances | None = None
) -> ShapedDynamics:
    """Split A·W⁻¹ into Jd − Rd and locate the minimizer of Hd."""
    tol = resolve_tolerances(tol)
    A_arr = as_matrix(A, None, None, "A")
    n = A_arr.shape[0]
    A_arr = as_matrix(A_arr, n, n, "A")
    c_vec = as_vector(c, n, "c")
    W_arr = as_matrix(W, n, n, "W")
    defect = sup_norm(W_arr - W_arr.T)
    if defect > tol.structural(sup_norm(W_arr)):
        raise NotSymmetric(f"Target Hessian W is not symmetric (defect {defect:.3e})", field="W")
    W_arr = symmetrize(W_arr)

    x_bar = -solve_checked(A_arr, c_vec, "A", SingularA, tol)
    F = solve_checked(W_arr, A_arr.T, "W", SingularW, tol).T
    Jd = skew_part(F)
    Rd = -symmetrize(F)

    residual = match_residual(Jd, Rd, W_arr, x_bar, A_arr, c_vec)
    logger.debug("IDA decomposition", n=n, match_residual=residual)
    return ShapedDynamics(
        Jd=frozen_array(Jd),
        Rd=frozen_array(Rd),
        W=frozen_array(W_arr),
        x_bar=frozen_array(x_bar),
        match_residual=residual,
        rd_verdict=definiteness(Rd, tol.sym_tol),
        hessian_verdict=definiteness(W_arr, tol.sym_tol),
        method=ShapingMethod.IDA,
    )


def es_shape(
    plant: LtiPhSystem,
    sol: CasimirSolution,
    Hc: QuadraticHamiltonian,
    tol: Tolerances | None = None,
) -> ShapedDynamics:
    """Energy-shaping form: Jd = J, Rd = R, Hd with Hessian M from the Poincaré test."""
    tol = resolve_tolerances(tol)
    report = poincare_check(plant, sol, Hc, tol)
    if not report.integrable:
        raise NotSymmetric(
            f"Candidate field is not a gradient (asymmetry {report.asym_defect:.3e})",
            field="M",
            context={"asym_defect": report.asym_defect},
        )
    W = symmetrize(report.M)
    g0 = es_gradient(plant, sol, Hc, np.zeros(plant.n), tol)
    x_bar = -solve_checked(W, g0, "W", SingularW, tol)
    A, c = closed_loop_plant_affine(plant, sol, Hc)
    residual = match_residual(plant.J, plant.R, W, x_bar, A, c)
    logger.debug("ES shaping", n=plant.n, match_residual=residual)
    return ShapedDynamics(
        Jd=plant.J,
        Rd=plant.R,
        W=frozen_array(W),
        x_bar=frozen_array(x_bar),
        match_residual=residual,
        rd_verdict=plant.passive,
        hessian_verdict=definiteness(W, tol.sym_tol),
        method=ShapingMethod.ES,
    )


def equilibrium_test(shaped: ShapedDynamics) -> StabilityVerdict:
    """Stability is declared for a positive-definite Hessian with Rd ⪰ 0."""
    reasons = []
    hessian_ok = shaped.hessian_verdict.is_positive_definite
    damping_ok = shaped.rd_verdict.is_positive_semidefinite
    hessian_cls = shaped.hessian_verdict.classification.value
    damping_cls = shaped.rd_verdict.classification.value
    reasons.append(
        f"Hessian of Hd is {hessian_cls}"
        + ("" if hessian_ok else ", positive-definite required")
    )
    reasons.append(
        f"Rd is {damping_cls}" + ("" if damping_ok else ", positive-semidefinite required")
    )
    return StabilityVerdict(hessian_ok and damping_ok, tuple(reasons))


def controller_equilibrium(sol: CasimirSolution, x_star: ArrayLike) -> Array:
    """ξ* = Kᵀx* + κ."""
    return sol.S(x_star) + sol.kappa
