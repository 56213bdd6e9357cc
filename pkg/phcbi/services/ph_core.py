"""Linear port-Hamiltonian systems: data model, structural checks and shared numerics."""

from dataclasses import InitVar, dataclass, field, replace
from enum import Enum
from typing import Any

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from phcbi.core.config import Tolerances, resolve_tolerances
from phcbi.core.exceptions import (
    DimensionMismatch,
    NotSymmetric,
    PortMismatch,
    SingularDynamics,
    SkewViolation,
    SymViolation,
)
from phcbi.core.logging import get_logger

logger = get_logger(__name__)

Array = NDArray[np.float64]


# Shared numerics

def sup_norm(value: ArrayLike) -> float:
    """Entry-wise max-abs norm; zero for empty arrays."""
    arr = np.asarray(value, dtype=float)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def symmetrize(M: ArrayLike) -> Array:
    arr = np.asarray(M, dtype=float)
    return 0.5 * (arr + arr.T)


def skew_part(M: ArrayLike) -> Array:
    arr = np.asarray(M, dtype=float)
    return 0.5 * (arr - arr.T)


def is_skew(M: ArrayLike, tol: Tolerances | None = None) -> bool:
    arr = np.asarray(M, dtype=float)
    return sup_norm(arr + arr.T) <= resolve_tolerances(tol).structural(sup_norm(arr))


def is_symmetric(M: ArrayLike, tol: Tolerances | None = None) -> bool:
    arr = np.asarray(M, dtype=float)
    return sup_norm(arr - arr.T) <= resolve_tolerances(tol).structural(sup_norm(arr))


def frozen_array(value: ArrayLike) -> Array:
    """Float copy that cannot be written through."""
    arr = np.array(value, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


def as_matrix(value: ArrayLike, rows: int | None, cols: int | None, name: str) -> Array:
    """Coerce to a 2-D float array and check its shape.

    Scalars become 1×1 and 1-D input of the right length becomes a column
    when `cols` is 1 or unspecified.
    """
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        if cols in (None, 1) and (rows is None or arr.shape[0] == rows):
            arr = arr.reshape(-1, 1)
        else:
            arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be a matrix, got ndim={arr.ndim}", field=name)
    if (rows is not None and arr.shape[0] != rows) or (cols is not None and arr.shape[1] != cols):
        raise DimensionMismatch(
            f"{name} has shape {arr.shape}, expected ({rows}, {cols})",
            field=name,
            context={"shape": list(arr.shape), "expected": [rows, cols]},
        )
    return arr


def as_vector(value: ArrayLike, size: int, name: str) -> Array:
    """Coerce to a 1-D float array of the given length."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    arr = arr.reshape(-1) if arr.ndim == 2 and 1 in arr.shape else arr
    if arr.ndim != 1 or arr.shape[0] != size:
        raise DimensionMismatch(
            f"{name} has shape {arr.shape}, expected ({size},)",
            field=name,
            context={"shape": list(arr.shape), "expected": [size]},
        )
    return arr


def reciprocal_condition(A: ArrayLike) -> float:
    """Reciprocal 2-norm condition number (0 for exactly singular matrices)."""
    arr = np.asarray(A, dtype=float)
    if arr.size == 0:
        return 1.0
    cond = np.linalg.cond(arr)
    return 0.0 if not np.isfinite(cond) else float(1.0 / cond)


def solve_checked(
    A: ArrayLike,
    rhs: ArrayLike,
    what: str,
    error: type[SingularDynamics] = SingularDynamics,
    tol: Tolerances | None = None,
) -> Array:
    """Solve A·X = rhs, raising `error` when A is singular beyond cond_tol."""
    tol = resolve_tolerances(tol)
    A_arr = np.asarray(A, dtype=float)
    rhs_arr = np.asarray(rhs, dtype=float)
    if A_arr.size == 0:
        return np.zeros_like(rhs_arr)
    rcond = reciprocal_condition(A_arr)
    if rcond < tol.cond_tol:
        raise error(f"{what} is singular (rcond={rcond:.3e} < {tol.cond_tol:.1e})", rcond=rcond, field=what)
    return scipy.linalg.solve(A_arr, rhs_arr)


# Definiteness

class Definiteness(str, Enum):
    """Sign classification of a symmetric matrix."""

    POSITIVE_DEFINITE = "positive-definite"
    POSITIVE_SEMIDEFINITE = "positive-semidefinite"
    INDEFINITE = "indefinite"
    NEGATIVE_SEMIDEFINITE = "negative-semidefinite"
    NEGATIVE_DEFINITE = "negative-definite"


@dataclass(frozen=True)
class DefinitenessVerdict:
    """Definiteness of a symmetric matrix; `tol_used` is the absolute eigenvalue band."""

    classification: Definiteness
    min_eig: float
    max_eig: float
    tol_used: float

    @property
    def is_positive_definite(self) -> bool:
        return self.classification is Definiteness.POSITIVE_DEFINITE

    @property
    def is_positive_semidefinite(self) -> bool:
        return self.min_eig >= -self.tol_used

    @property
    def is_negative_semidefinite(self) -> bool:
        return self.max_eig <= self.tol_used

    def as_dict(self) -> dict[str, Any]:
        return {
            "classification": self.classification.value,
            "min_eig": self.min_eig,
            "max_eig": self.max_eig,
            "tol_used": self.tol_used,
        }


def definiteness(M: ArrayLike, tol: float | None = None) -> DefinitenessVerdict:
    """Classify a symmetric matrix from its eigenvalue spectrum.

    Eigenvalues within ``tol·(1+‖M‖∞)`` of zero count as zero. Empty and zero
    matrices are positive-semidefinite.
    """
    rel = resolve_tolerances(None).sym_tol if tol is None else tol
    arr = np.asarray(M, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"definiteness needs a square matrix, got {arr.shape}")
    scale = sup_norm(arr)
    band = rel * (1.0 + scale)
    defect = sup_norm(arr - arr.T)
    if defect > band:
        raise NotSymmetric(
            f"Matrix is not symmetric (defect {defect:.3e} > {band:.3e})",
            context={"defect": defect, "tol": band},
        )
    if arr.size == 0:
        return DefinitenessVerdict(Definiteness.POSITIVE_SEMIDEFINITE, 0.0, 0.0, band)

    eigs = np.linalg.eigvalsh(symmetrize(arr))
    lo, hi = float(eigs[0]), float(eigs[-1])
    if lo > band:
        cls = Definiteness.POSITIVE_DEFINITE
    elif lo >= -band:
        cls = Definiteness.POSITIVE_SEMIDEFINITE
    elif hi < -band:
        cls = Definiteness.NEGATIVE_DEFINITE
    elif hi <= band:
        cls = Definiteness.NEGATIVE_SEMIDEFINITE
    else:
        cls = Definiteness.INDEFINITE
    return DefinitenessVerdict(cls, lo, hi, band)


# Data model

@dataclass(frozen=True, eq=False)
class QuadraticHamiltonian:
    """H(x) = ½xᵀQx + bᵀx + c0 with symmetric Q."""

    Q: Array
    b: Array
    c0: float = 0.0
    tol: InitVar[Tolerances | None] = None

    def __post_init__(self, tol: Tolerances | None) -> None:
        Q = as_matrix(self.Q, None, None, "Q")
        if Q.shape[0] != Q.shape[1]:
            raise DimensionMismatch(f"Q must be square, got {Q.shape}", field="Q")
        n = Q.shape[0]
        b = as_vector(self.b, n, "b")
        defect = sup_norm(Q - Q.T)
        if defect > resolve_tolerances(tol).structural(sup_norm(Q)):
            raise NotSymmetric(f"Hamiltonian curvature Q is not symmetric (defect {defect:.3e})", field="Q")
        object.__setattr__(self, "Q", frozen_array(symmetrize(Q)))
        object.__setattr__(self, "b", frozen_array(b))
        object.__setattr__(self, "c0", float(self.c0))

    @classmethod
    def zero(cls, n: int) -> "QuadraticHamiltonian":
        return cls(np.zeros((n, n)), np.zeros(n))

    @classmethod
    def from_coefficients(
        cls, a1: ArrayLike, a2: ArrayLike, tol: Tolerances | None = None
    ) -> "QuadraticHamiltonian":
        """Controller energy ½ξᵀA1ξ + a2ᵀξ."""
        b = np.atleast_1d(np.asarray(a2, dtype=float)).reshape(-1)
        return cls(as_matrix(a1, b.shape[0], b.shape[0], "a1"), b, tol=tol)

    @property
    def dim(self) -> int:
        return int(self.Q.shape[0])

    def energy(self, x: ArrayLike) -> float:
        v = as_vector(x, self.dim, "x")
        return float(0.5 * v @ self.Q @ v + self.b @ v + self.c0)

    def gradient(self, x: ArrayLike) -> Array:
        v = as_vector(x, self.dim, "x")
        return self.Q @ v + self.b


@dataclass(frozen=True, eq=False)
class LtiPhSystem:
    """ẋ = (J−R)∇H + Gu, y = Gᵀ∇H with constant matrices.

    Build through :func:`validate_structure`; `passive` records the verdict on R,
    it is not enforced.
    """

    J: Array
    R: Array
    G: Array
    ham: QuadraticHamiltonian
    passive: DefinitenessVerdict
    components: tuple["LtiPhSystem", ...] = field(default=(), repr=False)

    @property
    def n(self) -> int:
        return int(self.J.shape[0])

    @property
    def m(self) -> int:
        return int(self.G.shape[1])

    @property
    def is_passive(self) -> bool:
        return self.passive.is_positive_semidefinite

    @property
    def drift_matrix(self) -> Array:
        """(J−R)Q, the linear part of the vector field."""
        return (self.J - self.R) @ self.ham.Q

    def affine_term(self, u: ArrayLike | None = None) -> Array:
        """(J−R)b + Gu, the constant part of the vector field for a fixed input."""
        uu = np.zeros(self.m) if u is None else as_vector(u, self.m, "u")
        return (self.J - self.R) @ self.ham.b + self.G @ uu


def validate_structure(
    J: ArrayLike,
    R: ArrayLike,
    G: ArrayLike,
    ham: QuadraticHamiltonian,
    tol: Tolerances | None = None,
) -> LtiPhSystem:
    """Check skew/symmetry and dimensions, then build an immutable system."""
    tol = resolve_tolerances(tol)
    J_arr = as_matrix(J, None, None, "J")
    n = J_arr.shape[0]
    if J_arr.shape[1] != n:
        raise DimensionMismatch(f"J must be square, got {J_arr.shape}", field="J")
    R_arr = as_matrix(R, n, n, "R")
    G_arr = np.zeros((n, 0)) if np.asarray(G).size == 0 else as_matrix(G, n, None, "G")
    if ham.dim != n:
        raise DimensionMismatch(f"Hamiltonian has dimension {ham.dim}, system has n={n}", field="Q")

    skew_defect = sup_norm(J_arr + J_arr.T)
    skew_band = tol.structural(sup_norm(J_arr))
    if skew_defect > skew_band:
        raise SkewViolation(
            f"J is not skew-symmetric: ‖J+Jᵀ‖∞ = {skew_defect:.3e} > {skew_band:.3e}",
            context={"defect": skew_defect, "tol": skew_band},
        )
    sym_defect = sup_norm(R_arr - R_arr.T)
    sym_band = tol.structural(sup_norm(R_arr))
    if sym_defect > sym_band:
        raise SymViolation(
            f"R is not symmetric: ‖R−Rᵀ‖∞ = {sym_defect:.3e} > {sym_band:.3e}",
            context={"defect": sym_defect, "tol": sym_band},
        )

    R_clean = symmetrize(R_arr)
    verdict = definiteness(R_clean, tol.sym_tol)
    logger.debug("Validated pH structure", n=n, m=G_arr.shape[1], passive=verdict.classification.value)
    return LtiPhSystem(
        J=frozen_array(skew_part(J_arr)),
        R=frozen_array(R_clean),
        G=frozen_array(G_arr),
        ham=ham,
        passive=verdict,
    )


# Operations

def vector_field(sys: LtiPhSystem, x: ArrayLike, u: ArrayLike | None = None) -> Array:
    """(J−R)(Qx+b) + Gu; `u` defaults to zero."""
    grad = sys.ham.gradient(as_vector(x, sys.n, "x"))
    uu = np.zeros(sys.m) if u is None else as_vector(u, sys.m, "u")
    return (sys.J - sys.R) @ grad + sys.G @ uu


def output(sys: LtiPhSystem, x: ArrayLike) -> Array:
    """Gᵀ(Qx+b)."""
    return sys.G.T @ sys.ham.gradient(as_vector(x, sys.n, "x"))


def equilibrium_for_input(sys: LtiPhSystem, u_star: ArrayLike, tol: Tolerances | None = None) -> Array:
    """State x* with (J−R)(Qx*+b) + Gu* = 0."""
    rhs = -sys.affine_term(u_star)
    return solve_checked(sys.drift_matrix, rhs, "(J-R)Q", SingularDynamics, tol)


def feedback_interconnect(
    plant: LtiPhSystem, ctrl: LtiPhSystem, tol: Tolerances | None = None
) -> LtiPhSystem:
    """Close the loop u = −y_c, u_c = y; the result is autonomous (zero input columns)."""
    if plant.m != ctrl.m:
        raise PortMismatch(plant.m, ctrl.m)

    coupling = plant.G @ ctrl.G.T
    J_cl = np.block([[plant.J, -coupling], [coupling.T, ctrl.J]])
    R_cl = scipy.linalg.block_diag(plant.R, ctrl.R)
    ham_cl = QuadraticHamiltonian(
        scipy.linalg.block_diag(plant.ham.Q, ctrl.ham.Q),
        np.concatenate([plant.ham.b, ctrl.ham.b]),
        plant.ham.c0 + ctrl.ham.c0,
        tol=tol,
    )
    closed = validate_structure(J_cl, R_cl, np.zeros((plant.n + ctrl.n, 0)), ham_cl, tol)
    logger.debug("Interconnected plant and controller", n=plant.n, n_c=ctrl.n, m=plant.m)
    return replace(closed, components=(plant, ctrl))
