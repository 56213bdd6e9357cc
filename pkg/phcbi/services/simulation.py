"""Fixed-step RK4 integration of pH systems with conservation monitors."""

from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from phcbi.core.config import Tolerances, resolve_tolerances, settings
from phcbi.core.exceptions import ConfigError, DimensionMismatch, NonFinite
from phcbi.core.logging import get_logger
from phcbi.services.casimir import CasimirSolution
from phcbi.services.ph_core import (
    Array,
    LtiPhSystem,
    QuadraticHamiltonian,
    as_matrix,
    as_vector,
    frozen_array,
    sup_norm,
)

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled closed-loop (or open-loop) run.

    Rows of `x`, `xi` and `casimir_vals` align with `t`; `casimir_vals` has one
    column per Casimir (none for plant-only runs).
    """

    t: Array
    x: Array
    xi: Array
    H_vals: Array
    Hc_vals: Array
    casimir_vals: Array
    power_residual: Array
    supply_vals: Array
    dt: float
    plant_ham: QuadraticHamiltonian
    ctrl_ham: QuadraticHamiltonian

    @property
    def n(self) -> int:
        return int(self.x.shape[1])

    @property
    def n_c(self) -> int:
        return int(self.xi.shape[1])

    @property
    def samples(self) -> int:
        return int(self.t.shape[0])

    @property
    def final_state(self) -> tuple[Array, Array]:
        return self.x[-1], self.xi[-1]


@dataclass(frozen=True, eq=False)
class PowerFlows:
    """Energy-rate channels at interior grid points."""

    t: Array
    dE_dt: Array
    plant_dissipation: Array
    controller_supply: Array
    port_supply: Array

    @property
    def balance_defect(self) -> Array:
        return self.dE_dt - (self.plant_dissipation + self.controller_supply + self.port_supply)


def _quadratic_values(ham: QuadraticHamiltonian, X: Array) -> Array:
    if ham.dim == 0:
        return np.full(X.shape[0], ham.c0)
    return 0.5 * np.einsum("ij,jk,ik->i", X, ham.Q, X) + X @ ham.b + ham.c0


def _rk4_step(A: Array, c: Array, z: Array, h: float) -> Array:
    k1 = A @ z + c
    k2 = A @ (z + 0.5 * h * k1) + c
    k3 = A @ (z + 0.5 * h * k2) + c
    k4 = A @ (z + h * k3) + c
    return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def simulate(
    sys: LtiPhSystem,
    z0: ArrayLike,
    dt: float | None = None,
    t_final: float | None = None,
    *,
    u: ArrayLike | None = None,
    casimir: CasimirSolution | None = None,
    tol: Tolerances | None = None,
) -> Trajectory:
    """Integrate with classic fixed-step RK4 and evaluate monitors on the grid.

    Interconnected systems (those built by ``feedback_interconnect``) are split
    into plant and controller states; a `casimir` solution adds C = ξ − Kᵀx.
    """
    tol = resolve_tolerances(tol)
    h = settings.dt if dt is None else float(dt)
    horizon = settings.t_final if t_final is None else float(t_final)
    if not np.isfinite(h) or h <= 0:
        raise ConfigError(f"dt must be positive, got {h}", field="dt")
    if not np.isfinite(horizon) or horizon < h:
        raise ConfigError(f"t_final must be at least dt, got {horizon}", field="t_final")

    z = as_vector(z0, sys.n, "z0").copy()
    uu = np.zeros(sys.m) if u is None else as_vector(u, sys.m, "u")
    A = sys.drift_matrix
    c = sys.affine_term(uu)

    steps = max(int(round(horizon / h)), 1)
    Z = np.empty((steps + 1, sys.n))
    Z[0] = z
    for k in range(1, steps + 1):
        z = _rk4_step(A, c, z, h)
        if not np.all(np.isfinite(z)) or sup_norm(z) > tol.overflow_guard:
            logger.warning("Integration diverged", step=k, t=k * h)
            raise NonFinite(
                f"State left the overflow guard {tol.overflow_guard:.1e} at t={k * h:.6g}",
                context={"step": k, "t": k * h, "guard": tol.overflow_guard},
            )
        Z[k] = z
    t = h * np.arange(steps + 1)

    if len(sys.components) == 2:
        plant, ctrl = sys.components
        n_p, plant_ham, ctrl_ham = plant.n, plant.ham, ctrl.ham
    else:
        n_p, plant_ham, ctrl_ham = sys.n, sys.ham, QuadraticHamiltonian.zero(0)
    X, XI = Z[:, :n_p], Z[:, n_p:]

    if casimir is not None:
        if casimir.n != n_p or casimir.n_c != XI.shape[1]:
            raise DimensionMismatch(
                f"Casimir is {casimir.n}x{casimir.n_c}, trajectory splits into {n_p}+{XI.shape[1]}",
                field="casimir",
            )
        C = XI - X @ casimir.K
    else:
        C = np.zeros((Z.shape[0], XI.shape[1]))

    grads = Z @ sys.ham.Q + sys.ham.b
    zdot = Z @ A.T + c
    supply = (grads @ sys.G) @ uu
    dissipation = -np.einsum("ij,jk,ik->i", grads, sys.R, grads)
    residual = np.einsum("ij,ij->i", grads, zdot) - (dissipation + supply)

    logger.info(
        "Simulation finished",
        steps=steps,
        dt=h,
        t_final=float(t[-1]),
        final_norm=sup_norm(Z[-1]),
    )
    return Trajectory(
        t=frozen_array(t),
        x=frozen_array(X),
        xi=frozen_array(XI),
        H_vals=frozen_array(_quadratic_values(plant_ham, X)),
        Hc_vals=frozen_array(_quadratic_values(ctrl_ham, XI)),
        casimir_vals=frozen_array(C),
        power_residual=frozen_array(residual),
        supply_vals=frozen_array(supply),
        dt=h,
        plant_ham=plant_ham,
        ctrl_ham=ctrl_ham,
    )


def casimir_drift(traj: Trajectory) -> float:
    """max_t |C(t) − C(0)|."""
    if traj.casimir_vals.size == 0:
        return 0.0
    return sup_norm(traj.casimir_vals - traj.casimir_vals[0])


def power_flows(traj: Trajectory, R_plant: ArrayLike, Rc: ArrayLike) -> PowerFlows:
    """Central-difference d(H+Hc)/dt next to the dissipation and supply it should equal."""
    R = as_matrix(R_plant, traj.n, traj.n, "R_plant") if traj.n else np.zeros((0, 0))
    Rc_arr = as_matrix(Rc, traj.n_c, traj.n_c, "Rc") if traj.n_c else np.zeros((0, 0))
    if traj.samples < 3:
        empty = np.zeros(0)
        return PowerFlows(empty, empty, empty, empty, empty)

    energy = traj.H_vals + traj.Hc_vals
    dE = (energy[2:] - energy[:-2]) / (2.0 * traj.dt)
    gx = traj.x[1:-1] @ traj.plant_ham.Q + traj.plant_ham.b
    gxi = traj.xi[1:-1] @ traj.ctrl_ham.Q + traj.ctrl_ham.b
    plant_diss = -np.einsum("ij,jk,ik->i", gx, R, gx)
    ctrl_supply = -np.einsum("ij,jk,ik->i", gxi, Rc_arr, gxi)
    return PowerFlows(
        t=traj.t[1:-1],
        dE_dt=dE,
        plant_dissipation=plant_diss,
        controller_supply=ctrl_supply,
        port_supply=np.asarray(traj.supply_vals[1:-1]),
    )


def energy_audit(traj: Trajectory, R_plant: ArrayLike, Rc: ArrayLike) -> float:
    """max |d(H+Hc)/dt − (−∇HᵀR∇H − ∇HcᵀRc∇Hc + yᵀu)| over interior points."""
    flows = power_flows(traj, R_plant, Rc)
    return sup_norm(flows.balance_defect)


def summarize(traj: Trajectory, R_plant: ArrayLike, Rc: ArrayLike) -> dict[str, Any]:
    """Final state and conservation figures for reports."""
    x_final, xi_final = traj.final_state
    return {
        "samples": traj.samples,
        "dt": traj.dt,
        "t_final": float(traj.t[-1]),
        "x_final": x_final.tolist(),
        "xi_final": xi_final.tolist(),
        "casimir_drift": casimir_drift(traj),
        "energy_audit": energy_audit(traj, R_plant, Rc),
        "max_power_residual": sup_norm(traj.power_residual),
    }
