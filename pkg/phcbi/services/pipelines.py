"""Synthesis, verification, simulation and benchmark pipelines behind the CLI."""

from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from phcbi.core.config import Tolerances, resolve_tolerances
from phcbi.core.exceptions import NonFinite, SingularA, SingularJR, SingularW
from phcbi.core.logging import get_logger
from phcbi.services.casimir import (
    CasimirSolution,
    ObstacleReport,
    build_controller,
    casimir_level,
    obstacle_check,
    solve_casimir,
)
from phcbi.services.ph_core import (
    Array,
    Definiteness,
    LtiPhSystem,
    QuadraticHamiltonian,
    as_vector,
    definiteness,
    feedback_interconnect,
    output,
    sup_norm,
    vector_field,
)
from phcbi.services.rlc_bench import RlcParams, feedforward_case, make_rlc, output_feedback_case
from phcbi.services.shaping import (
    PoincareReport,
    ShapedDynamics,
    ShapingMethod,
    StabilityVerdict,
    closed_loop_plant_affine,
    controller_equilibrium,
    equilibrium_test,
    es_shape,
    ida_decompose,
    poincare_check,
)
from phcbi.services.simulation import Trajectory, simulate, summarize

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class SynthesisResult:
    casimir: CasimirSolution
    obstacle: ObstacleReport


@dataclass(frozen=True, eq=False)
class VerificationResult:
    """Everything the verification pipeline established, in the order it ran."""

    synthesis: SynthesisResult
    poincare: PoincareReport | None
    shaped: ShapedDynamics | None
    verdict: StabilityVerdict
    controller_equilibrium: Array | None
    controller_passive: Definiteness
    notes: tuple[str, ...] = ()

    @property
    def path(self) -> ShapingMethod | None:
        return None if self.shaped is None else self.shaped.method


@dataclass(frozen=True, eq=False)
class SimulationResult:
    system: LtiPhSystem
    trajectory: Trajectory
    casimir: CasimirSolution | None
    summary: dict[str, Any]


@dataclass(frozen=True)
class OracleComparison:
    """Computed value against its closed form, within rtol·(1+‖expected‖∞)."""

    name: str
    expected: Any
    actual: Any
    abs_diff: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.abs_diff <= self.tol)

    def as_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "expected": self.expected,
            "actual": self.actual,
            "abs_diff": self.abs_diff,
            "tol": self.tol,
            "passed": self.passed,
        }


@dataclass(frozen=True, eq=False)
class DemoResult:
    name: str
    params: RlcParams
    inputs: dict[str, Any]
    plant: LtiPhSystem
    verification: VerificationResult
    oracle_expected: dict[str, Any]
    checks: tuple[OracleComparison, ...]
    simulation: SimulationResult | None = None
    divergence: NonFinite | None = None

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


def _jsonable(value: Any) -> Any:
    arr = np.asarray(value, dtype=float)
    return float(arr) if arr.ndim == 0 else arr.tolist()


def compare(name: str, expected: ArrayLike, actual: ArrayLike, rtol: float) -> OracleComparison:
    exp = np.asarray(expected, dtype=float)
    act = np.asarray(actual, dtype=float)
    diff = sup_norm(act - exp) if exp.shape == act.shape else float("inf")
    return OracleComparison(
        name=name,
        expected=_jsonable(exp),
        actual=_jsonable(act),
        abs_diff=diff if np.isfinite(diff) else float("inf"),
        tol=rtol * (1.0 + sup_norm(exp)),
    )


class ControlDesignService:
    """Runs the Casimir-based design pipelines with one set of tolerances."""

    def __init__(self, tol: Tolerances | None = None):
        self.tol = resolve_tolerances(tol)

    def synthesize(
        self, plant: LtiPhSystem, Gc: ArrayLike, kappa: ArrayLike | None = None
    ) -> SynthesisResult:
        """Solve for the linear Casimir and classify it against the dissipation obstacle."""
        sol = solve_casimir(plant, Gc, kappa, self.tol)
        report = obstacle_check(plant, sol, self.tol)
        logger.info(
            "Synthesized Casimir controller",
            n=plant.n,
            n_c=sol.n_c,
            classification=report.classification.value,
            exact=sol.exact,
        )
        return SynthesisResult(sol, report)

    def verify(
        self,
        plant: LtiPhSystem,
        Gc: ArrayLike,
        Hc: QuadraticHamiltonian,
        kappa: ArrayLike | None = None,
        W: ArrayLike | None = None,
    ) -> VerificationResult:
        """
        Casimir, obstacle, Poincaré test, then the ES form when the candidate
        field is a gradient and the IDA form otherwise, and finally the
        stability verdict.

        Args:
            plant: Plant system
            Gc: Controller port gain
            Hc: Controller Hamiltonian
            kappa: Casimir level, zero when omitted
            W: Target Hessian for the IDA form, the plant's Q when omitted

        Returns:
            VerificationResult: Reports of every stage plus the verdict
        """
        synthesis = self.synthesize(plant, Gc, kappa)
        sol = synthesis.casimir
        notes: list[str] = []

        poincare: PoincareReport | None = None
        try:
            poincare = poincare_check(plant, sol, Hc, self.tol)
        except SingularJR as exc:
            notes.append(f"ES path skipped: {exc.message}")
            logger.warning("Skipping energy-shaping path", reason=exc.message)

        shaped: ShapedDynamics | None = None
        if poincare is not None and poincare.integrable:
            try:
                shaped = es_shape(plant, sol, Hc, self.tol)
            except SingularW as exc:
                notes.append(f"ES Hessian has no unique critical point: {exc.message}")
        elif poincare is not None:
            notes.append(
                f"Candidate field is not a gradient (asymmetry {poincare.asym_defect:.3e}), using IDA"
            )

        if shaped is None:
            A, c = closed_loop_plant_affine(plant, sol, Hc)
            target = plant.ham.Q if W is None else W
            try:
                shaped = ida_decompose(A, c, target, self.tol)
            except (SingularA, SingularW) as exc:
                notes.append(f"IDA form unavailable: {exc.message}")
                logger.warning("IDA decomposition failed", reason=exc.message)

        if shaped is None:
            verdict = StabilityVerdict(False, ("no shaped closed-loop form available",))
            xi_star = None
        else:
            verdict = equilibrium_test(shaped)
            xi_star = controller_equilibrium(sol, shaped.x_bar)

        result = VerificationResult(
            synthesis=synthesis,
            poincare=poincare,
            shaped=shaped,
            verdict=verdict,
            controller_equilibrium=xi_star,
            controller_passive=definiteness(sol.Rc, self.tol.sym_tol).classification,
            notes=tuple(notes),
        )
        logger.info(
            "Verification finished",
            path=None if result.path is None else result.path.value,
            verdict=verdict.label,
        )
        return result

    def simulate_closed_loop(
        self,
        plant: LtiPhSystem,
        sol: CasimirSolution,
        Hc: QuadraticHamiltonian,
        x0: ArrayLike | None = None,
        xi0: ArrayLike | None = None,
        dt: float | None = None,
        t_final: float | None = None,
    ) -> SimulationResult:
        """Interconnect plant and Casimir controller and integrate.

        Without `xi0` the controller starts on the solution's level set; with
        it, κ is re-read from the initial condition.
        """
        x_init = np.zeros(plant.n) if x0 is None else as_vector(x0, plant.n, "x0")
        if xi0 is None:
            xi_init = controller_equilibrium(sol, x_init)
        else:
            xi_init = as_vector(xi0, sol.n_c, "xi0")
            sol = sol.with_kappa(casimir_level(sol.K, x_init, xi_init))

        controller = build_controller(sol, Hc, self.tol)
        closed = feedback_interconnect(plant, controller, self.tol)
        traj = simulate(
            closed, np.concatenate([x_init, xi_init]), dt, t_final, casimir=sol, tol=self.tol
        )
        return SimulationResult(closed, traj, sol, summarize(traj, plant.R, sol.Rc))

    def simulate_open_loop(
        self,
        plant: LtiPhSystem,
        x0: ArrayLike | None = None,
        u: ArrayLike | None = None,
        dt: float | None = None,
        t_final: float | None = None,
    ) -> SimulationResult:
        """Plant alone under a constant input."""
        x_init = np.zeros(plant.n) if x0 is None else as_vector(x0, plant.n, "x0")
        traj = simulate(plant, x_init, dt, t_final, u=u, tol=self.tol)
        return SimulationResult(plant, traj, None, summarize(traj, plant.R, np.zeros((0, 0))))

    def run_demo(
        self,
        name: str,
        params: RlcParams,
        a1: float = -1.0,
        a2: float = -1.0,
        Gc: float = 1.0,
        x0: ArrayLike | None = None,
        xi0: ArrayLike | None = None,
        dt: float | None = None,
        t_final: float | None = None,
    ) -> DemoResult:
        """Run an RLC benchmark end to end and diff every quantity against its closed form.

        `a1`, `a2` and `Gc` apply to ``rlc-of`` only. Divergence of the
        simulated loop is recorded on the result, not raised.
        """
        rtol = self.tol.oracle_rtol
        checks: list[OracleComparison] = []

        if name == "rlc-ff":
            ff = feedforward_case(params, self.tol)
            plant = make_rlc(params, self.tol)
            Hc, oracle = ff.Hc, ff.oracle
            verification = self.verify(plant, ff.casimir.Gc, Hc)
            sol = verification.synthesis.casimir
            controller = build_controller(sol, Hc, self.tol)
            inputs: dict[str, Any] = {"demo": name, **params.as_dict(), "Gc": -params.u_star}
            expected = {
                **oracle.as_dict(),
                "controller_output": ff.expected_output,
                "controller_drift": ff.expected_drift,
                "controller_gain": ff.expected_gain,
            }
            if verification.shaped is not None:
                x_bar = verification.shaped.x_bar
                xi_star = controller_equilibrium(sol, x_bar)
                drift = vector_field(controller, xi_star)
                checks += [
                    compare("x_star", ff.expected_minimizer, x_bar, rtol),
                    compare("xi_star", oracle.xi_star, xi_star[0], rtol),
                    compare("controller_output", ff.expected_output, output(controller, xi_star)[0], rtol),
                    compare("controller_drift", ff.expected_drift, drift[0], rtol),
                    compare(
                        "controller_gain",
                        ff.expected_gain,
                        (vector_field(controller, xi_star, [1.0]) - drift)[0],
                        rtol,
                    ),
                ]
        else:
            of = output_feedback_case(params, a1, a2, Gc, self.tol)
            plant = make_rlc(params, self.tol)
            Hc, oracle = of.Hc, of.oracle
            verification = self.verify(plant, [[Gc]], Hc)
            sol = verification.synthesis.casimir
            inputs = {"demo": name, **params.as_dict(), "a1": a1, "a2": a2, "Gc": Gc}
            expected = oracle.as_dict()
            A, c = closed_loop_plant_affine(plant, sol, Hc)
            ida = ida_decompose(A, c, plant.ham.Q, self.tol)
            checks += [
                compare("Jd", of.Jd_expected, ida.Jd, rtol),
                compare("Rd", of.Rd_expected, ida.Rd, rtol),
                compare("minimizer", of.expected_minimizer, ida.x_bar, rtol),
                compare("match_residual", 0.0, ida.match_residual, rtol),
            ]

        checks = [
            compare("K", oracle.K_expected, sol.K, rtol),
            compare("Rc", oracle.Rc_expected, sol.Rc[0, 0], rtol),
            compare("Jc", 0.0, sol.Jc[0, 0], rtol),
            *checks,
        ]

        simulation: SimulationResult | None = None
        divergence: NonFinite | None = None
        try:
            simulation = self.simulate_closed_loop(plant, sol, Hc, x0, xi0, dt, t_final)
        except NonFinite as exc:
            divergence = exc
            logger.warning("Demo closed loop diverged", error=exc.message, **exc.context)

        result = DemoResult(
            name=name,
            params=params,
            inputs=inputs,
            plant=plant,
            verification=verification,
            oracle_expected=expected,
            checks=tuple(checks),
            simulation=simulation,
            divergence=divergence,
        )
        failed = [check.name for check in result.checks if not check.passed]
        if failed:
            logger.warning("Oracle mismatch", demo=name, failed=failed)
        else:
            logger.info("Oracle checks passed", demo=name, checks=len(result.checks))
        return result
