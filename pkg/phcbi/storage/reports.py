"""Assembly of report.json from pipeline results."""

from datetime import datetime, timezone
from typing import Any

from phcbi.core.config import Tolerances, settings
from phcbi.core.exceptions import OracleMismatch, PhcbiException, create_error_payload
from phcbi.services.pipelines import DemoResult, SimulationResult, SynthesisResult, VerificationResult
from phcbi.storage.schemas import (
    CasimirSection,
    Command,
    ObstacleSection,
    OracleCheck,
    OracleSection,
    PoincareSection,
    Report,
    ShapingSection,
    SimulationSection,
    StabilitySection,
)


def new_report(
    command: Command, run_id: str, tol: Tolerances, inputs: dict[str, Any] | None = None
) -> Report:
    return Report(
        tool=settings.app_name,
        command=command,
        run_id=run_id,
        generated_at=datetime.now(timezone.utc),
        tolerances=tol.model_dump(),
        inputs=inputs or {},
    )


def add_synthesis(report: Report, result: SynthesisResult) -> Report:
    report.casimir = CasimirSection.model_validate(result.casimir.as_dict())
    report.obstacle = ObstacleSection.model_validate(result.obstacle.as_dict())
    if result.casimir.least_squares:
        report.notes.append("J+R singular: Casimir gradient from minimum-norm least squares")
    return report


def add_verification(report: Report, result: VerificationResult) -> Report:
    add_synthesis(report, result.synthesis)
    if result.poincare is not None:
        report.poincare = PoincareSection.model_validate(result.poincare.as_dict())
    if result.shaped is not None:
        report.shaping = ShapingSection.model_validate(result.shaped.as_dict())
    report.verdict = StabilitySection(
        label=result.verdict.label,
        declared=result.verdict.declared,
        reasons=list(result.verdict.reasons),
        path=None if result.path is None else result.path.value,
        controller_equilibrium=(
            None if result.controller_equilibrium is None else result.controller_equilibrium.tolist()
        ),
        controller_passive=result.controller_passive.value,
    )
    report.notes.extend(result.notes)
    return report


def add_simulation(report: Report, result: SimulationResult) -> Report:
    report.simulation = SimulationSection.model_validate(result.summary)
    return report


def add_divergence(report: Report, exc: PhcbiException) -> Report:
    report.simulation = SimulationSection(diverged=True, error=create_error_payload(exc))
    return report


def add_demo(report: Report, result: DemoResult) -> Report:
    add_verification(report, result.verification)
    if result.simulation is not None:
        add_simulation(report, result.simulation)
    elif result.divergence is not None:
        add_divergence(report, result.divergence)
    report.oracle = OracleSection(
        expected=result.oracle_expected,
        checks=[OracleCheck.model_validate(check.as_dict()) for check in result.checks],
        passed=result.passed,
    )
    if not result.passed:
        add_error(report, OracleMismatch([check.name for check in result.checks if not check.passed]))
    return report


def add_error(report: Report, exc: PhcbiException) -> Report:
    report.error = create_error_payload(exc)
    return report
