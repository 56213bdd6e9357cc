"""Error taxonomy and exit-code mapping for the command-line tool."""

import traceback
from datetime import datetime, timezone
from enum import Enum, IntEnum
from typing import Any

from pydantic import ValidationError as PydanticValidationError

from phcbi.core.logging import get_logger, log_error

logger = get_logger(__name__)


class ExitCode(IntEnum):
    """Process exit codes."""

    OK = 0
    INPUT_ERROR = 1
    ORACLE_MISMATCH = 2
    DIVERGENCE = 3


class ErrorCode(str, Enum):
    """Standardized error codes."""

    # Structure
    SKEW_VIOLATION = "SKEW_VIOLATION"
    SYM_VIOLATION = "SYM_VIOLATION"
    NOT_SYMMETRIC = "NOT_SYMMETRIC"
    DIMENSION_MISMATCH = "DIMENSION_MISMATCH"
    PORT_MISMATCH = "PORT_MISMATCH"

    # Linear algebra
    SINGULAR_DYNAMICS = "SINGULAR_DYNAMICS"
    SINGULAR_JR = "SINGULAR_JR"
    SINGULAR_A = "SINGULAR_A"
    SINGULAR_W = "SINGULAR_W"

    # Simulation
    NON_FINITE = "NON_FINITE"

    # Benchmark parameters
    BAD_PARAM = "BAD_PARAM"
    DEGENERATE_ALPHA = "DEGENERATE_ALPHA"

    # Inputs and results
    MODEL_FILE_ERROR = "MODEL_FILE_ERROR"
    CONFIG_ERROR = "CONFIG_ERROR"
    ORACLE_MISMATCH = "ORACLE_MISMATCH"
    INTERNAL_ERROR = "INTERNAL_ERROR"


class PhcbiException(Exception):
    """Base exception carrying an error code and the exit code it maps to."""

    def __init__(
        self,
        message: str,
        error_code: ErrorCode = ErrorCode.INTERNAL_ERROR,
        exit_code: ExitCode = ExitCode.INPUT_ERROR,
        field: str | None = None,
        context: dict[str, Any] | None = None,
    ):
        self.message = message
        self.error_code = error_code
        self.exit_code = exit_code
        self.field = field
        self.context = context or {}
        self.timestamp = datetime.now(timezone.utc)

        super().__init__(message)


class SkewViolation(PhcbiException):
    """Interconnection matrix is not skew-symmetric."""

    def __init__(self, message: str, field: str = "J", context: dict[str, Any] | None = None):
        super().__init__(message, ErrorCode.SKEW_VIOLATION, field=field, context=context)


class SymViolation(PhcbiException):
    """Resistive matrix is not symmetric."""

    def __init__(self, message: str, field: str = "R", context: dict[str, Any] | None = None):
        super().__init__(message, ErrorCode.SYM_VIOLATION, field=field, context=context)


class NotSymmetric(PhcbiException):
    """A matrix required to be symmetric is not."""

    def __init__(self, message: str, field: str | None = None, context: dict[str, Any] | None = None):
        super().__init__(message, ErrorCode.NOT_SYMMETRIC, field=field, context=context)


class DimensionMismatch(PhcbiException):
    """Array shapes are inconsistent."""

    def __init__(self, message: str, field: str | None = None, context: dict[str, Any] | None = None):
        super().__init__(message, ErrorCode.DIMENSION_MISMATCH, field=field, context=context)


class PortMismatch(PhcbiException):
    """Plant and controller port dimensions differ."""

    def __init__(self, plant_ports: int, controller_ports: int):
        super().__init__(
            f"Port dimensions differ: plant m={plant_ports}, controller m_c={controller_ports}",
            ErrorCode.PORT_MISMATCH,
            context={"m": plant_ports, "m_c": controller_ports},
        )


class SingularDynamics(PhcbiException):
    """A matrix that must be inverted is singular beyond the condition threshold."""

    code = ErrorCode.SINGULAR_DYNAMICS

    def __init__(self, message: str, rcond: float | None = None, field: str | None = None):
        super().__init__(message, self.code, field=field, context={"rcond": rcond})
        self.rcond = rcond


class SingularJR(SingularDynamics):
    """J − R is singular; the energy-shaping form is unavailable."""

    code = ErrorCode.SINGULAR_JR


class SingularA(SingularDynamics):
    """Closed-loop drift matrix is singular; no isolated equilibrium."""

    code = ErrorCode.SINGULAR_A


class SingularW(SingularDynamics):
    """Target Hessian is singular."""

    code = ErrorCode.SINGULAR_W


class NonFinite(PhcbiException):
    """Integration diverged past the overflow guard."""

    def __init__(self, message: str, context: dict[str, Any] | None = None):
        super().__init__(
            message, ErrorCode.NON_FINITE, exit_code=ExitCode.DIVERGENCE, context=context
        )


class BadParam(PhcbiException):
    """Benchmark parameter outside its admissible range."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message, ErrorCode.BAD_PARAM, field=field)


class DegenerateAlpha(PhcbiException):
    """Equilibrium shift formula has a vanishing denominator."""

    def __init__(self, denominator: float):
        super().__init__(
            f"Equilibrium shift is undefined: denominator {denominator:.3e} is degenerate",
            ErrorCode.DEGENERATE_ALPHA,
            context={"denominator": denominator},
        )


class OracleMismatch(PhcbiException):
    """Demo results disagree with their closed forms."""

    def __init__(self, failed: list[str]):
        super().__init__(
            f"Oracle checks failed: {', '.join(failed)}",
            ErrorCode.ORACLE_MISMATCH,
            exit_code=ExitCode.ORACLE_MISMATCH,
            context={"failed_checks": failed},
        )


class ModelFileError(PhcbiException):
    """Model file could not be read or parsed."""

    def __init__(self, message: str, field: str | None = None, context: dict[str, Any] | None = None):
        super().__init__(message, ErrorCode.MODEL_FILE_ERROR, field=field, context=context)


class ConfigError(PhcbiException):
    """Command-line configuration is incomplete or invalid."""

    def __init__(self, message: str, field: str | None = None, context: dict[str, Any] | None = None):
        super().__init__(message, ErrorCode.CONFIG_ERROR, field=field, context=context)


def create_error_payload(exception: PhcbiException, include_traceback: bool = False) -> dict[str, Any]:
    """Create the standardized error object written to stdout/report."""
    payload: dict[str, Any] = {
        "detail": exception.message,
        "error_code": exception.error_code.value,
        "field": exception.field,
        "timestamp": exception.timestamp.isoformat(),
        "context": dict(exception.context),
    }
    if include_traceback:
        payload["context"]["traceback"] = traceback.format_exc()
    return payload


def pydantic_errors(exc: PydanticValidationError) -> list[dict[str, Any]]:
    """Flatten pydantic validation errors into field/message pairs."""
    return [
        {
            "field": ".".join(str(loc) for loc in error["loc"]),
            "message": error["msg"],
            "code": error["type"].upper(),
        }
        for error in exc.errors()
    ]


def handle_exception(exc: Exception) -> ExitCode:
    """Log an exception and map it to the process exit code."""
    if isinstance(exc, PhcbiException):
        logger.error(
            f"Run failed: {exc.error_code.value}",
            message=exc.message,
            field=exc.field,
            exit_code=int(exc.exit_code),
            context=exc.context,
        )
        return exc.exit_code

    if isinstance(exc, PydanticValidationError):
        logger.error("Validation errors", errors=pydantic_errors(exc))
        return ExitCode.INPUT_ERROR

    log_error(logger, exc, {"traceback": traceback.format_exc()})
    return ExitCode.INPUT_ERROR
