"""Structured logging configuration using structlog."""

import logging
import sys
from typing import Any

import structlog
from structlog.stdlib import BoundLogger

from phcbi.core.config import settings


def configure_logging(json_output: bool | None = None) -> None:
    """Configure structured logging; records go to stderr so stdout stays clean."""
    use_json = settings.log_json if json_output is None else json_output
    renderer: Any = (
        structlog.processors.JSONRenderer()
        if use_json
        else structlog.dev.ConsoleRenderer(colors=False)
    )

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            renderer,
        ],
        wrapper_class=BoundLogger,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )

    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=logging.DEBUG if settings.debug else logging.INFO,
    )


def get_logger(name: str) -> BoundLogger:
    """Get a structured logger instance."""
    return structlog.get_logger(name)


def bind_run_context(run_id: str, command: str) -> None:
    """Bind run identifiers into the structlog context for the current command."""
    structlog.contextvars.clear_contextvars()
    structlog.contextvars.bind_contextvars(run_id=run_id, command=command)


def log_error(logger: BoundLogger, error: Exception, context: dict[str, Any] | None = None) -> None:
    """Log error with enhanced context."""
    logger.error(
        "Run error",
        error=str(error),
        error_type=type(error).__name__,
        context=context or {},
    )
