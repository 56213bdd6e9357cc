"""Pytest configuration and shared fixtures for phcbi."""

import json
from pathlib import Path

import numpy as np
import pytest

from phcbi.core.config import Tolerances
from phcbi.core.logging import configure_logging
from phcbi.services.casimir import CasimirSolution, solve_casimir
from phcbi.services.ph_core import LtiPhSystem
from phcbi.services.pipelines import ControlDesignService
from phcbi.services.rlc_bench import (
    FeedforwardCase,
    OutputFeedbackCase,
    RlcParams,
    feedforward_case,
    make_rlc,
    output_feedback_case,
)
from tests.utils.test_data import SampleData


@pytest.fixture(scope="session", autouse=True)
def logging_configured() -> None:
    """Configure structlog once for the session."""
    configure_logging(json_output=False)


@pytest.fixture
def tolerances() -> Tolerances:
    """Default tolerances, independent of the environment."""
    return Tolerances()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def rlc_params() -> RlcParams:
    """L = C = r = u* = 1."""
    return RlcParams()


@pytest.fixture
def rlc_plant(rlc_params: RlcParams, tolerances: Tolerances) -> LtiPhSystem:
    return make_rlc(rlc_params, tolerances)


@pytest.fixture
def rlc_casimir(rlc_plant: LtiPhSystem, tolerances: Tolerances) -> CasimirSolution:
    """Casimir of the unit RLC for Gc = 1."""
    return solve_casimir(rlc_plant, [[1.0]], tol=tolerances)


@pytest.fixture
def ff_case(rlc_params: RlcParams, tolerances: Tolerances) -> FeedforwardCase:
    return feedforward_case(rlc_params, tolerances)


@pytest.fixture
def of_case(rlc_params: RlcParams, tolerances: Tolerances) -> OutputFeedbackCase:
    """Output feedback with a1 = a2 = -1 and Gc = 1."""
    return output_feedback_case(rlc_params, -1.0, -1.0, 1.0, tolerances)


@pytest.fixture
def service(tolerances: Tolerances) -> ControlDesignService:
    return ControlDesignService(tolerances)


@pytest.fixture
def write_model_file(tmp_path: Path):
    """Write a model-file payload and return its path."""
    def _write(data: dict | str, name: str = "model.json") -> Path:
        path = tmp_path / name
        path.write_text(data if isinstance(data, str) else json.dumps(data))
        return path

    return _write


@pytest.fixture
def rlc_model_file(write_model_file) -> Path:
    return write_model_file(SampleData.RLC_MODEL, "rlc.json")
