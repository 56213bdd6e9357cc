"""Unit tests for model, report and trajectory files."""

import json

import numpy as np
import pytest

from phcbi.core.config import Tolerances
from phcbi.core.exceptions import ModelFileError, NotSymmetric, SkewViolation, SymViolation
from phcbi.services.ph_core import QuadraticHamiltonian, feedback_interconnect, validate_structure
from phcbi.services.simulation import simulate
from phcbi.storage.files import (
    load_model,
    parse_model,
    system_to_model,
    trajectory_header,
    write_model,
    write_trajectory_csv,
)
from tests.utils.assertions import TestAssertions
from tests.utils.test_data import SampleData, TestDataFactory, TestScenarios


@pytest.mark.unit
class TestParseModel:
    """Test cases for model JSON parsing."""

    def test_valid_model(self):
        model = parse_model(json.dumps(SampleData.RLC_MODEL))

        assert model.n == 2
        assert model.m == 1
        assert model.c0 == 0.0

    def test_zero_input_model(self):
        model = parse_model(json.dumps(SampleData.UNSTABLE_MODEL))
        assert model.m == 0

    @pytest.mark.parametrize("text", TestScenarios.MALFORMED_MODELS)
    def test_malformed(self, text):
        with pytest.raises(ModelFileError) as info:
            parse_model(text, "bad.json")

        assert "bad.json" in info.value.message
        assert info.value.context["errors"]

    def test_ragged_matrix(self):
        data = {**SampleData.RLC_MODEL, "Q": [[1.0, 0.0], [1.0]]}

        with pytest.raises(ModelFileError, match="ragged"):
            parse_model(json.dumps(data))

    def test_non_finite_rejected(self):
        text = json.dumps(SampleData.RLC_MODEL).replace('"c0": 0.0', '"c0": Infinity')

        with pytest.raises(ModelFileError):
            parse_model(text)


@pytest.mark.unit
class TestLoadModel:
    """Test cases for loading model files from disk."""

    def test_loads_rlc(self, rlc_model_file):
        plant = load_model(rlc_model_file)

        TestAssertions.assert_matrix_close(plant.J, SampleData.RLC_J)
        TestAssertions.assert_matrix_close(plant.G, SampleData.RLC_G)
        assert plant.is_passive

    def test_missing_file(self, tmp_path):
        with pytest.raises(ModelFileError) as info:
            load_model(tmp_path / "absent.json")
        assert info.value.field == "model"

    def test_not_skew(self, write_model_file):
        path = write_model_file({**SampleData.RLC_MODEL, "J": TestScenarios.NOT_SKEW_J})

        with pytest.raises(SkewViolation):
            load_model(path)

    def test_not_symmetric(self, write_model_file):
        path = write_model_file({**SampleData.RLC_MODEL, "R": TestScenarios.NOT_SYMMETRIC_R})

        with pytest.raises(SymViolation):
            load_model(path)

    def test_sym_tol_applies_to_q(self, write_model_file):
        """Test the run tolerances decide the symmetry check on Q as well as on J and R."""
        path = write_model_file({**SampleData.RLC_MODEL, "Q": [[1.0, 1e-7], [0.0, 1.0]]})

        with pytest.raises(NotSymmetric) as info:
            load_model(path)
        assert info.value.field == "Q"

        plant = load_model(path, Tolerances(sym_tol=1e-6))
        assert plant.ham.Q[0, 1] == pytest.approx(5e-8)

    def test_round_trip_bit_exact(self, tmp_path, rng):
        plant = TestDataFactory.plant(rng, n=4, m=2)

        loaded = load_model(write_model(tmp_path / "out" / "model.json", plant))

        for name in ("J", "R", "G"):
            assert np.array_equal(getattr(loaded, name), getattr(plant, name)), name
        assert np.array_equal(loaded.ham.Q, plant.ham.Q)
        assert np.array_equal(loaded.ham.b, plant.ham.b)
        assert system_to_model(loaded) == system_to_model(plant)


@pytest.mark.unit
class TestTrajectoryCsv:
    """Test cases for trajectory CSV output."""

    @pytest.mark.parametrize(
        "n, n_c, expected",
        [
            (2, 1, ["t", "x1", "x2", "xi1", "H", "Hc", "C", "power_residual"]),
            (1, 0, ["t", "x1", "H", "Hc", "C", "power_residual"]),
            (1, 2, ["t", "x1", "xi1", "xi2", "H", "Hc", "C1", "C2", "power_residual"]),
        ],
    )
    def test_header(self, n, n_c, expected):
        assert trajectory_header(n, n_c) == expected

    def test_closed_loop_csv(self, tmp_path, rlc_plant, ff_case):
        traj = simulate(
            feedback_interconnect(rlc_plant, ff_case.controller),
            [0.1, 0.2, 0.3],
            0.1,
            1.0,
            casimir=ff_case.casimir,
        )

        header, body = TestAssertions.read_csv(write_trajectory_csv(tmp_path / "trajectory.csv", traj))

        assert header == trajectory_header(2, 1)
        assert body.shape == (11, 8)
        assert np.array_equal(body[:, 1:3], traj.x)
        assert np.array_equal(body[:, 6], traj.casimir_vals[:, 0])

    def test_open_loop_single_step(self, tmp_path):
        sys = validate_structure([[0.0]], [[1.0]], [[1.0]], QuadraticHamiltonian([[1.0]], [0.0]))
        traj = simulate(sys, [1.0], 0.5, 0.5)

        header, body = TestAssertions.read_csv(write_trajectory_csv(tmp_path / "t.csv", traj))

        assert header == ["t", "x1", "H", "Hc", "C", "power_residual"]
        assert body.shape == (2, 6)
        assert np.all(body[:, 4] == 0.0)
        assert body[0, 2] == pytest.approx(0.5)
