"""Integration tests for the phcbi command line."""

import argparse
import json

import numpy as np
import pytest

from phcbi.main import main, parse_matrix, parse_vector
from tests.utils.assertions import TestAssertions
from tests.utils.test_data import SampleData, TestScenarios


def run(*argv):
    return main([str(a) for a in argv])


@pytest.mark.integration
class TestArgumentParsing:
    """Test cases for matrix and vector arguments."""

    def test_parse_matrix(self):
        assert parse_matrix("1,0;0,2") == [[1.0, 0.0], [0.0, 2.0]]
        assert parse_matrix("-1") == [[-1.0]]

    def test_parse_matrix_rejects_ragged_rows(self):
        with pytest.raises(argparse.ArgumentTypeError, match="ragged"):
            parse_matrix("1;2,3")

    def test_parse_vector(self):
        assert parse_vector("1,-2.5") == [1.0, -2.5]

    def test_usage_error_exits_one(self, tmp_path, rlc_model_file):
        assert run("synthesize", "--model", rlc_model_file, "--out", tmp_path) == 1

    def test_unknown_command(self):
        assert run("launch") == 1

    def test_bad_matrix_literal(self, tmp_path, rlc_model_file):
        assert run("synthesize", "--model", rlc_model_file, "--gc", "one", "--out", tmp_path) == 1

    def test_ragged_gain_exits_one(self, tmp_path, rlc_model_file):
        assert run("synthesize", "--model", rlc_model_file, "--gc", "1;2,3", "--out", tmp_path) == 1

    def test_invalid_rlc_parameter(self, tmp_path):
        assert run("demo", "rlc-ff", "--L", "0", "--out", tmp_path) == 1


@pytest.mark.integration
class TestDemoCommand:
    """Test cases for phcbi demo."""

    def test_feedforward(self, tmp_path, capsys):
        code = run("demo", "rlc-ff", "--out", tmp_path)

        assert code == 0
        report = TestAssertions.load_report(tmp_path)
        assert report["command"] == "demo"
        assert report["obstacle"]["classification"] == "beyond-obstacle"
        assert report["verdict"]["path"] == "ES"
        assert report["oracle"]["passed"] is True
        np.testing.assert_allclose(report["simulation"]["x_final"], [1.0, 1.0], atol=1e-6)
        assert report["simulation"]["casimir_drift"] <= 1e-8
        assert (tmp_path / "model.json").exists()

        header, body = TestAssertions.read_csv(tmp_path / "trajectory.csv")
        assert header == ["t", "x1", "x2", "xi1", "H", "Hc", "C", "power_residual"]
        assert body.shape[0] == 5001

        summary = json.loads(capsys.readouterr().out)
        assert summary["exit_code"] == 0
        assert summary["oracle_passed"] is True

    def test_output_feedback_stable(self, tmp_path):
        code = run("demo", "rlc-of", "--a1=-1", "--a2=-1", "--gc", "1", "--tfinal", "20", "--out", tmp_path)

        assert code == 0
        report = TestAssertions.load_report(tmp_path)
        assert report["verdict"]["label"] == "stable-declared"
        assert report["shaping"]["method"] == "IDA"
        assert report["shaping"]["rd_verdict"]["min_eig"] == pytest.approx(0.5)
        assert report["shaping"]["rd_verdict"]["max_eig"] == pytest.approx(1.5)
        assert report["inputs"]["a1"] == -1.0

    def test_output_feedback_not_declared(self, tmp_path):
        code = run("demo", "rlc-of", "--a1", "1", "--gc", "1", "--tfinal", "5", "--out", tmp_path)

        assert code == 0
        report = TestAssertions.load_report(tmp_path)
        assert report["verdict"]["label"] == "not-declared"
        assert report["oracle"]["passed"] is True

    def test_divergent_demo_still_reports(self, tmp_path):
        code = run("demo", "rlc-of", "--a1", "2", "--gc", "1", "--tfinal", "100", "--out", tmp_path)

        assert code == 0
        report = TestAssertions.load_report(tmp_path)
        assert report["simulation"]["diverged"] is True
        assert report["simulation"]["error"]["error_code"] == "NON_FINITE"
        assert not (tmp_path / "trajectory.csv").exists()

    def test_degenerate_alpha(self, tmp_path):
        code = run("demo", "rlc-of", "--L", "2", "--a1", "1", "--a2", "1", "--gc", "1", "--out", tmp_path)

        assert code == 1
        report = TestAssertions.load_report(tmp_path)
        assert report["error"]["error_code"] == "DEGENERATE_ALPHA"

    def test_scaled_parameters(self, tmp_path):
        code = run(
            "demo", "rlc-ff", "--L", "0.5", "--C", "2", "--r", "3", "--ustar", "1.5",
            "--tfinal", "1", "--out", tmp_path,
        )

        assert code == 0
        report = TestAssertions.load_report(tmp_path)
        assert report["inputs"]["Gc"] == -1.5


@pytest.mark.integration
class TestSynthesizeCommand:
    """Test cases for phcbi synthesize."""

    def test_rlc(self, tmp_path, rlc_model_file, capsys):
        assert run("synthesize", "--model", rlc_model_file, "--gc", "1", "--out", tmp_path) == 0

        report = TestAssertions.load_report(tmp_path)
        np.testing.assert_allclose(report["casimir"]["K"], [[-1.0], [1.0]])
        np.testing.assert_allclose(report["casimir"]["Rc"], [[-1.0]])
        assert report["obstacle"]["classification"] == "beyond-obstacle"
        assert report["verdict"] is None
        assert json.loads(capsys.readouterr().out)["classification"] == "beyond-obstacle"

    def test_zero_gain_classical(self, tmp_path, rlc_model_file):
        assert run("synthesize", "--model", rlc_model_file, "--gc", "0", "--out", tmp_path) == 0

        report = TestAssertions.load_report(tmp_path)
        assert report["obstacle"]["classification"] == "classical"

    def test_not_skew_exits_one(self, tmp_path, write_model_file):
        path = write_model_file({**SampleData.RLC_MODEL, "J": TestScenarios.NOT_SKEW_J})

        assert run("synthesize", "--model", path, "--gc", "1", "--out", tmp_path) == 1
        report = TestAssertions.load_report(tmp_path)
        assert report["error"]["error_code"] == "SKEW_VIOLATION"
        assert report["casimir"] is None

    def test_sym_tol_reaches_hamiltonian(self, tmp_path, write_model_file):
        path = write_model_file({**SampleData.RLC_MODEL, "Q": [[1.0, 1e-7], [0.0, 1.0]]})
        strict, relaxed = tmp_path / "strict", tmp_path / "relaxed"

        assert run("synthesize", "--model", path, "--gc", "1", "--out", strict) == 1
        assert TestAssertions.load_report(strict)["error"]["field"] == "Q"

        code = run("synthesize", "--model", path, "--gc", "1", "--sym-tol", "1e-6", "--out", relaxed)

        assert code == 0
        report = TestAssertions.load_report(relaxed)
        assert report["tolerances"]["sym_tol"] == 1e-6
        assert report["error"] is None

    def test_missing_model(self, tmp_path):
        assert run("synthesize", "--model", tmp_path / "none.json", "--gc", "1", "--out", tmp_path) == 1
        assert TestAssertions.load_report(tmp_path)["error"]["error_code"] == "MODEL_FILE_ERROR"

    def test_port_mismatch(self, tmp_path, rlc_model_file):
        assert run("synthesize", "--model", rlc_model_file, "--gc", "1,0;0,1", "--out", tmp_path) == 1


@pytest.mark.integration
class TestVerifyCommand:
    """Test cases for phcbi verify."""

    def test_feedforward_energy_shaping(self, tmp_path, rlc_model_file):
        assert run("verify", "--model", rlc_model_file, "--gc=-1", "--a2", "1", "--out", tmp_path) == 0

        report = TestAssertions.load_report(tmp_path)
        assert report["poincare"]["integrable"] is True
        assert report["verdict"]["path"] == "ES"
        assert report["verdict"]["label"] == "stable-declared"
        np.testing.assert_allclose(report["shaping"]["x_bar"], [1.0, 1.0])

    def test_output_feedback_ida(self, tmp_path, rlc_model_file):
        code = run("verify", "--model", rlc_model_file, "--gc", "1", "--a1=-1", "--a2=-1", "--out", tmp_path)

        assert code == 0
        report = TestAssertions.load_report(tmp_path)
        assert report["poincare"]["asym_defect"] == pytest.approx(2.0)
        assert report["verdict"]["path"] == "IDA"
        np.testing.assert_allclose(report["shaping"]["Jd"], [[0.0, -0.5], [0.5, 0.0]], atol=1e-12)

    def test_singular_jr_skips_es(self, tmp_path, write_model_file):
        path = write_model_file(SampleData.SINGULAR_JR_MODEL)

        code = run("verify", "--model", path, "--gc", "1", "--a1=-1", "--a2=-1", "--out", tmp_path)

        assert code == 0
        report = TestAssertions.load_report(tmp_path)
        assert report["poincare"] is None
        assert report["casimir"]["least_squares"] is True
        assert report["verdict"]["label"] == "not-declared"
        assert any("ES path skipped" in note for note in report["notes"])

    def test_controller_dimension_mismatch(self, tmp_path, rlc_model_file):
        code = run("verify", "--model", rlc_model_file, "--gc", "1", "--a1", "1,0;0,1", "--out", tmp_path)
        assert code == 1


@pytest.mark.integration
class TestSimulateCommand:
    """Test cases for phcbi simulate."""

    def test_unstable_model_exits_three(self, tmp_path, write_model_file):
        path = write_model_file(SampleData.UNSTABLE_MODEL)

        assert run("simulate", "--model", path, "--x0", "1", "--tfinal", "100", "--out", tmp_path) == 3
        report = TestAssertions.load_report(tmp_path)
        assert report["error"]["error_code"] == "NON_FINITE"

    def test_single_step(self, tmp_path, rlc_model_file):
        code = run("simulate", "--model", rlc_model_file, "--u", "1", "--dt", "0.1", "--tfinal", "0.1", "--out", tmp_path)

        assert code == 0
        header, body = TestAssertions.read_csv(tmp_path / "trajectory.csv")
        assert header == ["t", "x1", "x2", "H", "Hc", "C", "power_residual"]
        assert body.shape == (2, 7)

    def test_closed_loop_from_model(self, tmp_path, rlc_model_file):
        code = run(
            "simulate", "--model", rlc_model_file, "--gc=-1", "--a2", "1",
            "--tfinal", "50", "--out", tmp_path,
        )

        assert code == 0
        report = TestAssertions.load_report(tmp_path)
        np.testing.assert_allclose(report["simulation"]["x_final"], [1.0, 1.0], atol=1e-6)
        assert report["simulation"]["casimir_drift"] <= 1e-8
        np.testing.assert_allclose(report["casimir"]["K"], [[1.0], [-1.0]])

    def test_benchmark_with_initial_controller_state(self, tmp_path):
        code = run("simulate", "--demo", "rlc-ff", "--xi0", "0.5", "--tfinal", "1", "--out", tmp_path)

        assert code == 0
        _, body = TestAssertions.read_csv(tmp_path / "trajectory.csv")
        assert np.max(np.abs(body[:, 6] - 0.5)) <= 1e-12

    def test_horizon_shorter_than_step(self, tmp_path, rlc_model_file):
        assert run("simulate", "--model", rlc_model_file, "--dt", "1", "--tfinal", "0.5", "--out", tmp_path) == 1


@pytest.mark.integration
class TestReportStability:
    """Every command writes the same top-level keys."""

    def test_keys_across_commands(self, tmp_path, rlc_model_file):
        runs = [
            ("demo", "rlc-ff", "--tfinal", "1"),
            ("synthesize", "--model", rlc_model_file, "--gc", "1"),
            ("verify", "--model", rlc_model_file, "--gc", "1", "--a1=-1", "--a2=-1"),
            ("simulate", "--model", rlc_model_file, "--tfinal", "1"),
        ]
        for index, argv in enumerate(runs):
            out = tmp_path / f"run{index}"
            assert run(*argv, "--out", out) == 0
            assert TestAssertions.load_report(out)["command"] == argv[0]
