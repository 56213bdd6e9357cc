"""Readers and writers for model files, reports and trajectory CSVs."""

import csv
import json
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from phcbi.core.config import Tolerances
from phcbi.core.exceptions import ModelFileError, pydantic_errors
from phcbi.core.logging import get_logger
from phcbi.services.ph_core import LtiPhSystem, QuadraticHamiltonian, validate_structure
from phcbi.services.simulation import Trajectory
from phcbi.storage.schemas import ModelFile, Report

logger = get_logger(__name__)


def parse_model(text: str, source: str = "<string>") -> ModelFile:
    """Parse and shape-check model JSON."""
    try:
        return ModelFile.model_validate_json(text)
    except ValidationError as exc:
        errors = pydantic_errors(exc)
        first = errors[0] if errors else {"field": None, "message": "invalid model"}
        raise ModelFileError(
            f"Invalid model file {source}: {first['message']}",
            field=first["field"] or None,
            context={"errors": errors},
        ) from exc


def model_to_system(model: ModelFile, tol: Tolerances | None = None) -> LtiPhSystem:
    n, m = model.n, model.m
    ham = QuadraticHamiltonian(
        np.asarray(model.Q, dtype=float).reshape(n, n),
        np.asarray(model.b, dtype=float).reshape(n),
        model.c0,
        tol=tol,
    )
    return validate_structure(
        np.asarray(model.J, dtype=float).reshape(n, n),
        np.asarray(model.R, dtype=float).reshape(n, n),
        np.asarray(model.G, dtype=float).reshape(n, m),
        ham,
        tol,
    )


def system_to_model(sys: LtiPhSystem) -> ModelFile:
    return ModelFile(
        n=sys.n,
        m=sys.m,
        J=sys.J.tolist(),
        R=sys.R.tolist(),
        G=sys.G.tolist(),
        Q=sys.ham.Q.tolist(),
        b=sys.ham.b.tolist(),
        c0=sys.ham.c0,
    )


def load_model(path: str | Path, tol: Tolerances | None = None) -> LtiPhSystem:
    """Read a model file and validate its pH structure.

    Raises:
        ModelFileError: the file is missing, not JSON, or has inconsistent shapes
        SkewViolation, SymViolation, NotSymmetric: structural checks fail
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelFileError(f"Cannot read model file {path}: {exc.strerror}", field="model") from exc
    system = model_to_system(parse_model(text, str(path)), tol)
    logger.info("Loaded model", path=str(path), n=system.n, m=system.m)
    return system


def write_model(path: str | Path, sys: LtiPhSystem) -> Path:
    """Write a system as model JSON; floats are emitted in shortest round-trip form."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(system_to_model(sys).model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def write_report(path: str | Path, report: Report) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = report.model_dump(mode="json")
    path.write_text(json.dumps(payload, indent=2, allow_nan=True) + "\n", encoding="utf-8")
    logger.debug("Wrote report", path=str(path))
    return path


def trajectory_header(n: int, n_c: int) -> list[str]:
    """t, x1..xn, xi1..xinc, H, Hc, then C (C1..Cnc for several Casimirs), power_residual."""
    casimir_cols = ["C"] if n_c <= 1 else [f"C{i}" for i in range(1, n_c + 1)]
    return (
        ["t"]
        + [f"x{i}" for i in range(1, n + 1)]
        + [f"xi{i}" for i in range(1, n_c + 1)]
        + ["H", "Hc"]
        + casimir_cols
        + ["power_residual"]
    )


def write_trajectory_csv(path: str | Path, traj: Trajectory) -> Path:
    """One row per grid point at 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    casimir = traj.casimir_vals if traj.n_c > 0 else np.zeros((traj.samples, 1))
    columns = np.column_stack(
        [traj.t, traj.x, traj.xi, traj.H_vals, traj.Hc_vals, casimir, traj.power_residual]
    )
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(trajectory_header(traj.n, traj.n_c))
        for row in columns:
            writer.writerow([format(float(v), ".17g") for v in row])
    logger.debug("Wrote trajectory", path=str(path), rows=traj.samples)
    return path
