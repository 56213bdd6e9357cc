"""Command-line entry point: ``phcbi demo|synthesize|verify|simulate``."""

import argparse
import json
import sys
import uuid
from pathlib import Path
from typing import Any, NoReturn

import numpy as np

from phcbi.core.config import Tolerances, settings
from phcbi.core.exceptions import ConfigError, ExitCode, PhcbiException, handle_exception
from phcbi.core.logging import bind_run_context, configure_logging, get_logger
from phcbi.services.casimir import CasimirSolution
from phcbi.services.pipelines import ControlDesignService
from phcbi.services.ph_core import LtiPhSystem, QuadraticHamiltonian
from phcbi.services.rlc_bench import RlcParams, feedforward_case, make_rlc, output_feedback_case
from phcbi.storage import reports
from phcbi.storage.files import load_model, write_model, write_report, write_trajectory_csv
from phcbi.storage.schemas import Command, DemoName, Report, RunConfig

logger = get_logger(__name__)

REPORT_NAME = "report.json"
TRAJECTORY_NAME = "trajectory.csv"
MODEL_NAME = "model.json"

OF_DEFAULTS = {"a1": -1.0, "a2": -1.0, "gc": 1.0}


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors as input errors (exit 1)."""

    def error(self, message: str) -> NoReturn:
        raise ConfigError(f"{self.prog}: {message}", context={"usage": self.format_usage().strip()})


def parse_matrix(text: str) -> list[list[float]]:
    """Rows separated by ';', entries by ','; a bare number is a 1x1 matrix."""
    try:
        rows = [[float(v) for v in row.split(",")] for row in text.strip().split(";")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a matrix: {text!r}") from exc
    if len({len(row) for row in rows}) != 1:
        raise argparse.ArgumentTypeError(f"ragged matrix: {text!r}")
    return rows


def parse_vector(text: str) -> list[float]:
    try:
        return [float(v) for v in text.strip().split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a vector: {text!r}") from exc


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--sym-tol", type=float, help="relative skew/symmetry tolerance")
    parser.add_argument("--cond-tol", type=float, help="reciprocal condition threshold")
    parser.add_argument("--chain-tol", type=float, help="relative obstacle-chain tolerance")
    parser.add_argument("--oracle-rtol", type=float, help="relative oracle tolerance")
    parser.add_argument("--log-json", action="store_true", help="render logs as JSON")


def _add_controller(parser: argparse.ArgumentParser, required_gc: bool) -> None:
    parser.add_argument(
        "--gc", type=parse_matrix, required=required_gc,
        help="controller port gain, e.g. 1 or '1,0;0,1' (use --gc=-1 for negatives)",
    )
    parser.add_argument("--a1", type=parse_matrix, help="controller Hamiltonian curvature")
    parser.add_argument("--a2", type=parse_vector, help="controller Hamiltonian linear term")
    parser.add_argument("--kappa", type=parse_vector, help="Casimir level")


def _add_simulation(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--x0", type=parse_vector, help="initial plant state")
    parser.add_argument("--xi0", type=parse_vector, help="initial controller state")
    parser.add_argument("--dt", type=float, default=None, help=f"step size (default {settings.dt})")
    parser.add_argument(
        "--tfinal", type=float, default=None, help=f"horizon (default {settings.t_final})"
    )


def _add_rlc(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--L", type=float, default=1.0, help="inductance")
    parser.add_argument("--C", type=float, default=1.0, help="capacitance")
    parser.add_argument("--r", type=float, default=1.0, help="resistance")
    parser.add_argument("--ustar", type=float, default=1.0, help="source voltage")


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(prog="phcbi", description="Casimir-based control by interconnection for LTI pH systems.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    demo = sub.add_parser("demo", help="run an RLC benchmark against its closed forms")
    demo.add_argument("demo", choices=[d.value for d in DemoName])
    _add_rlc(demo)
    _add_controller(demo, required_gc=False)
    _add_simulation(demo)
    _add_common(demo)

    synth = sub.add_parser("synthesize", help="solve the Casimir equations for a model")
    synth.add_argument("--model", required=True, help="model JSON file")
    synth.add_argument("--gc", type=parse_matrix, required=True, help="controller port gain")
    synth.add_argument("--kappa", type=parse_vector, help="Casimir level")
    _add_common(synth)

    verify = sub.add_parser("verify", help="synthesize, shape and decide stability")
    verify.add_argument("--model", required=True, help="model JSON file")
    _add_controller(verify, required_gc=True)
    verify.add_argument("--W", type=parse_matrix, help="target Hessian for the IDA form")
    _add_common(verify)

    simulate = sub.add_parser("simulate", help="integrate a closed loop or the open-loop plant")
    source = simulate.add_mutually_exclusive_group(required=True)
    source.add_argument("--model", help="model JSON file")
    source.add_argument("--demo", choices=[d.value for d in DemoName])
    _add_rlc(simulate)
    _add_controller(simulate, required_gc=False)
    simulate.add_argument("--u", type=parse_vector, help="constant plant input (open loop)")
    _add_simulation(simulate)
    _add_common(simulate)
    return parser


def to_run_config(args: argparse.Namespace) -> RunConfig:
    overrides = {
        key: getattr(args, key)
        for key in ("sym_tol", "cond_tol", "chain_tol", "oracle_rtol")
        if getattr(args, key, None) is not None
    }
    tolerances = Tolerances(**{**settings.tolerances.model_dump(), **overrides})
    command = Command(args.command)
    return RunConfig(
        command=command,
        demo=args.demo if command in (Command.DEMO, Command.SIMULATE) else None,
        model_path=getattr(args, "model", None),
        gc=getattr(args, "gc", None),
        a1=getattr(args, "a1", None),
        a2=getattr(args, "a2", None),
        kappa=getattr(args, "kappa", None),
        x0=getattr(args, "x0", None),
        xi0=getattr(args, "xi0", None),
        u=getattr(args, "u", None),
        W=getattr(args, "W", None),
        L=getattr(args, "L", 1.0),
        C=getattr(args, "C", 1.0),
        r=getattr(args, "r", 1.0),
        u_star=getattr(args, "ustar", 1.0),
        dt=settings.dt if getattr(args, "dt", None) is None else args.dt,
        t_final=settings.t_final if getattr(args, "tfinal", None) is None else args.tfinal,
        out_dir=args.out,
        tolerances=tolerances,
    )


def _scalar(value: list[Any] | None, name: str, default: float) -> float:
    if value is None:
        return default
    flat = np.asarray(value, dtype=float).reshape(-1)
    if flat.size != 1:
        raise ConfigError(f"--{name} must be a scalar for the RLC benchmarks", field=name)
    return float(flat[0])


def controller_hamiltonian(cfg: RunConfig, n_c: int) -> QuadraticHamiltonian:
    """Hc = ½ξᵀA1ξ + a2ᵀξ, zero coefficients where not given."""
    a1 = np.zeros((n_c, n_c)) if cfg.a1 is None else np.asarray(cfg.a1, dtype=float)
    a2 = np.zeros(n_c) if cfg.a2 is None else np.asarray(cfg.a2, dtype=float)
    if a1.shape != (n_c, n_c) or a2.shape != (n_c,):
        raise ConfigError(
            f"Controller Hamiltonian must be {n_c}-dimensional to match Gc",
            field="a1" if a1.shape != (n_c, n_c) else "a2",
        )
    return QuadraticHamiltonian.from_coefficients(a1, a2, cfg.tolerances)


def _rlc_params(cfg: RunConfig) -> RlcParams:
    return RlcParams(L=cfg.L, C=cfg.C, r=cfg.r, u_star=cfg.u_star)


def _inputs(cfg: RunConfig) -> dict[str, Any]:
    return cfg.model_dump(mode="json", exclude={"command", "tolerances"}, exclude_none=True)


def run_demo(cfg: RunConfig, service: ControlDesignService, report: Report, out: Path) -> ExitCode:
    assert cfg.demo is not None
    params = _rlc_params(cfg)
    result = service.run_demo(
        cfg.demo.value,
        params,
        a1=_scalar(cfg.a1, "a1", OF_DEFAULTS["a1"]),
        a2=_scalar(cfg.a2, "a2", OF_DEFAULTS["a2"]),
        Gc=_scalar(cfg.gc, "gc", OF_DEFAULTS["gc"]),
        x0=cfg.x0,
        xi0=cfg.xi0,
        dt=cfg.dt,
        t_final=cfg.t_final,
    )
    report.inputs.update(result.inputs)
    reports.add_demo(report, result)
    write_model(out / MODEL_NAME, result.plant)
    if result.simulation is not None:
        write_trajectory_csv(out / TRAJECTORY_NAME, result.simulation.trajectory)
    return ExitCode.OK if result.passed else ExitCode.ORACLE_MISMATCH


def run_synthesize(cfg: RunConfig, service: ControlDesignService, report: Report) -> ExitCode:
    assert cfg.model_path is not None and cfg.gc is not None
    plant = load_model(cfg.model_path, cfg.tolerances)
    reports.add_synthesis(report, service.synthesize(plant, cfg.gc, cfg.kappa))
    return ExitCode.OK


def run_verify(cfg: RunConfig, service: ControlDesignService, report: Report) -> ExitCode:
    assert cfg.model_path is not None and cfg.gc is not None
    plant = load_model(cfg.model_path, cfg.tolerances)
    Hc = controller_hamiltonian(cfg, len(cfg.gc))
    result = service.verify(plant, cfg.gc, Hc, cfg.kappa, cfg.W)
    reports.add_verification(report, result)
    return ExitCode.OK


def _benchmark_loop(cfg: RunConfig) -> tuple[LtiPhSystem, CasimirSolution, QuadraticHamiltonian]:
    params = _rlc_params(cfg)
    if cfg.demo is DemoName.RLC_FF:
        ff = feedforward_case(params, cfg.tolerances)
        return make_rlc(params, cfg.tolerances), ff.casimir, ff.Hc
    of = output_feedback_case(
        params,
        _scalar(cfg.a1, "a1", OF_DEFAULTS["a1"]),
        _scalar(cfg.a2, "a2", OF_DEFAULTS["a2"]),
        _scalar(cfg.gc, "gc", OF_DEFAULTS["gc"]),
        cfg.tolerances,
    )
    return make_rlc(params, cfg.tolerances), of.casimir, of.Hc


def run_simulate(cfg: RunConfig, service: ControlDesignService, report: Report, out: Path) -> ExitCode:
    if cfg.demo is not None:
        plant, sol, Hc = _benchmark_loop(cfg)
        if cfg.kappa is not None:
            sol = sol.with_kappa(cfg.kappa)
    else:
        assert cfg.model_path is not None
        plant = load_model(cfg.model_path, cfg.tolerances)
        if cfg.gc is None:
            result = service.simulate_open_loop(plant, cfg.x0, cfg.u, cfg.dt, cfg.t_final)
            reports.add_simulation(report, result)
            write_trajectory_csv(out / TRAJECTORY_NAME, result.trajectory)
            return ExitCode.OK
        synthesis = service.synthesize(plant, cfg.gc, cfg.kappa)
        reports.add_synthesis(report, synthesis)
        sol = synthesis.casimir
        Hc = controller_hamiltonian(cfg, sol.n_c)

    result = service.simulate_closed_loop(plant, sol, Hc, cfg.x0, cfg.xi0, cfg.dt, cfg.t_final)
    if result.casimir is not None and report.casimir is not None:
        report.casimir.kappa = result.casimir.kappa.tolist()
    reports.add_simulation(report, result)
    write_trajectory_csv(out / TRAJECTORY_NAME, result.trajectory)
    return ExitCode.OK


def execute(cfg: RunConfig, run_id: str) -> tuple[ExitCode, Report]:
    """Run one validated command; the report is written even when the run fails."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    service = ControlDesignService(cfg.tolerances)
    report = reports.new_report(cfg.command, run_id, cfg.tolerances, _inputs(cfg))
    try:
        if cfg.command is Command.DEMO:
            code = run_demo(cfg, service, report, out)
        elif cfg.command is Command.SYNTHESIZE:
            code = run_synthesize(cfg, service, report)
        elif cfg.command is Command.VERIFY:
            code = run_verify(cfg, service, report)
        else:
            code = run_simulate(cfg, service, report, out)
    except PhcbiException as exc:
        reports.add_error(report, exc)
        write_report(out / REPORT_NAME, report)
        raise
    write_report(out / REPORT_NAME, report)
    return code, report


def summary(report: Report, code: ExitCode, out: Path) -> dict[str, Any]:
    data: dict[str, Any] = {
        "command": report.command.value,
        "run_id": report.run_id,
        "exit_code": int(code),
        "report": str(out / REPORT_NAME),
    }
    if report.casimir is not None:
        data["K"] = report.casimir.K
    if report.obstacle is not None:
        data["classification"] = report.obstacle.classification
    if report.verdict is not None:
        data["verdict"] = report.verdict.label
        data["path"] = report.verdict.path
    if report.simulation is not None:
        data["simulation"] = report.simulation.model_dump(mode="json", exclude_none=True)
    if report.oracle is not None:
        data["oracle_passed"] = report.oracle.passed
    return data


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    configure_logging(json_output=True if "--log-json" in argv else None)
    run_id = uuid.uuid4().hex[:12]
    try:
        args = build_parser().parse_args(argv)
        bind_run_context(run_id, args.command)
        cfg = to_run_config(args)
        code, report = execute(cfg, run_id)
    except Exception as exc:
        return int(handle_exception(exc))
    logger.info("Run finished", exit_code=int(code))
    print(json.dumps(summary(report, code, Path(cfg.out_dir)), indent=2))
    return int(code)


if __name__ == "__main__":
    sys.exit(main())
