"""Pydantic v2 schemas for model files, run configuration and reports."""

import math
from datetime import datetime
from enum import Enum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from phcbi.core.config import Tolerances


class Command(str, Enum):
    """CLI command enumeration."""
    DEMO = "demo"
    SYNTHESIZE = "synthesize"
    VERIFY = "verify"
    SIMULATE = "simulate"


class DemoName(str, Enum):
    """Built-in benchmark demos."""
    RLC_FF = "rlc-ff"
    RLC_OF = "rlc-of"


# Base schemas
class BaseSchema(BaseModel):
    """Base schema with common configuration."""
    model_config = ConfigDict(from_attributes=True, allow_inf_nan=False)


class ReportSchema(BaseModel):
    """Report sections; diverged runs may carry non-finite figures."""
    model_config = ConfigDict(from_attributes=True, allow_inf_nan=True)


Matrix = list[list[float]]
Vector = list[float]


def _shape(rows: Matrix) -> tuple[int, int | None]:
    widths = {len(row) for row in rows}
    if len(widths) > 1:
        raise ValueError(f"ragged matrix with row lengths {sorted(widths)}")
    return len(rows), (widths.pop() if widths else None)


# Model file
class ModelFile(BaseSchema):
    """Row-major description of an LTI pH system."""
    n: int = Field(..., ge=0)
    m: int = Field(..., ge=0)
    J: Matrix
    R: Matrix
    G: Matrix
    Q: Matrix
    b: Vector
    c0: float = 0.0

    @model_validator(mode="after")
    def check_shapes(self) -> "ModelFile":
        n, m = self.n, self.m
        for name in ("J", "R", "Q"):
            rows, cols = _shape(getattr(self, name))
            if rows != n or (n > 0 and cols != n):
                raise ValueError(f"{name} must be {n}x{n}, got {rows}x{cols}")
        rows, cols = _shape(self.G)
        if rows != n or (n > 0 and (cols or 0) != m):
            raise ValueError(f"G must be {n}x{m}, got {rows}x{cols}")
        if len(self.b) != n:
            raise ValueError(f"b must have length {n}, got {len(self.b)}")
        return self


# Run configuration
class RunConfig(BaseSchema):
    """Validated command-line arguments."""
    command: Command
    demo: DemoName | None = None
    model_path: str | None = None
    gc: Matrix | None = None
    a1: Matrix | None = None
    a2: Vector | None = None
    kappa: Vector | None = None
    x0: Vector | None = None
    xi0: Vector | None = None
    u: Vector | None = None
    W: Matrix | None = None
    L: float = Field(default=1.0, gt=0)
    C: float = Field(default=1.0, gt=0)
    r: float = Field(default=1.0, gt=0)
    u_star: float = 1.0
    dt: float = Field(default=0.01, gt=0)
    t_final: float = Field(default=50.0, gt=0)
    out_dir: str = "."
    tolerances: Tolerances = Field(default_factory=Tolerances)

    @field_validator("t_final")
    @classmethod
    def finite_horizon(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("t_final must be finite")
        return value

    @model_validator(mode="after")
    def check_required(self) -> "RunConfig":
        if self.command is Command.DEMO and self.demo is None:
            raise ValueError("demo requires a demo name (rlc-ff or rlc-of)")
        if self.command in (Command.SYNTHESIZE, Command.VERIFY):
            if self.model_path is None:
                raise ValueError(f"{self.command.value} requires --model")
            if self.gc is None:
                raise ValueError(f"{self.command.value} requires --gc")
        if self.command is Command.SIMULATE and self.model_path is None and self.demo is None:
            raise ValueError("simulate requires --model or --demo")
        if self.t_final < self.dt:
            raise ValueError("t_final must be at least dt")
        return self


# Report sections
class CasimirSection(ReportSchema):
    """Casimir solution."""
    K: Matrix
    Gc: Matrix
    kappa: Vector
    Jc: Matrix
    Rc: Matrix
    residual_pde1: float
    residual_pde2: float
    exact: bool
    least_squares: bool


class ObstacleSection(ReportSchema):
    """Classical chain norms and classification."""
    norm_RK: float
    norm_Rc: float
    norm_JK_plus_GGc: float
    norm_Jc_match: float
    classical_chain_holds: bool
    classification: str
    chain_tol: float


class PoincareSection(ReportSchema):
    """Symmetry test of the candidate gradient field."""
    M: Matrix
    asym_defect: float
    integrable: bool
    tol_used: float


class VerdictDetail(ReportSchema):
    """Definiteness verdict."""
    classification: str
    min_eig: float
    max_eig: float
    tol_used: float


class ShapingSection(ReportSchema):
    """Shaped closed-loop plant dynamics."""
    method: str
    Jd: Matrix
    Rd: Matrix
    W: Matrix
    x_bar: Vector
    match_residual: float
    rd_verdict: VerdictDetail
    hessian_verdict: VerdictDetail


class StabilitySection(ReportSchema):
    """Final stability verdict with the hypotheses checked."""
    label: str
    declared: bool
    reasons: list[str]
    path: str | None = None
    controller_equilibrium: Vector | None = None
    controller_passive: str | None = None


class SimulationSection(ReportSchema):
    """Summary of a simulated run."""
    diverged: bool = False
    samples: int | None = None
    dt: float | None = None
    t_final: float | None = None
    x_final: Vector | None = None
    xi_final: Vector | None = None
    casimir_drift: float | None = None
    energy_audit: float | None = None
    max_power_residual: float | None = None
    error: dict[str, Any] | None = None


class OracleCheck(ReportSchema):
    """One expected-vs-computed comparison."""
    name: str
    expected: Any
    actual: Any
    abs_diff: float
    tol: float
    passed: bool


class OracleSection(ReportSchema):
    """Closed-form comparisons for benchmark runs."""
    expected: dict[str, Any]
    checks: list[OracleCheck]
    passed: bool


class Report(ReportSchema):
    """report.json; every command writes the same top-level keys."""
    tool: str = "phcbi"
    command: Command
    run_id: str
    generated_at: datetime
    tolerances: dict[str, float]
    inputs: dict[str, Any] = Field(default_factory=dict)
    casimir: CasimirSection | None = None
    obstacle: ObstacleSection | None = None
    poincare: PoincareSection | None = None
    shaping: ShapingSection | None = None
    verdict: StabilitySection | None = None
    simulation: SimulationSection | None = None
    oracle: OracleSection | None = None
    error: dict[str, Any] | None = None
    notes: list[str] = Field(default_factory=list)
