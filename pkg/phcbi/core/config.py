"""Application configuration using Pydantic Settings."""

from pydantic import BaseModel, ConfigDict, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Tolerances(BaseModel):
    """Numerical tolerances used by a single run."""

    model_config = ConfigDict(frozen=True)

    sym_tol: float = Field(default=1e-9, gt=0)
    cond_tol: float = Field(default=1e-12, gt=0)
    chain_tol: float = Field(default=1e-9, gt=0)
    oracle_rtol: float = Field(default=1e-10, gt=0)
    overflow_guard: float = Field(default=1e12, gt=0)

    def structural(self, scale: float) -> float:
        """Absolute band for symmetry/skew checks on a matrix of sup-norm `scale`."""
        return self.sym_tol * (1.0 + scale)


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        case_sensitive=False,
        populate_by_name=True,
        extra="ignore",
    )

    # Application
    app_name: str = Field(default="phcbi", alias="PHCBI_APP_NAME")
    debug: bool = Field(default=False, alias="PHCBI_DEBUG")
    log_json: bool = Field(default=False, alias="PHCBI_LOG_JSON")

    # Tolerances
    sym_tol: float = Field(default=1e-9, gt=0, alias="PHCBI_SYM_TOL")
    cond_tol: float = Field(default=1e-12, gt=0, alias="PHCBI_COND_TOL")
    chain_tol: float = Field(default=1e-9, gt=0, alias="PHCBI_CHAIN_TOL")
    oracle_rtol: float = Field(default=1e-10, gt=0, alias="PHCBI_ORACLE_RTOL")

    # Simulation
    dt: float = Field(default=0.01, gt=0, alias="PHCBI_DT")
    t_final: float = Field(default=50.0, gt=0, alias="PHCBI_T_FINAL")
    overflow_guard: float = Field(default=1e12, gt=0, alias="PHCBI_OVERFLOW_GUARD")

    @property
    def tolerances(self) -> Tolerances:
        """Tolerances as configured for this process."""
        return Tolerances(
            sym_tol=self.sym_tol,
            cond_tol=self.cond_tol,
            chain_tol=self.chain_tol,
            oracle_rtol=self.oracle_rtol,
            overflow_guard=self.overflow_guard,
        )


# Global settings instance
settings = Settings()


def resolve_tolerances(tol: Tolerances | None) -> Tolerances:
    """Return `tol`, or the process-wide tolerances when it is None."""
    return tol if tol is not None else settings.tolerances
