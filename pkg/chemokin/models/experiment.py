"""Declarative experiment description loaded from JSON.

Units: positions in um, times in s, gradients in 1/um, rates in 1/s.
Unknown keys are rejected at every level.
"""

from enum import Enum
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from chemokin.models.params import PhysParams


class Tier(str, Enum):
    """Model tier a run exercises."""

    CLOSURE = "closure"
    AGENTS = "agents"
    KINETIC = "kinetic"
    MACRO = "macro"
    COMPARE = "compare"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class EnvironmentConfig(_Strict):
    """Gradient(s) and optional explicit domain."""

    G: float | None = Field(default=None, ge=0, description="Single log-gradient (1/um)")
    G_sweep: list[float] = Field(default_factory=list, description="Gradient sweep (1/um)")
    kR_sweep: list[float] = Field(default_factory=list, description="Adaptation rates for velocity sweeps (1/s)")
    x_min: float | None = Field(default=None, description="Explicit left bound (um)")
    x_max: float | None = Field(default=None, description="Explicit right bound (um)")
    periodic: bool = Field(default=True, description="Periodic wrap at the domain ends")

    @model_validator(mode="after")
    def check_sweeps(self) -> "EnvironmentConfig":
        """Sweep entries must be non-negative; bounds come in pairs."""
        if any(G < 0 for G in self.G_sweep):
            raise ValueError("G_sweep entries must be non-negative")
        if any(k <= 0 for k in self.kR_sweep):
            raise ValueError("kR_sweep entries must be positive")
        if (self.x_min is None) != (self.x_max is None):
            raise ValueError("x_min and x_max must be given together")
        return self

    @property
    def bounds(self) -> tuple[float, float] | None:
        """Explicit bounds if both were given."""
        if self.x_min is None or self.x_max is None:
            return None
        return self.x_min, self.x_max

    def gradients(self) -> list[float]:
        """The sweep if present, else the single G, else 1e-3."""
        if self.G_sweep:
            return list(self.G_sweep)
        if self.G is not None:
            return [self.G]
        return [1e-3]


class ClosureNumerics(_Strict):
    """Closure grid and coefficient conventions."""

    nodes: int = Field(default=2048, ge=16, description="Interior activity nodes")
    kappa3_convention: Literal["consistent", "as_printed"] = Field(
        default="consistent", description="Case II drift prefactor convention"
    )


class AgentNumerics(_Strict):
    """Monte Carlo settings."""

    dt: float = Field(default=0.01, gt=0, description="Time step (s)")
    agent_count: int = Field(default=100_000, ge=1, description="Number of agents")
    window: int = Field(default=10_000, ge=100, description="Steady-state window (steps)")
    tol: float = Field(default=1e-3, gt=0, description="Steady-state tolerance")
    max_time: float = Field(default=1e6, gt=0, description="Simulated-time cap (s)")
    burn_in: float = Field(default=400.0, ge=0, description="Simulated time before the steady-state test (s)")
    duration: float | None = Field(
        default=None, gt=0, description="Fixed run length instead of steady-state detection (s)"
    )
    bins: int = Field(default=64, ge=10, description="Activity histogram bins")
    x_bins: int = Field(default=16, ge=1, description="Spatial bins for per-x activity statistics")
    record_every: int = Field(default=10, ge=1, description="Steps between drift-series records")
    init: Literal["preferred", "activity"] = Field(
        default="preferred", description="m = M(x), or m set from a_init"
    )
    a_init: float | None = Field(default=None, gt=0, lt=1, description="Initial activity for init='activity'")
    monte_carlo: bool = Field(default=False, description="Add Monte Carlo columns to velocity sweeps")

    @model_validator(mode="after")
    def check_init(self) -> "AgentNumerics":
        """init='activity' needs a_init."""
        if self.init == "activity" and self.a_init is None:
            raise ValueError("init='activity' requires a_init")
        return self


class KineticNumerics(_Strict):
    """Finite-volume kinetic solver settings."""

    x_cells: int = Field(default=256, ge=4, description="Periodic x cells")
    a_cells: int = Field(default=512, ge=8, description="Activity cells")
    eps_list: list[float] = Field(
        default_factory=lambda: [0.2, 0.1, 0.05, 0.025], description="Scaling parameters to sweep"
    )
    case: Literal["I", "II"] = Field(default="I", description="Scaling case")
    mu: float = Field(default=1.0, gt=0, le=1, description="Case II gradient exponent")
    G_mu: float | None = Field(default=None, ge=0, description="Case II reduced gradient (1/um)")
    length: float | None = Field(default=None, gt=0, description="Periodic domain length (um)")
    t_final: float = Field(default=100.0, gt=0, description="Observation time (s)")
    cfl: float = Field(default=0.9, gt=0, le=1, description="CFL safety factor")
    steady_tol: float = Field(default=1e-8, gt=0, description="Relative ||dq/dt|| for steady state")
    bump_amplitude: float = Field(default=0.5, ge=0, lt=1, description="Cosine modulation of initial density")

    @model_validator(mode="after")
    def check_eps(self) -> "KineticNumerics":
        """Every eps in (0, 1)."""
        if not self.eps_list or any(not 0 < e < 1 for e in self.eps_list):
            raise ValueError("eps_list entries must lie in (0, 1)")
        return self


class MacroNumerics(_Strict):
    """Macroscopic PDE settings."""

    x_cells: int = Field(default=512, ge=4, description="Periodic x cells")
    length: float | None = Field(default=None, gt=0, description="Periodic domain length (um)")
    t_final: float = Field(default=100.0, gt=0, description="Final time (s)")
    snapshot_times: list[float] = Field(default_factory=list, description="Extra output times (s)")
    cfl: float = Field(default=0.9, gt=0, le=1, description="Stability safety factor")
    bump_width: float = Field(default=20.0, gt=0, description="Initial Gaussian width (um)")


class NumericsConfig(_Strict):
    """Per-tier numerics plus shared seed and threading."""

    seed: int | None = Field(default=None, ge=0, description="Master seed (settings default if omitted)")
    threads: int | None = Field(default=None, ge=1, description="Worker threads (settings default if omitted)")
    closure: ClosureNumerics = Field(default_factory=ClosureNumerics)
    agents: AgentNumerics = Field(default_factory=AgentNumerics)
    kinetic: KineticNumerics = Field(default_factory=KineticNumerics)
    macro: MacroNumerics = Field(default_factory=MacroNumerics)


class OutputConfig(_Strict):
    """Where results go."""

    directory: str | None = Field(default=None, description="Output directory (settings default if omitted)")
    time_series: bool = Field(default=True, description="Write agent drift time series")


class ExperimentConfig(_Strict):
    """A full experiment: parameters, environment, tier, numerics and outputs."""

    params: PhysParams = Field(default_factory=PhysParams)
    env: EnvironmentConfig = Field(default_factory=EnvironmentConfig)
    tier: Tier = Field(default=Tier.CLOSURE)
    numerics: NumericsConfig = Field(default_factory=NumericsConfig)
    outputs: OutputConfig = Field(default_factory=OutputConfig)
