"""Physical parameter and environment models."""

import math
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator


class PhysParams(BaseModel):
    """Pathway, motility and receptor constants of the bacterium.

    Units are micrometres, seconds and micromolar. The defaults reproduce
    the reference parameter set; ``kR`` is the knob most experiments vary.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    v0: float = Field(default=16.5 / math.sqrt(2.0), gt=0, description="Run speed (um/s)")
    kR: float = Field(default=0.005, gt=0, description="Methylation rate (1/s)")
    a0: float = Field(default=0.5, gt=0, lt=1, description="Adapted activity")
    alpha0: float = Field(default=1.7, gt=0, description="Methylation free-energy slope")
    z0: float = Field(default=0.14, gt=0, description="Baseline tumbling rate (1/s)")
    tau0: float = Field(default=0.8, gt=0, description="Tumbling time scale (s)")
    H: float = Field(default=10.0, gt=0, description="Motor Hill coefficient")
    N: int = Field(default=6, gt=0, description="Receptor cluster size")
    KI: float = Field(default=18.2, gt=0, description="Inactive-state dissociation constant (uM)")
    KA: float = Field(default=3000.0, gt=0, description="Active-state dissociation constant (uM)")
    S0: float = Field(default=4.0 * 18.2, gt=0, description="Signal at x = 0 (uM)")
    m0: float = Field(default=1.0, description="Reference methylation level")

    @model_validator(mode="after")
    def check_receptor_window(self) -> "PhysParams":
        """KI < KA and the reference signal sits above KI."""
        if not self.KI < self.KA:
            raise ValueError(f"KI ({self.KI}) must be smaller than KA ({self.KA})")
        if self.KI > self.S0:
            raise ValueError(f"S0 ({self.S0}) must not be below KI ({self.KI})")
        return self

    @property
    def drift_scale(self) -> float:
        """Pathway speed factor K = 1 / (4 N alpha0 kR) of the closure ODE."""
        return 1.0 / (4.0 * self.N * self.alpha0 * self.kR)


class Environment(BaseModel):
    """Exponential attractant ramp S(x) = S0 exp(G x) on [x_min, x_max]."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    G: float = Field(ge=0, description="Log-gradient (1/um)")
    x_min: float = Field(description="Left end of the domain (um)")
    x_max: float = Field(description="Right end of the domain (um)")
    periodic: bool = Field(default=True, description="Wrap positions at the domain ends")
    S0: float = Field(default=4.0 * 18.2, gt=0, description="Signal at x = 0 (uM)")

    @model_validator(mode="after")
    def check_bounds(self) -> "Environment":
        """Domain must be a non-empty interval."""
        if not self.x_min < self.x_max:
            raise ValueError(f"x_min ({self.x_min}) must be below x_max ({self.x_max})")
        return self

    @property
    def length(self) -> float:
        """Domain length (um)."""
        return self.x_max - self.x_min


class Regime(str, Enum):
    """Asymptotic regime selected by the criticality ratio g."""

    CASE_I_SUPERCRITICAL = "CaseI_supercritical"
    CASE_I_SUBCRITICAL = "CaseI_subcritical"
    CASE_II_HYPERBOLIC = "CaseII_hyperbolic"
    CASE_II_KELLER_SEGEL = "CaseII_KellerSegel"
    UNBIASED = "Unbiased"
