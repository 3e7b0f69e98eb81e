"""Computational services for chemokin."""

from .base import TierCommand, TierRegistry, get_tier_registry
from .closure import (
    ClosureProfile,
    boundary_exponents,
    build_profile,
    case2_coefficients,
    delta_closure,
    drift_velocity,
    evaluate_q0,
    log_weight,
    normalize,
)
from .metrics import Distribution1D, l1_histogram_distance, moments, wasserstein1
from .pathway import (
    activity,
    classify_regime,
    domain_bounds,
    gradient_number,
    preferred_methylation,
    signal,
    tumbling_rate,
)
from .sweeps import SweepOutcome, SweepPool, point_seed
from .harness import (
    cmd_agents,
    cmd_closure,
    cmd_compare,
    cmd_convergence,
    cmd_kinetic,
    cmd_macro,
    cmd_velocity_sweep,
    config_hash,
    load_config,
    register_builtin_tiers,
    resolve_config,
)

__all__ = [
    # Registry
    "TierCommand",
    "TierRegistry",
    "get_tier_registry",
    # Pathway
    "signal",
    "preferred_methylation",
    "activity",
    "tumbling_rate",
    "gradient_number",
    "classify_regime",
    "domain_bounds",
    # Closure
    "ClosureProfile",
    "build_profile",
    "log_weight",
    "evaluate_q0",
    "normalize",
    "boundary_exponents",
    "drift_velocity",
    "case2_coefficients",
    "delta_closure",
    # Metrics
    "Distribution1D",
    "wasserstein1",
    "l1_histogram_distance",
    "moments",
    # Sweeps
    "SweepPool",
    "SweepOutcome",
    "point_seed",
    # Harness
    "load_config",
    "resolve_config",
    "config_hash",
    "register_builtin_tiers",
    "cmd_closure",
    "cmd_agents",
    "cmd_kinetic",
    "cmd_macro",
    "cmd_velocity_sweep",
    "cmd_convergence",
    "cmd_compare",
]
