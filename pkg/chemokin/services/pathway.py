"""Pathway maps, environment helpers and regime classification.

Everything here is a pure function of immutable inputs. Array inputs are
accepted wherever the math is pointwise so the agent and kinetic tiers can
call the same maps on whole grids.
"""

import logging
import math

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import expit, logit

from chemokin.errors import DomainError
from chemokin.models.params import Environment, PhysParams, Regime

logger = logging.getLogger(__name__)

# g thresholds between regimes (derived from the kR = 0.005 G-intervals)
SUPERCRITICAL_G = 1.0
HYPERBOLIC_G = 0.1
KELLER_SEGEL_G = 0.01

# Domain is cut where the log-linear receptor approximation holds
SIGNAL_LOWER_FACTOR = 5.0
SIGNAL_UPPER_FACTOR = 5.0

_REGIME_ORDER = [
    Regime.UNBIASED,
    Regime.CASE_II_KELLER_SEGEL,
    Regime.CASE_II_HYPERBOLIC,
    Regime.CASE_I_SUBCRITICAL,
    Regime.CASE_I_SUPERCRITICAL,
]


def signal(env: Environment, x: ArrayLike) -> NDArray[np.float64] | float:
    """Attractant concentration S(x) = S0 exp(G x) in uM."""
    values = env.S0 * np.exp(env.G * np.asarray(x, dtype=float))
    return float(values) if values.ndim == 0 else values


def preferred_methylation(
    env: Environment, x: ArrayLike, p: PhysParams
) -> NDArray[np.float64] | float:
    """Adapted methylation M = m0 + ln(S(x)/KI)/alpha0.

    Raises:
        DomainError: If the concentration at ``x`` is not positive
    """
    s = np.asarray(signal(env, x), dtype=float)
    if np.any(s <= 0) or not np.all(np.isfinite(s)):
        raise DomainError("Preferred methylation needs a positive finite concentration")
    values = p.m0 + methylation_offset(env, x, p)
    return float(values) if np.ndim(values) == 0 else values


def methylation_offset(env: Environment, x: ArrayLike, p: PhysParams) -> NDArray[np.float64]:
    """M(x) - m0 computed without touching m0.

    Agents track methylation relative to m0 so every output is independent
    of the reference level down to the last bit.
    """
    xs = np.asarray(x, dtype=float)
    return (math.log(env.S0 / p.KI) + env.G * xs) / p.alpha0


def activity(m: ArrayLike, S: ArrayLike, p: PhysParams) -> NDArray[np.float64] | float:
    """Receptor activity a = 1/(1 + exp(N E)) with E = -alpha0 (m - m0) + ln(S/KI).

    Raises:
        DomainError: If ``S`` is not positive
    """
    s = np.asarray(S, dtype=float)
    if np.any(s <= 0):
        raise DomainError("Activity needs a positive concentration")
    free_energy = -p.alpha0 * (np.asarray(m, dtype=float) - p.m0) + np.log(s / p.KI)
    values = expit(-p.N * free_energy)
    return float(values) if np.ndim(values) == 0 else values


def activity_from_offset(dm: ArrayLike, p: PhysParams) -> NDArray[np.float64]:
    """Activity as a function of u = m - M only."""
    return expit(p.N * p.alpha0 * np.asarray(dm, dtype=float))


def activity_offset(a: ArrayLike, p: PhysParams) -> NDArray[np.float64] | float:
    """Inverse of ``activity_from_offset``: the m - M giving activity ``a``.

    Raises:
        DomainError: If ``a`` is outside (0, 1)
    """
    arr = np.asarray(a, dtype=float)
    if np.any(arr <= 0) or np.any(arr >= 1):
        raise DomainError("Activity must lie strictly inside (0, 1)")
    values = logit(arr) / (p.N * p.alpha0)
    return float(values) if np.ndim(values) == 0 else values


def tumbling_rate(a: ArrayLike, p: PhysParams) -> NDArray[np.float64] | float:
    """Z(a) = z0 + (a/a0)^H / tau0 in 1/s."""
    values = p.z0 + np.power(np.asarray(a, dtype=float) / p.a0, p.H) / p.tau0
    return float(values) if np.ndim(values) == 0 else values


def tumbling_rate_slope(a: ArrayLike, p: PhysParams) -> NDArray[np.float64] | float:
    """Derivative Z'(a)."""
    arr = np.asarray(a, dtype=float)
    values = (p.H / (p.a0 * p.tau0)) * np.power(arr / p.a0, p.H - 1.0)
    return float(values) if np.ndim(values) == 0 else values


def adaptation_rate(a: ArrayLike, p: PhysParams) -> NDArray[np.float64] | float:
    """F0(a) = kR (1 - a/a0) in 1/s."""
    values = p.kR * (1.0 - np.asarray(a, dtype=float) / p.a0)
    return float(values) if np.ndim(values) == 0 else values


def gradient_number(p: PhysParams, G: float) -> tuple[float, float, float]:
    """Criticality ratio g = v0 G/(kR alpha0) and the drift zeros a1, a2.

    a1 = (1 - g)/2 and a2 = 1 - a1 so that a1 + a2 = 1 holds exactly.

    Raises:
        DomainError: If G is negative or kR is not positive
    """
    if G < 0:
        raise DomainError(f"Gradient must be non-negative, got {G}")
    if p.kR <= 0:
        raise DomainError("Adaptation rate kR must be positive")
    g = p.v0 * G / (p.kR * p.alpha0)
    a1 = 0.5 * (1.0 - g)
    a2 = 1.0 - a1
    return g, a1, a2


def classify_regime(g: float, mu_hint: float | None = None) -> Regime:
    """Map g to the asymptotic regime.

    Args:
        g: Criticality ratio
        mu_hint: Optional Case II exponent. When given for g <= 0.1 it picks
            Keller-Segel (mu == 1) or hyperbolic (mu < 1) directly.

    Raises:
        DomainError: If g is negative
    """
    if g < 0 or math.isnan(g):
        raise DomainError(f"Criticality ratio must be non-negative, got {g}")
    if g == 0:
        return Regime.UNBIASED
    if g > SUPERCRITICAL_G:
        return Regime.CASE_I_SUPERCRITICAL
    if g > HYPERBOLIC_G:
        return Regime.CASE_I_SUBCRITICAL
    if mu_hint is not None:
        return Regime.CASE_II_KELLER_SEGEL if mu_hint >= 1.0 else Regime.CASE_II_HYPERBOLIC
    if g > KELLER_SEGEL_G:
        return Regime.CASE_II_HYPERBOLIC
    return Regime.CASE_II_KELLER_SEGEL


def regime_rank(regime: Regime) -> int:
    """Position of a regime from Unbiased (0) up to supercritical (4)."""
    return _REGIME_ORDER.index(regime)


def domain_bounds(p: PhysParams, G: float) -> tuple[float, float]:
    """Interval on which 5 KI < S(x) <= KA/5.

    Raises:
        DomainError: If G is not positive (callers must pass explicit bounds)
    """
    if G <= 0:
        raise DomainError("Domain bounds need G > 0; supply explicit bounds for G = 0")
    x_min = math.log(SIGNAL_LOWER_FACTOR * p.KI / p.S0) / G
    x_max = math.log(p.KA / (SIGNAL_UPPER_FACTOR * p.S0)) / G
    if not x_min < x_max:
        raise DomainError("KA/KI window too narrow for a log-linear domain")
    return x_min, x_max


def environment_for(
    p: PhysParams,
    G: float,
    bounds: tuple[float, float] | None = None,
    periodic: bool = True,
) -> Environment:
    """Build an Environment, defaulting the bounds to ``domain_bounds``."""
    if bounds is None:
        bounds = domain_bounds(p, G)
    return Environment(G=G, x_min=bounds[0], x_max=bounds[1], periodic=periodic, S0=p.S0)


def nondimensional_groups(
    p: PhysParams, G: float, L: float, V0: float = 10.0
) -> dict[str, float]:
    """Candidate small parameters of the scaled kinetic equation.

    Args:
        p: Physical parameters
        G: Log-gradient (1/um)
        L: Macroscopic length scale (um)
        V0: Reference speed (um/s)

    Returns:
        Ratios V0 T_a / L, V0 T_t / L and L_M / L plus g.
    """
    if L <= 0:
        raise DomainError("Length scale must be positive")
    g, _, _ = gradient_number(p, G)
    adaptation_time = 1.0 / p.kR
    tumble_time = 1.0 / float(tumbling_rate(p.a0, p))
    signal_length = p.alpha0 / G if G > 0 else math.inf
    return {
        "eps_adapt": V0 * adaptation_time / L,
        "eps_tumble": V0 * tumble_time / L,
        "eps_signal": signal_length / L,
        "g": g,
    }


def infer_mu(g: float, eps: float) -> float:
    """Case II exponent mu = log_eps(g), for reporting only."""
    if g <= 0:
        raise DomainError("mu is only defined for g > 0")
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    return math.log(g) / math.log(eps)


def warn_if_unusual(p: PhysParams) -> None:
    """Log parameters outside the calibrated adaptation range."""
    if not 0.0005 <= p.kR <= 0.01:
        logger.warning("kR=%g lies outside the calibrated range [0.0005, 0.01]", p.kR)
