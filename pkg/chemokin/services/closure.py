"""Leading-order activity closure for a uniform exponential gradient.

The steady activity distributions of up- and down-gradient movers solve a
first-order ODE system whose solution is

    Q+(a) = c0 (1/2 - a1)/(a - a1) exp(W(a)),
    Q-(a) = c0 (1/2 - a1)/(a2 - a) exp(W(a)),

with W(a) = int_{1/2}^a f and f the pathway integrand below. f has simple
poles at the support ends; their residues are the endpoint exponents. W is
split as

    W(a) = th_L ln((a - e_L)/(1/2 - e_L)) + th_R ln((e_R - a)/(e_R - 1/2)) + R(a)

where R integrates the smooth remainder. Every point of the support is
addressed by its exact distances to both endpoints so the singular factors
never lose precision through cancellation.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import quad, quad_vec
from scipy.optimize import minimize_scalar

from chemokin.errors import (
    DomainError,
    EndpointError,
    IntegrabilityError,
    MisuseError,
    SingularCaseError,
)
from chemokin.models.params import PhysParams
from chemokin.models.results import ResultTable
from chemokin.services.metrics import Distribution1D
from chemokin.services.pathway import gradient_number, tumbling_rate, tumbling_rate_slope

logger = logging.getLogger(__name__)

DEFAULT_NODES = 2048
CLUSTER_RATIO = 1.05
# First node sits this fraction of a half-support away from each endpoint
FIRST_OFFSET = 1e-9
SINGULAR_G_TOL = 1e-12
# Above this endpoint exponent the end panel is integrated after a change of variables
ALG_WEIGHT_LIMIT = 50.0

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_GL16_NODES, _GL16_WEIGHTS = np.polynomial.legendre.leggauss(16)

_DELTA_MOMENTS = {
    "mean": 0.5,
    "var": 0.0,
    "mean_plus": 0.5,
    "var_plus": 0.0,
    "fraction_plus": 0.5,
    "mean_minus": 0.5,
    "var_minus": 0.0,
    "fraction_minus": 0.5,
}

Direction = Literal["plus", "minus", "both"]
KappaConvention = Literal["consistent", "as_printed"]


@dataclass(frozen=True)
class ClosureProfile:
    """Leading-order measure Q0+- on a clustered activity grid.

    ``grid`` holds interior nodes only; ``dist_left``/``dist_right`` are the
    exact distances of each node to the support ends. ``cdf_plus`` and
    ``cdf_minus`` are cumulative probabilities at ``[e_L, *grid, e_R]``.
    """

    params: PhysParams
    G: float
    g: float
    a1: float
    a2: float
    support: tuple[float, float]
    grid: NDArray[np.float64]
    dist_left: NDArray[np.float64]
    dist_right: NDArray[np.float64]
    remainder: NDArray[np.float64]
    logw: NDArray[np.float64]
    exponents: tuple[float, float]
    c0: float = 1.0
    qplus: NDArray[np.float64] = field(default_factory=lambda: np.empty(0))
    qminus: NDArray[np.float64] = field(default_factory=lambda: np.empty(0))
    cdf_plus: NDArray[np.float64] = field(default_factory=lambda: np.empty(0))
    cdf_minus: NDArray[np.float64] = field(default_factory=lambda: np.empty(0))
    kappa: float = 0.0
    moments: dict[str, float] = field(default_factory=dict)
    is_delta: bool = False

    @property
    def supercritical(self) -> bool:
        """True when the support is all of (0, 1)."""
        return self.g > 1.0

    @property
    def cdf_points(self) -> NDArray[np.float64]:
        """Activity values at which the stored CDFs are tabulated."""
        return np.concatenate([[self.support[0]], self.grid, [self.support[1]]])

    @property
    def density_plus(self) -> NDArray[np.float64]:
        """Q0+/(N alpha0 a(1-a)) at the grid nodes."""
        return self.qplus / (self.params.N * self.params.alpha0 * self.grid * (1.0 - self.grid))

    @property
    def density_minus(self) -> NDArray[np.float64]:
        """Q0-/(N alpha0 a(1-a)) at the grid nodes."""
        return self.qminus / (self.params.N * self.params.alpha0 * self.grid * (1.0 - self.grid))


# ---------------------------------------------------------------------------
# Pathway integrand
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Integrand:
    """The log-weight integrand expressed through endpoint distances."""

    p: PhysParams
    g: float
    a1: float
    a2: float
    e_left: float
    e_right: float
    theta_left: float
    theta_right: float

    @property
    def span(self) -> float:
        return self.e_right - self.e_left

    def position(self, dl: NDArray[np.float64], dr: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.where(dl <= dr, self.e_left + dl, self.e_right - dr)

    def factors(
        self, dl: NDArray[np.float64], dr: NDArray[np.float64]
    ) -> tuple[NDArray[np.float64], ...]:
        """a, 1 - a, a - a1, a2 - a from the endpoint distances."""
        if self.g > 1.0:
            return dl, dr, dl - self.a1, (self.a2 - 1.0) + dr
        return self.a1 + dl, self.a1 + dr, dl, dr

    def pole_free(self, dl: NDArray[np.float64], dr: NDArray[np.float64]) -> NDArray[np.float64]:
        """Smooth remainder r = f - th_L/dl + th_R/dr."""
        tau = self.position(dl, dr)
        fa, fb, fc, fd = self.factors(dl, dr)
        k = self.p.drift_scale
        f = -k * tumbling_rate(tau, self.p) * (2.0 * tau - 1.0) / (fa * fb * fc * fd)
        return f - self.theta_left / dl + self.theta_right / dr

    def log_weight(
        self, dl: NDArray[np.float64], dr: NDArray[np.float64], remainder: NDArray[np.float64]
    ) -> NDArray[np.float64]:
        half_l = 0.5 - self.e_left
        half_r = self.e_right - 0.5
        return (
            self.theta_left * np.log(dl / half_l)
            + self.theta_right * np.log(dr / half_r)
            + remainder
        )

    def log_densities(
        self, dl: NDArray[np.float64], dr: NDArray[np.float64], logw: NDArray[np.float64]
    ) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Log of p+- = Q+-/(2 N alpha0 a(1-a)) with c0 = 1."""
        fa, fb, fc, fd = self.factors(dl, dr)
        base = math.log(0.5 * self.g / (2.0 * self.p.N * self.p.alpha0)) + logw - np.log(fa) - np.log(fb)
        return base - np.log(fc), base - np.log(fd)


def endpoint_exponents(p: PhysParams, G: float) -> tuple[float, float]:
    """Residues of the log-weight integrand at the two support ends.

    Returns (theta0, theta1) at a = 0, 1 when g > 1 and (theta2, theta3)
    at a = a1, a2 when 0 < g < 1.

    Raises:
        SingularCaseError: If g = 1
        DomainError: If G = 0 (no finite support ends)
    """
    _check_adapted_activity(p)
    g, a1, a2 = gradient_number(p, G)
    if g == 0:
        raise DomainError("Endpoint exponents are undefined for G = 0")
    if abs(g - 1.0) <= SINGULAR_G_TOL:
        raise SingularCaseError("g = 1 puts a1 on the pathway pole at a = 0")
    k = p.drift_scale
    if g > 1.0:
        theta0 = -k * p.z0 / (a1 * a2)
        theta1 = k * float(tumbling_rate(1.0, p)) / ((1.0 - a1) * (a2 - 1.0))
        return theta0, theta1
    theta2 = k * float(tumbling_rate(a1, p)) / (a1 * (1.0 - a1))
    theta3 = k * float(tumbling_rate(a2, p)) / (a2 * (1.0 - a2))
    return theta2, theta3


def _check_adapted_activity(p: PhysParams) -> None:
    if p.a0 != 0.5:
        raise DomainError(f"Closure formulas assume a0 = 1/2, got {p.a0}")


def _half_offsets(half: float, count: int) -> NDArray[np.float64]:
    """Increasing distances from an endpoint, geometric then uniform, ending at ``half``."""
    steps = np.empty(count)
    cap = 2.0 * half / count
    step = FIRST_OFFSET * half
    for i in range(count):
        steps[i] = step
        step = min(step * CLUSTER_RATIO, cap)
    offsets = np.cumsum(steps)
    offsets *= half / offsets[-1]
    offsets[-1] = half
    return offsets


def _gauss_panels(
    integrand: _Integrand,
    s_lo: NDArray[np.float64],
    s_hi: NDArray[np.float64],
    r_lo: NDArray[np.float64],
    left_side: NDArray[np.bool_],
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """Gauss-Legendre points, weights and log-weights inside interior panels.

    ``s`` is the distance to the nearer support end; R at each point is
    continued from the panel's outer node with a nested rule.
    """
    span = integrand.span
    mid = 0.5 * (s_lo + s_hi)
    rad = 0.5 * (s_hi - s_lo)
    s_q = mid[:, None] + rad[:, None] * _GL_NODES[None, :]
    sub = s_lo[:, None, None] + 0.5 * (s_q - s_lo[:, None])[:, :, None] * (1.0 + _GL_NODES[None, None, :])
    side = left_side[:, None, None]
    r_sub = integrand.pole_free(np.where(side, sub, span - sub), np.where(side, span - sub, sub))
    partial = 0.5 * (s_q - s_lo[:, None]) * (r_sub @ _GL_WEIGHTS)
    sign = np.where(left_side, 1.0, -1.0)[:, None]
    remainder = r_lo[:, None] + sign * partial
    side2 = left_side[:, None]
    dl = np.where(side2, s_q, span - s_q)
    dr = np.where(side2, span - s_q, s_q)
    logw = integrand.log_weight(dl, dr, remainder)
    weights = np.abs(rad)[:, None] * _GL_WEIGHTS[None, :]
    return dl, dr, logw, weights


def _end_panel_masses(
    integrand: _Integrand, first: float, r_first: float, left: bool
) -> tuple[float, float]:
    """Mass of p+ and p- between a support end and the first node.

    The integrand behaves like s^(theta - 1) times a smooth factor, so the
    smooth factor is integrated against the algebraic weight.
    """
    span = integrand.span
    theta = integrand.theta_left if left else integrand.theta_right
    if theta <= 0:
        raise IntegrabilityError(f"Endpoint exponent {theta} is not positive")
    sign = 1.0 if left else -1.0

    def log_p(s: float) -> tuple[float, float]:
        pts = s + 0.5 * (first - s) * (1.0 + _GL_NODES)
        dl_sub = pts if left else span - pts
        dr_sub = span - pts if left else pts
        tail = 0.5 * (first - s) * float(np.dot(_GL_WEIGHTS, integrand.pole_free(dl_sub, dr_sub)))
        rem = r_first - sign * tail
        dl = np.array([s if left else span - s])
        dr = np.array([span - s if left else s])
        logw = integrand.log_weight(dl, dr, np.array([rem]))
        lp, lm = integrand.log_densities(dl, dr, logw)
        return float(lp[0]), float(lm[0])

    ref_plus, ref_minus = log_p(first)
    masses = []
    for index, ref in enumerate((ref_plus, ref_minus)):
        if not np.isfinite(ref):
            masses.append(0.0)
            continue

        def psi(t: float, index: int = index, ref: float = ref) -> float:
            t = max(t, 1e-12)
            value = log_p(t * first)[index] - ref - (theta - 1.0) * math.log(t)
            return math.exp(min(value, 700.0))

        if theta > ALG_WEIGHT_LIMIT:
            # t = u^(1/theta) absorbs the weight; QUADPACK returns nan for large alg exponents
            integral, _ = quad(lambda u, psi=psi: psi(u ** (1.0 / theta)), 0.0, 1.0, limit=200)
            integral /= theta
        else:
            integral, _ = quad(psi, 0.0, 1.0, weight="alg", wvar=(theta - 1.0, 0.0), limit=200)
        if not math.isfinite(integral):
            logger.warning("[Closure] end panel quadrature failed | theta=%.6g", theta)
            integral = 1.0 / theta
        masses.append(math.exp(ref) * first * integral)
    return masses[0], masses[1]


def _remainder_at_nodes(
    integrand: _Integrand, offsets: NDArray[np.float64], left: bool
) -> NDArray[np.float64]:
    """R at the nodes of one half, accumulated outward from a = 1/2."""
    span = integrand.span
    lo, hi = offsets[:-1], offsets[1:]

    def panel_integrals(t: float) -> NDArray[np.float64]:
        s = lo + t * (hi - lo)
        if left:
            return integrand.pole_free(s, span - s) * (hi - lo)
        return integrand.pole_free(span - s, s) * (hi - lo)

    integrals, _ = quad_vec(panel_integrals, 0.0, 1.0, epsabs=1e-14, epsrel=1e-12, norm="max")
    tail = np.concatenate([np.cumsum(integrals[::-1])[::-1], [0.0]])
    return -tail if left else tail


def build_profile(p: PhysParams, G: float, nodes: int = DEFAULT_NODES) -> ClosureProfile:
    """Construct the normalized closure for gradient ``G``.

    Args:
        p: Physical parameters (a0 must be 1/2)
        G: Log-gradient; G = 0 returns the point-mass closure
        nodes: Approximate number of interior grid nodes; 1/2 is always one of them

    Raises:
        SingularCaseError: If g = 1
        IntegrabilityError: If an endpoint exponent is non-positive
    """
    if G == 0:
        return delta_closure(p)
    if nodes < 16:
        raise DomainError("Closure grid needs at least 16 nodes")
    g, a1, a2 = gradient_number(p, G)
    theta_left, theta_right = endpoint_exponents(p, G)
    e_left, e_right = (0.0, 1.0) if g > 1.0 else (a1, a2)
    integrand = _Integrand(p, g, a1, a2, e_left, e_right, theta_left, theta_right)

    per_side = max(nodes // 2, 8)
    off_left = _half_offsets(0.5 - e_left, per_side)
    off_right = _half_offsets(e_right - 0.5, per_side)
    r_left = _remainder_at_nodes(integrand, off_left, left=True)
    r_right = _remainder_at_nodes(integrand, off_right, left=False)

    span = integrand.span
    dist_left = np.concatenate([off_left, span - off_right[:-1][::-1]])
    dist_right = np.concatenate([span - off_left, off_right[:-1][::-1]])
    dist_right[per_side - 1] = off_right[-1]
    remainder = np.concatenate([r_left, r_right[:-1][::-1]])
    grid = integrand.position(dist_left, dist_right)
    logw = integrand.log_weight(dist_left, dist_right, remainder)

    profile = ClosureProfile(
        params=p,
        G=G,
        g=g,
        a1=a1,
        a2=a2,
        support=(e_left, e_right),
        grid=grid,
        dist_left=dist_left,
        dist_right=dist_right,
        remainder=remainder,
        logw=logw,
        exponents=(theta_left, theta_right),
    )

    mass_plus, mass_minus, first_moment, second_moment = _panel_integrals(profile)
    total = mass_plus.sum() + mass_minus.sum()
    c0 = 1.0 / total
    profile = dataclasses.replace(profile, c0=c0)
    qplus, qminus = evaluate_q0(profile)

    cdf_plus = np.concatenate([[0.0], np.cumsum(mass_plus * c0)])
    cdf_minus = np.concatenate([[0.0], np.cumsum(mass_minus * c0)])
    n_plus, n_minus = cdf_plus[-1], cdf_minus[-1]
    kappa = p.v0 * (n_plus - n_minus) / (n_plus + n_minus)
    stats = _moment_summary(c0, mass_plus, mass_minus, first_moment, second_moment)

    for array in (grid, dist_left, dist_right, remainder, logw, qplus, qminus, cdf_plus, cdf_minus):
        array.flags.writeable = False

    logger.debug(
        "[Closure] built profile | G=%g g=%.6g thetas=(%.6g, %.6g) c0=%.6g kappa=%.6g",
        G, g, theta_left, theta_right, c0, kappa,
    )
    return dataclasses.replace(
        profile,
        qplus=qplus,
        qminus=qminus,
        cdf_plus=cdf_plus,
        cdf_minus=cdf_minus,
        kappa=float(kappa),
        moments=stats,
    )


def _integrand_of(profile: ClosureProfile) -> _Integrand:
    theta_left, theta_right = profile.exponents
    return _Integrand(
        profile.params, profile.g, profile.a1, profile.a2,
        profile.support[0], profile.support[1], theta_left, theta_right,
    )


def _panel_integrals(
    profile: ClosureProfile,
) -> tuple[
    NDArray[np.float64],
    NDArray[np.float64],
    tuple[NDArray[np.float64], NDArray[np.float64]],
    tuple[NDArray[np.float64], NDArray[np.float64]],
]:
    """Unnormalized (c0 = 1) masses and moments of p+- per panel.

    Panels run from the left end through every node to the right end.
    """
    integrand = _integrand_of(profile)
    dl, dr, rem = profile.dist_left, profile.dist_right, profile.remainder
    left_side = (dl[:-1] + dl[1:]) <= (dr[:-1] + dr[1:])
    s_lo = np.where(left_side, dl[:-1], dr[:-1])
    s_hi = np.where(left_side, dl[1:], dr[1:])
    q_dl, q_dr, q_logw, weights = _gauss_panels(integrand, s_lo, s_hi, rem[:-1], left_side)
    log_plus, log_minus = integrand.log_densities(q_dl, q_dr, q_logw)
    a_q = integrand.position(q_dl, q_dr)
    dens_plus = np.exp(log_plus)
    dens_minus = np.exp(log_minus)
    inner_plus = np.sum(weights * dens_plus, axis=1)
    inner_minus = np.sum(weights * dens_minus, axis=1)
    inner_m1 = (np.sum(weights * dens_plus * a_q, axis=1), np.sum(weights * dens_minus * a_q, axis=1))
    inner_m2 = (
        np.sum(weights * dens_plus * a_q**2, axis=1),
        np.sum(weights * dens_minus * a_q**2, axis=1),
    )

    left_plus, left_minus = _end_panel_masses(integrand, float(dl[0]), float(rem[0]), left=True)
    right_plus, right_minus = _end_panel_masses(integrand, float(dr[-1]), float(rem[-1]), left=False)
    a_left = profile.support[0] + 0.5 * dl[0]
    a_right = profile.support[1] - 0.5 * dr[-1]

    mass_plus = np.concatenate([[left_plus], inner_plus, [right_plus]])
    mass_minus = np.concatenate([[left_minus], inner_minus, [right_minus]])
    m1 = (
        np.concatenate([[left_plus * a_left], inner_m1[0], [right_plus * a_right]]),
        np.concatenate([[left_minus * a_left], inner_m1[1], [right_minus * a_right]]),
    )
    m2 = (
        np.concatenate([[left_plus * a_left**2], inner_m2[0], [right_plus * a_right**2]]),
        np.concatenate([[left_minus * a_left**2], inner_m2[1], [right_minus * a_right**2]]),
    )
    return mass_plus, mass_minus, m1, m2


def _moment_summary(
    c0: float,
    mass_plus: NDArray[np.float64],
    mass_minus: NDArray[np.float64],
    m1: tuple[NDArray[np.float64], NDArray[np.float64]],
    m2: tuple[NDArray[np.float64], NDArray[np.float64]],
) -> dict[str, float]:
    """Per-direction conditional mean and variance of the activity."""
    stats: dict[str, float] = {}
    for label, mass, first, second in (
        ("plus", mass_plus, m1[0], m2[0]),
        ("minus", mass_minus, m1[1], m2[1]),
    ):
        total = mass.sum()
        mean = first.sum() / total
        stats[f"mean_{label}"] = float(mean)
        stats[f"var_{label}"] = float(max(second.sum() / total - mean**2, 0.0))
        stats[f"fraction_{label}"] = float(total * c0)
    total = mass_plus.sum() + mass_minus.sum()
    mean = (m1[0].sum() + m1[1].sum()) / total
    stats["mean"] = float(mean)
    stats["var"] = float(max((m2[0].sum() + m2[1].sum()) / total - mean**2, 0.0))
    return stats


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def log_weight(a: ArrayLike, profile: ClosureProfile) -> NDArray[np.float64] | float:
    """W(a) = int_{1/2}^a f at interior points of the support.

    Raises:
        EndpointError: If any ``a`` is at or beyond a support end
        MisuseError: For the point-mass closure
    """
    if profile.is_delta:
        raise MisuseError("The point-mass closure has no log-weight")
    arr = np.atleast_1d(np.asarray(a, dtype=float))
    e_left, e_right = profile.support
    if np.any(arr <= e_left) or np.any(arr >= e_right):
        raise EndpointError(
            f"log-weight requested outside the open support ({e_left:.6g}, {e_right:.6g})"
        )
    integrand = _integrand_of(profile)
    dl = arr - e_left
    dr = e_right - arr
    values = integrand.log_weight(dl, dr, _remainder_at(profile, integrand, arr))
    return float(values[0]) if np.ndim(a) == 0 else values


def _remainder_at(
    profile: ClosureProfile, integrand: _Integrand, a: NDArray[np.float64]
) -> NDArray[np.float64]:
    """R continued from the nearest node with a 16-point rule."""
    idx = np.clip(np.searchsorted(profile.grid, a), 1, profile.grid.size - 1)
    nearer = np.where(
        np.abs(profile.grid[idx - 1] - a) <= np.abs(profile.grid[idx] - a), idx - 1, idx
    )
    node = profile.grid[nearer]
    half_width = 0.5 * (a - node)
    pts = node[:, None] + half_width[:, None] * (1.0 + _GL16_NODES[None, :])
    e_left, e_right = profile.support
    r = integrand.pole_free(pts - e_left, e_right - pts)
    return profile.remainder[nearer] + half_width * (r @ _GL16_WEIGHTS)


def evaluate_q0(profile: ClosureProfile) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Q0+ and Q0- at the grid nodes for the profile's c0.

    Raises:
        MisuseError: For g = 0, where the closure is a point mass
    """
    if profile.is_delta:
        raise MisuseError("G = 0: use delta_closure")
    integrand = _integrand_of(profile)
    _, _, fc, fd = integrand.factors(profile.dist_left, profile.dist_right)
    scale = profile.c0 * (0.5 - profile.a1)
    weight = np.exp(profile.logw)
    return scale * weight / fc, scale * weight / fd


def q0_at(profile: ClosureProfile, a: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Q0+- at arbitrary interior activities."""
    arr = np.atleast_1d(np.asarray(a, dtype=float))
    w = np.asarray(log_weight(arr, profile))
    scale = profile.c0 * (0.5 - profile.a1)
    return scale * np.exp(w) / (arr - profile.a1), scale * np.exp(w) / (profile.a2 - arr)


def normalize(profile: ClosureProfile) -> float:
    """c0 making int (Q0+ + Q0-)/(2 N alpha0 a(1-a)) da equal to one.

    Raises:
        IntegrabilityError: If an endpoint exponent is non-positive
    """
    if profile.is_delta:
        return profile.c0
    mass_plus, mass_minus, _, _ = _panel_integrals(profile)
    total = float(mass_plus.sum() + mass_minus.sum())
    if not total > 0 or not math.isfinite(total):
        raise IntegrabilityError(f"Normalization integral is {total}")
    return 1.0 / total


def boundary_exponents(profile: ClosureProfile) -> tuple[float, float]:
    """(theta0, theta1) when g > 1, (theta2, theta3) when 0 < g < 1.

    Raises:
        MisuseError: For the point-mass closure
    """
    if profile.is_delta:
        raise MisuseError("G = 0 has no support endpoints")
    return profile.exponents


def drift_velocity(profile: ClosureProfile) -> float:
    """Macroscopic drift kappa from the ratio of moment integrals."""
    return 0.0 if profile.is_delta else profile.kappa


def direction_masses(profile: ClosureProfile) -> tuple[float, float]:
    """Fractions of up- and down-gradient movers."""
    if profile.is_delta:
        return 0.5, 0.5
    return float(profile.cdf_plus[-1]), float(profile.cdf_minus[-1])


def activity_moments(profile: ClosureProfile) -> dict[str, float]:
    """Mean and variance of a, overall and per direction."""
    return dict(profile.moments)


def case2_coefficients(
    p: PhysParams, G_mu: float, convention: KappaConvention = "consistent"
) -> tuple[float, float]:
    """Case II drift kappa3 and diffusion D0.

    D0 = v0^2/Z(1/2). kappa3 = (N/4) v0^2 G_mu |(1/Z)'(1/2)| points up the
    gradient. ``convention="as_printed"`` multiplies by alpha0, which is the
    closed form as usually quoted; the activity drift along a run carries no
    alpha0 once dM/dx = G/alpha0 is inserted. With the default parameters the
    consistent value is |kappa3|/G_mu ~ 2.64e3 um^2/s, a factor alpha0 below
    the quoted 4.49e3 um^2/s that "as_printed" reproduces.

    Raises:
        DomainError: If G_mu is negative
    """
    if G_mu < 0:
        raise DomainError(f"G_mu must be non-negative, got {G_mu}")
    z_half = float(tumbling_rate(0.5, p))
    inverse_slope = float(tumbling_rate_slope(0.5, p)) / z_half**2
    prefactor = p.N / 4.0
    if convention == "as_printed":
        prefactor *= p.alpha0
    elif convention != "consistent":
        raise DomainError(f"Unknown kappa3 convention: {convention}")
    kappa3 = prefactor * p.v0**2 * G_mu * abs(inverse_slope)
    return kappa3, p.v0**2 / z_half


def delta_closure(p: PhysParams, G: float = 0.0) -> ClosureProfile:
    """Point mass at a = 1/2, the closure of an unbiased environment.

    Raises:
        MisuseError: If G is not zero
    """
    if G != 0:
        raise MisuseError("delta_closure only describes G = 0")
    single = np.array([0.5])
    single.flags.writeable = False
    return ClosureProfile(
        params=p,
        G=0.0,
        g=0.0,
        a1=0.5,
        a2=0.5,
        support=(0.5, 0.5),
        grid=single,
        dist_left=np.zeros(1),
        dist_right=np.zeros(1),
        remainder=np.zeros(1),
        logw=np.zeros(1),
        exponents=(math.inf, math.inf),
        c0=p.N * p.alpha0 / 4.0,
        cdf_plus=np.array([0.0, 0.5]),
        cdf_minus=np.array([0.0, 0.5]),
        kappa=0.0,
        moments=dict(_DELTA_MOMENTS),
        is_delta=True,
    )


def _cdf_for(profile: ClosureProfile, direction: Direction) -> NDArray[np.float64]:
    if direction == "plus":
        return profile.cdf_plus
    if direction == "minus":
        return profile.cdf_minus
    if direction == "both":
        return profile.cdf_plus + profile.cdf_minus
    raise DomainError(f"Unknown direction: {direction}")


def bin_masses(
    profile: ClosureProfile,
    edges: ArrayLike,
    direction: Direction,
    conditional: bool = True,
) -> NDArray[np.float64]:
    """Closure probability of each activity bin.

    Args:
        profile: Closure profile
        edges: Increasing bin edges
        direction: "plus", "minus" or "both"
        conditional: Normalize within the direction instead of overall
    """
    e = np.asarray(edges, dtype=float)
    if e.ndim != 1 or e.size < 2 or np.any(np.diff(e) <= 0):
        raise DomainError("Bin edges must be strictly increasing")
    if profile.is_delta:
        masses = np.zeros(e.size - 1)
        inside = np.searchsorted(e, 0.5, side="right") - 1
        if 0 <= inside < masses.size:
            masses[inside] = 1.0 if conditional or direction == "both" else 0.5
        return masses
    cdf = _cdf_for(profile, direction)
    at_edges = np.interp(e, profile.cdf_points, cdf, left=0.0, right=cdf[-1])
    masses = np.diff(at_edges)
    if conditional:
        masses = masses / cdf[-1]
    return masses


def activity_distribution(profile: ClosureProfile, direction: Direction = "both") -> Distribution1D:
    """Closure activity law as a piecewise-constant Distribution1D on the grid panels."""
    if profile.is_delta:
        return Distribution1D.from_points([0.5], [1.0])
    cdf = _cdf_for(profile, direction)
    return Distribution1D.from_histogram(profile.cdf_points, np.diff(cdf), renormalize=True)


def endpoint_density_limit(profile: ClosureProfile) -> dict[str, str]:
    """Behaviour of the activity density at each support end.

    theta > 1 sends the density to zero, theta < 1 to infinity.
    """
    if profile.is_delta:
        raise MisuseError("The point-mass closure has no density")

    def classify(theta: float) -> str:
        if theta > 1.0:
            return "zero"
        if theta < 1.0:
            return "infinite"
        return "finite"

    return {"left": classify(profile.exponents[0]), "right": classify(profile.exponents[1])}


def drift_curve(p: PhysParams, G_values: ArrayLike, nodes: int = 512) -> NDArray[np.float64]:
    """kappa(G) over a sweep; g = 1 is sampled just either side and averaged."""
    out = []
    for G in np.asarray(G_values, dtype=float):
        try:
            out.append(drift_velocity(build_profile(p, float(G), nodes=nodes)))
        except SingularCaseError:
            below = drift_velocity(build_profile(p, float(G) * (1 - 1e-7), nodes=nodes))
            above = drift_velocity(build_profile(p, float(G) * (1 + 1e-7), nodes=nodes))
            out.append(0.5 * (below + above))
    return np.asarray(out)


def peak_drift(
    p: PhysParams, G_lo: float = 1e-5, G_hi: float = 2e-3, nodes: int = 512
) -> tuple[float, float]:
    """Gradient of maximal drift and the drift there (bounded search in log G)."""
    if not 0 < G_lo < G_hi:
        raise DomainError("Need 0 < G_lo < G_hi")

    def negative_kappa(log_g: float) -> float:
        return -float(drift_curve(p, [math.exp(log_g)], nodes=nodes)[0])

    result = minimize_scalar(
        negative_kappa,
        bounds=(math.log(G_lo), math.log(G_hi)),
        method="bounded",
        options={"xatol": 1e-4},
    )
    return math.exp(result.x), -float(result.fun)


def profile_table(profile: ClosureProfile) -> ResultTable:
    """Density columns plus a summary of the closure constants."""
    summary = {
        "G": profile.G,
        "g": profile.g,
        "a1": profile.a1,
        "a2": profile.a2,
        "c0": profile.c0,
        "thetas": list(profile.exponents) if not profile.is_delta else [],
        "kappa": drift_velocity(profile),
        **activity_moments(profile),
    }
    if profile.is_delta:
        columns = {"a": [0.5], "density_plus": [math.inf], "density_minus": [math.inf]}
    else:
        columns = {
            "a": profile.grid.tolist(),
            "density_plus": profile.density_plus.tolist(),
            "density_minus": profile.density_minus.tolist(),
        }
    return ResultTable(
        name=f"closure_G{profile.G:.4g}",
        columns=columns,
        units={"a": "1", "density_plus": "1", "density_minus": "1"},
        summary=summary,
    )
