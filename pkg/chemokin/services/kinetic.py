"""Finite-volume solver for the scaled two-velocity kinetic equation.

The unknowns are cell averages of q+-/(N alpha0 a(1-a)) on a periodic x
grid times an activity grid, so probability is

    mass = 1/2 sum_x sum_a (q+ + q-) dx da.

One step is Strang split: half exchange, x-transport, a-advection, half
exchange. Transport is donor-cell upwind, conservative and positive under
its CFL bound; the exchange between directions is integrated exactly.
The a-advection may be sub-cycled so the x step can run at Courant number
one, where upwinding is an exact shift.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from collections.abc import Callable, Iterator
from concurrent.futures import Executor, ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.sparse as sp
from numpy.typing import ArrayLike, NDArray
from scipy.sparse.linalg import spsolve

from chemokin.errors import ConfigurationError, DomainError
from chemokin.models.params import Environment, PhysParams
from chemokin.services.closure import ClosureProfile, bin_masses
from chemokin.services.metrics import Distribution1D, wasserstein1
from chemokin.services.pathway import gradient_number, tumbling_rate

logger = logging.getLogger(__name__)

DEFAULT_A_CELLS = 512
DEFAULT_X_CELLS = 256
CLUSTER_RATIO = 1.05
# First cell next to a breakpoint, as a fraction of the half segment
FIRST_CELL = 0.02
MIN_SEGMENT_CELLS = 4
# Exchange splitting stays accurate while Z(a0) dt / eps^beta is below this
RELAX_LIMIT = 0.2
MASS_FLOOR = 1e-300


@dataclass(frozen=True)
class ActivityGrid:
    """Cell faces in activity, clustered toward breakpoints."""

    faces: NDArray[np.float64]

    @property
    def centers(self) -> NDArray[np.float64]:
        """Cell midpoints."""
        return 0.5 * (self.faces[:-1] + self.faces[1:])

    @property
    def widths(self) -> NDArray[np.float64]:
        """Cell widths."""
        return np.diff(self.faces)

    @property
    def size(self) -> int:
        """Number of cells."""
        return int(self.faces.size - 1)


@dataclass(frozen=True)
class KineticField:
    """q+- cell averages on an (x, a) grid with scaling parameters.

    ``env.G`` is the gradient that enters the scaled equation; Case II
    fields carry G = eps^mu G_mu there.
    """

    qplus: NDArray[np.float64]
    qminus: NDArray[np.float64]
    x_faces: NDArray[np.float64]
    grid: ActivityGrid
    eps: float
    mu: float
    beta: float
    params: PhysParams
    env: Environment
    time: float = 0.0

    @property
    def dx(self) -> float:
        """Uniform x cell width."""
        return float(self.x_faces[1] - self.x_faces[0])

    @property
    def x_centers(self) -> NDArray[np.float64]:
        """x cell midpoints."""
        return 0.5 * (self.x_faces[:-1] + self.x_faces[1:])

    @property
    def x_speed(self) -> float:
        """Transport speed eps^(1-beta) v0 of the scaled equation."""
        return self.params.v0 * self.eps ** (1.0 - self.beta)

    @property
    def rate_scale(self) -> float:
        """Factor 1/eps^beta on the activity and exchange terms."""
        return self.eps ** (-self.beta)


def a_flux_coefficient(a: ArrayLike, direction: int, p: PhysParams, G: float) -> NDArray[np.float64]:
    """Activity flux N alpha0 a(1-a)(-dir v0 G/alpha0 + kR(1 - a/a0)) in 1/s.

    Vanishes at a = 0 and a = 1; for a0 = 1/2 its interior zero is a1 for
    up-gradient movers and a2 for down-gradient movers.
    """
    arr = np.asarray(a, dtype=float)
    drive = -direction * p.v0 * G / p.alpha0 + p.kR * (1.0 - arr / p.a0)
    return p.N * p.alpha0 * arr * (1.0 - arr) * drive


def _half_offsets(half: float, count: int) -> NDArray[np.float64]:
    """``count`` increasing offsets from an end, the last equal to ``half``."""
    steps = np.empty(count)
    step = FIRST_CELL * half
    cap = 2.0 * half / count
    for i in range(count):
        steps[i] = step
        step = min(step * CLUSTER_RATIO, cap)
    return np.cumsum(steps) * (half / steps.sum())


def _clustered_segment(lo: float, hi: float, cells: int) -> NDArray[np.float64]:
    """Interior faces of [lo, hi] clustered geometrically toward both ends."""
    half = 0.5 * (hi - lo)
    left = lo + _half_offsets(half, cells - cells // 2)[:-1]
    right = hi - _half_offsets(half, cells // 2)[:-1][::-1]
    return np.concatenate([left, [lo + half], right])


def activity_grid(
    p: PhysParams,
    G: float,
    n_cells: int = DEFAULT_A_CELLS,
    window: tuple[float, float] | None = None,
) -> ActivityGrid:
    """Activity cells covering (0, 1) or a window, clustered at 0, 1, a1 and a2.

    Raises:
        DomainError: If the window is not inside [0, 1] or too few cells are requested
    """
    lo, hi = window if window is not None else (0.0, 1.0)
    if not 0.0 <= lo < hi <= 1.0:
        raise DomainError(f"Activity window ({lo}, {hi}) must lie inside [0, 1]")
    _, a1, a2 = gradient_number(p, G)
    breaks = sorted({lo, hi, *(b for b in (a1, a2) if lo < b < hi)})
    segments = list(zip(breaks[:-1], breaks[1:]))
    if n_cells < MIN_SEGMENT_CELLS * len(segments):
        raise DomainError(f"Need at least {MIN_SEGMENT_CELLS * len(segments)} activity cells")
    lengths = np.array([b - a for a, b in segments])
    counts = np.maximum(np.floor(n_cells * lengths / lengths.sum()).astype(int), MIN_SEGMENT_CELLS)
    counts[np.argmax(counts)] += n_cells - counts.sum()
    faces = [np.array([lo])]
    for (s_lo, s_hi), count in zip(segments, counts):
        faces.append(_clustered_segment(s_lo, s_hi, int(count)))
        faces.append(np.array([s_hi]))
    return ActivityGrid(faces=np.concatenate(faces))


def x_faces_for(env: Environment, nx: int) -> NDArray[np.float64]:
    """Uniform periodic x cells over the environment."""
    if nx < 1:
        raise DomainError("Need at least one x cell")
    return np.linspace(env.x_min, env.x_max, nx + 1)


def make_field(
    p: PhysParams,
    env: Environment,
    grid: ActivityGrid,
    nx: int,
    activity_masses: tuple[NDArray[np.float64], NDArray[np.float64]],
    eps: float,
    mu: float = 0.0,
    beta: float = 1.0,
    rho_x: ArrayLike | None = None,
) -> KineticField:
    """Field with a product initial state rho(x) times an activity law.

    Args:
        p: Physical parameters
        env: Environment (its G enters the scaled equation)
        grid: Activity grid
        nx: Number of periodic x cells
        activity_masses: Probability of each activity cell, per direction,
            summing to one over both directions
        eps: Scaling parameter in (0, 1)
        mu: Case II exponent (0 for Case I)
        beta: Time-scaling exponent in [1, 2]
        rho_x: Density per x cell (normalized here); uniform if omitted
    """
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if not 1.0 <= beta <= 2.0:
        raise DomainError(f"beta must lie in [1, 2], got {beta}")
    if not env.periodic:
        raise DomainError("The kinetic solver needs a periodic environment")
    x_faces = x_faces_for(env, nx)
    dx = x_faces[1] - x_faces[0]
    rho = np.ones(nx) if rho_x is None else np.asarray(rho_x, dtype=float)
    if rho.shape != (nx,) or np.any(rho < 0):
        raise DomainError("rho_x must be a non-negative array with one entry per x cell")
    rho = rho / (rho.sum() * dx)
    mass_plus, mass_minus = (np.asarray(m, dtype=float) for m in activity_masses)
    total = mass_plus.sum() + mass_minus.sum()
    if mass_plus.shape != (grid.size,) or mass_minus.shape != (grid.size,) or total <= 0:
        raise DomainError("Activity masses must match the activity grid")
    density_plus = 2.0 * mass_plus / (total * grid.widths)
    density_minus = 2.0 * mass_minus / (total * grid.widths)
    return KineticField(
        qplus=rho[:, None] * density_plus[None, :],
        qminus=rho[:, None] * density_minus[None, :],
        x_faces=x_faces,
        grid=grid,
        eps=eps,
        mu=mu,
        beta=beta,
        params=p,
        env=env,
    )


def from_closure(
    profile: ClosureProfile,
    env: Environment,
    grid: ActivityGrid,
    nx: int,
    eps: float,
    mu: float = 0.0,
    beta: float = 1.0,
    rho_x: ArrayLike | None = None,
) -> KineticField:
    """Well-prepared data: rho(x) times the closure's activity law."""
    masses = (
        bin_masses(profile, grid.faces, "plus", conditional=False),
        bin_masses(profile, grid.faces, "minus", conditional=False),
    )
    return make_field(profile.params, env, grid, nx, masses, eps, mu, beta, rho_x)


def case2_environment(
    p: PhysParams, G_mu: float, eps: float, mu: float, bounds: tuple[float, float]
) -> Environment:
    """Environment whose gradient is the Case II value eps^mu G_mu."""
    return Environment(G=eps**mu * G_mu, x_min=bounds[0], x_max=bounds[1], periodic=True, S0=p.S0)


def case2_window(p: PhysParams, G: float, pad: float = 0.25) -> tuple[float, float]:
    """Activity window around [a1, a2] for narrow Case II supports."""
    g, a1, a2 = gradient_number(p, G)
    margin = pad * g + 1e-3
    return max(a1 - margin, 0.0), min(a2 + margin, 1.0)


# ---------------------------------------------------------------------------
# Time stepping
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Coefficients:
    """Per-field coefficient arrays, already scaled by 1/eps^beta."""

    flux_plus: NDArray[np.float64]
    flux_minus: NDArray[np.float64]
    rate: NDArray[np.float64]
    widths: NDArray[np.float64]


def _coefficients(field: KineticField) -> _Coefficients:
    faces = field.grid.faces
    inner = faces[1:-1]
    p, G = field.params, field.env.G
    scale = field.rate_scale
    return _Coefficients(
        flux_plus=a_flux_coefficient(inner, 1, p, G) * scale,
        flux_minus=a_flux_coefficient(inner, -1, p, G) * scale,
        rate=np.asarray(tumbling_rate(field.grid.centers, p)) * scale,
        widths=field.grid.widths,
    )


def _a_rate_limit(flux: NDArray[np.float64], widths: NDArray[np.float64]) -> float:
    """Largest outflow rate of any cell under donor-cell upwinding."""
    outflow = np.zeros(widths.size)
    outflow[:-1] += np.maximum(flux, 0.0)
    outflow[1:] += np.maximum(-flux, 0.0)
    return float(np.max(outflow / widths))


def stable_time_steps(field: KineticField) -> dict[str, float]:
    """Largest admissible step for x-transport, a-advection and exchange splitting."""
    coeffs = _coefficients(field)
    a_rate = max(
        _a_rate_limit(coeffs.flux_plus, coeffs.widths),
        _a_rate_limit(coeffs.flux_minus, coeffs.widths),
    )
    relax = float(tumbling_rate(field.params.a0, field.params)) * field.rate_scale
    return {
        "x": field.dx / field.x_speed,
        "a": math.inf if a_rate == 0 else 1.0 / a_rate,
        "relax": RELAX_LIMIT / relax,
    }


def check_cfl(field: KineticField, dt: float, a_substeps: int = 1) -> None:
    """Raise if ``dt`` violates the x or a CFL bound.

    Raises:
        ConfigurationError: On a CFL violation
    """
    limits = stable_time_steps(field)
    if dt <= 0:
        raise ConfigurationError(f"Time step must be positive, got {dt}")
    if dt > limits["x"] * (1 + 1e-12):
        raise ConfigurationError(f"dt={dt:g} exceeds the x-transport CFL bound {limits['x']:.4g}")
    if dt / a_substeps > limits["a"] * (1 + 1e-12):
        raise ConfigurationError(
            f"dt/{a_substeps}={dt / a_substeps:g} exceeds the a-advection CFL bound {limits['a']:.4g}"
        )


def _exchange(qp: NDArray[np.float64], qm: NDArray[np.float64], decay: NDArray[np.float64]) -> None:
    """Relax both directions toward their mean, in place."""
    mean = 0.5 * (qp + qm)
    half_diff = 0.5 * (qp - qm) * decay
    np.add(mean, half_diff, out=qp)
    np.subtract(mean, half_diff, out=qm)


def _advect_a(q: NDArray[np.float64], flux: NDArray[np.float64], dt_over_width: NDArray[np.float64]) -> None:
    """Donor-cell update in a with zero flux through the outer faces, in place."""
    face_flux = np.maximum(flux, 0.0) * q[:, :-1] + np.minimum(flux, 0.0) * q[:, 1:]
    q[:, :-1] -= face_flux * dt_over_width[:, :-1]
    q[:, 1:] += face_flux * dt_over_width[:, 1:]


def _transport_x(qp: NDArray[np.float64], qm: NDArray[np.float64], courant: float) -> None:
    """Periodic upwind shift of q+ to the right and q- to the left, in place."""
    if courant == 1.0:
        qp[:] = np.roll(qp, 1, axis=0)
        qm[:] = np.roll(qm, -1, axis=0)
        return
    qp -= courant * (qp - np.roll(qp, 1, axis=0))
    qm -= courant * (qm - np.roll(qm, -1, axis=0))


@contextmanager
def _pool(threads: int) -> Iterator[Executor | None]:
    if threads <= 1:
        yield None
        return
    with ThreadPoolExecutor(max_workers=threads, thread_name_prefix="kinetic") as pool:
        yield pool


class _Stepper:
    """Reusable step kernel for a fixed field layout and time step."""

    def __init__(
        self, field: KineticField, dt: float, a_substeps: int, executor: Executor | None, slabs: int
    ) -> None:
        coeffs = _coefficients(field)
        self.dt = dt
        self.a_substeps = a_substeps
        self.courant = field.x_speed * dt / field.dx
        if abs(self.courant - 1.0) < 1e-12:
            self.courant = 1.0
        self.decay = np.exp(-coeffs.rate * 0.5 * dt)[None, :]
        sub_dt = dt / a_substeps
        self.flux_plus = coeffs.flux_plus[None, :]
        self.flux_minus = coeffs.flux_minus[None, :]
        self.dt_over_width = (sub_dt / coeffs.widths)[None, :]
        self.executor = executor
        nx = field.qplus.shape[0]
        bounds = np.linspace(0, nx, min(slabs, nx) + 1).astype(int)
        self.slabs = [slice(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]

    def _rows(self, fn: Callable[[slice], None]) -> None:
        if self.executor is None or len(self.slabs) == 1:
            for sl in self.slabs:
                fn(sl)
        else:
            list(self.executor.map(fn, self.slabs))

    def __call__(self, qp: NDArray[np.float64], qm: NDArray[np.float64]) -> None:
        self._rows(lambda sl: _exchange(qp[sl], qm[sl], self.decay))
        _transport_x(qp, qm, self.courant)

        def advect(sl: slice) -> None:
            for _ in range(self.a_substeps):
                _advect_a(qp[sl], self.flux_plus, self.dt_over_width)
                _advect_a(qm[sl], self.flux_minus, self.dt_over_width)
            _exchange(qp[sl], qm[sl], self.decay)

        self._rows(advect)


def advance(
    field: KineticField, dt: float, a_substeps: int = 1, threads: int = 1
) -> KineticField:
    """One Strang step of length ``dt``; returns a new field.

    Raises:
        ConfigurationError: If dt violates the CFL bounds
    """
    check_cfl(field, dt, a_substeps)
    qp, qm = field.qplus.copy(), field.qminus.copy()
    with _pool(threads) as pool:
        _Stepper(field, dt, a_substeps, pool, max(threads, 1))(qp, qm)
    return dataclasses.replace(field, qplus=qp, qminus=qm, time=field.time + dt)


def plan_steps(
    field: KineticField, T: float, cfl: float = 0.9, x_courant: float | None = None
) -> tuple[int, float, int]:
    """Number of steps, step length and a-substeps for a run of length T.

    ``x_courant=1.0`` pins the x Courant number so x-transport is an exact
    shift; the a-advection is then sub-cycled as needed.
    """
    limits = stable_time_steps(field)
    if x_courant is not None:
        if not 0 < x_courant <= 1:
            raise ConfigurationError("x_courant must lie in (0, 1]")
        dt = x_courant * limits["x"]
        if dt > limits["relax"] * 1.000001:
            logger.warning(
                "[Kinetic] exact-shift step %.3g exceeds the relaxation limit %.3g", dt, limits["relax"]
            )
        n_steps = max(int(round(T / dt)), 1)
    else:
        dt_max = cfl * min(limits["x"], limits["a"], limits["relax"])
        n_steps = max(math.ceil(T / dt_max), 1)
        dt = T / n_steps
    substeps = max(math.ceil(dt / (cfl * limits["a"])), 1) if math.isfinite(limits["a"]) else 1
    return n_steps, dt, substeps


def evolve(
    field: KineticField,
    T: float,
    cfl: float = 0.9,
    threads: int = 1,
    x_courant: float | None = None,
    dt: float | None = None,
) -> KineticField:
    """Advance to time field.time + T (approximately, when x_courant pins dt)."""
    if dt is None:
        n_steps, dt, substeps = plan_steps(field, T, cfl, x_courant)
    else:
        n_steps = max(int(round(T / dt)), 1)
        limits = stable_time_steps(field)
        substeps = max(math.ceil(dt / (cfl * limits["a"])), 1) if math.isfinite(limits["a"]) else 1
    check_cfl(field, dt, substeps)
    qp, qm = field.qplus.copy(), field.qminus.copy()
    logger.debug(
        "[Kinetic] evolve | eps=%g beta=%g steps=%d dt=%.4g substeps=%d", field.eps, field.beta, n_steps, dt, substeps
    )
    with _pool(threads) as pool:
        stepper = _Stepper(field, dt, substeps, pool, max(threads, 1))
        for _ in range(n_steps):
            stepper(qp, qm)
    return dataclasses.replace(field, qplus=qp, qminus=qm, time=field.time + n_steps * dt)


def is_steady(before: KineticField, after: KineticField, tol: float = 1e-8) -> bool:
    """||dq/dt||_1 <= tol ||q||_1 between two consecutive states."""
    elapsed = after.time - before.time
    if elapsed <= 0:
        return False
    change = np.abs(after.qplus - before.qplus).sum() + np.abs(after.qminus - before.qminus).sum()
    size = np.abs(after.qplus).sum() + np.abs(after.qminus).sum()
    return bool(change / elapsed <= tol * size)


def run_to_steady_state(
    field: KineticField,
    dt: float | None = None,
    tol: float = 1e-8,
    check_every: int = 50,
    max_steps: int = 1_000_000,
    cfl: float = 0.9,
) -> tuple[KineticField, bool]:
    """Step until ``is_steady`` holds between checks, or give up after max_steps."""
    if dt is None:
        limits = stable_time_steps(field)
        dt = cfl * min(limits["x"], limits["a"], limits["relax"])
    taken = 0
    while taken < max_steps:
        field = evolve(field, check_every * dt, cfl=cfl, dt=dt)
        taken += check_every
        # compare the last step only
        after = evolve(field, dt, cfl=cfl, dt=dt)
        taken += 1
        if is_steady(field, after, tol):
            return after, True
        field = after
    logger.warning("[Kinetic] no steady state after %d steps", taken)
    return field, False


# ---------------------------------------------------------------------------
# Observables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ActivityMarginal:
    """x-integrated activity masses per direction on the activity grid."""

    faces: NDArray[np.float64]
    mass_plus: NDArray[np.float64]
    mass_minus: NDArray[np.float64]

    def conditional(self, direction: Literal["plus", "minus"]) -> Distribution1D:
        """Activity law of one direction, normalized to one."""
        masses = self.mass_plus if direction == "plus" else self.mass_minus
        return Distribution1D.from_histogram(self.faces, masses, renormalize=True)

    def combined(self) -> Distribution1D:
        """Activity law over both directions."""
        return Distribution1D.from_histogram(self.faces, self.mass_plus + self.mass_minus, renormalize=True)


def total_mass(field: KineticField) -> float:
    """1/2 sum (q+ + q-) dx da."""
    widths = field.grid.widths
    return float(0.5 * field.dx * ((field.qplus + field.qminus) @ widths).sum())


def marginal_activity(field: KineticField) -> ActivityMarginal:
    """x-integrated masses per direction; total one for a normalized field."""
    widths = field.grid.widths
    return ActivityMarginal(
        faces=field.grid.faces,
        mass_plus=0.5 * field.dx * field.qplus.sum(axis=0) * widths,
        mass_minus=0.5 * field.dx * field.qminus.sum(axis=0) * widths,
    )


def density(field: KineticField) -> NDArray[np.float64]:
    """rho(x) = 1/2 sum_a (q+ + q-) da per x cell; sum(rho) dx = 1."""
    return 0.5 * (field.qplus + field.qminus) @ field.grid.widths


def mean_velocity(field: KineticField) -> float:
    """Population flux x_speed (P+ - P-), the drift of the centre of mass."""
    marginal = marginal_activity(field)
    total = marginal.mass_plus.sum() + marginal.mass_minus.sum()
    return float(field.x_speed * (marginal.mass_plus.sum() - marginal.mass_minus.sum()) / total)


def center_of_mass(field: KineticField) -> float:
    """Density-weighted mean of the x cell centres."""
    rho = density(field)
    return float((rho * field.x_centers).sum() / rho.sum())


def local_closure_distance(
    field: KineticField, reference: tuple[Distribution1D, Distribution1D]
) -> float:
    """rho-weighted mean over x of the per-direction W1 to a reference law.

    Args:
        field: Kinetic state
        reference: Conditional activity laws (plus, minus) to compare against
    """
    widths = field.grid.widths
    faces = field.grid.faces
    rho = density(field)
    weights = rho * field.dx
    total = 0.0
    for i in range(field.qplus.shape[0]):
        if weights[i] <= MASS_FLOOR:
            continue
        distance = 0.0
        for q, ref in ((field.qplus[i], reference[0]), (field.qminus[i], reference[1])):
            masses = q * widths
            if masses.sum() <= MASS_FLOOR:
                continue
            distance += 0.5 * wasserstein1(
                Distribution1D.from_histogram(faces, masses, renormalize=True), ref
            )
        total += weights[i] * distance
    return float(total / weights.sum())


def stationary_marginal(p: PhysParams, G: float, grid: ActivityGrid) -> ActivityMarginal:
    """Steady state of the x-homogeneous semi-discrete equation.

    Solves the upwind a-advection plus exchange system with the total mass
    fixed to one; eps scales the whole operator and drops out.
    """
    n = grid.size
    widths = grid.widths
    inner = grid.faces[1:-1]
    rate = np.asarray(tumbling_rate(grid.centers, p))
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []

    def add(r: int, c: int, v: float) -> None:
        rows.append(r)
        cols.append(c)
        vals.append(v)

    for offset, direction in ((0, 1), (n, -1)):
        flux = a_flux_coefficient(inner, direction, p, G)
        for f, phi in enumerate(flux):
            lo, hi = f, f + 1
            donor = lo if phi > 0 else hi
            # flux phi * q[donor] leaves cell lo and enters cell hi
            add(offset + lo, offset + donor, -phi / widths[lo])
            add(offset + hi, offset + donor, phi / widths[hi])
        other = n - offset
        for j in range(n):
            add(offset + j, offset + j, -0.5 * rate[j])
            add(offset + j, other + j, 0.5 * rate[j])

    matrix = sp.csr_matrix((vals, (rows, cols)), shape=(2 * n, 2 * n)).tolil()
    rhs = np.zeros(2 * n)
    # replace one balance row by the normalization
    matrix[2 * n - 1, :] = np.concatenate([0.5 * widths, 0.5 * widths])
    rhs[-1] = 1.0
    solution = spsolve(matrix.tocsr(), rhs)
    solution = np.maximum(solution, 0.0)
    density_plus, density_minus = solution[:n], solution[n:]
    mass_plus = 0.5 * density_plus * widths
    mass_minus = 0.5 * density_minus * widths
    total = mass_plus.sum() + mass_minus.sum()
    return ActivityMarginal(faces=grid.faces, mass_plus=mass_plus / total, mass_minus=mass_minus / total)


def split_stationary_marginal(
    field: KineticField, dt: float, tol: float = 1e-10, max_steps: int = 2_000_000
) -> tuple[ActivityMarginal, bool]:
    """Steady activity law of the time-stepped scheme at step ``dt``.

    Uses a single x cell so only the a-advection and exchange act. This is
    the reference that shares the splitting error of a run at the same dt.
    """
    marginal = marginal_activity(field)
    homogeneous = make_field(
        field.params,
        field.env,
        field.grid,
        1,
        (marginal.mass_plus, marginal.mass_minus),
        field.eps,
        field.mu,
        field.beta,
    )
    steady, converged = run_to_steady_state(homogeneous, dt=dt, tol=tol, max_steps=max_steps)
    return marginal_activity(steady), converged


def closure_reference(
    profile: ClosureProfile, grid: ActivityGrid
) -> tuple[Distribution1D, Distribution1D]:
    """Closure conditional laws binned onto the activity grid."""
    return (
        Distribution1D.from_histogram(grid.faces, bin_masses(profile, grid.faces, "plus"), renormalize=True),
        Distribution1D.from_histogram(grid.faces, bin_masses(profile, grid.faces, "minus"), renormalize=True),
    )


def cosine_density(
    x_centers: NDArray[np.float64], x_min: float, length: float, amplitude: float
) -> NDArray[np.float64]:
    """Smooth periodic density 1 + A cos(2 pi (x - x_min)/L), unnormalized."""
    return 1.0 + amplitude * np.cos(2.0 * np.pi * (x_centers - x_min) / length)
