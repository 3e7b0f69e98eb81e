"""Macroscopic limits on a periodic grid.

Pure transport ``rho_t + (kappa rho)_x = 0`` and the Keller-Segel
advection-diffusion ``rho_t = D0 rho_xx - (kappa3 rho)_x``. Both use the
same explicit step: donor-cell upwind fluxes plus a central Laplacian. The
step is conservative in flux form and keeps rho non-negative while
``dt (|kappa|/dx + 2 D0/dx^2) <= 1``.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from chemokin.errors import ConfigurationError, DomainError
from chemokin.models.params import PhysParams
from chemokin.models.results import ResultTable
from chemokin.services.closure import case2_coefficients

logger = logging.getLogger(__name__)

DEFAULT_CELLS = 512
DEFAULT_CFL = 0.9


@dataclass(frozen=True)
class MacroField:
    """Cell averages of rho on a uniform periodic grid.

    ``kappa`` and ``D0`` record the coefficients the field was last evolved
    with (both zero for initial data).
    """

    rho: NDArray[np.float64]
    x_faces: NDArray[np.float64]
    kappa: float = 0.0
    D0: float = 0.0
    time: float = 0.0

    @property
    def dx(self) -> float:
        return float(self.x_faces[1] - self.x_faces[0])

    @property
    def x_centers(self) -> NDArray[np.float64]:
        return 0.5 * (self.x_faces[:-1] + self.x_faces[1:])

    @property
    def length(self) -> float:
        return float(self.x_faces[-1] - self.x_faces[0])

    def mass(self) -> float:
        """sum(rho) dx, one for normalized data."""
        return float(self.rho.sum() * self.dx)


def make_field(x_min: float, x_max: float, rho: ArrayLike) -> MacroField:
    """Field over [x_min, x_max) with rho normalized to unit mass.

    Raises:
        DomainError: If rho is empty, negative or has zero mass
    """
    values = np.asarray(rho, dtype=float)
    if values.ndim != 1 or values.size < 2:
        raise DomainError("rho must be a one-dimensional array with at least two cells")
    if x_max <= x_min:
        raise DomainError(f"Empty domain [{x_min}, {x_max})")
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise DomainError("rho must be finite and non-negative")
    faces = np.linspace(x_min, x_max, values.size + 1)
    total = values.sum() * (faces[1] - faces[0])
    if total <= 0:
        raise DomainError("rho has zero mass")
    return MacroField(rho=values / total, x_faces=faces)


def gaussian_bump(
    x_min: float, x_max: float, cells: int, center: float, width: float
) -> MacroField:
    """Normalized periodic Gaussian of standard deviation ``width``."""
    if width <= 0:
        raise DomainError(f"Bump width must be positive, got {width}")
    faces = np.linspace(x_min, x_max, cells + 1)
    centers = 0.5 * (faces[:-1] + faces[1:])
    offset = _periodic_offset(centers - center, x_max - x_min)
    return make_field(x_min, x_max, np.exp(-0.5 * (offset / width) ** 2))


def _periodic_offset(offset: NDArray[np.float64], length: float) -> NDArray[np.float64]:
    """Map offsets into [-L/2, L/2)."""
    return (offset + 0.5 * length) % length - 0.5 * length


def stable_time_step(dx: float, kappa: float, D0: float = 0.0) -> float:
    """Largest dt with dt (|kappa|/dx + 2 D0/dx^2) <= 1."""
    rate = abs(kappa) / dx + 2.0 * D0 / dx**2
    return math.inf if rate == 0 else 1.0 / rate


def _plan(field: MacroField, kappa: float, D0: float, T: float, dt: float | None, cfl: float) -> tuple[int, float]:
    if T < 0:
        raise DomainError(f"Final time must be non-negative, got {T}")
    if D0 < 0:
        raise DomainError(f"Diffusion coefficient must be non-negative, got {D0}")
    if T == 0:
        return 0, 0.0
    limit = stable_time_step(field.dx, kappa, D0)
    if dt is None:
        n_steps = 1 if math.isinf(limit) else max(math.ceil(T / (cfl * limit)), 1)
    else:
        if dt <= 0:
            raise ConfigurationError(f"Time step must be positive, got {dt}")
        n_steps = max(round(T / dt), 1)
    step = T / n_steps
    if step > limit * (1 + 1e-12):
        raise ConfigurationError(
            f"dt={step:g} violates the stability bound {limit:.4g} "
            f"(kappa={kappa:g}, D0={D0:g}, dx={field.dx:g})"
        )
    return n_steps, step


def _advance(rho: NDArray[np.float64], kappa: float, D0: float, dt: float, dx: float) -> NDArray[np.float64]:
    """One explicit step; D0 = 0 is exactly the upwind transport step."""
    if kappa >= 0:
        flux = kappa * rho
        update = flux - np.roll(flux, 1)
    else:
        flux = kappa * np.roll(rho, -1)
        update = flux - np.roll(flux, 1)
    out = rho - (dt / dx) * update
    if D0 > 0:
        out += (D0 * dt / dx**2) * (np.roll(rho, -1) - 2.0 * rho + np.roll(rho, 1))
    return out


def _solve(field: MacroField, kappa: float, D0: float, T: float, dt: float | None, cfl: float) -> MacroField:
    n_steps, step = _plan(field, kappa, D0, T, dt, cfl)
    rho = field.rho.copy()
    for _ in range(n_steps):
        rho = _advance(rho, kappa, D0, step, field.dx)
    logger.debug(
        "[Macro] solve | kappa=%.4g D0=%.4g T=%g steps=%d dt=%.4g", kappa, D0, T, n_steps, step
    )
    return dataclasses.replace(field, rho=rho, kappa=kappa, D0=D0, time=field.time + T)


def solve_transport(
    field: MacroField, kappa: float, T: float, dt: float | None = None, cfl: float = DEFAULT_CFL
) -> MacroField:
    """Evolve ``rho_t + (kappa rho)_x = 0`` for a time T.

    Args:
        field: Initial data
        kappa: Constant drift speed (um/s)
        T: Duration (s)
        dt: Time step; chosen as cfl * dx/|kappa| when omitted
        cfl: Safety factor for the automatic step

    Raises:
        ConfigurationError: If |kappa| dt > dx
    """
    return _solve(field, kappa, 0.0, T, dt, cfl)


def solve_keller_segel(
    field: MacroField,
    D0: float,
    kappa3: float,
    T: float,
    dt: float | None = None,
    cfl: float = DEFAULT_CFL,
) -> MacroField:
    """Evolve ``rho_t = D0 rho_xx - (kappa3 rho)_x`` for a time T.

    Raises:
        ConfigurationError: If dt (|kappa3|/dx + 2 D0/dx^2) > 1
    """
    return _solve(field, kappa3, D0, T, dt, cfl)


def solve_case2_transport(
    field: MacroField,
    p: PhysParams,
    G_mu: float,
    T: float,
    convention: Literal["consistent", "as_printed"] = "consistent",
    cfl: float = DEFAULT_CFL,
) -> MacroField:
    """Hyperbolic Case II limit: transport at the drift kappa3(G_mu)."""
    kappa3, _ = case2_coefficients(p, G_mu, convention)
    return solve_transport(field, kappa3, T, cfl=cfl)


def solve_with_snapshots(
    field: MacroField,
    kappa: float,
    D0: float,
    times: list[float],
    cfl: float = DEFAULT_CFL,
) -> list[MacroField]:
    """States at each of the increasing ``times`` (measured from field.time)."""
    ordered = sorted(times)
    if ordered and ordered[0] < 0:
        raise DomainError("Snapshot times must be non-negative")
    states = []
    current, elapsed = field, 0.0
    for t in ordered:
        current = _solve(current, kappa, D0, t - elapsed, None, cfl)
        elapsed = t
        states.append(current)
    return states


def _circular_center(field: MacroField) -> float:
    """Centre of the bump from the phase of its first Fourier mode."""
    phase = 2.0 * np.pi * (field.x_centers - field.x_faces[0]) / field.length
    angle = math.atan2(float((field.rho * np.sin(phase)).sum()), float((field.rho * np.cos(phase)).sum()))
    return float(field.x_faces[0] + (angle % (2.0 * np.pi)) * field.length / (2.0 * np.pi))


def center_of_mass(field: MacroField) -> float:
    """Mean position, unwrapped around the bump centre."""
    c = _circular_center(field)
    offset = _periodic_offset(field.x_centers - c, field.length)
    return float(c + (field.rho * offset).sum() * field.dx / field.mass())


def variance(field: MacroField) -> float:
    """Spatial variance, unwrapped around the bump centre."""
    com = center_of_mass(field)
    offset = _periodic_offset(field.x_centers - com, field.length)
    return float((field.rho * offset**2).sum() * field.dx / field.mass())


def l1_distance(rho_a: ArrayLike, rho_b: ArrayLike, dx: float) -> float:
    """sum |rho_a - rho_b| dx over the grid."""
    a, b = np.asarray(rho_a, dtype=float), np.asarray(rho_b, dtype=float)
    if a.shape != b.shape:
        raise DomainError(f"Density grids differ: {a.shape} vs {b.shape}")
    return float(np.abs(a - b).sum() * dx)


def snapshot_table(states: list[MacroField], name: str = "macro_snapshots") -> ResultTable:
    """Long-format (time, x, rho) table of a list of states."""
    time: list[float] = []
    x: list[float] = []
    rho: list[float] = []
    for state in states:
        time.extend([state.time] * state.rho.size)
        x.extend(state.x_centers.tolist())
        rho.extend(state.rho.tolist())
    return ResultTable(
        name=name,
        columns={"t": time, "x": x, "rho": rho},
        units={"t": "s", "x": "um", "rho": "1/um"},
        summary={
            "snapshots": len(states),
            "center_of_mass": [center_of_mass(s) for s in states],
            "variance": [variance(s) for s in states],
        },
    )
