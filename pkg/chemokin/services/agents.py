"""Agent-based run-and-tumble Monte Carlo with methylation adaptation.

Each agent carries a position, a velocity sign and its methylation level.
Methylation is stored relative to m0, so nothing downstream depends on the
reference level. Randomness comes from counter-based Philox streams keyed
by the seed; the counter encodes (agent block, step), which makes every
trajectory independent of how blocks are spread over threads.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator
from concurrent.futures import Executor, ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from scipy.special import expit

from chemokin.errors import ConfigurationError, DomainError, SteadyStateTimeout
from chemokin.models.params import Environment, PhysParams
from chemokin.services.metrics import Distribution1D
from chemokin.services.pathway import activity_offset, methylation_offset, tumbling_rate

logger = logging.getLogger(__name__)

# Agents per RNG stream; fixed so results do not depend on the thread count
AGENT_BLOCK = 16384
STEP_WORD = 1 << 128
BLOCK_WORD = 1 << 192
INIT_BLOCK = (1 << 63) - 1

# Time-step guards
TUMBLE_GUARD = 0.1
ADAPTATION_GUARD = 0.1

DEFAULT_DT = 0.01
DEFAULT_WINDOW = 10_000
DEFAULT_TOL = 1e-3
DEFAULT_MAX_TIME = 1e6
DEFAULT_BATCHES = 20


@dataclass
class EnsembleStats:
    """Accumulated measurements of an ensemble."""

    drift_series: list[tuple[float, int, int]] = field(default_factory=list)
    """(time, N+, N-) recorded every ``record_every`` steps."""

    record_every: int = 10
    histogram: ActivityHistogram | None = None
    """Most recent activity histogram, if one was taken."""


@dataclass
class Ensemble:
    """Agent arrays plus clock, statistics and stream key.

    The ensemble is mutated in place by ``step``; hand consumers a
    ``snapshot`` instead of the live object.
    """

    params: PhysParams
    env: Environment
    seed: int
    x: NDArray[np.float64]
    direction: NDArray[np.int8]
    dm: NDArray[np.float64]
    """Methylation above the reference level, m - m0."""

    laps: NDArray[np.int64]
    """Net number of periodic wraps per agent (for unwrapped positions)."""

    time: float = 0.0
    steps: int = 0
    stats: EnsembleStats = field(default_factory=EnsembleStats)

    @property
    def count(self) -> int:
        """Number of agents."""
        return int(self.x.size)

    @property
    def m(self) -> NDArray[np.float64]:
        """Absolute methylation levels."""
        return self.dm + self.params.m0

    def activity(self) -> NDArray[np.float64]:
        """Current receptor activity of every agent."""
        offset = self.dm - methylation_offset(self.env, self.x, self.params)
        return expit(self.params.N * self.params.alpha0 * offset)


@dataclass(frozen=True)
class EnsembleSnapshot:
    """Immutable copy of an ensemble's state."""

    time: float
    steps: int
    x: NDArray[np.float64]
    direction: NDArray[np.int8]
    m: NDArray[np.float64]
    activity: NDArray[np.float64]


@dataclass(frozen=True)
class ActivityHistogram:
    """Activity histogram per direction plus per-x activity statistics.

    ``mass_plus``/``mass_minus`` are fractions of all agents, so together
    with the out-of-range fractions they sum to one.
    """

    edges: NDArray[np.float64]
    mass_plus: NDArray[np.float64]
    mass_minus: NDArray[np.float64]
    outside_plus: float
    outside_minus: float
    x_centers: NDArray[np.float64]
    mean_a: NDArray[np.float64]
    var_a: NDArray[np.float64]

    @property
    def density_plus(self) -> NDArray[np.float64]:
        """Up-mover density over a, normalized within the direction."""
        total = self.mass_plus.sum() + self.outside_plus
        return self.mass_plus / (total * np.diff(self.edges)) if total > 0 else self.mass_plus

    @property
    def density_minus(self) -> NDArray[np.float64]:
        """Down-mover density over a, normalized within the direction."""
        total = self.mass_minus.sum() + self.outside_minus
        return self.mass_minus / (total * np.diff(self.edges)) if total > 0 else self.mass_minus

    def conditional(self, direction: Literal["plus", "minus"]) -> Distribution1D:
        """In-range histogram of one direction as a Distribution1D."""
        masses = self.mass_plus if direction == "plus" else self.mass_minus
        return Distribution1D.from_histogram(self.edges, masses, renormalize=True)

    def outside_fraction(self, direction: Literal["plus", "minus"]) -> float:
        """Share of a direction's agents that fell outside the histogram range."""
        inside = self.mass_plus.sum() if direction == "plus" else self.mass_minus.sum()
        outside = self.outside_plus if direction == "plus" else self.outside_minus
        total = inside + outside
        return float(outside / total) if total > 0 else 0.0


@dataclass(frozen=True)
class SteadyStateResult:
    """Windowed drift estimate returned by ``run_to_steady_state``."""

    v_d: float
    stderr: float
    variance: float
    windows: int
    time: float
    converged: bool


def _stream(seed: int, block: int, step: int) -> np.random.Generator:
    """Philox generator for one agent block at one step."""
    return np.random.Generator(
        np.random.Philox(key=seed, counter=block * BLOCK_WORD + step * STEP_WORD)
    )


def check_time_step(p: PhysParams, dt: float) -> None:
    """Reject steps that resolve neither tumbling nor adaptation.

    Raises:
        ConfigurationError: If dt exceeds 0.1/Z(a0) or 0.1/kR
    """
    if dt <= 0 or not math.isfinite(dt):
        raise ConfigurationError(f"Time step must be positive, got {dt}")
    tumble_limit = TUMBLE_GUARD / float(tumbling_rate(p.a0, p))
    adapt_limit = ADAPTATION_GUARD / p.kR
    if dt > tumble_limit or dt > adapt_limit:
        raise ConfigurationError(
            f"dt={dt:g} exceeds guards (tumbling {tumble_limit:.4g} s, adaptation {adapt_limit:.4g} s)"
        )


def create_ensemble(
    p: PhysParams,
    env: Environment,
    n_agents: int,
    seed: int,
    init: Literal["preferred", "activity"] = "preferred",
    a_init: float | None = None,
    record_every: int = 10,
) -> Ensemble:
    """Agents uniform in x with uniform directions.

    Args:
        p: Physical parameters
        env: Environment
        n_agents: Number of agents
        seed: Stream key
        init: "preferred" sets m = M(x) (a = a0); "activity" sets a = a_init
        a_init: Initial activity for ``init="activity"``
        record_every: Steps between drift-series records
    """
    if n_agents < 1:
        raise DomainError("An ensemble needs at least one agent")
    rng = _stream(seed, INIT_BLOCK, 0)
    x = env.x_min + env.length * rng.random(n_agents)
    direction = np.where(rng.random(n_agents) < 0.5, 1, -1).astype(np.int8)
    dm = methylation_offset(env, x, p)
    if init == "activity":
        if a_init is None:
            raise DomainError("init='activity' needs a_init")
        dm = dm + activity_offset(a_init, p)
    elif init != "preferred":
        raise DomainError(f"Unknown initialization: {init}")
    ensemble = Ensemble(
        params=p,
        env=env,
        seed=seed,
        x=x,
        direction=direction,
        dm=np.asarray(dm, dtype=float),
        laps=np.zeros(n_agents, dtype=np.int64),
        stats=EnsembleStats(record_every=record_every),
    )
    ensemble.stats.drift_series.append((0.0, *direction_counts(ensemble)))
    return ensemble


def direction_counts(ensemble: Ensemble) -> tuple[int, int]:
    """(N+, N-) as exact integers."""
    n_plus = int(np.count_nonzero(ensemble.direction > 0))
    return n_plus, ensemble.count - n_plus


def drift_estimator(ensemble: Ensemble) -> float:
    """Population drift v0 (N+ - N-)/(N+ + N-).

    Raises:
        DomainError: For an empty ensemble
    """
    if ensemble.count == 0:
        raise DomainError("Drift of an empty ensemble is undefined")
    n_plus, n_minus = direction_counts(ensemble)
    return ensemble.params.v0 * (n_plus - n_minus) / (n_plus + n_minus)


def wrap(ensemble: Ensemble) -> None:
    """Bring agents back into the domain, shifting m so activity is unchanged.

    Periodic domains shift x by the domain length and m by
    (G/alpha0)(x_new - x_old), which keeps m - M(x) fixed. Closed domains
    reflect the agent and flip its direction.
    """
    _wrap_block(
        ensemble.params, ensemble.env, ensemble.x, ensemble.dm, ensemble.direction, ensemble.laps
    )


def _wrap_block(
    p: PhysParams,
    env: Environment,
    x: NDArray[np.float64],
    dm: NDArray[np.float64],
    direction: NDArray[np.int8],
    laps: NDArray[np.int64],
) -> None:
    length = env.length
    if env.periodic:
        for mask, shift, lap in ((x >= env.x_max, -length, 1), (x < env.x_min, length, -1)):
            if np.any(mask):
                x_old = x[mask]
                x_new = x_old + shift
                dm[mask] += env.G * (x_new - x_old) / p.alpha0
                x[mask] = x_new
                laps[mask] += lap
        return
    above = x > env.x_max
    below = x < env.x_min
    x[above] = 2.0 * env.x_max - x[above]
    x[below] = 2.0 * env.x_min - x[below]
    direction[above | below] *= -1


def _advance_block(ensemble: Ensemble, block: int, dt: float) -> None:
    """One explicit step for agents of one block, in place."""
    p, env = ensemble.params, ensemble.env
    sl = slice(block * AGENT_BLOCK, min((block + 1) * AGENT_BLOCK, ensemble.count))
    x, dm, direction = ensemble.x[sl], ensemble.dm[sl], ensemble.direction[sl]
    u = _stream(ensemble.seed, block, ensemble.steps).random((2, x.size))

    a = expit(p.N * p.alpha0 * (dm - methylation_offset(env, x, p)))
    tumble = u[0] < -np.expm1(-tumbling_rate(a, p) * dt)
    redraw = np.where(u[1] < 0.5, 1, -1).astype(np.int8)

    dm += dt * p.kR * (1.0 - a / p.a0)
    x += direction * (p.v0 * dt)
    _wrap_block(p, env, x, dm, direction, ensemble.laps[sl])
    direction[tumble] = redraw[tumble]


def step(ensemble: Ensemble, dt: float = DEFAULT_DT, executor: Executor | None = None) -> Ensemble:
    """Advance every agent by one step.

    Order per agent: activity from the current state, Euler update of m,
    move and wrap, then tumble with probability 1 - exp(-Z(a) dt) to a
    uniformly redrawn direction.

    Raises:
        ConfigurationError: If dt violates the stability guards
    """
    check_time_step(ensemble.params, dt)
    blocks = range(-(-ensemble.count // AGENT_BLOCK))
    if executor is None:
        for block in blocks:
            _advance_block(ensemble, block, dt)
    else:
        list(executor.map(lambda b: _advance_block(ensemble, b, dt), blocks))
    ensemble.steps += 1
    ensemble.time += dt
    if ensemble.steps % ensemble.stats.record_every == 0:
        ensemble.stats.drift_series.append((ensemble.time, *direction_counts(ensemble)))
    return ensemble


@contextmanager
def _pool(threads: int) -> Iterator[Executor | None]:
    if threads <= 1:
        yield None
        return
    with ThreadPoolExecutor(max_workers=threads, thread_name_prefix="agents") as pool:
        yield pool


def run_for(
    ensemble: Ensemble, duration: float, dt: float = DEFAULT_DT, threads: int = 1
) -> Ensemble:
    """Advance for a fixed simulated duration."""
    n_steps = int(round(duration / dt))
    with _pool(threads) as pool:
        for _ in range(n_steps):
            step(ensemble, dt, pool)
    return ensemble


def _window_stats(samples: NDArray[np.float64], n_batches: int) -> tuple[float, float, float, float]:
    """Mean, batch-means stderr, variance and stderr of the variance."""
    batches = np.array_split(samples, n_batches)
    means = np.array([b.mean() for b in batches])
    variances = np.array([b.var() for b in batches])
    stderr = float(means.std(ddof=1) / math.sqrt(n_batches))
    var_stderr = float(variances.std(ddof=1) / math.sqrt(n_batches))
    return float(samples.mean()), stderr, float(samples.var()), var_stderr


def run_to_steady_state(
    ensemble: Ensemble,
    window: int = DEFAULT_WINDOW,
    tol: float = DEFAULT_TOL,
    dt: float = DEFAULT_DT,
    max_time: float = DEFAULT_MAX_TIME,
    burn_in: float = 0.0,
    threads: int = 1,
    n_batches: int = DEFAULT_BATCHES,
) -> tuple[Ensemble, SteadyStateResult]:
    """Run until consecutive windows of the drift series agree.

    Two consecutive windows agree when their means differ by less than
    max(tol v0, 3 combined batch-means stderr) and their variances by less
    than max(tol var, 3 combined stderr of the batch variances).

    Raises:
        DomainError: If the window has fewer than 100 samples
        SteadyStateTimeout: If ``max_time`` passes first (carries the last window)
    """
    if window < 100:
        raise DomainError("Steady-state window needs at least 100 samples")
    p = ensemble.params
    check_time_step(p, dt)
    start = ensemble.time
    previous: tuple[float, float, float, float] | None = None
    result: SteadyStateResult | None = None
    windows = 0
    samples = np.empty(window)

    with _pool(threads) as pool:
        for _ in range(int(round(burn_in / dt))):
            step(ensemble, dt, pool)
        while True:
            for i in range(window):
                step(ensemble, dt, pool)
                samples[i] = drift_estimator(ensemble)
            windows += 1
            current = _window_stats(samples, n_batches)
            converged = False
            if previous is not None:
                mean_gap = abs(current[0] - previous[0])
                var_gap = abs(current[2] - previous[2])
                mean_ok = mean_gap <= max(tol * p.v0, 3.0 * math.hypot(current[1], previous[1]))
                var_ok = var_gap <= max(tol * max(previous[2], 1e-300), 3.0 * math.hypot(current[3], previous[3]))
                converged = mean_ok and var_ok
            result = SteadyStateResult(
                v_d=current[0],
                stderr=current[1],
                variance=current[2],
                windows=windows,
                time=ensemble.time,
                converged=converged,
            )
            logger.debug(
                "[Agents] window %d | t=%.1f v_d=%.5g stderr=%.3g converged=%s",
                windows, ensemble.time, current[0], current[1], converged,
            )
            if converged:
                return ensemble, result
            if ensemble.time - start >= max_time:
                raise SteadyStateTimeout(
                    f"No steady state within {max_time:g} s of simulated time", partial=result
                )
            previous = current


def summarize_drift(
    ensemble: Ensemble, since: float = 0.0, n_batches: int = DEFAULT_BATCHES
) -> SteadyStateResult:
    """Batch-means drift estimate from the recorded series after time ``since``.

    Used for fixed-duration runs where no steady-state test is applied.

    Raises:
        DomainError: If fewer than two samples per batch were recorded
    """
    v0 = ensemble.params.v0
    series = [(a, b) for t, a, b in ensemble.stats.drift_series if t >= since]
    samples = np.array([v0 * (a - b) / (a + b) for a, b in series])
    if samples.size < 2 * n_batches:
        raise DomainError(f"Only {samples.size} drift samples after t={since:g}; need {2 * n_batches}")
    v_d, stderr, var, _ = _window_stats(samples, n_batches)
    return SteadyStateResult(
        v_d=v_d, stderr=stderr, variance=var, windows=1, time=ensemble.time, converged=False
    )


def activity_histogram(
    ensemble: Ensemble,
    bins: int = 64,
    a_range: tuple[float, float] = (0.0, 1.0),
    x_bins: int = 16,
) -> ActivityHistogram:
    """Histogram of activity per direction and per-x activity moments.

    Raises:
        DomainError: If fewer than 10 bins are requested
    """
    if bins < 10:
        raise DomainError("Activity histograms need at least 10 bins")
    a = ensemble.activity()
    plus = ensemble.direction > 0
    edges = np.linspace(a_range[0], a_range[1], bins + 1)
    counts_plus, _ = np.histogram(a[plus], bins=edges)
    counts_minus, _ = np.histogram(a[~plus], bins=edges)
    n = ensemble.count
    n_plus = int(plus.sum())

    env = ensemble.env
    x_edges = np.linspace(env.x_min, env.x_max, x_bins + 1)
    idx = np.clip(np.searchsorted(x_edges, ensemble.x, side="right") - 1, 0, x_bins - 1)
    occupancy = np.bincount(idx, minlength=x_bins)
    total_a = np.bincount(idx, weights=a, minlength=x_bins)
    total_a2 = np.bincount(idx, weights=a * a, minlength=x_bins)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean_a = total_a / occupancy
        var_a = np.maximum(total_a2 / occupancy - mean_a**2, 0.0)

    histogram = ActivityHistogram(
        edges=edges,
        mass_plus=counts_plus / n,
        mass_minus=counts_minus / n,
        outside_plus=(n_plus - int(counts_plus.sum())) / n,
        outside_minus=(n - n_plus - int(counts_minus.sum())) / n,
        x_centers=0.5 * (x_edges[:-1] + x_edges[1:]),
        mean_a=mean_a,
        var_a=var_a,
    )
    ensemble.stats.histogram = histogram
    return histogram


def snapshot(ensemble: Ensemble) -> EnsembleSnapshot:
    """Immutable copy of the current state."""
    arrays = (ensemble.x.copy(), ensemble.direction.copy(), ensemble.m, ensemble.activity())
    for array in arrays:
        array.flags.writeable = False
    return EnsembleSnapshot(ensemble.time, ensemble.steps, *arrays)


def center_of_mass(ensemble: Ensemble) -> float:
    """Mean unwrapped position, following agents across periodic wraps."""
    return float(np.mean(ensemble.x + ensemble.laps * ensemble.env.length))


def drift_table(ensemble: Ensemble) -> dict[str, list[float]]:
    """Recorded drift series as columns t, v_d, N+, N-."""
    series = ensemble.stats.drift_series
    v0 = ensemble.params.v0
    return {
        "t": [t for t, _, _ in series],
        "v_d": [v0 * (a - b) / (a + b) for _, a, b in series],
        "N_plus": [a for _, a, _ in series],
        "N_minus": [b for _, _, b in series],
    }
