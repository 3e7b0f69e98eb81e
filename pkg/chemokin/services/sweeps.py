"""
Work pool for parameter sweeps.

Each sweep point gets its own seed derived from (master seed, point index),
so results do not depend on how points are scheduled across workers.
Failures are captured per point instead of aborting the sweep.
"""

import logging
import threading
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Generic, TypeVar

import numpy as np

from chemokin.errors import ChemokinError

logger = logging.getLogger(__name__)

P = TypeVar("P")
R = TypeVar("R")


def point_seed(master: int, index: int) -> int:
    """64-bit seed for sweep point ``index`` under ``master``."""
    state = np.random.SeedSequence(entropy=master, spawn_key=(index,)).generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


@dataclass
class SweepOutcome(Generic[P, R]):
    """Result of one sweep point."""

    index: int
    point: P
    seed: int
    result: R | None = None
    error: str | None = None
    """Message of the ChemokinError raised by this point, if any."""

    duration: float = 0.0

    @property
    def ok(self) -> bool:
        """True when the point completed."""
        return self.error is None


class SweepPool:
    """Runs sweep points on a thread pool and collects outcomes in order."""

    def __init__(self, master_seed: int, threads: int = 1) -> None:
        self.master_seed = master_seed
        self.threads = max(1, int(threads))
        self._lock = threading.Lock()
        self._completed = 0

    @property
    def completed(self) -> int:
        """Points finished so far, including failures."""
        with self._lock:
            return self._completed

    def _run_point(self, fn: Callable[[P, int], R], index: int, point: P) -> SweepOutcome[P, R]:
        seed = point_seed(self.master_seed, index)
        outcome: SweepOutcome[P, R] = SweepOutcome(index=index, point=point, seed=seed)
        start = time.perf_counter()
        try:
            outcome.result = fn(point, seed)
        except ChemokinError as e:
            logger.warning("Sweep point %d failed: %s", index, e)
            outcome.error = f"{type(e).__name__}: {e}"
        outcome.duration = time.perf_counter() - start
        with self._lock:
            self._completed += 1
            done = self._completed
        logger.debug(
            "[Sweep] point done | index=%d ok=%s duration=%.2fs completed=%d",
            index,
            outcome.ok,
            outcome.duration,
            done,
        )
        return outcome

    def map(self, fn: Callable[[P, int], R], points: Sequence[P]) -> list[SweepOutcome[P, R]]:
        """Run ``fn(point, seed)`` for every point.

        Args:
            fn: Work function; receives the point and its derived seed
            points: Sweep points, in output order

        Returns:
            One outcome per point, in the order of ``points``
        """
        if self.threads == 1 or len(points) <= 1:
            return [self._run_point(fn, i, pt) for i, pt in enumerate(points)]
        with ThreadPoolExecutor(max_workers=self.threads, thread_name_prefix="sweep") as executor:
            futures = [executor.submit(self._run_point, fn, i, pt) for i, pt in enumerate(points)]
            return [f.result() for f in futures]
