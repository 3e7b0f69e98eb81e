"""Tests for the sweep work pool."""

import threading

import pytest

from chemokin.errors import DomainError
from chemokin.services.sweeps import SweepPool, point_seed


def _square(point: float, seed: int) -> tuple[float, int]:
    return point * point, seed


class TestPointSeed:
    """Test cases for derived seeds."""

    def test_deterministic(self) -> None:
        """Test that the same inputs give the same seed."""
        assert point_seed(42, 3) == point_seed(42, 3)

    def test_distinct(self) -> None:
        """Test that indices and master seeds give distinct seeds."""
        seeds = {point_seed(42, i) for i in range(100)}
        assert len(seeds) == 100
        assert point_seed(42, 0) != point_seed(43, 0)

    def test_range(self) -> None:
        """Test that seeds fit in 64 bits."""
        assert 0 <= point_seed(2**64 - 1, 7) < 2**64


class TestSweepPool:
    """Test cases for SweepPool."""

    def test_order_preserved(self) -> None:
        """Test that outcomes follow the input order."""
        outcomes = SweepPool(master_seed=1, threads=4).map(_square, [3.0, 1.0, 2.0])

        assert [o.result[0] for o in outcomes] == [9.0, 1.0, 4.0]
        assert [o.index for o in outcomes] == [0, 1, 2]

    def test_threads_do_not_change_seeds(self) -> None:
        """Test that seeds depend only on the point index."""
        serial = SweepPool(master_seed=9, threads=1).map(_square, [1.0, 2.0, 3.0, 4.0])
        threaded = SweepPool(master_seed=9, threads=3).map(_square, [1.0, 2.0, 3.0, 4.0])
        assert [o.seed for o in serial] == [o.seed for o in threaded]

    def test_errors_captured(self) -> None:
        """Test that a failing point is recorded and the rest complete."""

        def work(point: float, seed: int) -> float:
            if point < 0:
                raise DomainError("negative point")
            return point

        pool = SweepPool(master_seed=0, threads=2)
        outcomes = pool.map(work, [1.0, -1.0, 2.0])

        assert [o.ok for o in outcomes] == [True, False, True]
        assert "negative point" in outcomes[1].error
        assert outcomes[1].result is None
        assert pool.completed == 3

    def test_unexpected_errors_propagate(self) -> None:
        """Test that programming errors are not swallowed."""

        def work(point: float, seed: int) -> float:
            raise KeyError(point)

        with pytest.raises(KeyError):
            SweepPool(master_seed=0).map(work, [1.0])

    def test_runs_in_worker_threads(self) -> None:
        """Test that points run off the calling thread when threads > 1."""
        names: list[str] = []

        def work(point: float, seed: int) -> None:
            names.append(threading.current_thread().name)

        SweepPool(master_seed=0, threads=2).map(work, [1.0, 2.0])
        assert all(name.startswith("sweep") for name in names)
