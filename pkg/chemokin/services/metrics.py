"""Distances and summaries for comparing activity distributions.

Distributions are either point masses or piecewise-constant densities on
bins. W1 uses the one-dimensional CDF identity W1 = int |F_mu - F_nu|,
which is exact for both representations because the CDFs are piecewise
linear between breakpoints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from chemokin.errors import DomainError

NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class Distribution1D:
    """Normalized probability distribution on the line.

    Exactly one of ``points`` and ``edges`` is set. With ``edges`` the mass
    of bin i is spread uniformly over [edges[i], edges[i+1]].
    """

    masses: NDArray[np.float64]
    points: NDArray[np.float64] | None = None
    edges: NDArray[np.float64] | None = None

    def __post_init__(self) -> None:
        masses = np.asarray(self.masses, dtype=float)
        if (self.points is None) == (self.edges is None):
            raise DomainError("Give either support points or bin edges")
        if np.any(masses < 0) or not np.all(np.isfinite(masses)):
            raise DomainError("Masses must be finite and non-negative")
        if abs(masses.sum() - 1.0) > NORMALIZATION_TOL:
            raise DomainError(f"Masses sum to {masses.sum():.12g}, expected 1")
        if self.points is not None:
            pts = np.asarray(self.points, dtype=float)
            if pts.shape != masses.shape:
                raise DomainError("Points and masses differ in length")
            if np.any(np.diff(pts) < 0):
                raise DomainError("Support points must be sorted")
        else:
            edges = np.asarray(self.edges, dtype=float)
            if edges.shape != (masses.size + 1,):
                raise DomainError("Need one more edge than bins")
            if np.any(np.diff(edges) <= 0):
                raise DomainError("Bin edges must be strictly increasing")

    @classmethod
    def from_points(cls, points: ArrayLike, masses: ArrayLike | None = None) -> Distribution1D:
        """Point masses, sorted; equal weights when ``masses`` is omitted."""
        pts = np.asarray(points, dtype=float).ravel()
        if pts.size == 0:
            raise DomainError("Empty support")
        w = np.full(pts.size, 1.0 / pts.size) if masses is None else np.asarray(masses, dtype=float)
        order = np.argsort(pts, kind="stable")
        return cls(masses=w[order], points=pts[order])

    @classmethod
    def from_samples(cls, samples: ArrayLike) -> Distribution1D:
        """Empirical measure of a sample."""
        return cls.from_points(samples)

    @classmethod
    def from_histogram(
        cls, edges: ArrayLike, masses: ArrayLike, renormalize: bool = False
    ) -> Distribution1D:
        """Piecewise-constant density from bin masses.

        Args:
            edges: Bin edges, strictly increasing
            masses: Mass per bin
            renormalize: Divide by the total first (for conditional histograms)
        """
        w = np.asarray(masses, dtype=float)
        if renormalize:
            total = w.sum()
            if total <= 0:
                raise DomainError("Histogram has no mass to normalize")
            w = w / total
        return cls(masses=w, edges=np.asarray(edges, dtype=float))

    @property
    def breakpoints(self) -> NDArray[np.float64]:
        """Locations where the CDF changes slope or jumps."""
        return np.asarray(self.points if self.points is not None else self.edges, dtype=float)

    def cdf_limits(self, x: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Left and right limits of the CDF at sorted points ``x``."""
        if self.points is not None:
            cum = np.concatenate([[0.0], np.cumsum(self.masses)])
            left = cum[np.searchsorted(self.points, x, side="left")]
            right = cum[np.searchsorted(self.points, x, side="right")]
            return left, right
        cum = np.concatenate([[0.0], np.cumsum(self.masses)])
        assert self.edges is not None
        values = np.interp(x, self.edges, cum, left=0.0, right=1.0)
        return values, values


def wasserstein1(mu: Distribution1D, nu: Distribution1D) -> float:
    """1-Wasserstein distance via the integral of |F_mu - F_nu|.

    Both CDFs are linear between consecutive merged breakpoints, so each
    segment integral of the absolute difference is computed in closed form.
    """
    grid = np.union1d(mu.breakpoints, nu.breakpoints)
    if grid.size < 2:
        return 0.0
    mu_left, mu_right = mu.cdf_limits(grid)
    nu_left, nu_right = nu.cdf_limits(grid)

    # Difference just right of each segment start and just left of its end
    d0 = (mu_right - nu_right)[:-1]
    d1 = (mu_left - nu_left)[1:]
    width = np.diff(grid)

    same_sign = d0 * d1 >= 0
    area = np.where(
        same_sign,
        0.5 * (np.abs(d0) + np.abs(d1)) * width,
        0.5 * (d0**2 + d1**2) / np.where(same_sign, 1.0, np.abs(d0 - d1)) * width,
    )
    return float(area.sum())


def l1_histogram_distance(h1: Distribution1D, h2: Distribution1D) -> float:
    """Sum of |p_i - q_i| of bin probabilities, the L1 norm of the density difference.

    Raises:
        DomainError: If either input is not a histogram or the edges differ
    """
    if h1.edges is None or h2.edges is None:
        raise DomainError("L1 distance needs two histograms")
    if h1.edges.shape != h2.edges.shape or not np.allclose(h1.edges, h2.edges, rtol=0, atol=1e-14):
        raise DomainError("Histogram bin edges do not match")
    return float(np.abs(h1.masses - h2.masses).sum())


def moments(dist: Distribution1D, k: int) -> float:
    """Raw k-th moment; exact for uniform-in-bin densities."""
    if k < 0:
        raise DomainError("Moment order must be non-negative")
    if dist.points is not None:
        return float(np.sum(dist.masses * dist.points**k))
    assert dist.edges is not None
    lo, hi = dist.edges[:-1], dist.edges[1:]
    per_bin = (hi ** (k + 1) - lo ** (k + 1)) / ((k + 1) * (hi - lo))
    return float(np.sum(dist.masses * per_bin))


def mean(dist: Distribution1D) -> float:
    """First moment."""
    return moments(dist, 1)


def variance(dist: Distribution1D) -> float:
    """Central second moment, clipped at zero against rounding."""
    m1 = moments(dist, 1)
    return max(moments(dist, 2) - m1 * m1, 0.0)
