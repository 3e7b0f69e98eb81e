"""Tests for the kinetic finite-volume solver."""

import dataclasses

import numpy as np
import pytest

from chemokin.errors import ConfigurationError, DomainError
from chemokin.models import Environment, PhysParams
from chemokin.services.closure import build_profile, case2_coefficients, drift_velocity
from chemokin.services.kinetic import (
    KineticField,
    a_flux_coefficient,
    activity_grid,
    advance,
    case2_environment,
    case2_window,
    check_cfl,
    closure_reference,
    cosine_density,
    density,
    evolve,
    from_closure,
    is_steady,
    local_closure_distance,
    make_field,
    marginal_activity,
    mean_velocity,
    plan_steps,
    split_stationary_marginal,
    stable_time_steps,
    stationary_marginal,
    total_mass,
    x_faces_for,
)
from chemokin.services.metrics import wasserstein1
from chemokin.services.pathway import gradient_number


def closure_field(G: float, nx: int = 16, a_cells: int = 64, eps: float = 0.2, amplitude: float = 0.5) -> KineticField:
    """Case I field with closure activity data and a cosine x profile."""
    p = PhysParams()
    env = Environment(G=G, x_min=0.0, x_max=100.0)
    grid = activity_grid(p, G, a_cells)
    rho = cosine_density(x_faces_for(env, nx)[:-1] + 50.0 / nx, 0.0, 100.0, amplitude)
    return from_closure(build_profile(p, G, nodes=512), env, grid, nx, eps, rho_x=rho)


class TestActivityGrid:
    """Test cases for the clustered activity grid."""

    @pytest.mark.parametrize("cells", [64, 101, 512])
    def test_face_count(self, cells: int) -> None:
        """Test that the grid has exactly the requested cells."""
        grid = activity_grid(PhysParams(), 5e-4, cells)

        assert grid.size == cells
        assert grid.faces[0] == 0.0
        assert grid.faces[-1] == 1.0
        assert np.all(np.diff(grid.faces) > 0)

    def test_subcritical_breakpoints(self) -> None:
        """Test that a1 and a2 are faces when they lie inside (0, 1)."""
        p = PhysParams()
        _, a1, a2 = gradient_number(p, 5e-4)
        grid = activity_grid(p, 5e-4, 128)

        assert a1 in grid.faces
        assert a2 in grid.faces

    def test_window(self) -> None:
        """Test a grid restricted to a window."""
        p = PhysParams()
        window = case2_window(p, 2.5e-5)
        grid = activity_grid(p, 2.5e-5, 64, window=window)

        assert (grid.faces[0], grid.faces[-1]) == window

    def test_bad_window(self) -> None:
        """Test that windows outside [0, 1] are refused."""
        with pytest.raises(DomainError):
            activity_grid(PhysParams(), 1e-3, 64, window=(-0.1, 0.5))

    def test_flux_vanishes_at_fixed_points(self) -> None:
        """Test the activity flux zeros at a1 for up-movers and a2 for down-movers."""
        p = PhysParams()
        _, a1, a2 = gradient_number(p, 5e-4)

        assert a_flux_coefficient(a1, 1, p, 5e-4) == pytest.approx(0.0, abs=1e-15)
        assert a_flux_coefficient(a2, -1, p, 5e-4) == pytest.approx(0.0, abs=1e-15)
        assert a_flux_coefficient(0.0, 1, p, 5e-4) == 0.0


class TestEvolution:
    """Test cases for time stepping."""

    def test_mass_and_positivity(self) -> None:
        """Test that a run conserves mass and keeps q non-negative."""
        field = closure_field(1e-3)
        assert total_mass(field) == pytest.approx(1.0, abs=1e-12)

        evolved = evolve(field, 2.0)

        assert total_mass(evolved) == pytest.approx(1.0, abs=1e-12)
        assert evolved.qplus.min() >= 0
        assert evolved.qminus.min() >= 0
        assert evolved.time == pytest.approx(2.0)

    def test_single_step_conserves_mass(self) -> None:
        """Test one step from a uniform activity law on a small grid."""
        p = PhysParams()
        env = Environment(G=1e-3, x_min=0.0, x_max=100.0)
        grid = activity_grid(p, 1e-3, 64)
        uniform = np.full(grid.size, 0.5 / grid.size)
        field = make_field(p, env, grid, 8, (uniform, uniform), 0.2)
        limits = stable_time_steps(field)
        dt = 0.9 * min(limits["x"], limits["a"], limits["relax"])

        stepped = advance(field, dt)

        assert stepped.qplus.shape == (8, 64)
        assert total_mass(stepped) == pytest.approx(total_mass(field), abs=1e-10)
        assert stepped.qplus.min() >= 0
        assert stepped.qminus.min() >= 0
        assert not np.array_equal(stepped.qplus, field.qplus)

    @pytest.mark.slow
    def test_long_run_conserves_mass(self) -> None:
        """Test mass conservation over 10^5 steps."""
        field = closure_field(1e-3, nx=4, a_cells=32)
        limits = stable_time_steps(field)
        dt = 0.9 * min(limits["x"], limits["a"], limits["relax"])

        evolved = evolve(field, 100_000 * dt, dt=dt)

        assert total_mass(evolved) == pytest.approx(1.0, abs=1e-10)
        assert evolved.qplus.min() >= 0
        assert evolved.qminus.min() >= 0

    def test_cfl_violation(self) -> None:
        """Test that a step beyond the x bound is refused."""
        field = closure_field(1e-3)
        limits = stable_time_steps(field)
        with pytest.raises(ConfigurationError):
            check_cfl(field, 2.0 * limits["x"])
        with pytest.raises(ConfigurationError):
            advance(field, 2.0 * limits["x"])

    def test_exact_shift_plan(self) -> None:
        """Test that x_courant = 1 pins dt to dx/x_speed."""
        field = closure_field(1e-3)
        _, dt, substeps = plan_steps(field, 1.0, x_courant=1.0)

        assert dt == pytest.approx(field.dx / field.x_speed)
        assert substeps >= 1

    def test_translation_equivariance(self) -> None:
        """Test that shifting the initial data by whole cells shifts the solution."""
        field = closure_field(1e-3)
        shifted = dataclasses.replace(
            field, qplus=np.roll(field.qplus, 3, axis=0), qminus=np.roll(field.qminus, 3, axis=0)
        )

        a = evolve(field, 1.0)
        b = evolve(shifted, 1.0)

        assert np.array_equal(np.roll(a.qplus, 3, axis=0), b.qplus)
        assert np.array_equal(np.roll(a.qminus, 3, axis=0), b.qminus)

    def test_threads_match_serial(self) -> None:
        """Test that slab threading does not change the result."""
        field = closure_field(1e-3)
        assert np.array_equal(evolve(field, 0.5).qplus, evolve(field, 0.5, threads=4).qplus)

    def test_support_confinement(self) -> None:
        """Test that no mass leaves [a1, a2] when g < 1."""
        p = PhysParams()
        _, a1, a2 = gradient_number(p, 5e-4)
        field = evolve(closure_field(5e-4), 1.0)
        centers = field.grid.centers
        outside = (centers < a1) | (centers > a2)
        marginal = marginal_activity(field)

        assert marginal.mass_plus[outside].sum() + marginal.mass_minus[outside].sum() <= 1e-12

    def test_is_steady_needs_elapsed_time(self) -> None:
        """Test that identical times never count as steady."""
        field = closure_field(1e-3)
        assert not is_steady(field, field)


class TestObservables:
    """Test cases for marginals and velocities."""

    def test_density_normalized(self) -> None:
        """Test sum(rho) dx = 1."""
        field = closure_field(1e-3)
        assert density(field).sum() * field.dx == pytest.approx(1.0, abs=1e-12)

    def test_uniform_density_stays_flat(self) -> None:
        """Test that x-uniform closure data keeps a flat density and activity law."""
        field = evolve(closure_field(1e-3, amplitude=0.0), 2.0)
        rho = density(field)

        assert np.ptp(rho) <= 1e-12 * rho.mean()
        assert np.ptp(field.qplus, axis=0).max() <= 1e-12 * field.qplus.max()

    def test_closure_data_has_zero_distance(self) -> None:
        """Test that well-prepared data sits on the closure."""
        p = PhysParams()
        field = closure_field(1e-3)
        reference = closure_reference(build_profile(p, 1e-3, nodes=512), field.grid)
        assert local_closure_distance(field, reference) < 1e-12

    def test_mean_velocity_case_one(self) -> None:
        """Test that closure data moves at kappa(G) when beta = 1."""
        field = closure_field(1e-3)
        kappa = drift_velocity(build_profile(PhysParams(), 1e-3, nodes=512))
        assert mean_velocity(field) == pytest.approx(kappa, rel=1e-8)

    def test_mean_velocity_case_two(self) -> None:
        """Test that the diffusive scaling moves closure data at about kappa3."""
        p = PhysParams()
        G_mu, eps = 5e-4, 0.05
        env = case2_environment(p, G_mu, eps, 1.0, (0.0, 10.0))
        grid = activity_grid(p, env.G, 256, window=case2_window(p, env.G))
        field = from_closure(build_profile(p, env.G, nodes=512), env, grid, 4, eps, mu=1.0, beta=2.0)
        kappa3, _ = case2_coefficients(p, G_mu)

        assert field.x_speed == pytest.approx(p.v0 / eps)
        assert mean_velocity(field) == pytest.approx(kappa3, rel=0.05)

    def test_stationary_marginal_matches_closure(self) -> None:
        """Test that the discrete steady state approaches the closure law."""
        p = PhysParams()
        profile = build_profile(p, 1e-3, nodes=1024)
        grid = activity_grid(p, 1e-3, 512)
        marginal = stationary_marginal(p, 1e-3, grid)
        reference = closure_reference(profile, grid)

        assert marginal.mass_plus.sum() + marginal.mass_minus.sum() == pytest.approx(1.0)
        assert wasserstein1(marginal.conditional("plus"), reference[0]) < 0.01
        assert wasserstein1(marginal.conditional("minus"), reference[1]) < 0.01
        kappa = p.v0 * (marginal.mass_plus.sum() - marginal.mass_minus.sum())
        assert kappa == pytest.approx(drift_velocity(profile), rel=0.05)

    def test_split_stationary_marginal(self) -> None:
        """Test that the time-stepped steady state sits near the exact one."""
        field = closure_field(1e-3, nx=4)
        limits = stable_time_steps(field)
        dt = 0.9 * min(limits["x"], limits["a"], limits["relax"])

        split, converged = split_stationary_marginal(field, dt, tol=1e-8)
        exact = stationary_marginal(field.params, 1e-3, field.grid)

        assert converged
        assert wasserstein1(split.combined(), exact.combined()) < 0.05
