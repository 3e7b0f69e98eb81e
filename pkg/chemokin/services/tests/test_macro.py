"""Tests for the macroscopic transport and Keller-Segel solvers."""

import numpy as np
import pytest

from chemokin.errors import ConfigurationError, DomainError
from chemokin.models import PhysParams
from chemokin.services.closure import case2_coefficients
from chemokin.services.macro import (
    MacroField,
    center_of_mass,
    gaussian_bump,
    l1_distance,
    make_field,
    snapshot_table,
    solve_case2_transport,
    solve_keller_segel,
    solve_transport,
    solve_with_snapshots,
    stable_time_step,
    variance,
)


@pytest.fixture
def bump() -> MacroField:
    """Gaussian of width 20 centred at 300 on a 1000 um periodic grid."""
    return gaussian_bump(0.0, 1000.0, 1000, center=300.0, width=20.0)


class TestFields:
    """Test cases for field construction."""

    def test_normalized(self, bump: MacroField) -> None:
        """Test unit mass and bump statistics."""
        assert bump.mass() == pytest.approx(1.0, abs=1e-14)
        assert center_of_mass(bump) == pytest.approx(300.0, abs=1e-9)
        assert variance(bump) == pytest.approx(400.0, rel=1e-3)

    def test_rejects_negative(self) -> None:
        """Test that negative densities are refused."""
        with pytest.raises(DomainError):
            make_field(0.0, 1.0, [1.0, -0.5, 1.0])

    def test_rejects_zero_mass(self) -> None:
        """Test that all-zero data is refused."""
        with pytest.raises(DomainError):
            make_field(0.0, 1.0, np.zeros(8))

    def test_wrapped_center(self) -> None:
        """Test the centre of a bump straddling the periodic seam."""
        field = gaussian_bump(0.0, 1000.0, 1000, center=995.0, width=20.0)
        assert center_of_mass(field) % 1000.0 == pytest.approx(995.0, abs=1e-6)


class TestTransport:
    """Test cases for pure transport."""

    def test_zero_drift_is_identity(self, bump: MacroField) -> None:
        """Test that kappa = 0 leaves rho unchanged."""
        out = solve_transport(bump, 0.0, 100.0)
        assert np.array_equal(out.rho, bump.rho)
        assert out.time == 100.0

    def test_zero_time(self, bump: MacroField) -> None:
        """Test that T = 0 takes no steps."""
        assert np.array_equal(solve_transport(bump, 3.0, 0.0).rho, bump.rho)

    def test_center_moves_at_kappa(self, bump: MacroField) -> None:
        """Test that the centre of mass moves kappa T within one cell."""
        out = solve_transport(bump, 2.0, 50.0)

        assert center_of_mass(out) == pytest.approx(400.0, abs=bump.dx)
        assert out.mass() == pytest.approx(1.0, abs=1e-12)
        assert out.rho.min() >= 0

    def test_negative_drift(self, bump: MacroField) -> None:
        """Test transport down the axis."""
        out = solve_transport(bump, -2.0, 50.0)
        assert center_of_mass(out) == pytest.approx(200.0, abs=bump.dx)

    def test_translation_equivariance(self, bump: MacroField) -> None:
        """Test that rolling the data by whole cells rolls the solution."""
        rolled = make_field(0.0, 1000.0, np.roll(bump.rho, 40))
        a = solve_transport(bump, 1.5, 30.0)
        b = solve_transport(rolled, 1.5, 30.0)
        assert np.allclose(np.roll(a.rho, 40), b.rho, rtol=0, atol=1e-15)

    def test_cfl_violation(self, bump: MacroField) -> None:
        """Test that an explicit dt above dx/|kappa| is refused."""
        with pytest.raises(ConfigurationError):
            solve_transport(bump, 2.0, 10.0, dt=1.0)

    def test_case2_transport(self, bump: MacroField) -> None:
        """Test the hyperbolic Case II limit moves at kappa3."""
        p = PhysParams()
        kappa3, _ = case2_coefficients(p, 5e-4)
        out = solve_case2_transport(bump, p, 5e-4, 50.0)
        assert center_of_mass(out) == pytest.approx(300.0 + kappa3 * 50.0, abs=bump.dx)


class TestKellerSegel:
    """Test cases for the advection-diffusion limit."""

    def test_no_diffusion_matches_transport(self, bump: MacroField) -> None:
        """Test that D0 = 0 reproduces transport bit for bit."""
        ks = solve_keller_segel(bump, 0.0, 1.3, 40.0)
        tr = solve_transport(bump, 1.3, 40.0)
        assert np.array_equal(ks.rho, tr.rho)

    def test_variance_growth(self, bump: MacroField) -> None:
        """Test that variance grows at 2 D0 without drift."""
        out = solve_keller_segel(bump, 10.0, 0.0, 10.0)
        slope = (variance(out) - variance(bump)) / 10.0

        assert slope == pytest.approx(20.0, rel=0.02)
        assert center_of_mass(out) == pytest.approx(300.0, abs=1e-9)

    def test_mass_conservation(self, bump: MacroField) -> None:
        """Test mass and positivity with drift and diffusion together."""
        out = solve_keller_segel(bump, 97.93, 1.321, 100.0)
        assert out.mass() == pytest.approx(1.0, abs=1e-12)
        assert out.rho.min() >= 0

    @pytest.mark.slow
    def test_long_run_conserves_mass(self) -> None:
        """Test mass conservation over 10^5 steps."""
        field = gaussian_bump(0.0, 1000.0, 200, center=300.0, width=20.0)

        out = solve_keller_segel(field, 97.93, 1.321, 10_000.0, dt=0.1)

        assert out.mass() == pytest.approx(1.0, abs=1e-10)
        assert out.rho.min() >= 0

    def test_combined_bound(self, bump: MacroField) -> None:
        """Test that the step bound includes both terms."""
        limit = stable_time_step(bump.dx, 2.0, 10.0)

        assert limit == pytest.approx(1.0 / (2.0 + 20.0))
        with pytest.raises(ConfigurationError):
            solve_keller_segel(bump, 10.0, 2.0, 1.0, dt=0.1)

    def test_negative_diffusion(self, bump: MacroField) -> None:
        """Test that D0 < 0 is refused."""
        with pytest.raises(DomainError):
            solve_keller_segel(bump, -1.0, 0.0, 1.0)


class TestSnapshots:
    """Test cases for snapshot output."""

    def test_snapshot_times(self, bump: MacroField) -> None:
        """Test that snapshots land on the requested times."""
        states = solve_with_snapshots(bump, 1.0, 5.0, [20.0, 10.0, 0.0])

        assert [s.time for s in states] == pytest.approx([0.0, 10.0, 20.0])
        assert np.array_equal(states[0].rho, bump.rho)

    def test_snapshot_table(self, bump: MacroField) -> None:
        """Test the long-format table layout."""
        table = snapshot_table(solve_with_snapshots(bump, 1.0, 0.0, [0.0, 10.0]))

        assert len(table.columns["rho"]) == 2000
        assert table.summary["snapshots"] == 2
        assert table.summary["center_of_mass"][1] == pytest.approx(310.0, abs=1.0)

    def test_l1_distance(self, bump: MacroField) -> None:
        """Test the L1 distance of a density to itself and to a far bump."""
        far = gaussian_bump(0.0, 1000.0, 1000, center=800.0, width=20.0)

        assert l1_distance(bump.rho, bump.rho, bump.dx) == 0.0
        assert l1_distance(bump.rho, far.rho, bump.dx) == pytest.approx(2.0, abs=1e-6)
        with pytest.raises(DomainError):
            l1_distance(bump.rho, bump.rho[:-1], bump.dx)
