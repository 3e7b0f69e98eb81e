"""Tests for the leading-order activity closure."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from chemokin.errors import DomainError, EndpointError, MisuseError, SingularCaseError
from chemokin.models import PhysParams
from chemokin.services.closure import (
    ALG_WEIGHT_LIMIT,
    ClosureProfile,
    activity_distribution,
    activity_moments,
    bin_masses,
    boundary_exponents,
    build_profile,
    case2_coefficients,
    delta_closure,
    direction_masses,
    drift_curve,
    drift_velocity,
    endpoint_density_limit,
    endpoint_exponents,
    evaluate_q0,
    log_weight,
    normalize,
    peak_drift,
    profile_table,
    q0_at,
)
from chemokin.services.metrics import mean
from chemokin.services.pathway import gradient_number, tumbling_rate


def pathway_integrand(a: float, profile: ClosureProfile) -> float:
    """f(a) = -K Z(a)(2a - 1)/(a(1 - a)(a - a1)(a2 - a))."""
    p = profile.params
    k = p.drift_scale
    return -k * tumbling_rate(a, p) * (2 * a - 1) / (
        a * (1 - a) * (a - profile.a1) * (profile.a2 - a)
    )


class TestEndpointExponents:
    """Test cases for the endpoint exponents."""

    @pytest.mark.parametrize(
        "G, theta0",
        [(3.7e-4, 1.1072), (3.9e-4, 0.9925), (4.0e-4, 0.9419)],
    )
    def test_theta0_transition(self, G: float, theta0: float) -> None:
        """Test theta0 at kR = 0.0005 across the density transition."""
        p = PhysParams(kR=0.0005)
        assert endpoint_exponents(p, G)[0] == pytest.approx(theta0, abs=5e-4)

    def test_density_limit_classification(self) -> None:
        """Test that theta0 > 1 sends the density at a = 0 to zero and theta0 < 1 to infinity."""
        p = PhysParams(kR=0.0005)

        assert endpoint_density_limit(build_profile(p, 3.7e-4, nodes=256))["left"] == "zero"
        assert endpoint_density_limit(build_profile(p, 4.0e-4, nodes=256))["left"] == "infinite"

    def test_subcritical_exponents_positive(self) -> None:
        """Test that both exponents at a1 and a2 are positive when g < 1."""
        theta2, theta3 = endpoint_exponents(PhysParams(), 5e-4)
        assert theta2 > 0
        assert theta3 > theta2

    def test_theta1_uses_full_rate(self) -> None:
        """Test theta1 = K Z(1)/((1 - a1)(a2 - 1))."""
        p = PhysParams()
        _, a1, a2 = gradient_number(p, 1e-3)
        expected = p.drift_scale * (p.z0 + 2.0**p.H / p.tau0) / ((1 - a1) * (a2 - 1))
        assert endpoint_exponents(p, 1e-3)[1] == pytest.approx(expected, rel=1e-12)

    def test_singular_case(self) -> None:
        """Test that g = 1 is refused."""
        p = PhysParams()
        with pytest.raises(SingularCaseError):
            build_profile(p, p.kR * p.alpha0 / p.v0)

    def test_requires_adapted_activity_half(self) -> None:
        """Test that a0 other than 1/2 is refused."""
        with pytest.raises(DomainError):
            endpoint_exponents(PhysParams(a0=0.4), 1e-3)


class TestProfile:
    """Test cases for build_profile and its derived quantities."""

    @pytest.fixture(scope="class")
    def supercritical(self) -> ClosureProfile:
        """Profile at G = 1e-3 (g > 1)."""
        return build_profile(PhysParams(), 1e-3, nodes=1024)

    @pytest.fixture(scope="class")
    def subcritical(self) -> ClosureProfile:
        """Profile at G = 5e-4 (g < 1)."""
        return build_profile(PhysParams(), 5e-4, nodes=1024)

    def test_support(self, supercritical: ClosureProfile, subcritical: ClosureProfile) -> None:
        """Test the support is (0, 1) above g = 1 and (a1, a2) below."""
        assert supercritical.support == (0.0, 1.0)
        assert subcritical.support == (subcritical.a1, subcritical.a2)
        assert np.all(np.diff(subcritical.grid) > 0)
        assert subcritical.grid[0] > subcritical.a1
        assert subcritical.grid[-1] < subcritical.a2

    def test_normalized(self, supercritical: ClosureProfile, subcritical: ClosureProfile) -> None:
        """Test that the two directions carry total probability one."""
        for profile in (supercritical, subcritical):
            assert sum(direction_masses(profile)) == pytest.approx(1.0, abs=1e-10)
            assert normalize(profile) == pytest.approx(profile.c0, rel=1e-10)

    def test_log_weight_vanishes_at_half(self, supercritical: ClosureProfile) -> None:
        """Test W(1/2) = 0."""
        assert log_weight(0.5, supercritical) == pytest.approx(0.0, abs=1e-14)

    @pytest.mark.parametrize("a", [0.05, 0.3, 0.62, 0.9])
    def test_log_weight_derivative(self, supercritical: ClosureProfile, a: float) -> None:
        """Test W'(a) = f(a) by central differences."""
        h = 1e-6
        slope = (log_weight(a + h, supercritical) - log_weight(a - h, supercritical)) / (2 * h)
        assert slope == pytest.approx(pathway_integrand(a, supercritical), rel=1e-5)

    def test_log_weight_rejects_endpoints(self, subcritical: ClosureProfile) -> None:
        """Test that a at or beyond a support end is an endpoint error."""
        with pytest.raises(EndpointError):
            log_weight(subcritical.a1, subcritical)
        with pytest.raises(EndpointError):
            log_weight([0.5, 0.99], subcritical)

    def test_direction_ratio(self, subcritical: ClosureProfile) -> None:
        """Test Q0+ (a - a1) = Q0- (a2 - a)."""
        a = np.array([0.3, 0.5, 0.7])
        qplus, qminus = q0_at(subcritical, a)
        assert np.allclose(qplus * (a - subcritical.a1), qminus * (subcritical.a2 - a), rtol=1e-12)

    def test_grid_values_match_pointwise(self, supercritical: ClosureProfile) -> None:
        """Test that evaluate_q0 agrees with q0_at at interior nodes."""
        nodes = supercritical.grid[100:110]
        qplus, _ = evaluate_q0(supercritical)
        pointwise, _ = q0_at(supercritical, nodes)
        assert np.allclose(qplus[100:110], pointwise, rtol=1e-9)

    def test_drift_matches_direct_quadrature(self, subcritical: ClosureProfile) -> None:
        """Test kappa against adaptive quadrature of the closed-form densities."""
        p = subcritical.params
        lo, hi = subcritical.support

        def density(a: float, index: int) -> float:
            q = q0_at(subcritical, a)[index][0]
            return float(q / (2 * p.N * p.alpha0 * a * (1 - a)))

        plus, _ = quad(density, lo, hi, args=(0,), limit=400, epsabs=0, epsrel=1e-10)
        minus, _ = quad(density, lo, hi, args=(1,), limit=400, epsabs=0, epsrel=1e-10)

        assert plus + minus == pytest.approx(1.0, rel=1e-6)
        assert drift_velocity(subcritical) == pytest.approx(p.v0 * (plus - minus), rel=1e-5)

    def test_drift_positive_and_bounded(
        self, supercritical: ClosureProfile, subcritical: ClosureProfile
    ) -> None:
        """Test 0 < kappa < v0 for both regimes."""
        for profile in (supercritical, subcritical):
            assert 0 < drift_velocity(profile) < profile.params.v0

    def test_up_movers_sit_lower(self, subcritical: ClosureProfile) -> None:
        """Test that up-gradient movers have lower mean activity."""
        stats = activity_moments(subcritical)
        assert stats["mean_plus"] < stats["mean_minus"]
        assert stats["fraction_plus"] > 0.5

    def test_bin_masses(self, subcritical: ClosureProfile) -> None:
        """Test conditional bin masses are a probability vector."""
        edges = np.linspace(subcritical.a1, subcritical.a2, 65)
        for direction in ("plus", "minus"):
            masses = bin_masses(subcritical, edges, direction)
            assert masses.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(masses >= 0)
        total = bin_masses(subcritical, edges, "both", conditional=False)
        assert total.sum() == pytest.approx(1.0, abs=1e-10)

    def test_distribution_mean(self, supercritical: ClosureProfile) -> None:
        """Test that the binned law reproduces the profile mean."""
        dist = activity_distribution(supercritical, "both")
        assert mean(dist) == pytest.approx(activity_moments(supercritical)["mean"], abs=1e-3)

    def test_profile_is_read_only(self, supercritical: ClosureProfile) -> None:
        """Test that the profile arrays cannot be modified."""
        with pytest.raises(ValueError):
            supercritical.qplus[0] = 1.0

    def test_profile_table(self, subcritical: ClosureProfile) -> None:
        """Test the table columns and summary."""
        table = profile_table(subcritical)

        assert list(table.columns) == ["a", "density_plus", "density_minus"]
        assert table.summary["kappa"] == drift_velocity(subcritical)
        assert len(table.summary["thetas"]) == 2

    def test_refinement_stable(self) -> None:
        """Test that kappa barely moves when the grid is refined."""
        p = PhysParams()
        coarse = drift_velocity(build_profile(p, 1.5e-3, nodes=256))
        fine = drift_velocity(build_profile(p, 1.5e-3, nodes=2048))
        assert coarse == pytest.approx(fine, rel=1e-4)


class TestProfileInvariants:
    """Test cases for properties every closure profile must satisfy."""

    @pytest.mark.parametrize("G", [5e-4, 1e-3, 2e-3])
    def test_default_gradients_are_finite(self, G: float) -> None:
        """Test finite c0 and kappa with unit mass at the default gradients."""
        profile = build_profile(PhysParams(), G, nodes=1024)

        assert math.isfinite(profile.c0)
        assert math.isfinite(profile.kappa)
        assert np.all(np.isfinite(profile.qplus))
        assert np.all(np.isfinite(profile.qminus))
        assert profile.cdf_plus[-1] + profile.cdf_minus[-1] == pytest.approx(1.0, abs=1e-10)

    def test_large_endpoint_exponent(self) -> None:
        """Test normalization when an endpoint exponent is in the thousands."""
        profile = build_profile(PhysParams(), 1e-3, nodes=1024)

        assert max(profile.exponents) > ALG_WEIGHT_LIMIT
        assert math.isfinite(normalize(profile))
        assert 0 < profile.kappa < profile.params.v0

    @pytest.mark.parametrize("a", [0.3, 0.4, 0.6, 0.7])
    def test_ode_residual(self, a: float) -> None:
        """Test that Q0+- solve a(1-a) d/da((a_i - a) Q0) = K Z(a) (Q0^other - Q0^self)."""
        profile = build_profile(PhysParams(), 1e-3, nodes=1024)
        p = profile.params
        h = 1e-5
        points = np.array([a - h, a, a + h])
        qplus, qminus = q0_at(profile, points)
        rate = p.drift_scale * float(tumbling_rate(a, p))

        flux_plus = (profile.a1 - points) * qplus
        flux_minus = (profile.a2 - points) * qminus
        # the fluxes are exponentials, so difference their logarithms
        slope_plus = np.diff(np.log(np.abs(flux_plus[::2])))[0] / (2 * h)
        slope_minus = np.diff(np.log(np.abs(flux_minus[::2])))[0] / (2 * h)
        lhs_plus = a * (1 - a) * flux_plus[1] * slope_plus
        lhs_minus = a * (1 - a) * flux_minus[1] * slope_minus
        scale = rate * (qplus[1] + qminus[1])

        assert abs(lhs_plus - rate * (qminus[1] - qplus[1])) <= 1e-6 * scale
        assert abs(lhs_minus - rate * (qplus[1] - qminus[1])) <= 1e-6 * scale

    @pytest.mark.parametrize("G", [5e-4, 1e-3])
    def test_m0_invariance(self, G: float) -> None:
        """Test that the reference methylation leaves the closure bit-identical."""
        base = build_profile(PhysParams(), G, nodes=256)
        shifted = build_profile(PhysParams(m0=3.0), G, nodes=256)

        assert np.array_equal(base.qplus, shifted.qplus)
        assert np.array_equal(base.qminus, shifted.qminus)
        assert base.c0 == shifted.c0
        assert base.kappa == shifted.kappa

    @pytest.mark.parametrize(
        ("G", "increasing"),
        [(3.7e-4, True), (4.0e-4, False)],
    )
    def test_density_transition_at_zero(self, G: float, increasing: bool) -> None:
        """Test that the density vanishes at a = 0 for theta0 > 1 and blows up for theta0 < 1."""
        profile = build_profile(PhysParams(kR=0.0005), G, nodes=1024)
        near_zero = profile.grid < 100 * profile.grid[0]
        density = profile.density_plus[near_zero]

        assert near_zero.sum() >= 10
        steps = np.diff(density)
        if increasing:
            assert np.all(steps > 0)
        else:
            assert np.all(steps < 0)


class TestDeltaClosure:
    """Test cases for the unbiased G = 0 closure."""

    def test_zero_gradient_profile(self) -> None:
        """Test that G = 0 gives a point mass with zero drift."""
        profile = build_profile(PhysParams(), 0.0)

        assert profile.is_delta
        assert drift_velocity(profile) == 0.0
        assert direction_masses(profile) == (0.5, 0.5)
        assert activity_moments(profile)["var"] == 0.0

    def test_point_mass_bins(self) -> None:
        """Test that all mass lands in the bin holding 1/2."""
        masses = bin_masses(delta_closure(PhysParams()), np.linspace(0, 1, 11), "plus")
        assert masses[5] == 1.0
        assert masses.sum() == 1.0

    def test_misuse(self) -> None:
        """Test that density operations refuse the point mass."""
        profile = delta_closure(PhysParams())
        with pytest.raises(MisuseError):
            evaluate_q0(profile)
        with pytest.raises(MisuseError):
            boundary_exponents(profile)
        with pytest.raises(MisuseError):
            delta_closure(PhysParams(), G=1e-3)


class TestCaseTwoCoefficients:
    """Test cases for kappa3 and D0."""

    def test_reference_values(self) -> None:
        """Test kappa3 and D0 at G_mu = 5e-4."""
        kappa3, D0 = case2_coefficients(PhysParams(), 5e-4)

        assert kappa3 == pytest.approx(1.321, rel=1e-3)
        assert D0 == pytest.approx(16.5**2 / 2 / 1.39, rel=1e-12)

    def test_printed_convention(self) -> None:
        """Test that the printed prefactor carries an extra alpha0."""
        p = PhysParams()
        consistent, _ = case2_coefficients(p, 5e-4)
        printed, _ = case2_coefficients(p, 5e-4, convention="as_printed")
        assert printed == pytest.approx(p.alpha0 * consistent)
        assert printed / 5e-4 == pytest.approx(4.49e3, rel=0.01)

    def test_linear_response(self) -> None:
        """Test that small-g drift approaches kappa3 with the adaptation correction."""
        p = PhysParams()
        G = 5e-6
        kappa3, _ = case2_coefficients(p, G)
        z_half = tumbling_rate(0.5, p)
        expected = kappa3 * z_half / (z_half + p.N * p.alpha0 * p.kR / 2)

        assert drift_velocity(build_profile(p, G, nodes=1024)) == pytest.approx(expected, rel=0.03)

    def test_negative_gradient(self) -> None:
        """Test that G_mu < 0 is refused."""
        with pytest.raises(DomainError):
            case2_coefficients(PhysParams(), -1e-4)


class TestDriftCurve:
    """Test cases for kappa(G) sweeps."""

    def test_zero_and_singular_points(self) -> None:
        """Test G = 0 and g = 1 inside a sweep."""
        p = PhysParams()
        G_crit = p.kR * p.alpha0 / p.v0
        curve = drift_curve(p, [0.0, G_crit * 0.9, G_crit, G_crit * 1.1], nodes=128)

        assert curve[0] == 0.0
        assert np.all(np.isfinite(curve))
        assert np.all(curve[1:] > 0)

    def test_interior_maximum(self) -> None:
        """Test that kappa over [1e-5, 2e-3] peaks strictly inside the range."""
        p = PhysParams()
        G_star, kappa_star = peak_drift(p, 1e-5, 2e-3, nodes=128)

        assert 1e-5 * 1.01 < G_star < 2e-3 * 0.99
        ends = drift_curve(p, [1e-5, 2e-3], nodes=128)
        assert kappa_star > ends.max()
        assert not math.isnan(kappa_star)
