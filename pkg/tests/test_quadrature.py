"""
Tests for quadrature module

Line integrals, the multi-dimensional strategies and the lattice engine on
integrands with closed-form integrals.
"""

import math

import numpy as np
import pytest

from src.quadrature import (
    DecayProfile, LatticeAxis, QuadratureSpec, Strategy, integrate_line, integrate_multi, lattice_axes,
    lattice_step, tensor_sum, trapezoid_estimate,
)
from src.utils.errors import DomainError, NonFiniteError, ParameterError, StrategyError

# sech is analytic in |Im y| < pi/2 and bounded by 2 e^(-|y|)
SECH_PROFILE = DecayProfile(rate=1.0, constant=2.0, analytic_halfwidth=0.5 * math.pi)


def sech(y):
    return 1.0 / np.cosh(y)


class TestQuadratureSpec:
    """Test quadrature settings"""

    def test_defaults_are_valid(self, spec):
        """Test default settings"""
        assert spec.rel_tol > 0
        assert spec.multi_dim_strategy is None

    def test_rejects_bad_values(self):
        """Test validation of tolerances and factors"""
        with pytest.raises(ParameterError):
            QuadratureSpec(rel_tol=0.0)
        with pytest.raises(ParameterError):
            QuadratureSpec(truncation_safety=1.5)
        with pytest.raises(ParameterError):
            QuadratureSpec(strip_margin=0.7)

    def test_strategy_from_string(self):
        """Test strategies given as plain strings"""
        spec = QuadratureSpec(multi_dim_strategy='quasi_monte_carlo')
        assert spec.multi_dim_strategy is Strategy.QUASI_MONTE_CARLO

    def test_loosened_never_tightens(self, spec):
        """Test that loosening keeps the looser of both tolerances"""
        loose = spec.loosened(1e-6)
        assert loose.abs_tol == 1e-6
        assert spec.loosened(1e-20).abs_tol == spec.abs_tol


class TestStrategyResolution:
    """Test strategy selection by dimension"""

    def test_unset_strategy_by_dimension(self, spec):
        """Test an unset strategy is adaptive up to d = 3 and QMC beyond"""
        assert spec.strategy_for(3) is Strategy.NESTED_ADAPTIVE
        assert spec.strategy_for(4) is Strategy.QUASI_MONTE_CARLO

    def test_nested_limited_to_three(self):
        """Test that an explicit nested adaptive is refused beyond d = 3"""
        spec = QuadratureSpec(multi_dim_strategy='nested_adaptive')
        assert spec.strategy_for(3) is Strategy.NESTED_ADAPTIVE
        with pytest.raises(StrategyError):
            spec.strategy_for(4)

    def test_tensor_falls_back_to_qmc(self):
        """Test the lattice strategy is replaced by QMC for d >= 4"""
        spec = QuadratureSpec(multi_dim_strategy='tensor_fixed')
        assert spec.strategy_for(4) is Strategy.QUASI_MONTE_CARLO

    def test_dimension_cap(self):
        """Test that d > 6 is refused for every strategy"""
        with pytest.raises(StrategyError):
            QuadratureSpec(multi_dim_strategy='quasi_monte_carlo').strategy_for(7)


class TestDecayProfile:
    """Test decay envelopes"""

    def test_requires_positive_rate(self):
        """Test that a non-decaying envelope is a domain error"""
        with pytest.raises(DomainError):
            DecayProfile(rate=0.0)
        with pytest.raises(DomainError):
            DecayProfile(rate=-1.0)

    def test_truncation_radius_meets_tolerance(self, spec):
        """Test the tail bound beyond the truncation radius"""
        radius = SECH_PROFILE.truncation_radius(spec)
        assert SECH_PROFILE.constant * math.exp(-SECH_PROFILE.rate * radius) < spec.abs_tol

    def test_frequencies_are_absolute(self):
        """Test that oscillation frequencies are stored as magnitudes"""
        assert DecayProfile(rate=1.0, osc_freqs=(-3.0, 2.0)).max_freq == 3.0


class TestIntegrateLine:
    """Test one-dimensional integration"""

    def test_gaussian(self, spec):
        """Test int exp(-y^2) = sqrt(pi)"""
        profile = DecayProfile(rate=1.0, constant=math.exp(0.25))
        value, err = integrate_line(lambda y: np.exp(-y * y) + 0j, profile, spec)

        assert value == pytest.approx(math.sqrt(math.pi), abs=1e-10)
        assert err < 1e-8

    def test_oscillatory_fourier_transform(self, spec):
        """Test int sech(y) e^(i k y) = pi sech(pi k / 2)"""
        k = 3.0
        profile = DecayProfile(rate=1.0, osc_freqs=(k,), constant=2.0)
        value, err = integrate_line(lambda y: sech(y) * np.exp(1j * k * y), profile, spec)
        exact = math.pi / math.cosh(0.5 * math.pi * k)

        assert abs(value - exact) <= err + 1e-12
        assert abs(value - exact) < 1e-10

    def test_shifted_center(self, spec):
        """Test an integrand centred away from the origin"""
        profile = DecayProfile(rate=1.0, center=7.5, constant=2.0)
        value, _ = integrate_line(lambda y: sech(y - 7.5) + 0j, profile, spec)

        assert value == pytest.approx(math.pi, abs=1e-10)

    def test_non_finite_integrand(self, spec):
        """Test that NaN values raise"""
        with pytest.raises(NonFiniteError):
            integrate_line(lambda y: np.full(np.shape(y), np.nan, dtype=complex), SECH_PROFILE, spec)


class TestIntegrateMulti:
    """Test multi-dimensional strategies"""

    def test_zero_dimensional(self, spec):
        """Test d = 0 evaluates the constant"""
        assert integrate_multi(lambda: 2.5, [], spec) == (2.5, 0.0)

    def test_nested_two_dimensional(self, spec):
        """Test int sech(y1) sech(y2) = pi^2 with nested adaptive"""
        value, err = integrate_multi(lambda a, b: sech(a) * sech(b) + 0j, [SECH_PROFILE] * 2, spec)

        assert value == pytest.approx(math.pi ** 2, abs=1e-8)
        assert abs(value - math.pi ** 2) <= err + 1e-10

    def test_lattice_two_dimensional(self):
        """Test the same integral on the lattice"""
        spec = QuadratureSpec(multi_dim_strategy='tensor_fixed')
        value, err = integrate_multi(lambda a, b: sech(a) * sech(b) + 0j, [SECH_PROFILE] * 2, spec)

        assert value == pytest.approx(math.pi ** 2, abs=1e-8)
        assert abs(value - math.pi ** 2) <= err + 1e-10

    def test_qmc_two_dimensional(self):
        """Test the quasi-Monte Carlo estimate is honest at its own level"""
        spec = QuadratureSpec(multi_dim_strategy='quasi_monte_carlo', abs_tol=1e-4, rel_tol=1e-4, seed=3)
        value, err = integrate_multi(lambda a, b: sech(a) * sech(b) + 0j, [SECH_PROFILE] * 2, spec)

        assert abs(value - math.pi ** 2) < 5e-2 * math.pi ** 2
        assert err > 0

    @pytest.mark.slow
    def test_nested_three_dimensional_order_invariance(self, loose_spec):
        """Test a product integral and its reversed nesting order"""
        def f(a, b, c):
            return sech(a) * np.exp(0.5j * a) * sech(b - 0.3) * sech(c) * np.exp(-0.5j * c)

        wave = DecayProfile(rate=1.0, osc_freqs=(0.5,), constant=2.0, analytic_halfwidth=0.5 * math.pi)
        profiles = [wave, DecayProfile(rate=1.0, center=0.3, constant=2.0), wave]
        exact = math.pi ** 3 / math.cosh(0.25 * math.pi) ** 2

        first, err1 = integrate_multi(f, profiles, loose_spec)
        second, err2 = integrate_multi(lambda c, b, a: f(a, b, c), profiles[::-1], loose_spec)

        assert abs(first - exact) < 1e-5
        assert abs(first - second) <= 2 * (err1 + err2)


class TestLatticeEngine:
    """Test lattice axes and contractions"""

    def test_axis_geometry(self):
        """Test points, weights and coarsening"""
        axis = LatticeAxis(0.1, -4, 6)

        assert axis.size == 11
        assert axis.points[0] == pytest.approx(-0.4)
        coarse = axis.coarsened()
        assert coarse.weight == pytest.approx(0.2)
        assert list(coarse.indices) == [-4, -2, 0, 2, 4, 6]

    def test_axes_share_step(self, spec):
        """Test that all axes use the smallest step"""
        narrow = DecayProfile(rate=1.0, constant=2.0, analytic_halfwidth=0.2)
        axes = lattice_axes([SECH_PROFILE, narrow], spec)

        assert axes[0].step == axes[1].step == pytest.approx(lattice_step(narrow, spec))
        assert all(ax.lo % 2 == 0 and ax.hi % 2 == 0 for ax in axes)

    def test_lattice_step_needs_strip(self, spec):
        """Test that a profile without strip width cannot be put on a lattice"""
        with pytest.raises(ParameterError):
            lattice_step(DecayProfile(rate=1.0), spec)

    def test_trapezoid_rejects_non_finite(self):
        """Test non-finite lattice values"""
        axis = LatticeAxis(0.5, -2, 2)
        values = np.array([1.0, np.inf, 1.0, 1.0, 1.0], dtype=complex)
        with pytest.raises(NonFiniteError):
            trapezoid_estimate(values, [axis], [SECH_PROFILE])

    def test_tensor_sum_three_axes(self, rng):
        """Test the contraction against a dense einsum"""
        v = [rng.normal(size=k) + 1j * rng.normal(size=k) for k in (4, 5, 6)]
        pairs = {
            (0, 1): rng.normal(size=(4, 5)),
            (0, 2): rng.normal(size=(4, 6)),
            (1, 2): rng.normal(size=(5, 6)),
        }
        expected = np.einsum('i,j,k,ij,ik,jk->', v[0], v[1], v[2], pairs[(0, 1)], pairs[(0, 2)], pairs[(1, 2)])

        assert tensor_sum(v, pairs) == pytest.approx(expected, rel=1e-12)

    def test_tensor_sum_dense_factor(self, rng):
        """Test two axes with a dense factor"""
        v = [rng.normal(size=3), rng.normal(size=4)]
        dense = rng.normal(size=(3, 4))

        assert tensor_sum(v, dense=dense) == pytest.approx(np.einsum('i,j,ij->', v[0], v[1], dense), rel=1e-12)

    def test_tensor_sum_dimension_limit(self):
        """Test that four axes are refused"""
        with pytest.raises(ValueError):
            tensor_sum([np.ones(2)] * 4)
