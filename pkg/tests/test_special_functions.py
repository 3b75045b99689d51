"""
Tests for special_functions module

Functional equations of the double sine function and its singularity lattices.
"""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from src.quadrature import QuadratureSpec
from src.special_functions import Periods, classify_point, hyperbolic_gamma, log_s2, log_s2_strip, s2
from src.utils.errors import DomainError, NearPoleError, ParameterError

SQRT2 = math.sqrt(2.0)
PERIODS = Periods(1.0, SQRT2)
SPEC = QuadratureSpec()

# Off the real axis the real-period lattices are at distance >= 0.05
off_axis = st.builds(
    complex,
    st.floats(min_value=-1.5, max_value=3.0),
    st.floats(min_value=0.05, max_value=0.8),
)


def strip_integral_oracle(z: float, periods: Periods) -> float:
    """ln S2 for real z and real periods by scipy's adaptive quadrature"""
    w1, w2 = periods.omega1.real, periods.omega2.real
    a = 2.0 * z - (w1 + w2)

    def integrand(t):
        return (math.sinh(a * t) / (math.sinh(w1 * t) * math.sinh(w2 * t)) - a / (w1 * w2 * t)) / (2.0 * t)

    head, _ = integrate.quad(integrand, 1e-3, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200)
    tail, _ = integrate.quad(integrand, 1.0, 60.0, epsabs=1e-14, epsrel=1e-13, limit=500)
    # integrand is regular at 0; its limit there is -a (w1^2 + w2^2 - a^2) / (12 w1 w2)
    near_zero = -1e-3 * a * (w1 ** 2 + w2 ** 2 - a ** 2) / (12.0 * w1 * w2)
    # the non-decaying -a / (2 w1 w2 t^2) part beyond t = 60
    far = -a / (2.0 * w1 * w2 * 60.0)
    return head + tail + near_zero + far


class TestPeriods:
    """Test the period container"""

    def test_derived_quantities(self):
        """Test sum, product and arguments"""
        periods = Periods(1.0 + 0.2j, 1.3 - 0.1j)

        assert periods.total == pytest.approx(2.3 + 0.1j)
        assert periods.product == pytest.approx((1.0 + 0.2j) * (1.3 - 0.1j))
        assert periods.sigma1 == pytest.approx(cmath.phase(1.0 + 0.2j))
        assert periods.sigma2 < 0

    def test_rejects_nonpositive_real_part(self):
        """Test that Re w <= 0 is rejected"""
        with pytest.raises(ParameterError):
            Periods(-1.0, 1.0)
        with pytest.raises(ParameterError):
            Periods(1.0, 0.5j)

    def test_swapped_and_scaled(self):
        """Test the period swap and the homogeneity rescaling"""
        assert PERIODS.swapped() == Periods(SQRT2, 1.0)
        assert PERIODS.scaled(2.0).total == pytest.approx(2.0 * PERIODS.total)


class TestClassifyPoint:
    """Test singularity classification"""

    def test_origin_is_zero(self):
        """Test the zero at the lattice origin"""
        info = classify_point(0.0, PERIODS)

        assert info.is_zero is True
        assert info.is_pole is False
        assert info.lattice_indices == (0, 0)

    def test_first_pole(self):
        """Test the pole at w1 + w2"""
        info = classify_point(PERIODS.total, PERIODS)

        assert info.is_pole is True
        assert info.lattice_indices == (1, 1)

    def test_generic_point(self):
        """Test a point off both lattices"""
        info = classify_point(0.5 * PERIODS.omega1, PERIODS)

        assert not info.is_zero and not info.is_pole
        assert info.distance > 0

    def test_deeper_zero(self):
        """Test a zero further down the lattice"""
        info = classify_point(-2.0 - SQRT2, PERIODS)

        assert info.is_zero is True
        assert info.lattice_indices == (2, 1)


class TestLogS2Strip:
    """Test the integral representation inside the strip"""

    def test_midpoint_vanishes(self):
        """Test that ln S2 is zero at the centre of the strip"""
        assert abs(log_s2_strip(0.5 * PERIODS.total, PERIODS, SPEC)) < 1e-12

    def test_inversion_sums_to_zero(self, rng):
        """Test ln S2(z) + ln S2(w - z) = 0 inside the strip"""
        for _ in range(10):
            z = complex(rng.uniform(0.4, 2.0), rng.uniform(-0.5, 0.5))
            total = log_s2_strip(z, PERIODS, SPEC) + log_s2_strip(PERIODS.total - z, PERIODS, SPEC)
            assert abs(total) < 1e-10

    def test_matches_independent_quadrature(self):
        """Test z = 0.7 against an independent adaptive integration"""
        value = log_s2_strip(0.7, PERIODS, SPEC)

        assert abs(value.imag) < 1e-12
        assert value.real == pytest.approx(strip_integral_oracle(0.7, PERIODS), abs=1e-8)

    def test_outside_strip_raises(self):
        """Test that points outside the strip are rejected"""
        with pytest.raises(DomainError):
            log_s2_strip(-0.3, PERIODS, SPEC)
        with pytest.raises(DomainError):
            log_s2_strip(PERIODS.total.real, PERIODS, SPEC)

    def test_large_period_argument_raises(self):
        """Test that steep complex periods are refused"""
        with pytest.raises(DomainError):
            log_s2_strip(1.0, Periods(1.0, 1.0 + 2.0j), SPEC)


class TestS2Values:
    """Test special values of S2"""

    def test_midpoint_is_one(self):
        """Test S2((w1 + w2)/2) = 1"""
        assert s2(0.5 * PERIODS.total, PERIODS, SPEC) == pytest.approx(1.0, abs=1e-12)

    def test_value_at_first_period(self):
        """Test S2(w1) = sqrt(w2 / w1)"""
        assert s2(PERIODS.omega1, PERIODS, SPEC) == pytest.approx(math.sqrt(SQRT2), rel=1e-9)

    def test_zero_lattice(self):
        """Test exact zeros on the zero lattice"""
        assert s2(0.0, PERIODS, SPEC) == 0
        assert s2(-1.0, PERIODS, SPEC) == 0

    def test_pole_raises(self):
        """Test that a pole raises with its lattice indices"""
        with pytest.raises(NearPoleError) as exc_info:
            s2(PERIODS.total, PERIODS, SPEC)

        assert exc_info.value.info.lattice_indices == (1, 1)

    def test_vectorized(self):
        """Test array input keeps its shape"""
        z = np.array([[0.3 + 0.1j, 0.8], [1.7, 0.2 - 0.4j]])
        values = s2(z, PERIODS, SPEC)

        assert values.shape == (2, 2)
        assert values[0, 1] == pytest.approx(s2(0.8, PERIODS, SPEC), rel=1e-12)

    def test_log_s2_zero_is_negative_infinity(self):
        """Test that zeros appear as -inf in the logarithm"""
        assert np.isneginf(log_s2(np.array([0.0, 0.5]), PERIODS, SPEC)[0].real)


class TestS2FunctionalEquations:
    """Test the functional equations at random points"""

    @pytest.mark.parametrize('z', [0.3 + 0.2j, -0.7 + 0.4j, 1.9 - 0.3j, 2.8 + 0.1j])
    def test_shift_relations(self, z):
        """Test S2(z) / S2(z + w_a) = 2 sin(pi z / w_b) for both periods"""
        for w_a, w_b in ((PERIODS.omega1, PERIODS.omega2), (PERIODS.omega2, PERIODS.omega1)):
            expected = 2.0 * cmath.sin(math.pi * z / w_b)
            ratio = s2(z, PERIODS, SPEC) / s2(z + w_a, PERIODS, SPEC)
            assert abs(ratio - expected) / abs(expected) < 1e-9

    @settings(max_examples=25, deadline=None)
    @given(z=off_axis)
    def test_inversion(self, z):
        """Test S2(z) S2(w1 + w2 - z) = 1"""
        product = s2(z, PERIODS, SPEC) * s2(PERIODS.total - z, PERIODS, SPEC)
        assert abs(product - 1.0) < 1e-9

    @settings(max_examples=25, deadline=None)
    @given(z=off_axis)
    def test_reflection(self, z):
        """Test S2(z) S2(-z) = -4 sin(pi z / w1) sin(pi z / w2)"""
        expected = -4.0 * cmath.sin(math.pi * z / PERIODS.omega1) * cmath.sin(math.pi * z / PERIODS.omega2)
        product = s2(z, PERIODS, SPEC) * s2(-z, PERIODS, SPEC)
        assert abs(product - expected) <= 1e-9 * abs(expected)

    @settings(max_examples=25, deadline=None)
    @given(z=off_axis)
    def test_period_symmetry(self, z):
        """Test S2(z | w1, w2) = S2(z | w2, w1)"""
        value = s2(z, PERIODS, SPEC)
        assert abs(s2(z, PERIODS.swapped(), SPEC) - value) <= 1e-10 * max(1.0, abs(value))

    @pytest.mark.parametrize('gamma', [0.5, 2.0, 3.7])
    def test_homogeneity(self, gamma):
        """Test S2(gamma z | gamma w) = S2(z | w)"""
        z = 0.45 + 0.3j
        value = s2(z, PERIODS, SPEC)
        scaled = s2(gamma * z, PERIODS.scaled(gamma), SPEC)

        assert abs(scaled - value) <= 1e-10 * max(1.0, abs(value))

    def test_ladder_directions_agree(self):
        """Test points reached from the left and the right of the strip"""
        z = 0.9 + 0.25j
        via_right = s2(z + 2 * PERIODS.omega1, PERIODS, SPEC)
        factor = (2 * cmath.sin(math.pi * (z + PERIODS.omega1) / PERIODS.omega2)
                  * 2 * cmath.sin(math.pi * z / PERIODS.omega2))

        assert abs(via_right * factor - s2(z, PERIODS, SPEC)) <= 1e-9 * abs(s2(z, PERIODS, SPEC))

    def test_complex_periods_inversion(self, complex_periods, rng):
        """Test inversion for complex periods at the relaxed tolerance"""
        for _ in range(5):
            z = complex(rng.uniform(0.3, 2.0), rng.uniform(0.1, 0.6))
            product = s2(z, complex_periods, SPEC) * s2(complex_periods.total - z, complex_periods, SPEC)
            assert abs(product - 1.0) < 1e-8


class TestHyperbolicGamma:
    """Test the hyperbolic gamma function"""

    def test_origin(self):
        """Test G(0) = 1"""
        assert hyperbolic_gamma(0.0, PERIODS, SPEC) == pytest.approx(1.0, abs=1e-12)

    def test_definition(self):
        """Test G(0.3 | 1, 1) = S2(0.3i + 1 | 1, 1)"""
        periods = Periods(1.0, 1.0)
        assert hyperbolic_gamma(0.3, periods, SPEC) == pytest.approx(s2(1.0 + 0.3j, periods, SPEC), rel=1e-13)

    def test_product_with_reflected_argument(self):
        """Test G(z) G(-z) against the two S2 values it unfolds to"""
        z = 0.4 - 0.2j
        half = 0.5 * PERIODS.total
        product = hyperbolic_gamma(z, PERIODS, SPEC) * hyperbolic_gamma(-z, PERIODS, SPEC)
        expected = s2(1j * z + half, PERIODS, SPEC) * s2(-1j * z + half, PERIODS, SPEC)

        assert product == pytest.approx(expected, rel=1e-12)
