"""
Tests for model module

Parameter invariants, the measure and kernel functions and their products.
"""

import math

import numpy as np
import pytest

from src.model import (
    ComplexTuple, ModelParams, as_tuple, calibrate_bound_constants, d_n, d_n_dual, k_asymptotic, k_hat,
    kfun, kprod, lattice_difference_matrix, lattice_values, mu, mu_asymptotic, mu_hat, muprime, muprod,
)
from src.special_functions import Periods, s2
from src.utils.errors import NearPoleError, ParameterError


class TestModelParams:
    """Test parameter validation and derived constants"""

    def test_derived_constants(self, params):
        """Test g*, g^ and nu_g"""
        product = params.omega1 * params.omega2

        assert params.g_star == pytest.approx(1.0 + math.sqrt(2.0) - 0.6)
        assert params.g_hat == pytest.approx(0.6 / product)
        assert params.nu_g == pytest.approx(0.6 / math.sqrt(2.0))
        assert params.nu_g_star == pytest.approx(params.g_star.real / math.sqrt(2.0))

    @pytest.mark.parametrize('g', [0.0, -0.2, 2.5])
    def test_coupling_out_of_range(self, real_periods, g):
        """Test that Re g outside (0, Re w1 + Re w2) is rejected"""
        with pytest.raises(ParameterError):
            ModelParams(real_periods, g)

    def test_dual_is_involution(self, params):
        """Test that dual().dual() reproduces the parameters"""
        twice = params.dual().dual()

        assert twice.omega1 == pytest.approx(params.omega1)
        assert twice.omega2 == pytest.approx(params.omega2)
        assert twice.g == pytest.approx(params.g)

    def test_dual_periods(self, params):
        """Test w^ = (1/w2, 1/w1) and g*^ = g*/(w1 w2)"""
        dual = params.dual()

        assert dual.omega1 == pytest.approx(1.0 / params.omega2)
        assert dual.omega2 == pytest.approx(1.0 / params.omega1)
        assert dual.g == pytest.approx(params.g_star_hat)

    def test_round_trip_dict(self, complex_params):
        """Test serialization used in reports"""
        assert ModelParams.from_dict(complex_params.to_dict()) == complex_params

    def test_params_hash_is_stable(self, params, real_periods):
        """Test that equal parameters hash equally"""
        assert params.params_hash() == ModelParams(real_periods, 0.6).params_hash()
        assert params.params_hash() != ModelParams(real_periods, 0.7).params_hash()


class TestComplexTuple:
    """Test the tuple container"""

    def test_sum_and_operations(self):
        """Test sum, permutation, concatenation and shift"""
        t = ComplexTuple.of(1.0, 2.0 + 1j, -0.5)

        assert t.sum() == pytest.approx(2.5 + 1j)
        assert t.permuted((2, 0, 1)).values == (-0.5, 1.0, 2.0 + 1j)
        assert len(t.concat(ComplexTuple.of(3.0))) == 4
        assert t.shifted(1j)[0] == 1.0 + 1j

    def test_as_tuple_accepts_sequences(self):
        """Test conversion of plain sequences"""
        assert as_tuple([1, 2]).values == (1 + 0j, 2 + 0j)
        assert as_tuple([0.5]).is_real()
        assert not as_tuple([0.5j]).is_real()


class TestMeasureAndKernel:
    """Test mu and K"""

    def test_mu_zero_at_origin(self, params, spec):
        """Test mu(0) = 0"""
        assert mu(0.0, params, spec) == 0

    def test_mu_is_ratio_of_double_sines(self, params, spec):
        """Test mu(0.4) against two separate S2 evaluations"""
        expected = s2(0.4j, params.periods, spec) / s2(0.4j + params.g, params.periods, spec)
        assert mu(0.4, params, spec) == pytest.approx(expected, rel=1e-12)

    def test_kernel_is_even(self, params, spec, rng):
        """Test K(x) = K(-x)"""
        for x in rng.uniform(-3, 3, size=5) + 1j * rng.uniform(-0.3, 0.3, size=5):
            assert kfun(x, params, spec) == pytest.approx(kfun(-x, params, spec), rel=1e-11)

    def test_self_dual_point(self, spec):
        """Test K(0) = S2(1/2 | 1, 1)^(-2) for w = (1, 1), g = 1"""
        params = ModelParams(Periods(1.0, 1.0), 1.0)
        value = kfun(0.0, params, spec)

        assert abs(value.imag) < 1e-12
        assert value.real > 0
        assert value == pytest.approx(s2(0.5, params.periods, spec) ** -2, rel=1e-12)

    def test_kernel_pole_at_strip_edge(self, params, spec):
        """Test the pole of K at Im x = Re g*/2"""
        with pytest.raises(NearPoleError):
            kfun(0.5j * params.g_star.real, params, spec)

    def test_vectorized_shape(self, params, spec):
        """Test array input keeps its shape"""
        x = np.linspace(-1, 1, 6).reshape(2, 3)
        assert kfun(x, params, spec).shape == (2, 3)

    def test_dual_functions(self, params, spec):
        """Test K^ and mu^ are K and mu in the dual parameters"""
        assert k_hat(0.2, params, spec) == pytest.approx(kfun(0.2, params.dual(), spec), rel=1e-14)
        assert k_hat(0.2, params, spec) == pytest.approx(k_hat(-0.2, params, spec), rel=1e-11)
        assert mu_hat(0.0, params, spec) == 0


class TestAsymptotics:
    """Test the exponential asymptotics of mu and K"""

    def test_kernel_decay(self, params, spec):
        """Test K(x) e^(pi g^ |x|) -> 1"""
        x = 30.0 / params.nu_g
        for point in (x, -x):
            ratio = kfun(point, params, spec) / k_asymptotic(point, params)
            assert abs(ratio - 1.0) < 1e-3

    def test_measure_growth(self, params, spec):
        """Test mu(x) against exp(pi g^ |x| +- i pi g^ g*/2)"""
        x = 30.0 / params.nu_g
        for point in (x, -x):
            ratio = mu(point, params, spec) / mu_asymptotic(point, params)
            assert abs(ratio - 1.0) < 1e-3

    def test_bound_constants_cover_grid(self, params, spec):
        """Test that the calibrated constants bound K on the real line"""
        constants = calibrate_bound_constants(params, spec)
        grid = np.linspace(-5.0, 5.0, 41)

        assert np.all(np.abs(kfun(grid, params, spec)) <= constants.c_k * np.exp(-math.pi * params.nu_g * np.abs(grid)))


class TestProducts:
    """Test products over tuples and normalizing constants"""

    def test_muprod_factorizes(self, params, spec):
        """Test mu(x_n) = mu'(x_n) mu'(-x_n)"""
        x = (0.3, -0.45, 1.1)
        lhs = muprod(x, params, spec)
        rhs = muprime(x, params, spec) * muprime(tuple(-v for v in x), params, spec)

        assert abs(lhs - rhs) <= 1e-12 * abs(lhs)

    def test_kprod_is_double_product(self, params, spec):
        """Test K(x_n, y_m) against the explicit double product"""
        x, y = (0.2, -0.7), (0.1, 0.5, 1.3)
        expected = np.prod([kfun(a - b, params, spec) for a in x for b in y])

        assert kprod(x, y, params, spec) == pytest.approx(expected, rel=1e-12)

    def test_empty_products(self, params, spec):
        """Test that empty products are 1"""
        assert muprod((0.4,), params, spec) == 1
        assert kprod((), (0.3,), params, spec) == 1

    def test_coinciding_points_report_index_pair(self, params, spec):
        """Test that a singular mu factor names the offending pair"""
        y = (0.3, 0.3 + 1j * params.g.real)
        with pytest.raises(NearPoleError) as exc_info:
            muprod(y, params, spec)

        assert exc_info.value.index_pair is not None

    def test_d_n_recursion(self, params, spec):
        """Test d_0 = 1 and d_2 = d_1^2 / 2"""
        assert d_n(0, params, spec) == 1
        assert d_n(2, params, spec) == pytest.approx(d_n(1, params, spec) ** 2 / 2, rel=1e-13)

    def test_d_n_negative(self, params, spec):
        """Test that n < 0 is rejected"""
        with pytest.raises(ParameterError):
            d_n(-1, params, spec)

    def test_d_n_dual(self, params, spec):
        """Test d_n^ is d_n in the dual parameters"""
        assert d_n_dual(2, params, spec) == pytest.approx(d_n(2, params.dual(), spec), rel=1e-14)


class TestLatticeCache:
    """Test the shared K and mu lattices"""

    def test_values_match_direct_evaluation(self, params, spec):
        """Test lattice values against kfun"""
        step = 0.07
        values = lattice_values('k', params, step, -5, 12, spec)

        assert len(values) == 18
        assert values[0] == pytest.approx(kfun(-5 * step, params, spec), rel=1e-14)
        assert values[-1] == pytest.approx(kfun(12 * step, params, spec), rel=1e-14)

    def test_difference_matrix(self, params, spec):
        """Test mu(step (r_i - c_j)) gathered from the cache"""
        step = 0.05
        rows, cols = np.arange(-3, 4), np.arange(0, 5)
        matrix = lattice_difference_matrix('mu', params, step, rows, cols, spec)

        assert matrix.shape == (7, 5)
        assert matrix[0, 4] == pytest.approx(mu(step * (-3 - 4), params, spec), rel=1e-14)

    def test_unknown_kind(self, params, spec):
        """Test that only K and mu lattices exist"""
        with pytest.raises(ParameterError):
            lattice_values('psi', params, 0.1, 0, 3, spec)
