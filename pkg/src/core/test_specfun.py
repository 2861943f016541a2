"""Tests for Bessel jets, Taylor arithmetic and Gamma helpers."""

import math
import unittest

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest
from scipy import special

from src.core.errors import DomainError, PoleError, UnsupportedOrderError
from src.core.specfun import (
    Jet,
    bessel_i,
    bessel_i_jet,
    bessel_k,
    bessel_k_jet,
    csch_taylor,
    log_gamma_abs,
    log_gamma_complex_abs,
    power_taylor,
    scaled_bessel_k_taylor,
    sinh_taylor,
    taylor_mul,
)


class SpecfunTests(unittest.TestCase):
    def test_k0_derivative_is_minus_k1(self) -> None:
        jet = bessel_k_jet(0.0, 1.0, 1)
        self.assertAlmostEqual(jet.coeffs[1], -special.kv(1.0, 1.0), places=14)
        h = 1e-5
        central = (special.kv(0.0, 1.0 + h) - special.kv(0.0, 1.0 - h)) / (2 * h)
        self.assertAlmostEqual(jet.coeffs[1], central, places=8)

    def test_higher_jets_match_finite_differences(self) -> None:
        jet = bessel_k_jet(0.3, 2.0, 3)
        h = 1e-3
        values = [special.kv(0.3, 2.0 + k * h) for k in (-1, 0, 1)]
        second = (values[0] - 2 * values[1] + values[2]) / h**2
        self.assertAlmostEqual(jet.coeffs[2] / second, 1.0, places=5)

    def test_i_jet(self) -> None:
        jet = bessel_i_jet(0.0, 1.5, 2)
        self.assertAlmostEqual(jet.coeffs[1], special.iv(1.0, 1.5), places=13)
        self.assertAlmostEqual(jet.value, bessel_i(0.0, 1.5), places=14)

    def test_small_argument_leading_terms(self) -> None:
        z = 1e-6
        self.assertAlmostEqual(bessel_k(0.7, z) / (0.5 * math.gamma(0.7) * (z / 2) ** -0.7), 1.0, places=6)
        self.assertAlmostEqual(bessel_i(0.7, z) / ((z / 2) ** 0.7 / math.gamma(1.7)), 1.0, places=9)

    def test_domain_errors(self) -> None:
        with self.assertRaises(DomainError):
            bessel_k(0.5, 0.0)
        with self.assertRaises(UnsupportedOrderError):
            bessel_k(6.0, 1.0)
        with self.assertRaises(UnsupportedOrderError):
            bessel_k_jet(0.5, 1.0, 40)
        with self.assertRaises(PoleError):
            log_gamma_complex_abs(-1.0, 0.0)
        with self.assertRaises(ValueError):
            Jet(1.0, 2, (1.0, 2.0))

    def test_gamma_modulus_reflection_oracle(self) -> None:
        value = 2.0 * log_gamma_complex_abs(0.5, 1.0)
        self.assertAlmostEqual(value, math.log(math.pi / math.cosh(math.pi)), places=12)
        vector = log_gamma_abs(np.array([0.5 + 1j, 3.0]))
        self.assertAlmostEqual(float(vector[1]), math.log(2.0), places=13)

    def test_taylor_arithmetic(self) -> None:
        x = np.array([0.4, 2.0])
        product = taylor_mul(sinh_taylor(x, 5), csch_taylor(x, 5))
        np.testing.assert_allclose(product[0], 1.0, rtol=1e-14)
        np.testing.assert_allclose(product[1:], 0.0, atol=1e-12)
        square = power_taylor(3.0, 2.0, 3)
        np.testing.assert_allclose(square, [9.0, 6.0, 1.0, 0.0], atol=1e-14)

    def test_power_taylor_with_negative_integer_exponent(self) -> None:
        # 1/t at t = 2: (-1)^k / 2^(k+1)
        inverse = power_taylor(2.0, -1.0, 4)
        self.assertTrue(np.all(np.isfinite(inverse)))
        np.testing.assert_allclose(inverse, [(-1.0) ** k / 2.0 ** (k + 1) for k in range(5)], rtol=1e-14)
        cube = power_taylor(np.array([0.5, 4.0]), -3.0, 2)
        np.testing.assert_allclose(cube[2], 6.0 * np.array([0.5, 4.0]) ** -5.0, rtol=1e-14)

    def test_subnormal_order_reads_as_zero(self) -> None:
        tiny = 5e-324
        self.assertEqual(bessel_k(tiny, 1.3), special.kv(0.0, 1.3))
        self.assertEqual(bessel_i(-tiny, 1.3), special.iv(0.0, 1.3))
        jet = bessel_k_jet(tiny, 1.3, 3)
        self.assertTrue(all(math.isfinite(c) for c in jet.coeffs))
        self.assertAlmostEqual(jet.coeffs[1], -special.kv(1.0, 1.3), places=14)

    def test_half_integer_closed_form(self) -> None:
        for z in (0.05, 1.0, 7.5, 40.0):
            exact = math.sqrt(math.pi / (2.0 * z)) * math.exp(-z)
            self.assertAlmostEqual(bessel_k(0.5, z) / exact, 1.0, places=12)
            self.assertAlmostEqual(bessel_k(1.5, z) / (exact * (1.0 + 1.0 / z)), 1.0, places=12)

    def test_jet_satisfies_the_modified_bessel_equation(self) -> None:
        for nu, z in ((0.0, 0.4), (0.8, 1.7), (2.5, 6.0), (-1.2, 3.0)):
            value, first, second = bessel_k_jet(nu, z, 2).coeffs
            residual = z * z * second + z * first - (z * z + nu * nu) * value
            self.assertLess(abs(residual), 1e-11 * (z * z + nu * nu + 1.0) * abs(value))
            value, first, second = bessel_i_jet(nu, z, 2).coeffs
            residual = z * z * second + z * first - (z * z + nu * nu) * value
            self.assertLess(abs(residual), 1e-11 * (z * z + nu * nu + 1.0) * abs(value))

    def test_scaled_taylor_matches_the_jet(self) -> None:
        taylor = scaled_bessel_k_taylor(1.5, 2.0, 0.75, 3)
        jet = bessel_k_jet(1.5, 1.5, 3)
        for k in range(4):
            self.assertAlmostEqual(
                taylor[k] / (jet.coeffs[k] * 2.0**k / math.factorial(k)), 1.0, places=12
            )


@settings(max_examples=80, deadline=None)
@given(
    st.floats(min_value=-3.9, max_value=3.9, allow_nan=False),
    st.floats(min_value=0.1, max_value=50.0, allow_nan=False),
)
def test_k_recurrence(nu: float, z: float) -> None:
    left = bessel_k(nu + 1.0, z)
    right = bessel_k(nu - 1.0, z) + (2.0 * nu / z) * bessel_k(nu, z)
    assert left == pytest.approx(right, rel=1e-9)


class SpecfunPropertyTests(unittest.TestCase):
    def test_recurrence(self) -> None:
        test_k_recurrence()
        test_wronskian()
        test_k_is_even_in_the_order()


@settings(max_examples=60, deadline=None)
@given(
    st.floats(min_value=0.0, max_value=3.9, allow_nan=False),
    st.floats(min_value=0.1, max_value=30.0, allow_nan=False),
)
def test_wronskian(nu: float, z: float) -> None:
    cross = bessel_i(nu, z) * bessel_k(nu + 1.0, z) + bessel_i(nu + 1.0, z) * bessel_k(nu, z)
    assert cross == pytest.approx(1.0 / z, rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(
    st.floats(min_value=0.0, max_value=5.0, allow_nan=False),
    st.floats(min_value=0.05, max_value=60.0, allow_nan=False),
)
def test_k_is_even_in_the_order(nu: float, z: float) -> None:
    assert bessel_k(-nu, z) == pytest.approx(bessel_k(nu, z), rel=1e-12)
