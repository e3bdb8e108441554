import math
import warnings

import mpmath
import numpy as np
import pytest
import scipy.integrate as si
import scipy.special as ss

from unruhlab import specfun as sf
from unruhlab.errors import DomainError, LossOfPrecisionWarning, OrderOutOfRange


def kiv_mpmath(nu, x, scaled=False):
    with mpmath.workdps(40):
        val = mpmath.besselk(1j * nu, x)
        if scaled:
            val *= mpmath.exp(mpmath.pi * abs(nu) / 2)
        return complex(val)


def kiv_cos_representation(nu, delta):
    """K_iv via (1/cosh(pi nu/2)) int_0^inf cos(delta sinh x) cos(nu x) dx,
    evaluated with QAWF oscillatory quadrature after u = sinh x."""
    def f(u):
        return np.cos(nu * np.arcsinh(u)) / np.sqrt(1.0 + u * u)

    val, _ = si.quad(f, 0.0, np.inf, weight="cos", wvar=delta, limlst=200,
                     limit=400)
    return val / math.cosh(0.5 * math.pi * nu)


def kiv_sin_representation(nu, delta):
    """K_iv via (1/sinh(pi nu/2)) int_0^inf sin(delta sinh x) sin(nu x) dx."""
    def f(u):
        return np.sin(nu * np.arcsinh(u)) / np.sqrt(1.0 + u * u)

    val, _ = si.quad(f, 0.0, np.inf, weight="sin", wvar=delta, limlst=200,
                     limit=400)
    return val / math.sinh(0.5 * math.pi * nu)


class TestGamma:
    def test_gamma_at_zero(self):
        assert sf.gamma_imag_axis(0.0) == pytest.approx(1.0)

    def test_reflection_modulus(self):
        for nu in (0.3, 1.0, 2.5, 10.0):
            g = sf.gamma_imag_axis(nu)
            assert abs(g) ** 2 == pytest.approx(
                math.pi * nu / math.sinh(math.pi * nu), rel=1e-12)

    def test_known_modulus_at_one(self):
        assert abs(sf.gamma_imag_axis(1.0)) ** 2 == pytest.approx(
            math.pi / math.sinh(math.pi), rel=1e-12)
        assert abs(sf.gamma_imag_axis(1.0)) ** 2 == pytest.approx(0.27203,
                                                                  abs=5e-6)

    def test_arg_odd_in_nu(self):
        a = np.angle(sf.gamma_imag_axis(0.7))
        b = np.angle(sf.gamma_imag_axis(-0.7))
        assert a == pytest.approx(-b, abs=1e-14)


class TestBesselKImag:
    def test_real_order_limit(self):
        assert sf.bessel_K_imag(0.0, 1.0) == pytest.approx(
            float(ss.kv(0, 1.0)), rel=1e-12)
        assert sf.bessel_K_imag(0.0, 1.0) == pytest.approx(0.42102443824,
                                                           abs=1e-10)

    def test_large_argument_asymptotic(self):
        # K_iv(x) -> sqrt(pi/(2x)) e^{-x}, order washing out as x grows.
        # The relative deviation at finite x is ~ (4 nu^2 + 1)/(8x), so
        # at x = 10 it is 1.2% for nu=0 and 36% for nu=3; assert the
        # actual first-correction behaviour and the convergence in x.
        for nu in np.linspace(0.0, 3.0, 7):
            dev = sf.bessel_K_imag(nu, 10.0) / sf.bessel_K_large_arg(10.0) - 1
            est = -(4 * nu * nu + 1) / 80.0
            assert dev == pytest.approx(est, abs=0.12)
        devs = [abs(sf.bessel_K_imag(3.0, x) / sf.bessel_K_large_arg(x) - 1)
                for x in (10.0, 30.0, 100.0)]
        assert devs[0] > devs[1] > devs[2]
        assert devs[2] < 0.05
        # K_i(10) against the leading form: order-independent within ~6%
        assert sf.bessel_K_imag(1.0, 10.0) == pytest.approx(
            sf.bessel_K_large_arg(10.0), rel=0.06)

    def test_even_in_nu(self):
        for nu, x in [(0.5, 0.3), (2.0, 1.7), (11.0, 2.0)]:
            assert sf.bessel_K_imag(nu, x) == pytest.approx(
                sf.bessel_K_imag(-nu, x), rel=1e-12)

    @pytest.mark.parametrize("nu", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
    def test_against_both_integral_representations(self, nu, x):
        k = sf.bessel_K_imag(nu, x)
        assert k == pytest.approx(kiv_cos_representation(nu, x), abs=1e-8)
        assert k == pytest.approx(kiv_sin_representation(nu, x), abs=1e-8)

    @pytest.mark.parametrize("nu,x", [
        (0.1, 0.01), (2.0, 0.5), (5.0, 3.0), (7.9, 12.0), (12.0, 1.0),
        (30.0, 2.0), (30.0, 14.0), (80.0, 0.05), (200.0, 1.0),
        (14.0, 40.0), (25.0, 80.0),
    ])
    def test_against_mpmath(self, nu, x):
        mine = sf.bessel_K_imag(nu, x, scaled=True)
        ref = kiv_mpmath(nu, x, scaled=True)
        assert abs(ref.imag) < 1e-25 * max(abs(ref.real), 1.0)
        assert mine == pytest.approx(ref.real, rel=1e-9, abs=1e-300)

    def test_scaled_large_order(self):
        # no overflow and O(1) magnitudes far beyond where e^{pi nu/2} blows up
        val = sf.bessel_K_imag(3141.6, 200.0, scaled=True)
        assert math.isfinite(val)
        assert abs(val) < 10.0

    def test_scaled_matches_mpmath_large_order(self):
        mine = sf.bessel_K_imag(500.0, 3.0, scaled=True)
        ref = kiv_mpmath(500.0, 3.0, scaled=True)
        assert mine == pytest.approx(ref.real, rel=1e-9)

    def test_grid_consistency(self):
        xs = np.linspace(0.05, 6.0, 57)
        grid = sf.bessel_K_imag_grid(3.3, xs)
        single = [sf.bessel_K_imag(3.3, float(x)) for x in xs]
        assert np.allclose(grid, single, rtol=1e-12)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            sf.bessel_K_imag(1.0, -1.0)
        with pytest.raises(DomainError):
            sf.bessel_K_imag(1.0, 0.0)
        with pytest.raises(OrderOutOfRange):
            sf.bessel_K_imag(2e4, 1.0)

    def test_small_x_warns(self):
        with pytest.warns(LossOfPrecisionWarning):
            sf.bessel_K_imag(1.0, 1e-8)

    def test_distributional_limit(self):
        # int f(nu) K_iv(2 eps) dnu -> pi f(0) with f a unit Gaussian
        eps = 1e-4
        nus = np.linspace(1e-6, 40.0, 20001)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LossOfPrecisionWarning)
            kv = np.array([sf.bessel_K_imag(nu, 2 * eps) for nu in nus])
        f = np.exp(-0.5 * nus ** 2) / math.sqrt(2 * math.pi)
        integral = 2.0 * np.trapezoid(f * kv, nus)  # even integrand, half axis
        target = math.pi * f[0]  # pi * f(0)
        assert integral == pytest.approx(target, rel=0.02)


class TestBesselKShifted:
    def test_half_integer_closed_form(self):
        # K_{1/2}(x) = sqrt(pi/(2x)) e^{-x}
        val = sf.bessel_K_imag_shifted(0.0, 0.5, 1.0)
        assert val.real == pytest.approx(math.sqrt(math.pi / 2) *
                                         math.exp(-1.0), rel=1e-10)
        assert abs(val.imag) < 1e-12

    def test_conjugation_symmetry(self):
        a = sf.bessel_K_imag_shifted(1.3, 0.5, 0.7)
        b = sf.bessel_K_imag_shifted(-1.3, 0.5, 0.7)
        assert b == pytest.approx(np.conj(a), rel=1e-10)

    @pytest.mark.parametrize("nu,shift,x", [
        (2.0, -0.5, 0.4), (2.0, 0.5, 0.4), (0.7, 0.5, 1.5),
        (15.0, 0.5, 2.0), (15.0, -0.5, 2.0), (60.0, 0.5, 1.0),
    ])
    def test_against_mpmath(self, nu, shift, x):
        mine = sf.bessel_K_imag_shifted(nu, shift, x, scaled=True)
        with mpmath.workdps(40):
            ref = mpmath.besselk(1j * nu + shift, x)
            ref *= mpmath.exp(mpmath.pi * nu / 2)
            ref = complex(ref)
        assert mine.real == pytest.approx(ref.real, rel=1e-9, abs=1e-280)
        assert mine.imag == pytest.approx(ref.imag, rel=1e-9, abs=1e-280)

    def test_shift_zero_delegates(self):
        a = sf.bessel_K_imag_shifted(2.0, 0, 0.5)
        assert a.imag == 0.0
        assert a.real == pytest.approx(sf.bessel_K_imag(2.0, 0.5), rel=1e-14)


class TestBesselIImag:
    def test_real_order_limit(self):
        assert sf.bessel_I_imag(0.0, 1.0).real == pytest.approx(
            1.26606587775, abs=1e-10)
        assert sf.bessel_I_imag(0.0, 1.0).real == pytest.approx(
            float(ss.iv(0, 1.0)), rel=1e-12)

    def test_continuity_in_order_at_zero(self):
        vals = [abs(sf.bessel_I_imag(nu, 1.0)) for nu in (1e-4, 1e-6, 1e-8)]
        target = float(ss.iv(0, 1.0))
        assert vals[-1] == pytest.approx(target, rel=1e-10)
        assert abs(vals[0] - target) < 1e-6

    @pytest.mark.parametrize("nu,x", [(1.0, 0.5), (3.0, 2.0), (20.0, 5.0),
                                      (55.0, 28.0)])
    def test_against_mpmath(self, nu, x):
        mine = sf.bessel_I_imag(nu, x)
        with mpmath.workdps(40):
            ref = complex(mpmath.besseli(1j * nu, x))
        assert mine.real == pytest.approx(ref.real, rel=1e-9, abs=1e-30)
        assert mine.imag == pytest.approx(ref.imag, rel=1e-9, abs=1e-30)

    def test_conjugate_order_product_real_im(self):
        # Im{I_{-iv}(a) I_{iv}(x)} is real-valued input to mode shapes
        nu, a, x = 1.0, 0.2, 0.5
        prod = sf.bessel_I_imag(-nu, a) * sf.bessel_I_imag(nu, x)
        with mpmath.workdps(40):
            ref = complex(mpmath.besseli(-1j * nu, a) *
                          mpmath.besseli(1j * nu, x))
        assert prod.imag == pytest.approx(ref.imag, rel=1e-10)
        # conjugate-order pair at equal arguments has zero imaginary part
        same = sf.bessel_I_imag(-nu, x) * sf.bessel_I_imag(nu, x)
        assert abs(same.imag) < 1e-14 * abs(same)

    def test_overflow_guard(self):
        with pytest.raises(OverflowError):
            sf.bessel_I_imag(1.0, 400.0)


class TestWronskianStyle:
    """K_iv and I_iv tie together through the reflection formula."""

    @pytest.mark.parametrize("nu,x", [(0.8, 0.6), (4.0, 1.2)])
    def test_reflection(self, nu, x):
        k = sf.bessel_K_imag(nu, x)
        i_val = sf.bessel_I_imag(nu, x)
        rhs = -math.pi * i_val.imag / math.sinh(math.pi * nu)
        assert k == pytest.approx(rhs, rel=1e-10)
