import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polarmi.special_math import (EULER_GAMMA, bessel_i0, bessel_i0_scaled, bessel_i1,
                                  bessel_i1_scaled, erf, erfcx, f_lambda, laguerre_half,
                                  log_bessel_i0, log_sum_exp)

mpmath.mp.dps = 40


def mp_i0e(x):
    return float(mpmath.besseli(0, x) * mpmath.exp(-x))


def mp_i1e(x):
    return float(mpmath.besseli(1, x) * mpmath.exp(-x))


def mp_f(lam):
    lam = mpmath.mpf(lam)
    lag = mpmath.exp(-lam / 2) * ((1 + lam) * mpmath.besseli(0, lam / 2) + lam * mpmath.besseli(1, lam / 2))
    return float(1 + lam - mpmath.pi / 4 * lag ** 2)


GRID = np.concatenate([[0.0, 1e-8, 1e-3, 0.5, 1.0], np.linspace(2, 30, 57),
                       [14.999, 15.0, 15.001, 50.0, 120.0, 699.0, 1e3, 1e5]])


class TestBessel:
    def test_known_values(self):
        assert bessel_i0(0.0) == 1.0
        assert bessel_i1(0.0) == 0.0
        assert bessel_i0(1.0) == pytest.approx(1.2660658778, abs=1e-10)
        assert bessel_i0_scaled(1.0) == pytest.approx(0.4657596, abs=1e-7)
        assert bessel_i1(0.5) == pytest.approx(0.2578943054, abs=1e-10)
        assert bessel_i0_scaled(20.0) == pytest.approx(0.0897803, abs=1e-7)

    @pytest.mark.parametrize("x", GRID)
    def test_scaled_against_mpmath(self, x):
        assert bessel_i0_scaled(x) == pytest.approx(mp_i0e(x), rel=1e-12, abs=0)
        assert bessel_i1_scaled(x) == pytest.approx(mp_i1e(x), rel=1e-12, abs=1e-300)

    @pytest.mark.parametrize("x", [0.1, 1.0, 10.0, 100.0, 500.0, 700.0])
    def test_unscaled_against_mpmath(self, x):
        assert bessel_i0(x) == pytest.approx(float(mpmath.besseli(0, x)), rel=1e-12)
        assert bessel_i1(x) == pytest.approx(float(mpmath.besseli(1, x)), rel=1e-12)

    def test_crossover_continuity(self):
        lo, hi = bessel_i0_scaled(15.0 - 1e-12), bessel_i0_scaled(15.0)
        assert abs(lo - hi) / hi < 1e-10

    def test_large_argument_limit(self):
        x = 1e4
        assert bessel_i0_scaled(x) == pytest.approx(1 / math.sqrt(2 * math.pi * x), rel=1e-4)

    def test_scaled_decreasing(self):
        x = np.linspace(0, 200, 4001)
        assert np.all(np.diff(bessel_i0_scaled(x)) < 0)

    @given(st.floats(min_value=1e-6, max_value=50.0))
    def test_scaled_unscaled_consistency(self, x):
        assert bessel_i0(x) == pytest.approx(math.exp(x) * bessel_i0_scaled(x), rel=1e-10)

    @given(st.floats(min_value=0.01, max_value=600.0))
    def test_series_truncation_bounds(self, x):
        assert bessel_i0(x) > 1 + x * x / 4 * (1 - 1e-15)
        assert bessel_i1(x) > x / 2 * (1 - 1e-15)

    def test_log_i0_huge(self):
        x = 1e6
        assert log_bessel_i0(x) == pytest.approx(float(mpmath.log(mpmath.besseli(0, x))), rel=1e-14)

    @pytest.mark.parametrize("bad", [-1.0, np.nan, np.inf])
    def test_domain(self, bad):
        with pytest.raises(ValueError):
            bessel_i0(bad)
        with pytest.raises(ValueError):
            bessel_i1_scaled(bad)


class TestErf:
    def test_values(self):
        assert erf(0.0) == 0.0
        assert erf(1.0) == pytest.approx(0.8427007929, abs=1e-10)

    @given(st.floats(min_value=-6, max_value=6))
    def test_odd_and_bounded(self, x):
        assert erf(-x) == -erf(x)
        assert abs(erf(x)) <= 1.0
        assert erf(x) == pytest.approx(float(mpmath.erf(x)), abs=1e-12)

    def test_erfcx(self):
        for x in (-3.0, 0.0, 2.0, 30.0):
            assert erfcx(x) == pytest.approx(float(mpmath.exp(x * x) * mpmath.erfc(x)), rel=1e-12)

    def test_nonfinite(self):
        with pytest.raises(ValueError):
            erf(np.nan)


class TestLaguerreAndF:
    def test_endpoints(self):
        assert laguerre_half(0.0) == 1.0
        assert f_lambda(0.0) == pytest.approx(1 - math.pi / 4, abs=1e-15)
        assert f_lambda(1.0) == pytest.approx(mp_f(1.0), abs=1e-14)
        assert abs(f_lambda(100.0) - 0.5) < 0.01

    @pytest.mark.parametrize("lam", [1e-3, 0.3, 1.0, 7.0, 40.0, 99.0, 100.0, 101.0, 500.0, 1e4, 1e6])
    def test_f_against_mpmath(self, lam):
        assert f_lambda(lam) == pytest.approx(mp_f(lam), rel=1e-11)

    def test_f_branch_continuity(self):
        a, b = f_lambda(100.0), f_lambda(np.nextafter(100.0, 200.0))
        assert abs(a - b) < 1e-13

    def test_laguerre_bounds(self):
        lam = np.logspace(-3, 4, 400)
        lag = laguerre_half(lam)
        assert np.all(lag > np.exp(-lam / 2) * (1 + lam + 5 / 16 * lam ** 2) * (1 - 1e-15))
        big = lam[lam > 1]
        assert np.all(laguerre_half(big) > (2 * np.sqrt(big) + 1 / (2 * np.sqrt(big))) / math.sqrt(math.pi))

    def test_f_bounds(self):
        lam = np.concatenate([[0.0], np.logspace(-6, 8, 600)])
        f = f_lambda(lam)
        assert np.all((f > 0) & (f < 0.5))
        small = np.linspace(1e-9, 1.0, 500)
        assert np.all(f_lambda(small) <= 2 - 1369 * math.pi / (1024 * math.e))

    def test_domain(self):
        with pytest.raises(ValueError):
            f_lambda(-1e-3)
        with pytest.raises(ValueError):
            laguerre_half(-2.0)

    def test_euler_gamma(self):
        assert EULER_GAMMA == pytest.approx(float(mpmath.euler), abs=1e-15)


class TestLogSumExp:
    def test_examples(self):
        assert log_sum_exp([3.7]) == 3.7
        assert log_sum_exp([0.0, 0.0]) == pytest.approx(math.log(2), abs=1e-15)
        assert log_sum_exp([-1000.0, -1000.5]) == pytest.approx(-1000 + math.log1p(math.exp(-0.5)), abs=1e-12)

    def test_empty(self):
        with pytest.raises(ValueError):
            log_sum_exp([])

    @settings(max_examples=50)
    @given(st.lists(st.floats(min_value=-500, max_value=500), min_size=1, max_size=30),
           st.floats(min_value=-1e3, max_value=1e3))
    def test_shift_invariance(self, v, c):
        v = np.array(v)
        assert log_sum_exp(v + c) == pytest.approx(log_sum_exp(v) + c, abs=1e-12 * max(1, abs(c)) * 10)

    def test_axis(self):
        v = np.log(np.arange(1, 7, dtype=float)).reshape(2, 3)
        np.testing.assert_allclose(log_sum_exp(v, axis=1), np.log([6.0, 15.0]), rtol=1e-14)
