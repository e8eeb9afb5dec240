"""Tests for the Subbotin noise numerics.

Expected values marked "quadrature oracle" were computed with
scipy.integrate.quad on the defining integrals, independently of the
incomplete-gamma evaluation path; extreme-tail logs come from mpmath at
40 digits.
"""

import math

import numpy as np
import pytest
from scipy import integrate, special

from sparsetest import NoiseDist, normalizing_constant

ZETAS = [1.5, 2.0, 3.0, 5.0]


class TestNormalizingConstant:
    def test_gaussian_case(self):
        assert normalizing_constant(2.0) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-14)

    def test_zeta4_quadrature_value(self):
        # quadrature oracle: integral of exp(-|x|^4/4) over R
        assert normalizing_constant(4.0) == pytest.approx(2.563693352040848, rel=1e-13)

    def test_positive_and_finite_near_one(self):
        for z in (1.0001, 1.5):
            v = normalizing_constant(z)
            assert 0 < v < math.inf

    @pytest.mark.parametrize("zeta", [1.0, 0.5, -2.0])
    def test_rejects_zeta_at_most_one(self, zeta):
        with pytest.raises(ValueError):
            NoiseDist(zeta)

    @pytest.mark.parametrize("zeta", ZETAS)
    def test_matches_quadrature_to_1e12(self, zeta):
        # by symmetry, twice the half-line integral (avoids roundoff warnings
        # from the doubly-infinite quad at this tolerance)
        half, _ = integrate.quad(
            lambda x: math.exp(-(x**zeta) / zeta), 0, np.inf,
            epsabs=1e-13, epsrel=1e-13,
        )
        assert normalizing_constant(zeta) == pytest.approx(2 * half, rel=1e-12)


class TestDensity:
    def test_gaussian_mode(self):
        assert NoiseDist(2.0).density(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-14)

    @pytest.mark.parametrize("zeta", ZETAS)
    def test_mode_is_inverse_norm(self, zeta):
        d = NoiseDist(zeta)
        assert d.density(0.0) == pytest.approx(math.exp(-d.log_norm), rel=1e-14)

    def test_zeta4_at_one(self):
        # exp(-1/4)/L_4, cross-checked against the quadrature value of L_4
        assert NoiseDist(4.0).density(1.0) == pytest.approx(0.30378078659502494, rel=1e-13)

    @pytest.mark.parametrize("zeta", ZETAS)
    def test_symmetry(self, zeta):
        d = NoiseDist(zeta)
        x = np.linspace(0.0, 7.5, 40)
        np.testing.assert_allclose(d.density(x), d.density(-x), rtol=0, atol=0)

    @pytest.mark.parametrize("zeta", ZETAS)
    def test_integrates_to_one(self, zeta):
        d = NoiseDist(zeta)
        total, _ = integrate.quad(d.density, -np.inf, np.inf, epsabs=1e-12)
        assert total == pytest.approx(1.0, abs=1e-9)


class TestUpperTail:
    def test_at_zero_is_half(self):
        for zeta in ZETAS:
            assert NoiseDist(zeta).upper_tail(0.0) == 0.5

    def test_gaussian_196(self):
        # quadrature oracle on the integral of f over [1.96, inf)
        assert NoiseDist(2.0).upper_tail(1.96) == pytest.approx(
            0.024997895148220435, abs=1e-13
        )

    @pytest.mark.parametrize("zeta", ZETAS)
    def test_symmetry_identity_to_1e14(self, zeta):
        d = NoiseDist(zeta)
        x = np.linspace(-6, 6, 121)
        np.testing.assert_allclose(d.upper_tail(x) + d.upper_tail(-x), 1.0, rtol=0, atol=1e-14)

    @pytest.mark.parametrize("zeta", ZETAS)
    def test_strictly_decreasing(self, zeta):
        d = NoiseDist(zeta)
        vals = d.upper_tail(np.linspace(-4, 8, 200))
        assert np.all(np.diff(vals) <= 0)
        # strictness where double precision can resolve it: the central window
        # in linear scale, the whole positive axis in log scale
        central = d.upper_tail(np.linspace(-2.5, 2.5, 100))
        assert np.all(np.diff(central) < 0)
        logs = d.log_upper_tail(np.linspace(0.0, 8.0, 100))
        assert np.all(np.diff(logs) < 0)

    @pytest.mark.parametrize("zeta", ZETAS)
    def test_matches_quadrature(self, zeta):
        d = NoiseDist(zeta)
        for x in np.linspace(0.1, 6.0, 8):
            ref, _ = integrate.quad(d.density, x, np.inf, epsabs=1e-15, epsrel=1e-13)
            assert d.upper_tail(x) == pytest.approx(ref, abs=1e-12)

    def test_log_tail_matches_linear_scale(self):
        d = NoiseDist(2.0)
        for x in [-2.0, 0.0, 1.0, 5.0, 20.0]:
            assert d.log_upper_tail(x) == pytest.approx(math.log(d.upper_tail(x)), rel=1e-13)

    def test_log_tail_beyond_underflow(self):
        # mpmath oracles at 40 digits
        assert NoiseDist(2.0).log_upper_tail(60.0) == pytest.approx(
            -1805.0135606805671, rel=1e-13
        )
        assert NoiseDist(3.0).log_upper_tail(30.0) == pytest.approx(
            -9007.7486284614699, rel=1e-13
        )


class TestQuantile:
    def test_median(self):
        for zeta in ZETAS:
            assert NoiseDist(zeta).upper_tail_inv(0.5) == 0.0

    def test_gaussian_0025(self):
        # root of the quadrature oracle
        assert NoiseDist(2.0).upper_tail_inv(0.025) == pytest.approx(
            1.9599639845400545, abs=1e-10
        )

    @pytest.mark.parametrize("zeta", ZETAS)
    @pytest.mark.parametrize("t", [1e-8, 1e-4, 0.1, 0.9])
    def test_round_trip_1e12(self, zeta, t):
        d = NoiseDist(zeta)
        assert abs(d.upper_tail(d.upper_tail_inv(t)) - t) <= 1e-12

    @pytest.mark.parametrize("zeta", ZETAS)
    def test_monotone_decreasing_in_t(self, zeta):
        d = NoiseDist(zeta)
        ts = [1e-10, 1e-6, 1e-3, 0.1, 0.4, 0.6, 0.9, 0.999]
        xs = [d.upper_tail_inv(t) for t in ts]
        assert np.all(np.diff(xs) < 0)

    @pytest.mark.parametrize("zeta", ZETAS)
    def test_against_gammainccinv(self, zeta):
        # independent inverse through scipy's gammainccinv
        d = NoiseDist(zeta)
        for t in [1e-12, 1e-6, 1e-3, 0.05, 0.3]:
            ref = (zeta * special.gammainccinv(1 / zeta, 2 * t)) ** (1 / zeta)
            assert d.upper_tail_inv(t) == pytest.approx(ref, rel=1e-10)

    @pytest.mark.parametrize("t", [0.0, 1.0, -0.3, 2.0])
    def test_domain_errors(self, t):
        with pytest.raises(ValueError):
            NoiseDist(2.0).upper_tail_inv(t)


class TestSampling:
    def test_empty(self):
        assert NoiseDist(2.0).sample(0, 1).shape == (0,)

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError):
            NoiseDist(2.0).sample(-1, 1)

    def test_deterministic_given_seed(self):
        d = NoiseDist(2.5)
        np.testing.assert_array_equal(d.sample(100, 7), d.sample(100, 7))
        assert not np.array_equal(d.sample(100, 7), d.sample(100, 8))

    def test_gaussian_moments_million_draws(self):
        x = NoiseDist(2.0).sample(10**6, 20240301)
        assert abs(x.mean()) < 4e-3
        assert abs(x.var() - 1.0) < 0.01

    def test_zeta3_tail_frequency(self):
        d = NoiseDist(3.0)
        cut = d.upper_tail_inv(0.01)
        x = d.sample(10**6, 99)
        freq = np.mean(x > cut)
        se = math.sqrt(0.01 * 0.99 / 10**6)
        assert abs(freq - 0.01) <= 3 * se

    def test_spawned_seeds_independent_streams(self):
        d = NoiseDist(2.0)
        root = np.random.SeedSequence(5)
        a, b = root.spawn(2)
        assert not np.array_equal(d.sample(50, a), d.sample(50, b))


class TestTailEnvelopes:
    """Analytic envelopes relating Fbar, the density, and the quantile."""

    GRID = np.arange(0.1, 6.05, 0.1)

    @pytest.mark.parametrize("zeta", ZETAS)
    def test_upper_envelope_strict(self, zeta):
        # Fbar(x) < f(x) / x^(zeta-1) for x > 0, compared in log scale so the
        # inequality stays representable where the tail underflows (zeta=5, x>5.6)
        d = NoiseDist(zeta)
        x = self.GRID
        assert np.all(d.log_upper_tail(x) < d.log_density(x) - (zeta - 1) * np.log(x))

    @pytest.mark.parametrize("zeta", ZETAS)
    def test_lower_envelope(self, zeta):
        # Fbar(x) >= f(x)/x^(zeta-1) / (1 + (zeta-1) x^-zeta), in log scale
        d = NoiseDist(zeta)
        x = self.GRID
        log_lower = (
            d.log_density(x) - (zeta - 1) * np.log(x) - np.log1p((zeta - 1) * x ** (-zeta))
        )
        assert np.all(d.log_upper_tail(x) >= log_lower)

    @pytest.mark.parametrize("zeta", ZETAS)
    def test_lower_envelope_past_one(self, zeta):
        # Fbar(x) >= f(x) / (zeta * x^(zeta-1)) for x >= 1, in log scale
        d = NoiseDist(zeta)
        x = self.GRID[self.GRID >= 1.0]
        log_lower = d.log_density(x) - (zeta - 1) * np.log(x) - math.log(zeta)
        assert np.all(d.log_upper_tail(x) >= log_lower)

    @pytest.mark.parametrize("zeta", ZETAS)
    def test_quantile_envelopes(self, zeta):
        # For t in (0, 1/2) with q(t) >= 1, the quantile lies between
        #   lower: (0 or zeta log(1/t) - zeta log(zeta L) - (zeta-1) log(zeta log(1/t) - zeta log L))^(1/zeta)
        #   upper: (zeta log(1/t) - zeta log L)^(1/zeta)
        d = NoiseDist(zeta)
        log_l = d.log_norm
        for t in [10.0**-k for k in range(2, 11)]:
            x = d.upper_tail_inv(t)
            if x < 1.0:
                continue
            inner = zeta * math.log(1 / t) - zeta * log_l
            upper = inner ** (1 / zeta)
            lower_inner = max(
                0.0,
                zeta * math.log(1 / t)
                - zeta * (math.log(zeta) + log_l)
                - (zeta - 1) * math.log(inner),
            )
            lower = lower_inner ** (1 / zeta)
            assert lower <= x <= upper
