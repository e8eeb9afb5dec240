"""Tests for signal configurations and observation sampling."""

import math

import numpy as np
import pytest

from sparsetest import (
    NoiseDist,
    SignalConfig,
    in_class,
    make_theta,
    oracle_threshold,
    sample_data,
    single_strength,
    two_strength,
)


class TestOracleThreshold:
    def test_exact_gaussian_case(self):
        # n/s_n = e^2 gives sqrt(2 * 2) = 2 exactly (the formula also accepts
        # non-integer sizes, so the identity can be checked at the exact ratio)
        assert oracle_threshold(100 * math.e**2, 100, 2.0) == pytest.approx(2.0, rel=1e-15)

    def test_gaussian_large(self):
        assert oracle_threshold(10**10, 10**2, 2.0) == pytest.approx(
            math.sqrt(2 * math.log(1e8)), rel=1e-14
        )

    def test_zeta4_ratio_e(self):
        # n/s_n = e gives (4 * 1)^(1/4) = sqrt(2)
        assert oracle_threshold(100 * math.e, 100, 4.0) == pytest.approx(
            math.sqrt(2.0), rel=1e-14
        )

    @pytest.mark.parametrize("n,s_n", [(10, 0), (10, 10), (10, 11)])
    def test_domain_errors(self, n, s_n):
        with pytest.raises(ValueError):
            oracle_threshold(n, s_n, 2.0)

    def test_zeta_must_exceed_one(self):
        with pytest.raises(ValueError):
            oracle_threshold(10, 2, 1.0)


class TestSignalConfig:
    def test_offsets_length_checked(self):
        with pytest.raises(ValueError):
            SignalConfig(n=10, s_n=2, offsets=(0.0,))

    def test_sparsity_bounds(self):
        with pytest.raises(ValueError):
            SignalConfig(n=10, s_n=11, offsets=(0.0,) * 11)
        with pytest.raises(ValueError):
            SignalConfig(n=10, s_n=10, offsets=(0.0,) * 10)

    def test_offset_floor(self):
        # offsets must exceed -a*_n so magnitudes stay positive
        a = oracle_threshold(100, 5, 2.0)
        with pytest.raises(ValueError):
            SignalConfig(n=100, s_n=5, offsets=(-a - 0.1,) * 5)
        SignalConfig(n=100, s_n=5, offsets=(-a + 0.1,) * 5)

    def test_rule_names_validated(self):
        with pytest.raises(ValueError):
            SignalConfig(n=10, s_n=1, offsets=(0.0,), signs="flip")
        with pytest.raises(ValueError):
            SignalConfig(n=10, s_n=1, offsets=(0.0,), placement="middle")


class TestMakeTheta:
    def test_empty_support(self):
        theta = make_theta(SignalConfig(n=8, s_n=0), 0)
        assert np.all(theta.values == 0)
        assert theta.support.size == 0

    def test_single_strength_first_block(self):
        cfg = single_strength(n=10, s_n=3, b=1.0, zeta=2.0)
        theta = make_theta(cfg, 0)
        a_b = oracle_threshold(10, 3, 2.0) + 1.0
        np.testing.assert_allclose(theta.values[:3], a_b)
        assert np.all(theta.values[3:] == 0)

    def test_two_strength_layout(self):
        # beta=1/2, (x, y) = (1, 3): floor(s/2) entries at a*+3, the rest at a*+1
        cfg = two_strength(n=100, s_n=5, x=1.0, y=3.0, beta=0.5)
        theta = make_theta(cfg, 0)
        a = oracle_threshold(100, 5, 2.0)
        np.testing.assert_allclose(theta.values[:2], a + 3.0)
        np.testing.assert_allclose(theta.values[2:5], a + 1.0)

    def test_support_size_and_distinct_positions(self):
        cfg = SignalConfig(n=50, s_n=7, offsets=(0.5,) * 7, placement="uniform-random")
        theta = make_theta(cfg, 3)
        assert theta.support.size == 7
        assert len(set(theta.support.tolist())) == 7

    def test_random_rules_deterministic(self):
        cfg = SignalConfig(
            n=50, s_n=7, offsets=(0.5,) * 7, placement="uniform-random", signs="random"
        )
        t1 = make_theta(cfg, 11)
        t2 = make_theta(cfg, 11)
        np.testing.assert_array_equal(t1.values, t2.values)
        assert not np.array_equal(t1.values, make_theta(cfg, 12).values)

    def test_membership_predicate(self):
        cfg = SignalConfig(n=40, s_n=4, offsets=(0.0, 1.0, -0.5, 2.0), signs="random",
                           placement="uniform-random")
        theta = make_theta(cfg, 5)
        assert in_class(theta, cfg)
        smaller = SignalConfig(n=40, s_n=4, offsets=(0.0, 1.0, -0.5, 2.5))
        assert not in_class(theta, smaller)


class TestSampleData:
    def test_zero_theta_matches_pure_noise(self):
        noise = NoiseDist(2.0)
        theta = make_theta(SignalConfig(n=100, s_n=0), 0)
        np.testing.assert_array_equal(sample_data(theta, noise, 42), noise.sample(100, 42))

    def test_deterministic(self):
        noise = NoiseDist(3.0)
        theta = make_theta(single_strength(20, 2, 0.0, zeta=3.0), 0)
        np.testing.assert_array_equal(
            sample_data(theta, noise, 9), sample_data(theta, noise, 9)
        )

    def test_huge_mean_dominates(self):
        noise = NoiseDist(2.0)
        values = np.zeros(10)
        values[3] = 1e6
        for seed in range(20):
            x = sample_data(values, noise, seed)
            assert 1e6 - 100 <= x[3] <= 1e6 + 100
