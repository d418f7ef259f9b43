import math

import numpy as np
import pytest

from lwmcmc import indirect_obs_target, std_normal_target
from lwmcmc.verify import (
    brute_matrix_power,
    conservative_ess,
    dkw_epsilon,
    finite_diff_gradient,
    gradient_rel_error,
    invariance_chisq,
    invariance_ks,
    marginal_quantiles,
)


class TestFiniteDiff:
    def test_quadratic(self, rng):
        f = lambda x: -0.5 * float(x @ x)
        for x in rng.normal(size=(10, 3)):
            assert np.allclose(finite_diff_gradient(f, x, 1e-5), -x, atol=1e-9)

    def test_constant(self):
        assert np.array_equal(finite_diff_gradient(lambda x: 4.2, np.ones(3)), np.zeros(3))

    def test_eps_positive(self):
        with pytest.raises(ValueError):
            finite_diff_gradient(lambda x: 0.0, np.ones(2), 0.0)

    def test_indirect_gradient(self, rng):
        t = indirect_obs_target()
        assert max(gradient_rel_error(t, x) for x in rng.normal(0, 1.5, size=(20, 2))) <= 1e-5

    def test_detects_wrong_gradient(self):
        t = std_normal_target(2)
        bad = type(t)(t.name, 2, t.log_density, lambda x: -2 * np.asarray(x))
        assert gradient_rel_error(bad, np.array([1.0, 1.0])) > 0.1


class TestMatrixPower:
    def test_identity_and_one(self, rng):
        P = np.array([[0.3, 0.7], [0.6, 0.4]])
        assert np.array_equal(brute_matrix_power(P, 1), P)
        assert np.array_equal(brute_matrix_power(np.eye(2), 17), np.eye(2))

    def test_against_numpy(self, rng):
        for _ in range(20):
            a, b = rng.random(2)
            P = np.array([[1 - a, a], [b, 1 - b]])
            nu = int(rng.integers(1, 40))
            assert np.allclose(brute_matrix_power(P, nu), np.linalg.matrix_power(P, nu), atol=1e-14)

    def test_bad_nu(self):
        with pytest.raises(ValueError):
            brute_matrix_power(np.eye(2), 0)


class TestDkw:
    def test_simplification(self):
        for N in (1, 10, 1234):
            assert dkw_epsilon(N, 2 / math.e ** 2) == pytest.approx(1 / math.sqrt(N), rel=1e-14)

    def test_value(self):
        assert dkw_epsilon(1000, 0.05) == pytest.approx(0.04295, abs=5e-6)

    def test_monotone(self):
        vals = [dkw_epsilon(N, 0.01) for N in (1, 2, 10, 100, 10_000)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_errors(self):
        with pytest.raises(ValueError):
            dkw_epsilon(0, 0.1)
        with pytest.raises(ValueError):
            dkw_epsilon(10, 1.0)

    def test_coverage(self):
        # the bound holds at least 1 - alpha of the time for uniform samples
        rng = np.random.default_rng(0)
        N, alpha = 200, 0.1
        eps = dkw_epsilon(N, alpha)
        misses = 0
        for _ in range(500):
            u = np.sort(rng.random(N))
            i = np.arange(1, N + 1)
            D = max(np.max(i / N - u), np.max(u - (i - 1) / N))
            misses += D > eps
        assert misses / 500 <= alpha


class TestChisq:
    @pytest.mark.parametrize("seed", range(10))
    def test_positive_control(self, seed):
        x = np.random.default_rng(seed).standard_normal((100_000, 2))
        assert invariance_chisq(x, std_normal_target(2), 20).passed

    @pytest.mark.parametrize("seed", range(10))
    def test_negative_control(self, seed):
        x = np.random.default_rng(seed).normal(0.5, 1.0, (100_000, 2))
        assert not invariance_chisq(x, std_normal_target(2), 20).passed

    def test_minimum_samples(self):
        t = std_normal_target(1)
        x = np.random.default_rng(0).standard_normal(50)
        res = invariance_chisq(x, t, bins=5)
        assert res.dof == 4 and res.passed == (res.statistic <= res.threshold)
        with pytest.raises(ValueError):
            invariance_chisq(x[:49], t, bins=5)
        with pytest.raises(ValueError):
            invariance_chisq(x, t, bins=4)

    def test_ess_scaling(self):
        x = np.random.default_rng(1).normal(0.05, 1.0, (100_000, 1))
        full = invariance_chisq(x, std_normal_target(1))
        scaled = invariance_chisq(x, std_normal_target(1), ess_hint=10_000)
        assert scaled.statistic == pytest.approx(full.statistic * 0.1)
        assert scaled.ess_correction == 0.1
        with pytest.raises(ValueError):
            invariance_chisq(x, std_normal_target(1), ess_hint=0)

    def test_no_quantiles_for_indirect(self):
        with pytest.raises(ValueError):
            marginal_quantiles(indirect_obs_target(), np.array([0.5]))


class TestKs:
    def test_same_distribution_passes(self):
        rng = np.random.default_rng(2)
        assert invariance_ks(rng.normal(size=(5000, 2)), rng.normal(size=(50_000, 2))).passed

    def test_shift_fails(self):
        rng = np.random.default_rng(3)
        assert not invariance_ks(rng.normal(0.3, 1, size=(5000, 2)), rng.normal(size=(50_000, 2))).passed


def test_conservative_ess_on_ar1():
    rng = np.random.default_rng(4)
    e = rng.standard_normal(50_000)
    x = np.empty_like(e)
    x[0] = e[0]
    for t in range(1, len(e)):
        x[t] = 0.8 * x[t - 1] + 0.6 * e[t]
    val = conservative_ess(x, std_normal_target(1))
    # coordinate ESS is n (1 - rho) / (1 + rho); indicators are no better
    assert val <= 50_000 * 0.2 / 1.8 * 1.15
    assert val > 0
