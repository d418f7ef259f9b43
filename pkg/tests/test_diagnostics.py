import numpy as np
import pytest

from lwmcmc import ChainOutput, EstimandFunction, SamplerConfig, coordinate, estimate_mean, reweight, run_lwmcmc
from lwmcmc.diagnostics import (
    Method,
    acceptance_rate,
    andrews_bandwidth,
    autocovariance,
    classic_ess,
    default_bandwidth,
    ess,
    iteration_means,
    spectral_zero,
)
from lwmcmc.weights import INF, ONE_HOT


def ar1(rho, n, seed):
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = e[0] / np.sqrt(1 - rho * rho)
    for t in range(1, n):
        x[t] = rho * x[t - 1] + e[t]
    return x


def _chain(points, weights):
    n, m1, _ = np.shape(points)
    return ChainOutput(points, weights, np.zeros((n, m1)), np.zeros(n, int), np.zeros(n, int))


class TestAutocovariance:
    def test_against_direct_formula(self, rng):
        x = rng.normal(size=300)
        c = x - x.mean()
        direct = [np.sum(c[: 300 - k] * c[k:]) / 300 for k in range(11)]
        assert np.allclose(autocovariance(x, 10), direct, atol=1e-13)

    def test_fft_branch(self, rng):
        x = rng.normal(size=2000)
        c = x - x.mean()
        direct = [np.sum(c[: 2000 - k] * c[k:]) / 2000 for k in range(0, 400, 37)]
        assert np.allclose(autocovariance(x, 399)[::37], direct, atol=1e-12)


class TestSpectralZero:
    def test_white_noise(self):
        x = np.random.default_rng(0).standard_normal(100_000)
        for m in Method:
            assert 0.9 <= spectral_zero(x, m) <= 1.1

    def test_ar1(self):
        x = ar1(0.5, 100_000, 1)
        for m in Method:
            assert spectral_zero(x, m) == pytest.approx(3.0, rel=0.10)

    def test_bartlett_formula(self, rng):
        x = rng.normal(size=1000)
        g = autocovariance(x, 10)
        k = np.arange(1, 11)
        expect = 1 + 2 * np.sum((1 - k / 11) * g[1:] / g[0])
        assert spectral_zero(x, "bartlett", 10) == pytest.approx(expect, rel=1e-12)
        assert default_bandwidth(1000) == 10 and default_bandwidth(10_000) == 21

    def test_constant_and_short(self):
        with pytest.raises(ValueError):
            spectral_zero(np.ones(100))
        with pytest.raises(ValueError):
            spectral_zero(np.arange(9.0))

    def test_converges_as_length_doubles(self):
        # the Cesaro-weighted truncated sum settles as data accumulate
        x = ar1(0.7, 200_000, 4)
        truth = 1.7 / 0.3
        vals = [spectral_zero(x[:n], "bartlett", andrews_bandwidth(x[:n])) for n in (50_000, 100_000, 200_000)]
        assert all(abs(v / truth - 1) <= 0.10 for v in vals)
        assert abs(vals[2] / vals[1] - 1) <= 0.10

    def test_andrews_bandwidth_grows_with_correlation(self):
        assert andrews_bandwidth(ar1(0.9, 20_000, 2)) > andrews_bandwidth(ar1(0.3, 20_000, 2)) >= 1


class TestEss:
    def test_iteration_means(self, rng):
        pts = rng.normal(size=(20, 3, 2))
        w = np.full((20, 3), 1 / 3)
        ch = _chain(pts, w)
        assert np.allclose(iteration_means(ch, coordinate(1)), pts[:, :, 1].mean(axis=1))
        assert np.mean(iteration_means(ch, coordinate(1))) == pytest.approx(estimate_mean(ch, coordinate(1)), abs=1e-15)

    def test_one_hot_reduces_to_classic(self):
        ch = run_lwmcmc(SamplerConfig(n=5000, M=1, lam=1.2, propagation="mh", nu=ONE_HOT, seed=2))
        h = coordinate(0)
        series = h(ch.current_states)
        assert np.array_equal(iteration_means(ch, h), series)
        for m in Method:
            assert ess(ch, h, m).ess == pytest.approx(classic_ess(series, m), rel=1e-13)

    def test_iid_sanity(self, rng):
        pts = rng.normal(size=(20_000, 1, 1))
        rep = ess(_chain(pts, np.ones((20_000, 1))), coordinate(0))
        assert rep.ess == pytest.approx(20_000, rel=0.10)

    def test_sigma2_moment_form(self, small_rw_chain):
        h = coordinate(0)
        rep = ess(small_rw_chain, h)
        vals = h(small_rw_chain.points)
        second = np.sum(small_rw_chain.weights * vals ** 2) / small_rw_chain.n
        assert rep.sigma2 == pytest.approx(second - estimate_mean(small_rw_chain, h) ** 2, rel=1e-10)
        bar = rep.bar_series
        assert rep.var_bar == pytest.approx(np.mean((bar - bar.mean()) ** 2), rel=1e-12)
        assert rep.ess == pytest.approx(rep.n / (rep.var_bar / rep.sigma2 * rep.iact), rel=1e-12)

    def test_affine_invariance(self, small_rw_chain):
        h = coordinate(1)
        g = EstimandFunction("affine", lambda x: 3.0 * x[..., 1] - 7.0)
        for bw in (None, "andrews"):
            assert ess(small_rw_chain, g, bandwidth=bw).ess == pytest.approx(ess(small_rw_chain, h, bandwidth=bw).ess, rel=1e-9)

    def test_report_fields(self, small_rw_chain):
        rep = ess(small_rw_chain, coordinate(0), "bartlett", 5)
        assert rep.bandwidth == 5 and rep.method is Method.BARTLETT and rep.h_name == "coord:0"
        assert rep.ess > 0 and rep.var_bar >= 0
        assert ess(small_rw_chain, coordinate(0), "initseq").bandwidth == 0

    def test_errors(self, rng):
        short = _chain(rng.normal(size=(50, 2, 1)), np.full((50, 2), 0.5))
        with pytest.raises(ValueError):
            ess(short, coordinate(0))
        flat = _chain(np.ones((200, 2, 1)), np.full((200, 2), 0.5))
        with pytest.raises(ValueError):
            ess(flat, coordinate(0))
        ok = _chain(rng.normal(size=(200, 2, 1)), np.full((200, 2), 0.5))
        with pytest.raises(ValueError):
            ess(ok, coordinate(0), bandwidth="parzen")

    def test_lw_weights_beat_one_hot_on_intro_setup(self):
        ch = run_lwmcmc(SamplerConfig(n=10_000, M=1, lam=1.2, propagation="mh", nu=ONE_HOT, seed=0))
        e = {nu: np.mean([ess(reweight(ch, nu), coordinate(k), "bartlett", "andrews").ess for k in range(2)])
             for nu in (ONE_HOT, 1, INF)}
        assert e[1] > e[ONE_HOT] and e[INF] > e[ONE_HOT]


class TestAcceptance:
    def test_extremes(self):
        pts = np.zeros((10, 2, 1))
        pts[:, 1, 0] = 1.0
        allacc = ChainOutput(pts, np.full((10, 2), 0.5), np.zeros((10, 2)), np.zeros(10, int), np.ones(10, int))
        norej = ChainOutput(pts, np.full((10, 2), 0.5), np.zeros((10, 2)), np.zeros(10, int), np.zeros(10, int))
        assert acceptance_rate(allacc) == 1.0
        assert acceptance_rate(norej) == 0.0

    def test_tuned_rate(self):
        ch = run_lwmcmc(SamplerConfig(n=10_000, M=1, lam=1.2, propagation="mh", nu=ONE_HOT, seed=1))
        assert 0.4 <= acceptance_rate(ch) <= 0.6

    def test_empty(self):
        empty = _chain(np.zeros((0, 2, 1)), np.zeros((0, 2)))
        with pytest.raises(ValueError):
            acceptance_rate(empty)
