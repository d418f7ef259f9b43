import numpy as np
import pytest

from lwmcmc import (
    ChainOutput,
    EstimandFunction,
    Role,
    SamplerConfig,
    coordinate,
    estimate_mean,
    make_rng_stream,
    read_chain,
    run_lwmcmc,
    write_chain,
)
from lwmcmc.core import IDENTITY_1D, read_meta
from lwmcmc.weights import ONE_HOT


def _chain(points, weights, next_slots=None, current=None):
    points = np.asarray(points, dtype=float)
    n, m1, _ = points.shape
    scores = np.zeros((n, m1))
    cur = np.zeros(n, dtype=int) if current is None else current
    nxt = np.zeros(n, dtype=int) if next_slots is None else next_slots
    return ChainOutput(points, weights, scores, cur, nxt)


class TestRngStreams:
    def test_same_key_same_draws(self):
        a = make_rng_stream(7, 0, Role.PROPOSE).standard_normal(5)
        b = make_rng_stream(7, 0, Role.PROPOSE).standard_normal(5)
        assert np.array_equal(a, b)

    def test_iteration_changes_stream(self):
        a = make_rng_stream(7, 0, Role.PROPOSE).standard_normal(5)
        b = make_rng_stream(7, 1, Role.PROPOSE).standard_normal(5)
        assert not np.array_equal(a, b)

    def test_roles_and_seeds_distinct(self):
        draws = {
            (s, r): make_rng_stream(s, 3, r).random()
            for s in (0, 1)
            for r in Role
        }
        assert len(set(draws.values())) == len(draws)

    def test_long_draws_do_not_overlap_next_iteration(self):
        # 10^4 draws from iteration 0 never reproduce iteration 1's first draw
        first = make_rng_stream(5, 1, Role.SELECT).random()
        many = make_rng_stream(5, 0, Role.SELECT).random(10_000)
        assert first not in set(many)

    def test_streams_look_uniform(self):
        u = np.array([make_rng_stream(9, j, Role.SELECT).random() for j in range(4000)])
        counts = np.bincount((u * 10).astype(int), minlength=10)
        # chi-square with 9 dof, 0.999 quantile is 27.9
        assert np.sum((counts - 400) ** 2 / 400) < 27.9

    def test_bad_seed(self):
        with pytest.raises(ValueError):
            make_rng_stream(-1, 0, Role.PROPOSE)


class TestEstimateMean:
    def test_two_point_example(self):
        ch = _chain([[[2.0], [4.0]]], [[0.5, 0.5]])
        assert estimate_mean(ch, IDENTITY_1D) == 3.0

    def test_one_hot_is_plain_average(self, rng):
        pts = rng.normal(size=(50, 3, 1))
        w = np.zeros((50, 3))
        w[:, 0] = 1.0
        ch = _chain(pts, w)
        assert estimate_mean(ch, IDENTITY_1D) == pytest.approx(pts[:, 0, 0].mean(), abs=1e-15)

    def test_empty_chain(self):
        ch = _chain(np.zeros((0, 2, 1)), np.zeros((0, 2)))
        with pytest.raises(ValueError):
            estimate_mean(ch, IDENTITY_1D)

    def test_one_hot_run_equals_chain_mean_exactly(self):
        cfg = SamplerConfig(n=500, M=1, lam=1.0, propagation="mh", nu=ONE_HOT, seed=4)
        ch = run_lwmcmc(cfg)
        h = coordinate(0)
        assert estimate_mean(ch, h) == float(np.mean(ch.current_states[:, 0]))


class TestEstimand:
    def test_point_by_point(self):
        h = EstimandFunction("norm", lambda x: float(np.sum(np.abs(x))), vectorized=False)
        out = h(np.array([[[1.0, -2.0], [0.0, 0.5]]]))
        assert out.shape == (1, 2)
        assert np.allclose(out, [[3.0, 0.5]])

    def test_coordinate_name(self):
        assert coordinate(1).name == "coord:1"


class TestChainOutput:
    def test_immutable(self, small_rw_chain):
        with pytest.raises(ValueError):
            small_rw_chain.points[0, 0, 0] = 1.0

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            ChainOutput(np.zeros((2, 3, 1)), np.zeros((2, 2)), np.zeros((2, 3)), np.zeros(2), np.zeros(2))

    def test_continuity(self, small_rw_chain, small_hmc_chain):
        for ch in (small_rw_chain, small_hmc_chain):
            recs = ch.records
            for j in range(len(recs) - 1):
                nxt = recs[j + 1]
                assert np.array_equal(nxt.points[nxt.current_slot].state, recs[j].next_state)

    def test_records_are_normalized_and_finite(self, small_rw_chain, small_hmc_chain):
        for ch in (small_rw_chain, small_hmc_chain):
            for rec in ch.records[:50]:
                assert abs(rec.weights.sum() - 1.0) <= 1e-12
                assert all(np.all(np.isfinite(p.state)) for p in rec.points)
                assert all(0.0 <= p.weight <= 1.0 for p in rec.points)

    def test_accepted_flag(self, small_rw_chain):
        ch = small_rw_chain
        moved = np.any(ch.next_states != ch.current_states, axis=1)
        assert np.array_equal(ch.accepted, moved)
        assert 0 < ch.accepted.mean() < 1

    def test_next_state_is_a_proposal(self, small_rw_chain):
        for rec in small_rw_chain.records[:30]:
            assert any(np.array_equal(rec.next_state, p.state) for p in rec.points)


class TestPersistence:
    def test_round_trip(self, tmp_path, small_hmc_chain):
        path = tmp_path / "c.csv"
        write_chain(small_hmc_chain, path)
        back = read_chain(path)
        assert np.array_equal(back.points, small_hmc_chain.points)
        assert np.array_equal(back.weights, small_hmc_chain.weights)
        assert np.array_equal(back.log_scores, small_hmc_chain.log_scores)
        assert np.array_equal(back.next_slots, small_hmc_chain.next_slots)
        assert np.array_equal(back.current_states, small_hmc_chain.current_states)
        assert back.seed == small_hmc_chain.seed

    def test_header_and_meta(self, tmp_path, small_rw_chain):
        path = tmp_path / "c.csv"
        write_chain(small_rw_chain, path)
        lines = path.read_text().split("\n")
        assert lines[0] == "iter,slot,weight,log_score,coord_0,coord_1,is_next_state"
        assert len([ln for ln in lines[1:] if ln]) == small_rw_chain.n * (small_rw_chain.M + 1)
        meta = read_meta(str(path) + ".meta")
        for key in ("seed", "n", "M", "nu", "kernel", "propagation", "target"):
            assert key in meta
        assert meta["n"] == "400" and meta["M"] == "3" and meta["nu"] == "1"

    def test_byte_identical_rerun(self, tmp_path):
        cfg = SamplerConfig(n=200, M=2, kernel="rw", propagation="weighted_draw", seed=42)
        write_chain(run_lwmcmc(cfg), tmp_path / "a.csv")
        write_chain(run_lwmcmc(cfg), tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        assert (tmp_path / "a.csv.meta").read_bytes() == (tmp_path / "b.csv.meta").read_bytes()

    def test_not_a_chain(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            read_chain(p)
