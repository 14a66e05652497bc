import numpy as np
import pytest

from netsampler.errors import ParameterError
from netsampler.sources import (
    CacheEntry,
    EstimationState,
    SourceEnsemble,
    asee,
    deliver_packet,
    estimates_matrix,
    evolve_sources,
    instantaneous_reward,
    mmse_estimate,
)


class TestEvolution:
    def test_zero_sigma_keeps_values(self, rng):
        s = SourceEnsemble.initial(4, sigma=0.0)
        evolve_sources(s, rng)
        assert np.all(s.values == 0.0)
        assert s.k == 1

    def test_increment_variance(self):
        rng = np.random.default_rng(0)
        s = SourceEnsemble.initial(1, sigma=1.0)
        prev = 0.0
        increments = []
        for _ in range(100_000):
            evolve_sources(s, rng)
            increments.append(s.values[0] - prev)
            prev = s.values[0]
        assert abs(np.var(increments) - 1.0) < 0.02

    def test_terminal_mean_near_zero(self):
        K = 25
        finals = []
        for seed in range(10_000):
            rng = np.random.default_rng(seed)
            s = SourceEnsemble.initial(1, sigma=1.0)
            for _ in range(K):
                evolve_sources(s, rng)
            finals.append(s.values[0])
        assert abs(np.mean(finals)) < 3.0 * np.sqrt(K) * 1e-2


class TestCacheAndEstimates:
    def test_estimate_returns_cached_value(self):
        st = EstimationState(3)
        st.k = 9
        deliver_packet(st, 0, CacheEntry(origin=2, value=3.2, stamp=5))
        src = SourceEnsemble.initial(3)
        src.k = 9
        assert mmse_estimate(st, src, 0, 2) == 3.2

    def test_self_estimate_is_true_value(self, rng):
        st = EstimationState(3)
        src = SourceEnsemble.initial(3)
        evolve_sources(src, rng)
        st.k = 1
        assert mmse_estimate(st, src, 1, 1) == src.values[1]

    def test_no_packet_estimate_is_zero(self):
        st = EstimationState(3)
        src = SourceEnsemble.initial(3)
        assert mmse_estimate(st, src, 0, 1) == 0.0

    def test_fresher_packet_replaces(self):
        st = EstimationState(2)
        st.k = 8
        deliver_packet(st, 0, CacheEntry(1, 1.0, 3))
        deliver_packet(st, 0, CacheEntry(1, 2.0, 7))
        assert st.entry(0, 1) == CacheEntry(1, 2.0, 7)
        assert st.ages[0, 1] == 1

    def test_stale_packet_discarded(self):
        st = EstimationState(2)
        st.k = 8
        deliver_packet(st, 0, CacheEntry(1, 2.0, 7))
        deliver_packet(st, 0, CacheEntry(1, 1.0, 3))
        assert st.entry(0, 1) == CacheEntry(1, 2.0, 7)

    def test_insert_into_empty_slot(self):
        st = EstimationState(2)
        st.k = 2
        deliver_packet(st, 0, CacheEntry(1, 5.0, 0))
        assert st.entry(0, 1) == CacheEntry(1, 5.0, 0)
        assert st.cached_origins(0) == (1,)

    def test_delivery_idempotent(self):
        st = EstimationState(2)
        st.k = 5
        e = CacheEntry(1, 4.0, 2)
        deliver_packet(st, 0, e)
        stamps = st.stamps.copy()
        deliver_packet(st, 0, e)
        assert np.array_equal(st.stamps, stamps)

    def test_future_stamp_rejected(self):
        st = EstimationState(2)
        with pytest.raises(ParameterError):
            deliver_packet(st, 0, CacheEntry(1, 0.0, 99))

    def test_age_matrix_conventions(self):
        st = EstimationState(3)
        st.k = 6
        deliver_packet(st, 0, CacheEntry(1, 0.5, 4))
        ages = st.ages
        assert np.all(np.diag(ages) == 0)
        assert ages[0, 1] == 2
        assert ages[0, 2] == 6  # never received: stamp 0 convention


class TestReward:
    def test_fresh_caches_give_zero_reward(self, rng):
        src = SourceEnsemble.initial(3)
        st = EstimationState(3)
        evolve_sources(src, rng)
        st.k = 1
        for i in range(3):
            for j in range(3):
                if i != j:
                    deliver_packet(st, i, CacheEntry(j, float(src.values[j]), 1))
        assert instantaneous_reward(st, src) == 0.0

    def test_two_node_arithmetic(self):
        src = SourceEnsemble.initial(2)
        st = EstimationState(2)
        src.values = np.array([1.0, 3.0])
        src.k = st.k = 4
        # node 0's estimate of node 1 off by 2, everything else exact
        deliver_packet(st, 0, CacheEntry(1, 1.0, 3))
        deliver_packet(st, 1, CacheEntry(0, 1.0, 3))
        assert instantaneous_reward(st, src) == pytest.approx(-1.0)
        # symmetric misses of 2 in both directions
        st2 = EstimationState(2)
        st2.k = 4
        deliver_packet(st2, 0, CacheEntry(1, 1.0, 3))
        deliver_packet(st2, 1, CacheEntry(0, -1.0, 3))
        assert instantaneous_reward(st2, src) == pytest.approx(-2.0)

    def test_expected_mode_matches_sigma_scaled_ages(self):
        src = SourceEnsemble.initial(3, sigma=2.0)
        st = EstimationState(3)
        src.k = st.k = 5
        deliver_packet(st, 0, CacheEntry(1, 0.0, 2))
        expected = -(2.0**2) * st.ages.sum() / 9
        assert instantaneous_reward(st, src, mode="expected") == pytest.approx(expected)

    def test_realized_reward_mean_tracks_age_identity(self):
        # E[-r] = (sigma^2 / M^2) * sum(ages): Monte-Carlo at a frozen age layout.
        rng = np.random.default_rng(77)
        m, k = 2, 6
        total = 0.0
        n = 20_000
        for _ in range(n):
            src = SourceEnsemble.initial(m)
            walk = rng.normal(0, 1.0, size=(k, m)).cumsum(axis=0)
            src.values = walk[-1].copy()
            src.k = k
            st = EstimationState(m)
            st.k = k
            deliver_packet(st, 0, CacheEntry(1, float(walk[2, 1]), 3))  # age 3
            deliver_packet(st, 1, CacheEntry(0, float(walk[4, 0]), 5))  # age 1
            total += -instantaneous_reward(st, src)
        expected = (3 + 1) / 4  # sigma^2/M^2 * sum(ages)
        se = expected / np.sqrt(n)  # loose scale bound for the tolerance
        assert abs(total / n - expected) < 5 * se


class TestAsee:
    def test_all_zero_rewards(self):
        assert asee([0.0, 0.0, 0.0]) == 0.0

    def test_empty_trajectory_rejected(self):
        with pytest.raises(ParameterError):
            asee([])

    def test_concatenation_is_length_weighted_mean(self, rng):
        a = list(rng.normal(size=10))
        b = list(rng.normal(size=30))
        combined = asee(a + b)
        weighted = (10 * asee(a) + 30 * asee(b)) / 40
        assert combined == pytest.approx(weighted)

    def test_single_node_asee_zero(self, rng):
        src = SourceEnsemble.initial(1)
        st = EstimationState(1)
        rewards = []
        for _ in range(5):
            st.k += 1
            evolve_sources(src, rng)
            rewards.append(instantaneous_reward(st, src))
        assert asee(rewards) == 0.0
