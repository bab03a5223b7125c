"""Self- and teacher-rewards, checked against a separately written oracle."""

import math

import numpy as np
import pytest

from bgrpo.config import RewardConfig
from bgrpo.errors import ConfigError
from bgrpo.training.rewards import batch_rewards, compute_reward, kl_divergence


def _oracle(kind, p, t, C, delta, theta, penalty):
    """Direct, loop-based evaluation of each reward definition."""
    best_p = max(range(len(p)), key=lambda n: (p[n], -n))
    best_t = max(range(len(t)), key=lambda n: (t[n], -n))
    confident = p[best_p] > delta
    agree = best_p == best_t
    kl = 0.0
    for pt, pp in zip(t, p):
        if pt > 0:
            kl += pt * math.log(pt / pp)
    if kind == "r1":
        return C if confident else penalty
    if kind == "r2":
        return p[best_p]
    if kind == "r3":
        return C if agree else penalty
    if kind == "r4":
        return C if (confident and agree) else penalty
    return C if kl < theta else penalty


def _random_pairs(count, seed):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        N = int(rng.integers(2, 9))
        sharp = rng.uniform(0.2, 5.0)
        yield rng.dirichlet(np.full(N, sharp)), rng.dirichlet(np.full(N, sharp))


class TestOracleEquivalence:
    """Library rewards equal the brute-force oracle on 1000 random pairs."""

    @pytest.mark.parametrize("kind", ["r1", "r2", "r3", "r4", "r5"])
    def test_matches_oracle(self, kind):
        cfg = RewardConfig(kind=kind, C=1.0, delta=0.5, penalty=-0.5)
        for p, t in _random_pairs(1000, seed=11):
            theta = cfg.resolved_theta(len(p))
            got = compute_reward(p, cfg, t).value
            want = _oracle(kind, p.tolist(), t.tolist(), 1.0, 0.5, theta, -0.5)
            if kind == "r2":
                assert abs(got - want) <= 1e-12
            else:
                assert got == want

    def test_r4_is_r1_and_r3(self):
        r1 = RewardConfig(kind="r1")
        r3 = RewardConfig(kind="r3")
        r4 = RewardConfig(kind="r4")
        for p, t in _random_pairs(1000, seed=12):
            fired = compute_reward(p, r4, t).triggered
            assert fired == (compute_reward(p, r1).triggered and compute_reward(p, r3, t).triggered)

    def test_kl_matches_oracle(self):
        for p, t in _random_pairs(1000, seed=13):
            want = sum(a * math.log(a / b) for a, b in zip(t, p) if a > 0)
            assert abs(kl_divergence(t, p) - want) <= 1e-12


class TestThresholds:
    """Hand cases and strict-inequality boundaries."""

    def test_r1_fires_above_delta(self):
        cfg = RewardConfig(kind="r1", C=1.0, delta=0.5)
        assert compute_reward(np.array([0.7, 0.2, 0.1]), cfg).value == 1.0
        assert compute_reward(np.array([0.4, 0.35, 0.25]), cfg).value == 0.0

    def test_r1_boundary_is_exclusive(self):
        cfg = RewardConfig(kind="r1", delta=0.5)
        assert compute_reward(np.array([0.5, 0.5]), cfg).value == 0.0

    def test_r2_is_max_probability(self):
        assert compute_reward(np.array([0.1, 0.6, 0.3]), RewardConfig(kind="r2")).value == 0.6

    def test_r3_agreement(self):
        cfg = RewardConfig(kind="r3", C=2.0)
        assert compute_reward(np.array([0.6, 0.4]), cfg, np.array([0.9, 0.1])).value == 2.0
        assert compute_reward(np.array([0.6, 0.4]), cfg, np.array([0.1, 0.9])).value == 0.0

    def test_r5_identical_distributions_fire(self):
        p = np.array([0.2, 0.3, 0.5])
        assert compute_reward(p, RewardConfig(kind="r5"), p).value == 1.0

    def test_r5_boundary_is_exclusive(self):
        p = np.array([0.5, 0.5])
        t = np.array([0.9, 0.1])
        theta = kl_divergence(t, p)
        assert compute_reward(p, RewardConfig(kind="r5", theta=theta), t).value == 0.0

    def test_default_theta_is_half_log_n(self):
        assert RewardConfig().resolved_theta(6) == pytest.approx(math.log(6) / 2)

    def test_teacher_reward_without_teacher(self):
        with pytest.raises(ConfigError):
            compute_reward(np.array([0.5, 0.5]), RewardConfig(kind="r3"))

    def test_kl_zero_mass_in_policy(self):
        with pytest.raises(ValueError):
            kl_divergence(np.array([0.5, 0.5]), np.array([1.0, 0.0]))


class TestBatchRewards:
    def test_rows_are_scored_independently(self):
        probs = np.array([[0.9, 0.1], [0.5, 0.5], [0.2, 0.8]])
        values, fired = batch_rewards(probs, RewardConfig(kind="r1", C=3.0, penalty=-1.0))
        np.testing.assert_array_equal(values, [3.0, -1.0, 3.0])
        np.testing.assert_array_equal(fired, [True, False, True])
