"""
Rewards
========

Per-sample scalar rewards for the B-GRPO stage.

Self-rewards look only at the policy's own distribution:
  r1  C if max_n p_p(n|q) > δ, else penalty
  r2  max_n p_p(n|q)

Teacher-rewards compare against a frozen teacher:
  r3  C if argmax p_p == argmax p_t, else penalty
  r4  C if r1 and r3 both fire, else penalty
  r5  C if KL(p_t ‖ p_p) < θ, else penalty

Thresholds are strict; a value sitting exactly on δ or θ takes the else-branch.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray

from bgrpo.config import RewardConfig
from bgrpo.errors import ConfigError, DimensionError
from bgrpo.models.policy import ProbDistribution


class RewardOutcome(NamedTuple):
    value: float
    triggered: bool


def _check_pair(p: ProbDistribution, q: ProbDistribution) -> None:
    if p.shape != q.shape:
        raise DimensionError(f"Distribution sizes differ: {p.shape} vs {q.shape}")


def _outcome(fired: bool, cfg: RewardConfig) -> RewardOutcome:
    return RewardOutcome(cfg.C if fired else cfg.penalty, fired)


def kl_divergence(p: ProbDistribution, q: ProbDistribution) -> float:
    """Σ p·ln(p/q), with 0·ln(0/q) = 0."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    _check_pair(p, q)
    support = p > 0
    if np.any(q[support] <= 0):
        raise ValueError("KL undefined: q has zero mass where p does not")
    terms = p[support] * np.log(p[support] / q[support])
    return max(float(np.sum(terms)), 0.0)


def reward_r1(dist: ProbDistribution, cfg: RewardConfig) -> RewardOutcome:
    return _outcome(bool(np.max(dist) > cfg.delta), cfg)


def reward_r2(dist: ProbDistribution) -> RewardOutcome:
    return RewardOutcome(float(np.max(dist)), True)


def reward_r3(policy_dist: ProbDistribution, teacher_dist: ProbDistribution, cfg: RewardConfig) -> RewardOutcome:
    _check_pair(np.asarray(policy_dist), np.asarray(teacher_dist))
    return _outcome(int(np.argmax(policy_dist)) == int(np.argmax(teacher_dist)), cfg)


def reward_r4(policy_dist: ProbDistribution, teacher_dist: ProbDistribution, cfg: RewardConfig) -> RewardOutcome:
    r3 = reward_r3(policy_dist, teacher_dist, cfg)
    r1 = reward_r1(policy_dist, cfg)
    return _outcome(r1.triggered and r3.triggered, cfg)


def reward_r5(policy_dist: ProbDistribution, teacher_dist: ProbDistribution, cfg: RewardConfig) -> RewardOutcome:
    theta = cfg.resolved_theta(len(policy_dist))
    return _outcome(kl_divergence(teacher_dist, policy_dist) < theta, cfg)


def compute_reward(
    dist: ProbDistribution,
    cfg: RewardConfig,
    teacher_dist: ProbDistribution | None = None,
) -> RewardOutcome:
    """Dispatch on ``cfg.kind``."""
    if cfg.kind == "r1":
        return reward_r1(dist, cfg)
    if cfg.kind == "r2":
        return reward_r2(dist)
    if teacher_dist is None:
        raise ConfigError(f"Reward {cfg.kind} needs a teacher distribution")
    if cfg.kind == "r3":
        return reward_r3(dist, teacher_dist, cfg)
    if cfg.kind == "r4":
        return reward_r4(dist, teacher_dist, cfg)
    return reward_r5(dist, teacher_dist, cfg)


def batch_rewards(
    policy_probs: NDArray[np.float64],
    cfg: RewardConfig,
    teacher_probs: NDArray[np.float64] | None = None,
) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
    """Rewards for every row of an (n, N) stack. Returns (values, triggered)."""
    n = policy_probs.shape[0]
    values = np.empty(n, dtype=np.float64)
    triggered = np.empty(n, dtype=bool)
    for i in range(n):
        teacher = None if teacher_probs is None else teacher_probs[i]
        values[i], triggered[i] = compute_reward(policy_probs[i], cfg, teacher)
    return values, triggered
