"""
B-GRPO Training
================

Rewards, batch advantages, the clipped objective, optimizers and the
two-stage trainer.
"""

from bgrpo.training.advantage import AdvantageVector, batch_advantages
from bgrpo.training.loss import (
    GradientSet,
    SampleRollout,
    batch_gradients,
    batch_loss,
    ce_loss_and_grads,
    grad_check,
    kl_penalty,
    per_sample_objective,
)
from bgrpo.training.rewards import RewardOutcome, compute_reward, kl_divergence
from bgrpo.training.trainer import train_bgrpo, train_supervised

__all__ = [
    "AdvantageVector",
    "batch_advantages",
    "GradientSet",
    "SampleRollout",
    "batch_gradients",
    "batch_loss",
    "ce_loss_and_grads",
    "grad_check",
    "kl_penalty",
    "per_sample_objective",
    "RewardOutcome",
    "compute_reward",
    "kl_divergence",
    "train_bgrpo",
    "train_supervised",
]
