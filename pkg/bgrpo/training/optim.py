"""
Optimizers
===========

In-place parameter updates for PolicyParams. Updates are the single-writer
step of training: nothing else mutates live parameters.
"""

from __future__ import annotations

import numpy as np

from bgrpo.config import OptimizerConfig
from bgrpo.models.policy import PolicyParams
from bgrpo.training.loss import GradientSet


class SGD:
    def __init__(self, params: PolicyParams, lr: float):
        self.params = params
        self.lr = lr

    def step(self, grads: GradientSet) -> None:
        for p, g in zip(self.params.arrays, grads.arrays):
            p -= self.lr * g


class Adam:
    """Adaptive moment estimation with bias correction."""

    def __init__(
        self,
        params: PolicyParams,
        lr: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params.arrays]
        self.v = [np.zeros_like(p) for p in params.arrays]

    def step(self, grads: GradientSet) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params.arrays, grads.arrays, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def make_optimizer(params: PolicyParams, lr: float, cfg: OptimizerConfig) -> SGD | Adam:
    if cfg.kind == "sgd":
        return SGD(params, lr)
    return Adam(params, lr, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)
