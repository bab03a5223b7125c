"""
Batch Advantages
=================

The minibatch is the group. Each sample's reward is normalized against the
batch mean and population standard deviation; the positive_clip mode then
zeroes every below-average sample so only the better half of a batch pushes
the policy.

Modes:
  positive_clip  Â = max((r − mean) / std, 0)
  signed         Â = (r − mean) / std
  none           Â = 1
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from bgrpo.config import AdvantageMode

DEFAULT_EPS_STD = 1e-8


@dataclass(frozen=True, eq=False)
class AdvantageVector:
    values: NDArray[np.float64]
    mode: AdvantageMode
    degenerate: bool = False

    @property
    def frac_positive(self) -> float:
        return float(np.mean(self.values > 0)) if self.values.size else 0.0


def batch_advantages(
    rewards: NDArray[np.float64],
    mode: AdvantageMode = "positive_clip",
    eps_std: float = DEFAULT_EPS_STD,
) -> AdvantageVector:
    r = np.asarray(rewards, dtype=np.float64)
    if r.ndim != 1 or r.size < 2:
        raise ValueError(f"Need a group of at least 2 rewards, got shape {r.shape}")
    if not np.all(np.isfinite(r)):
        raise ValueError("Rewards must be finite")

    if mode == "none":
        return AdvantageVector(np.ones_like(r), mode, degenerate=bool(r.std() < eps_std))

    mean = r.mean()
    std = r.std()
    if std < eps_std:
        # every sample scored the same: nothing to prefer
        return AdvantageVector(np.zeros_like(r), mode, degenerate=True)

    signed = (r - mean) / std
    if mode == "signed":
        return AdvantageVector(signed, mode)
    if mode == "positive_clip":
        return AdvantageVector(np.maximum(signed, 0.0), mode)
    raise ValueError(f"Unknown advantage mode {mode!r}")
