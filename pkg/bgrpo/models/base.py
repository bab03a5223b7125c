"""
Teacher Sources
================

A teacher maps sample ids to a distribution p_t(n|q_i). Teachers are never
updated during training; the B-GRPO stage only queries them.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

logger = logging.getLogger(__name__)


class TeacherSource(ABC):
    """Abstract base for anything that can answer p_t(·|q_i) by sample id."""

    num_classes: int

    @property
    @abstractmethod
    def name(self) -> str:
        ...

    @abstractmethod
    def distributions(self, ids: Sequence[str]) -> NDArray[np.float64]:
        """Return an (len(ids), N) array of teacher distributions.

        Raises:
            TeacherCoverageError: an id is unknown to this teacher.
        """
        ...

    def agreement(self, ids: Sequence[str], policy_probs: NDArray[np.float64]) -> float:
        """Fraction of ids where argmax of teacher and policy coincide."""
        if not len(ids):
            return 0.0
        teacher = self.distributions(ids)
        return float(np.mean(np.argmax(teacher, axis=1) == np.argmax(policy_probs, axis=1)))
