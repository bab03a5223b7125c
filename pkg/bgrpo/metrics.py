"""
Classification Metrics
=======================

Macro F1 is the headline number. Classes that appear neither in the gold
labels nor in the predictions are left out of the mean; a class with gold
instances that is never predicted counts as F1 = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from sklearn.metrics import f1_score

from bgrpo.data.features import Dataset
from bgrpo.errors import DimensionError, LabelError
from bgrpo.models.policy import PolicyParams, forward_batch, log_softmax


@dataclass
class EvalMetrics:
    macro_f1: float
    accuracy: float
    per_class_f1: list[float] = field(default_factory=list)
    loss: float = float("nan")
    num_samples: int = 0


def macro_f1(predictions: Sequence[int] | NDArray[np.int64], labels: Sequence[int] | NDArray[np.int64], num_classes: int) -> float:
    preds = np.asarray(predictions, dtype=np.int64)
    gold = np.asarray(labels, dtype=np.int64)
    if preds.shape != gold.shape:
        raise DimensionError(f"{preds.size} predictions for {gold.size} labels")
    if preds.size == 0:
        return 0.0
    if preds.max() >= num_classes or gold.max() >= num_classes or min(preds.min(), gold.min()) < 0:
        raise LabelError(f"Category index outside 0..{num_classes - 1}")
    present = np.union1d(gold, preds)
    return float(f1_score(gold, preds, labels=present, average="macro", zero_division=0))


def per_class_f1(predictions: NDArray[np.int64], labels: NDArray[np.int64], num_classes: int) -> list[float]:
    if np.asarray(labels).size == 0:
        return [0.0] * num_classes
    scores = f1_score(labels, predictions, labels=np.arange(num_classes), average=None, zero_division=0)
    return [float(s) for s in scores]


def evaluate(params: PolicyParams, dataset: Dataset) -> EvalMetrics:
    """Predict every sample and score against the gold labels."""
    labels = dataset.labels()
    D, _, N = params.dims
    if dataset.dim != D or dataset.num_classes != N:
        raise DimensionError(
            f"Policy expects D={D}, N={N}; dataset {dataset.name!r} has D={dataset.dim}, N={dataset.num_classes}"
        )
    if not len(dataset):
        return EvalMetrics(macro_f1=0.0, accuracy=0.0, per_class_f1=[0.0] * dataset.num_classes)
    cache = forward_batch(params, dataset.features)
    preds = np.argmax(cache.probs, axis=1)
    nll = -float(np.mean(log_softmax(cache.logits)[np.arange(len(labels)), labels]))
    return EvalMetrics(
        macro_f1=macro_f1(preds, labels, dataset.num_classes),
        accuracy=float(np.mean(preds == labels)),
        per_class_f1=per_class_f1(preds, labels, dataset.num_classes),
        loss=nll,
        num_samples=len(labels),
    )
