"""
Teachers
=========

Two concrete teacher sources:

  - TableTeacher: a TeacherPredictionTable read from disk
  - CheckpointTeacher: a frozen policy checkpoint evaluated over its own
    feature view, keyed by the same sample ids
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from bgrpo.data.features import Dataset, TeacherPredictionTable, load_feature_file, load_teacher_predictions
from bgrpo.errors import ConfigError, DimensionError, TeacherCoverageError
from bgrpo.models.base import TeacherSource
from bgrpo.models.policy import PolicyParams, forward_batch, is_checkpoint, load_checkpoint, snapshot

logger = logging.getLogger(__name__)


class TableTeacher(TeacherSource):
    """Teacher backed by a prediction file."""

    def __init__(self, table: TeacherPredictionTable, name: str = "table"):
        self.table = table
        self.num_classes = table.num_classes
        self._name = name

    @property
    def name(self) -> str:
        return self._name

    def distributions(self, ids: Sequence[str]) -> NDArray[np.float64]:
        return self.table.lookup(list(ids))


class CheckpointTeacher(TeacherSource):
    """Teacher that runs a frozen policy over an alternative feature view.

    All predictions are computed once at construction; the teacher's
    parameters are snapshotted so nothing downstream can change them.
    """

    def __init__(self, params: PolicyParams, view: Dataset, name: str = "checkpoint"):
        D, _, N = params.dims
        if view.dim != D:
            raise DimensionError(
                f"Teacher checkpoint expects D={D} but feature view {view.name!r} has D={view.dim}"
            )
        if view.num_classes != N:
            raise DimensionError(
                f"Teacher checkpoint has N={N} classes but feature view declares {view.num_classes}"
            )
        self.frozen = snapshot(params, "reference")
        self.num_classes = N
        self._name = name
        probs = forward_batch(self.frozen.params, view.features).probs if len(view) else np.zeros((0, N))
        self._index = {sample_id: i for i, sample_id in enumerate(view.ids)}
        self._probs = probs
        self._probs.setflags(write=False)
        logger.info("Checkpoint teacher %s ready over %d samples", name, len(view))

    @property
    def name(self) -> str:
        return self._name

    def distributions(self, ids: Sequence[str]) -> NDArray[np.float64]:
        try:
            rows = [self._index[i] for i in ids]
        except KeyError as e:
            raise TeacherCoverageError(f"Teacher {self.name!r} has no features for sample {e.args[0]!r}") from None
        return self._probs[rows] if rows else np.zeros((0, self.num_classes))


def make_teacher_from_checkpoint(checkpoint: str | Path, view: Dataset | str | Path) -> CheckpointTeacher:
    """Build a teacher from a saved policy and the teacher's own feature view."""
    params = load_checkpoint(checkpoint)
    if not isinstance(view, Dataset):
        view = load_feature_file(view)
    return CheckpointTeacher(params, view, name=Path(checkpoint).stem)


def load_teacher(path: str | Path, features: str | Path | None = None) -> TeacherSource:
    """Open either a prediction table or a checkpoint (which then needs ``features``)."""
    path = Path(path)
    if is_checkpoint(path):
        if features is None:
            raise ConfigError(f"Teacher checkpoint {path} needs a teacher feature file")
        return make_teacher_from_checkpoint(path, features)
    return TableTeacher(load_teacher_predictions(path), name=path.stem)
