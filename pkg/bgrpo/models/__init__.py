"""
B-GRPO Models
==============

The policy network and the frozen teachers that score it.
"""

from bgrpo.models.base import TeacherSource
from bgrpo.models.policy import (
    PolicyParams,
    PolicySnapshot,
    forward,
    forward_batch,
    init_params,
    load_checkpoint,
    predict,
    save_checkpoint,
    snapshot,
)
from bgrpo.models.teacher import CheckpointTeacher, TableTeacher, load_teacher, make_teacher_from_checkpoint

__all__ = [
    "TeacherSource",
    "PolicyParams",
    "PolicySnapshot",
    "forward",
    "forward_batch",
    "init_params",
    "load_checkpoint",
    "predict",
    "save_checkpoint",
    "snapshot",
    "CheckpointTeacher",
    "TableTeacher",
    "load_teacher",
    "make_teacher_from_checkpoint",
]
