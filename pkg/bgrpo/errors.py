"""
B-GRPO Errors
==============

Every failure the library reports deliberately derives from ``BGRPOError``.
Each class carries a short ``code`` so the CLI can print one greppable line:

    error: <code>: <message>
"""

from __future__ import annotations

from pathlib import Path


class BGRPOError(Exception):
    """Base class for all library errors."""

    code = "bgrpo"

    def __str__(self) -> str:
        return self.args[0] if self.args else self.code


class ConfigError(BGRPOError, ValueError):
    """Invalid or inconsistent run configuration."""

    code = "config"


class FeatureFormatError(BGRPOError, ValueError):
    """A feature file failed to parse."""

    code = "feature-format"

    def __init__(self, path: str | Path, line: int, reason: str):
        self.path = str(path)
        self.line = line
        self.reason = reason
        super().__init__(f"{self.path}:{line}: {reason}")


class TeacherFormatError(BGRPOError, ValueError):
    """A teacher prediction file failed to parse or validate."""

    code = "teacher-format"

    def __init__(self, path: str | Path, line: int, reason: str):
        self.path = str(path)
        self.line = line
        self.reason = reason
        super().__init__(f"{self.path}:{line}: {reason}")


class TeacherCoverageError(BGRPOError, KeyError):
    """A teacher was asked about a sample id it has no prediction for."""

    code = "teacher-coverage"


class DimensionError(BGRPOError, ValueError):
    """Shapes of features, parameters or distributions disagree."""

    code = "dimension"


class LabelError(BGRPOError, ValueError):
    """A gold label is missing where one is required, or out of range."""

    code = "label"


class CheckpointError(BGRPOError, ValueError):
    """A checkpoint file is unreadable or has an unknown format version."""

    code = "checkpoint"
