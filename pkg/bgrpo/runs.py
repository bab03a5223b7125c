"""
Run Directories
================

One directory per invocation, holding the config snapshot, run log,
checkpoints and reports. Directory names are derived from the command and
the config fingerprint, so re-running an identical command rewrites the same
files with the same bytes.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path

from bgrpo.config import RunConfig, output_root

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def setup_logging(*, debug: bool = False, log_file: Path | None = None) -> None:
    """Configure logging to stdout and optionally to a file."""
    level = logging.DEBUG if debug else logging.INFO

    handlers: list[logging.Handler] = [
        logging.StreamHandler(sys.stdout),
    ]

    if log_file is not None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(str(log_file), mode="w", encoding="utf-8")
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
        handlers.append(file_handler)

    logging.basicConfig(
        level=level,
        format=LOG_FORMAT,
        datefmt=DATE_FORMAT,
        handlers=handlers,
        force=True,
    )


class RunDir:
    """Layout of a run directory."""

    def __init__(self, root: Path):
        self.root = Path(root)

    @classmethod
    def create(cls, command: str, config: RunConfig) -> RunDir:
        root = config.paths.output or (output_root() / f"{command}-{config.fingerprint()}")
        run = cls(root)
        run.root.mkdir(parents=True, exist_ok=True)
        (run.root / "checkpoints").mkdir(exist_ok=True)
        config.save(run.config_file)
        return run

    @property
    def config_file(self) -> Path:
        return self.root / "config.json"

    @property
    def log_file(self) -> Path:
        return self.root / "run.log"

    @property
    def report_file(self) -> Path:
        return self.root / "report.tsv"

    @property
    def summary_file(self) -> Path:
        return self.root / "summary.json"

    @property
    def final_checkpoint(self) -> Path:
        return self.root / "policy.ckpt"

    def checkpoint(self, stage: str, epoch: int) -> Path:
        return self.root / "checkpoints" / f"{stage}-epoch{epoch + 1:04d}.ckpt"

    def path(self, name: str) -> Path:
        return self.root / name
