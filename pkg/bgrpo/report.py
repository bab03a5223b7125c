"""
Stage Reports
==============

One record per epoch, written as tab-separated text::

    epoch  stage  loss  macro_f1  mean_reward  frac_pos_adv  frac_degenerate_batches  accuracy  mean_confidence

``stage`` is ``warmup``, ``bgrpo`` or ``eval``. Columns that do not apply to
a stage hold ``nan``. Floats are written with ``repr`` so a report read back
is bit-identical to what was written.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable

REPORT_COLUMNS = (
    "epoch",
    "stage",
    "loss",
    "macro_f1",
    "mean_reward",
    "frac_pos_adv",
    "frac_degenerate_batches",
    "accuracy",
    "mean_confidence",
)

NAN = float("nan")


@dataclass
class EpochRecord:
    epoch: int
    stage: str
    loss: float
    macro_f1: float = NAN
    mean_reward: float = NAN
    frac_pos_adv: float = NAN
    frac_degenerate_batches: float = NAN
    accuracy: float = NAN
    mean_confidence: float = NAN

    def to_row(self) -> str:
        values = []
        for col in REPORT_COLUMNS:
            v = getattr(self, col)
            values.append(repr(float(v)) if isinstance(v, float) else str(v))
        return "\t".join(values)

    @classmethod
    def from_row(cls, line: str) -> EpochRecord:
        parts = line.rstrip("\n").split("\t")
        if len(parts) != len(REPORT_COLUMNS):
            raise ValueError(f"Report row has {len(parts)} columns, expected {len(REPORT_COLUMNS)}")
        kwargs = {}
        for f, raw in zip(fields(cls), parts):
            if f.name == "epoch":
                kwargs[f.name] = int(raw)
            elif f.name == "stage":
                kwargs[f.name] = raw
            else:
                kwargs[f.name] = float(raw)
        return cls(**kwargs)


@dataclass
class StageReport:
    stage: str
    records: list[EpochRecord] = field(default_factory=list)
    reference_digest: str = ""

    def add(self, record: EpochRecord) -> None:
        self.records.append(record)

    @property
    def final(self) -> EpochRecord | None:
        return self.records[-1] if self.records else None

    def best_epoch(self) -> EpochRecord | None:
        """Record with the highest eval macro F1 (earliest on ties)."""
        scored = [r for r in self.records if not math.isnan(r.macro_f1)]
        if not scored:
            return None
        return max(scored, key=lambda r: (r.macro_f1, -r.epoch))

    def summary(self) -> dict:
        best = self.best_epoch()
        final = self.final
        return {
            "stage": self.stage,
            "epochs": len(self.records),
            "final": asdict(final) if final else None,
            "best_epoch": best.epoch if best else None,
            "best_macro_f1": best.macro_f1 if best else None,
            "reference_digest": self.reference_digest or None,
        }


def write_report(records: Iterable[EpochRecord], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["\t".join(REPORT_COLUMNS)] + [r.to_row() for r in records]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_report(path: str | Path) -> list[EpochRecord]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or tuple(lines[0].split("\t")) != REPORT_COLUMNS:
        raise ValueError(f"{path}: not a metrics report (bad header)")
    return [EpochRecord.from_row(line) for line in lines[1:] if line.strip()]


def write_summary(report: StageReport, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report.summary(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
