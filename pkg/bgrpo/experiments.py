"""
Experiment Harness
===================

Desk-scale versions of the comparisons a B-GRPO study reports:

  run_protocol            baseline / same-epochs / full-labeled / b-grpo rows
  run_advantage_ablation  positive_clip vs signed vs none
  run_reward_comparison   r1..r5 (teacher rewards need a teacher source)

Each returns ComparisonRow objects scored by macro F1 on the eval set.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from bgrpo.config import AdvantageMode, RewardKind, RunConfig
from bgrpo.data.features import Dataset, split_half
from bgrpo.data.synthetic import MixtureSpec, generate
from bgrpo.metrics import evaluate
from bgrpo.models.base import TeacherSource
from bgrpo.models.policy import PolicyParams, init_params
from bgrpo.report import StageReport
from bgrpo.training.trainer import train_bgrpo, train_supervised

logger = logging.getLogger(__name__)

COMPARISON_COLUMNS = ("name", "macro_f1", "accuracy", "relative_gain")


@dataclass
class ComparisonRow:
    name: str
    macro_f1: float
    accuracy: float
    relative_gain: float = 0.0   # vs. the baseline row

    def to_row(self) -> str:
        return "\t".join([self.name, repr(self.macro_f1), repr(self.accuracy), repr(self.relative_gain)])


@dataclass
class Splits:
    labeled: Dataset
    rl: Dataset
    eval: Dataset


def _row(name: str, params: PolicyParams, eval_set: Dataset, baseline_f1: float | None) -> ComparisonRow:
    m = evaluate(params, eval_set)
    gain = 0.0 if not baseline_f1 else (m.macro_f1 - baseline_f1) / baseline_f1
    logger.info("%-14s macro F1 %.4f  acc %.4f  gain %+.1f%%", name, m.macro_f1, m.accuracy, 100 * gain)
    return ComparisonRow(name=name, macro_f1=m.macro_f1, accuracy=m.accuracy, relative_gain=gain)


def protocol_splits(train: Dataset, eval_set: Dataset, config: RunConfig, rl_set: Dataset | None = None) -> Splits:
    """Labeled half for warmup; the other half (or an external corpus) for B-GRPO."""
    labeled, unlabeled = split_half(train, config.split.fraction, config.split.seed)
    return Splits(labeled=labeled, rl=rl_set if rl_set is not None else unlabeled, eval=eval_set)


def synthetic_splits(spec: MixtureSpec, n_each: int | None = None) -> Splits:
    """Three disjoint, class-stratified parts of one synthetic corpus."""
    data = generate(spec)
    n_each = n_each or len(data) // 3
    labeled, rest = split_half(data, n_each / len(data), spec.seed)
    rl, eval_set = split_half(rest, 0.5, spec.seed + 1)
    return Splits(labeled=labeled, rl=rl, eval=eval_set)


def warmup(splits: Splits, config: RunConfig) -> tuple[PolicyParams, StageReport]:
    init = init_params(splits.labeled.dim, config.model.hidden, splits.labeled.num_classes, config.model.init_seed)
    return train_supervised(init, splits.labeled, splits.eval, config.bgrpo)


def run_protocol(
    splits: Splits,
    config: RunConfig,
    teacher: TeacherSource | None = None,
    baseline: PolicyParams | None = None,
) -> list[ComparisonRow]:
    cfg = config.bgrpo
    if baseline is None:
        baseline, _ = warmup(splits, config)
    rows = [_row("baseline", baseline, splits.eval, None)]
    base_f1 = rows[0].macro_f1

    same, _ = train_supervised(baseline, splits.labeled, splits.eval, cfg, epochs=cfg.rl_epochs, stage="same-epochs")
    rows.append(_row("same-epochs", same, splits.eval, base_f1))

    if splits.rl.is_labeled:
        full_set = splits.labeled.concat(splits.rl, name="full-labeled")
        init = init_params(full_set.dim, config.model.hidden, full_set.num_classes, config.model.init_seed)
        full, _ = train_supervised(
            init, full_set, splits.eval, cfg, epochs=cfg.warmup_epochs + cfg.rl_epochs, stage="full-labeled"
        )
        rows.append(_row("full-labeled", full, splits.eval, base_f1))
    else:
        logger.info("RL set has no labels; skipping the full-labeled row")

    refined, _ = train_bgrpo(baseline, splits.rl, splits.eval, config.reward, teacher, cfg)
    rows.append(_row("b-grpo", refined, splits.eval, base_f1))
    return rows


def run_advantage_ablation(
    splits: Splits,
    config: RunConfig,
    teacher: TeacherSource | None = None,
    modes: Sequence[AdvantageMode] = ("positive_clip", "signed", "none"),
    baseline: PolicyParams | None = None,
) -> list[ComparisonRow]:
    if baseline is None:
        baseline, _ = warmup(splits, config)
    base_f1 = evaluate(baseline, splits.eval).macro_f1
    rows = []
    for mode in modes:
        cfg = config.bgrpo.model_copy(update={"advantage_mode": mode})
        refined, _ = train_bgrpo(baseline, splits.rl, splits.eval, config.reward, teacher, cfg)
        rows.append(_row(mode, refined, splits.eval, base_f1))
    return rows


def run_reward_comparison(
    splits: Splits,
    config: RunConfig,
    teacher: TeacherSource | None = None,
    kinds: Sequence[RewardKind] = ("r1", "r2", "r3", "r4", "r5"),
    baseline: PolicyParams | None = None,
) -> list[ComparisonRow]:
    if baseline is None:
        baseline, _ = warmup(splits, config)
    base_f1 = evaluate(baseline, splits.eval).macro_f1
    rows = []
    for kind in kinds:
        reward = config.reward.model_copy(update={"kind": kind})
        if reward.needs_teacher and teacher is None:
            logger.warning("Skipping %s: no teacher configured", kind)
            continue
        refined, _ = train_bgrpo(baseline, splits.rl, splits.eval, reward, teacher, config.bgrpo)
        rows.append(_row(kind, refined, splits.eval, base_f1))
    return rows


def write_comparison(rows: Iterable[ComparisonRow], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["\t".join(COMPARISON_COLUMNS)] + [r.to_row() for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
