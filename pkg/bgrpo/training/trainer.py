"""
Trainer
========

The two-stage protocol:

  1. warmup: minibatch cross-entropy on the labeled half
  2. b-grpo: for each batch snapshot θ_old, roll out, reward, normalize within
     the batch, then take ``inner_steps`` gradient steps on the
     clipped objective anchored to the frozen warmup policy

The B-GRPO stage receives a label-masked copy of its dataset, so gold labels
of the RL set cannot influence it.
"""

from __future__ import annotations

import logging
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from bgrpo.config import BGRPOConfig, RewardConfig
from bgrpo.data.features import Dataset, epoch_rng, make_batches
from bgrpo.errors import ConfigError, DimensionError
from bgrpo.metrics import evaluate
from bgrpo.models.base import TeacherSource
from bgrpo.models.policy import PolicyParams, forward_batch, snapshot
from bgrpo.report import NAN, EpochRecord, StageReport
from bgrpo.training.advantage import batch_advantages
from bgrpo.training.loss import SampleRollout, bgrpo_loss_and_grads, ce_loss_and_grads
from bgrpo.training.optim import make_optimizer
from bgrpo.training.rewards import batch_rewards

logger = logging.getLogger(__name__)

EpochHook = Callable[[int, PolicyParams, EpochRecord], None]

_TINY = np.finfo(np.float64).tiny


def _check_compatible(params: PolicyParams, dataset: Dataset, role: str) -> None:
    D, _, N = params.dims
    if dataset.dim != D or dataset.num_classes != N:
        raise DimensionError(
            f"{role} dataset {dataset.name!r} has D={dataset.dim}, N={dataset.num_classes}; "
            f"policy has D={D}, N={N}"
        )


def _eval_fields(params: PolicyParams, eval_set: Dataset | None) -> tuple[float, float]:
    if eval_set is None or not len(eval_set):
        return NAN, NAN
    m = evaluate(params, eval_set)
    return m.macro_f1, m.accuracy


def mean_confidence(params: PolicyParams, dataset: Dataset) -> float:
    """Mean of max_n p(n|q) over a dataset."""
    if not len(dataset):
        return NAN
    return float(np.mean(np.max(forward_batch(params, dataset.features).probs, axis=1)))


# ── Stage 1: supervised warmup ───────────────────────────────────────────

def train_supervised(
    init: PolicyParams,
    labeled: Dataset,
    eval_set: Dataset | None,
    cfg: BGRPOConfig,
    *,
    epochs: int | None = None,
    stage: str = "warmup",
    on_epoch: EpochHook | None = None,
) -> tuple[PolicyParams, StageReport]:
    epochs = cfg.warmup_epochs if epochs is None else epochs
    labels = labeled.labels()
    if not len(labeled):
        raise ConfigError(f"Training set {labeled.name!r} is empty")
    _check_compatible(init, labeled, "Training")
    if eval_set is not None:
        _check_compatible(init, eval_set, "Eval")

    params = init.copy()
    optimizer = make_optimizer(params, cfg.learning_rate, cfg.optimizer)
    report = StageReport(stage=stage)
    X = labeled.features

    logger.info(
        "Supervised stage %s: %d samples, %d epochs, batch %d", stage, len(labeled), epochs, cfg.batch_size
    )
    for epoch in range(epochs):
        losses = []
        for idx in make_batches(labeled, cfg.batch_size, cfg.seed, epoch):
            loss, grads = ce_loss_and_grads(params, X[idx], labels[idx])
            optimizer.step(grads)
            losses.append(loss)

        f1, acc = _eval_fields(params, eval_set)
        record = EpochRecord(
            epoch=epoch,
            stage=stage,
            loss=float(np.mean(losses)) if losses else NAN,
            macro_f1=f1,
            accuracy=acc,
            mean_confidence=mean_confidence(params, labeled),
        )
        report.add(record)
        logger.info("[%s] epoch %d/%d loss=%.4f f1=%.4f", stage, epoch + 1, epochs, record.loss, f1)
        if on_epoch:
            on_epoch(epoch, params, record)

    return params, report


# ── Stage 2: B-GRPO ──────────────────────────────────────────────────────

def _choose_actions(
    probs: NDArray[np.float64], cfg: BGRPOConfig, epoch: int, batch_index: int
) -> NDArray[np.int64]:
    if cfg.action_mode == "argmax":
        return np.argmax(probs, axis=1)
    rng = epoch_rng(cfg.seed, epoch, batch_index)
    u = rng.random(probs.shape[0])
    actions = (np.cumsum(probs, axis=1) < u[:, None]).sum(axis=1)
    return np.minimum(actions, probs.shape[1] - 1)


def train_bgrpo(
    baseline: PolicyParams,
    rl_dataset: Dataset,
    eval_set: Dataset | None,
    reward_cfg: RewardConfig,
    teacher: TeacherSource | None,
    cfg: BGRPOConfig,
    *,
    epochs: int | None = None,
    on_epoch: EpochHook | None = None,
) -> tuple[PolicyParams, StageReport]:
    """Refine ``baseline`` on ``rl_dataset`` without its labels."""
    epochs = cfg.rl_epochs if epochs is None else epochs
    if not len(rl_dataset):
        raise ConfigError(f"RL dataset {rl_dataset.name!r} is empty")
    if reward_cfg.needs_teacher and teacher is None:
        raise ConfigError(f"Reward {reward_cfg.kind} needs a teacher")
    _check_compatible(baseline, rl_dataset, "RL")
    if eval_set is not None:
        _check_compatible(baseline, eval_set, "Eval")

    rl = rl_dataset.without_labels()
    N = baseline.dims[2]
    ids = rl.ids
    X = rl.features

    teacher_probs = None
    if reward_cfg.needs_teacher:
        if teacher.num_classes != N:
            raise DimensionError(f"Teacher has {teacher.num_classes} classes, policy has {N}")
        teacher_probs = teacher.distributions(ids)

    reference = snapshot(baseline, "reference")
    report = StageReport(stage="bgrpo", reference_digest=reference.params.digest())
    params = baseline.copy()
    optimizer = make_optimizer(params, cfg.learning_rate, cfg.optimizer)

    logger.info(
        "B-GRPO stage: %d samples, %d epochs, reward=%s, advantage=%s, ε=%g, β=%g",
        len(rl), epochs, reward_cfg.kind, cfg.advantage_mode, cfg.epsilon, cfg.beta,
    )
    for epoch in range(epochs):
        if reference.params.digest() != report.reference_digest:
            raise RuntimeError("Reference policy changed during the B-GRPO stage")

        losses: list[float] = []
        reward_sum = 0.0
        positive = 0
        seen = 0
        degenerate = 0
        batches = make_batches(rl, cfg.batch_size, cfg.seed, epoch)

        for b, idx in enumerate(batches):
            Xb = X[idx]
            old = snapshot(params, "old")
            old_probs = forward_batch(old.params, Xb).probs
            ref_probs = forward_batch(reference.params, Xb).probs
            actions = _choose_actions(old_probs, cfg, epoch, b)

            rewards, _ = batch_rewards(
                old_probs, reward_cfg, None if teacher_probs is None else teacher_probs[idx]
            )
            adv = batch_advantages(rewards, cfg.advantage_mode, cfg.eps_std)

            rows = np.arange(len(idx))
            p_old = np.maximum(old_probs[rows, actions], _TINY)
            p_ref = np.maximum(ref_probs[rows, actions], _TINY)
            rollouts = [
                SampleRollout(ids[i], int(a), float(po), float(pr), float(A))
                for i, a, po, pr, A in zip(idx, actions, p_old, p_ref, adv.values)
            ]

            for step in range(cfg.inner_steps):
                loss, grads = bgrpo_loss_and_grads(params, Xb, rollouts, cfg)
                if step == 0:
                    losses.append(loss)
                optimizer.step(grads)

            reward_sum += float(rewards.sum())
            positive += int(np.sum(adv.values > 0))
            seen += len(idx)
            degenerate += int(adv.degenerate)
            logger.debug(
                "[bgrpo] epoch %d batch %d: mean reward %.3f, Â>0 %d/%d%s",
                epoch, b, rewards.mean(), int(np.sum(adv.values > 0)), len(idx),
                " (degenerate)" if adv.degenerate else "",
            )

        f1, acc = _eval_fields(params, eval_set)
        record = EpochRecord(
            epoch=epoch,
            stage="bgrpo",
            loss=float(np.mean(losses)) if losses else NAN,
            macro_f1=f1,
            mean_reward=reward_sum / seen if seen else NAN,
            frac_pos_adv=positive / seen if seen else NAN,
            frac_degenerate_batches=degenerate / len(batches) if batches else NAN,
            accuracy=acc,
            mean_confidence=mean_confidence(params, rl),
        )
        report.add(record)
        logger.info(
            "[bgrpo] epoch %d/%d loss=%.4f f1=%.4f reward=%.3f Â>0=%.2f degenerate=%.2f",
            epoch + 1, epochs, record.loss, f1, record.mean_reward,
            record.frac_pos_adv, record.frac_degenerate_batches,
        )
        if on_epoch:
            on_epoch(epoch, params, record)

    return params, report
