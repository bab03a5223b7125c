"""
B-GRPO CLI
===========

Command-line interface for the B-GRPO classifier refinement library.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path
from typing import Any, Callable

import click
from rich.console import Console
from rich.table import Table

from bgrpo import __version__
from bgrpo.config import RunConfig, build_config, output_root
from bgrpo.data.features import (
    EMOTIONS,
    Dataset,
    load_feature_file,
    split_half,
    write_feature_file,
    write_teacher_predictions,
)
from bgrpo.data.synthetic import MixtureSpec, generate, second_view
from bgrpo.errors import BGRPOError, ConfigError
from bgrpo.experiments import (
    ComparisonRow,
    Splits,
    protocol_splits,
    run_advantage_ablation,
    run_protocol,
    run_reward_comparison,
    synthetic_splits,
    write_comparison,
)
from bgrpo.metrics import evaluate
from bgrpo.models.base import TeacherSource
from bgrpo.models.policy import forward_batch, init_params, load_checkpoint, save_checkpoint
from bgrpo.models.teacher import load_teacher
from bgrpo.report import EpochRecord, write_report, write_summary
from bgrpo.runs import RunDir, setup_logging
from bgrpo.training.loss import GradCheckInstance, grad_check
from bgrpo.training.trainer import EpochHook, mean_confidence, train_bgrpo, train_supervised


# ── Branding ─────────────────────────────────────────────────────────────

LOGO_MINI = "⚡ B-GRPO"

BOX_T = "╔"
BOX_B = "╚"
BOX_H = "═"
BOX_V = "║"
BOX_TR = "╗"
BOX_BR = "╝"
BOX_M = "╠"
BOX_MR = "╣"
W = 52


def box_top(title: str = "") -> str:
    if title:
        inner = f" {title} "
        pad = W - 2 - len(inner) - 1
        return f"{BOX_T}{BOX_H}{inner}{BOX_H * pad}{BOX_TR}"
    return f"{BOX_T}{BOX_H * (W - 2)}{BOX_TR}"


def box_mid() -> str:
    return f"{BOX_M}{BOX_H * (W - 2)}{BOX_MR}"


def box_row(text: str) -> str:
    padding = W - 4 - len(text)
    if padding < 0:
        text = text[: W - 7] + "..."
        padding = 0
    return f"{BOX_V}  {text}{' ' * padding}{BOX_V}"


def box_bot() -> str:
    return f"{BOX_B}{BOX_H * (W - 2)}{BOX_BR}"


def success(msg: str) -> None:
    click.echo(click.style(f"  ✓ {msg}", fg="green"))


def fail(msg: str) -> None:
    click.echo(click.style(f"  ✗ {msg}", fg="red"))


def info(msg: str) -> None:
    click.echo(click.style(f"  → {msg}", fg="cyan"))


def dim(msg: str) -> None:
    click.echo(click.style(f"    {msg}", dim=True))


# ── Error handling and shared options ────────────────────────────────────

def guarded(fn: Callable[..., Any]) -> Callable[..., Any]:
    """Turn library errors into one ``error: <code>: <message>`` line on stderr."""

    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return fn(*args, **kwargs)
        except BGRPOError as e:
            message = " ".join(str(e).split())
            click.echo(f"error: {e.code}: {message}", err=True)
            sys.exit(2 if isinstance(e, ConfigError) else 1)
        except FileNotFoundError as e:
            click.echo(f"error: io: file not found: {e.filename}", err=True)
            sys.exit(1)

    return wrapper


def run_options(fn: Callable[..., Any]) -> Callable[..., Any]:
    fn = click.option("--debug", is_flag=True, help="Enable debug logging.")(fn)
    fn = click.option(
        "--out", "-o", "output", type=click.Path(file_okay=False, path_type=Path),
        help="Run directory (default: derived under $BGRPO_HOME).",
    )(fn)
    fn = click.option(
        "--config", "-c", "config_file", type=click.Path(dir_okay=False, path_type=Path),
        help="Run config file of 'dotted.key = value' lines.",
    )(fn)
    return fn


def _start_run(command: str, config_file: Path | None, overrides: dict[str, Any], debug: bool) -> tuple[RunConfig, RunDir]:
    config = build_config(config_file, overrides)
    run = RunDir.create(command, config)
    setup_logging(debug=debug, log_file=run.log_file)
    return config, run


def _epoch_writer(run: RunDir, stage: str, every: int) -> EpochHook:
    """Rewrite the report after every epoch; checkpoint every ``every`` epochs."""
    records: list[EpochRecord] = []

    def hook(epoch, params, record):
        records.append(record)
        write_report(records, run.report_file)
        if every and (epoch + 1) % every == 0:
            save_checkpoint(params, run.checkpoint(stage, epoch))

    return hook


def _optional_dataset(config: RunConfig, field: str) -> Dataset | None:
    if getattr(config.paths, field) is None:
        return None
    return load_feature_file(config.require(field))


def _teacher_for(config: RunConfig) -> TeacherSource | None:
    if config.paths.teacher is None:
        if config.reward.needs_teacher:
            raise ConfigError(f"reward {config.reward.kind} needs a teacher (--teacher or paths.teacher)")
        return None
    features = config.require("teacher_features") if config.paths.teacher_features else None
    return load_teacher(config.require("teacher"), features)


def _print_rows(title: str, rows: list[ComparisonRow]) -> None:
    table = Table(title=title)
    table.add_column("Run", style="cyan")
    table.add_column("Macro F1", justify="right")
    table.add_column("Accuracy", justify="right")
    table.add_column("vs. baseline", justify="right")
    for r in rows:
        table.add_row(r.name, f"{r.macro_f1:.4f}", f"{r.accuracy:.4f}", f"{100 * r.relative_gain:+.1f}%")
    Console().print(table)


# ── CLI Root ─────────────────────────────────────────────────────────────

@click.group(invoke_without_command=True)
@click.version_option(version=__version__, prog_name="bgrpo")
@click.pass_context
def cli(ctx: click.Context) -> None:
    """⚡ B-GRPO: batch-as-group policy optimization for classifiers"""
    if ctx.invoked_subcommand is None:
        click.echo(f"\n  {LOGO_MINI}  v{__version__}\n")
        click.echo("  Usage: bgrpo <command>")
        click.echo()
        click.echo("  Commands:")
        click.echo(click.style("    gen             ", fg="cyan") + "Generate a synthetic corpus")
        click.echo(click.style("    train-baseline  ", fg="cyan") + "Supervised warmup on the labeled half")
        click.echo(click.style("    train-bgrpo     ", fg="cyan") + "Refine a baseline without labels")
        click.echo(click.style("    eval            ", fg="cyan") + "Score a checkpoint (macro F1)")
        click.echo(click.style("    gradcheck       ", fg="cyan") + "Finite-difference gradient check")
        click.echo(click.style("    protocol        ", fg="cyan") + "Baseline vs. B-GRPO comparison")
        click.echo(click.style("    ablate          ", fg="cyan") + "Advantage or reward ablation")
        click.echo()
        click.echo(f"  Output root: {output_root()}")
        click.echo()


# ── bgrpo gen ────────────────────────────────────────────────────────────

@cli.command()
@click.option("--classes", default=6, show_default=True, type=click.IntRange(min=1), help="Number of classes N.")
@click.option("--dim", "D", default=32, show_default=True, type=click.IntRange(min=1), help="Feature dimension D.")
@click.option("--per-class", default=100, show_default=True, type=click.IntRange(min=1), help="Samples per class.")
@click.option("--seed", default=0, show_default=True, help="Generation seed.")
@click.option("--sigma", default=1.0, show_default=True, type=click.FloatRange(min=0.0, min_open=True),
              help="Per-class standard deviation.")
@click.option("--separation", default=2.0, show_default=True, type=click.FloatRange(min=0.0, min_open=True),
              help="Norm of the class means.")
@click.option("--name", default="synthetic", show_default=True, help="Corpus name (prefix of sample ids).")
@click.option("--second-view", "with_view", is_flag=True, help="Also write a rotated view for teacher models.")
@click.option("--view-seed", default=None, type=int, help="Rotation seed of the second view (default: seed + 1).")
@click.option("--noise", default=0.0, show_default=True, type=click.FloatRange(min=0.0),
              help="Extra noise std on the second view.")
@click.option("--eval-fraction", default=0.0, show_default=True, type=click.FloatRange(0.0, 1.0, max_open=True),
              help="Also split off a stratified eval file.")
@click.option("--out", "-o", "output", type=click.Path(file_okay=False, path_type=Path),
              help="Output directory (default: $BGRPO_HOME/gen-<name>-s<seed>).")
@click.option("--debug", is_flag=True, help="Enable debug logging.")
@guarded
def gen(
    classes: int, D: int, per_class: int, seed: int, sigma: float, separation: float, name: str,
    with_view: bool, view_seed: int | None, noise: float, eval_fraction: float, output: Path | None, debug: bool,
) -> None:
    """Generate a labeled Gaussian-mixture corpus."""
    setup_logging(debug=debug)
    spec = MixtureSpec(
        num_classes=classes, dim=D, separation=separation, sigma=sigma,
        per_class=per_class, seed=seed, name=name,
    )
    out = output or output_root() / f"gen-{name}-s{seed}"
    out.mkdir(parents=True, exist_ok=True)

    data = generate(spec)
    written = [write_feature_file(data, out / f"{name}.feat"), spec.save(out / f"{name}.spec.json")]
    if with_view:
        view = second_view(data, seed + 1 if view_seed is None else view_seed, noise)
        written.append(write_feature_file(view, out / f"{name}.view.feat"))
    if eval_fraction > 0:
        eval_set, train = split_half(data, eval_fraction, seed)
        written.append(write_feature_file(train, out / f"{name}.train.feat"))
        written.append(write_feature_file(eval_set, out / f"{name}.eval.feat"))

    click.echo()
    success(f"Generated {len(data)} samples (N={classes}, D={D})")
    for path in written:
        dim(str(path))
    click.echo()


# ── bgrpo train-baseline ─────────────────────────────────────────────────

@cli.command("train-baseline")
@run_options
@click.option("--train", type=click.Path(dir_okay=False, path_type=Path), help="Labeled feature file.")
@click.option("--eval", "eval_file", type=click.Path(dir_okay=False, path_type=Path), help="Eval feature file.")
@click.option("--epochs", type=click.IntRange(min=0), help="Warmup epochs.")
@click.option("--hidden", type=click.IntRange(min=1), help="Hidden size H.")
@click.option("--lr", type=float, help="Learning rate.")
@click.option("--batch-size", type=click.IntRange(min=2), help="Minibatch size.")
@click.option("--seed", type=int, help="Batch-order seed.")
@click.option("--init-seed", type=int, help="Parameter initialization seed.")
@click.option("--fraction", type=float, help="Labeled fraction of the train file.")
@guarded
def train_baseline(
    config_file: Path | None, output: Path | None, debug: bool, train: Path | None, eval_file: Path | None,
    epochs: int | None, hidden: int | None, lr: float | None, batch_size: int | None, seed: int | None,
    init_seed: int | None, fraction: float | None,
) -> None:
    """Supervised warmup on the labeled part of the train file."""
    config, run = _start_run("train-baseline", config_file, {
        "paths.train": train, "paths.eval": eval_file, "paths.output": output,
        "bgrpo.warmup_epochs": epochs, "model.hidden": hidden, "bgrpo.learning_rate": lr,
        "bgrpo.batch_size": batch_size, "bgrpo.seed": seed, "model.init_seed": init_seed,
        "split.fraction": fraction,
    }, debug)

    data = load_feature_file(config.require("train"))
    eval_set = _optional_dataset(config, "eval")
    labeled, _ = split_half(data, config.split.fraction, config.split.seed)
    init = init_params(data.dim, config.model.hidden, data.num_classes, config.model.init_seed)

    params, report = train_supervised(
        init, labeled, eval_set, config.bgrpo,
        on_epoch=_epoch_writer(run, "warmup", config.bgrpo.checkpoint_every),
    )
    save_checkpoint(params, run.final_checkpoint)
    write_report(report.records, run.report_file)
    write_summary(report, run.summary_file)

    click.echo()
    click.echo(box_top("Warmup"))
    click.echo(box_row(f"Samples:  {len(labeled)} labeled of {len(data)}"))
    click.echo(box_row(f"Epochs:   {len(report.records)}"))
    if report.final is not None:
        click.echo(box_row(f"Loss:     {report.final.loss:.4f}"))
        click.echo(box_row(f"Macro F1: {report.final.macro_f1:.4f}"))
    click.echo(box_mid())
    click.echo(box_row(f"Run:      {run.root}"))
    click.echo(box_bot())
    success(f"Checkpoint saved to {run.final_checkpoint}")
    click.echo()


# ── bgrpo train-bgrpo ────────────────────────────────────────────────────

@cli.command("train-bgrpo")
@run_options
@click.option("--baseline", type=click.Path(dir_okay=False, path_type=Path), help="Warmup checkpoint (also π_ref).")
@click.option("--train", type=click.Path(dir_okay=False, path_type=Path), help="Train file; its unlabeled half is the RL set.")
@click.option("--rl", type=click.Path(dir_okay=False, path_type=Path), help="Explicit RL feature file (labels ignored).")
@click.option("--eval", "eval_file", type=click.Path(dir_okay=False, path_type=Path), help="Eval feature file.")
@click.option("--teacher", type=click.Path(dir_okay=False, path_type=Path), help="Teacher predictions or checkpoint.")
@click.option("--teacher-features", type=click.Path(dir_okay=False, path_type=Path),
              help="Feature view for a checkpoint teacher.")
@click.option("--reward", type=click.Choice(["r1", "r2", "r3", "r4", "r5"]), help="Reward function.")
@click.option("--delta", type=float, help="Confidence threshold of r1/r4.")
@click.option("--C", "C", type=float, help="Reward value of r1/r3/r4/r5.")
@click.option("--theta", type=float, help="KL threshold of r5 (default ln(N)/2).")
@click.option("--penalty", type=float, help="Value of a failed branch reward.")
@click.option("--advantage-mode", type=click.Choice(["positive_clip", "signed", "none"]), help="Advantage variant.")
@click.option("--epsilon", type=float, help="Clip range ε.")
@click.option("--beta", type=float, help="KL coefficient β.")
@click.option("--epochs", type=click.IntRange(min=0), help="B-GRPO epochs.")
@click.option("--inner-steps", type=click.IntRange(min=1), help="Gradient steps per rollout batch.")
@click.option("--action-mode", type=click.Choice(["argmax", "sample"]), help="How actions are chosen.")
@click.option("--lr", type=float, help="Learning rate.")
@click.option("--batch-size", type=click.IntRange(min=2), help="Minibatch (= group) size.")
@click.option("--seed", type=int, help="Batch-order seed.")
@guarded
def train_bgrpo_cmd(
    config_file: Path | None, output: Path | None, debug: bool, baseline: Path | None, train: Path | None,
    rl: Path | None, eval_file: Path | None, teacher: Path | None, teacher_features: Path | None,
    reward: str | None, delta: float | None, C: float | None, theta: float | None, penalty: float | None,
    advantage_mode: str | None, epsilon: float | None, beta: float | None, epochs: int | None,
    inner_steps: int | None, action_mode: str | None, lr: float | None, batch_size: int | None, seed: int | None,
) -> None:
    """Refine a warmup checkpoint with B-GRPO on unlabeled data."""
    config = build_config(config_file, {
        "paths.baseline": baseline, "paths.train": train, "paths.rl": rl, "paths.eval": eval_file,
        "paths.teacher": teacher, "paths.teacher_features": teacher_features, "paths.output": output,
        "reward.kind": reward, "reward.delta": delta, "reward.C": C, "reward.theta": theta,
        "reward.penalty": penalty, "bgrpo.advantage_mode": advantage_mode, "bgrpo.epsilon": epsilon,
        "bgrpo.beta": beta, "bgrpo.rl_epochs": epochs, "bgrpo.inner_steps": inner_steps,
        "bgrpo.action_mode": action_mode, "bgrpo.learning_rate": lr, "bgrpo.batch_size": batch_size,
        "bgrpo.seed": seed,
    })
    # fail on config problems before anything is written
    if config.reward.needs_teacher and config.paths.teacher is None:
        raise ConfigError(f"reward {config.reward.kind} needs a teacher (--teacher or paths.teacher)")
    baseline_path = config.require("baseline")
    if config.paths.rl is None:
        config.require("train")

    run = RunDir.create("train-bgrpo", config)
    setup_logging(debug=debug, log_file=run.log_file)

    params0 = load_checkpoint(baseline_path)
    if config.paths.rl is not None:
        rl_set = load_feature_file(config.require("rl"))
    else:
        _, rl_set = split_half(load_feature_file(config.require("train")), config.split.fraction, config.split.seed)
    eval_set = _optional_dataset(config, "eval")
    teacher_src = _teacher_for(config)

    params, report = train_bgrpo(
        params0, rl_set, eval_set, config.reward, teacher_src, config.bgrpo,
        on_epoch=_epoch_writer(run, "bgrpo", config.bgrpo.checkpoint_every),
    )
    save_checkpoint(params, run.final_checkpoint)
    write_report(report.records, run.report_file)
    write_summary(report, run.summary_file)

    final = report.final
    best = report.best_epoch()
    click.echo()
    click.echo(box_top("B-GRPO"))
    click.echo(box_row(f"RL set:   {rl_set.name} ({len(rl_set)} samples)"))
    click.echo(box_row(f"Reward:   {config.reward.kind}  advantage: {config.bgrpo.advantage_mode}"))
    click.echo(box_row(f"Epochs:   {len(report.records)}"))
    if final is not None:
        click.echo(box_row(f"Reward:   {final.mean_reward:.4f} (mean, last epoch)"))
        click.echo(box_row(f"Macro F1: {final.macro_f1:.4f}"))
    if best is not None:
        click.echo(box_row(f"Best:     epoch {best.epoch + 1} ({best.macro_f1:.4f})"))
    click.echo(box_mid())
    click.echo(box_row(f"Run:      {run.root}"))
    click.echo(box_bot())
    success(f"Checkpoint saved to {run.final_checkpoint}")
    click.echo()


# ── bgrpo eval ───────────────────────────────────────────────────────────

@cli.command("eval")
@click.argument("checkpoint", type=click.Path(dir_okay=False, path_type=Path))
@click.argument("features", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--export-predictions", type=click.Path(dir_okay=False, path_type=Path),
              help="Also write the policy's distributions as a teacher prediction table.")
@click.option("--out", "-o", "output", type=click.Path(file_okay=False, path_type=Path),
              help="Run directory (default: derived under $BGRPO_HOME).")
@click.option("--debug", is_flag=True, help="Enable debug logging.")
@guarded
def eval_cmd(checkpoint: Path, features: Path, export_predictions: Path | None, output: Path | None, debug: bool) -> None:
    """Score CHECKPOINT on the labeled FEATURES file."""
    config, run = _start_run("eval", None, {
        "paths.baseline": checkpoint, "paths.eval": features, "paths.output": output,
    }, debug)
    params = load_checkpoint(config.require("baseline"))
    data = load_feature_file(config.require("eval"))

    if export_predictions is not None:
        probs = forward_batch(params, data.features).probs
        write_teacher_predictions(data.ids, probs, export_predictions)
        success(f"Predictions written to {export_predictions}")
        if not data.is_labeled:
            info("Feature file has no labels; skipping metrics")
            return

    m = evaluate(params, data)
    record = EpochRecord(
        epoch=0, stage="eval", loss=m.loss, macro_f1=m.macro_f1,
        accuracy=m.accuracy, mean_confidence=mean_confidence(params, data),
    )
    write_report([record], run.report_file)

    click.echo()
    click.echo(box_top("Evaluation"))
    click.echo(box_row(f"Samples:  {m.num_samples} ({data.name})"))
    click.echo(box_row(f"Macro F1: {m.macro_f1:.4f}"))
    click.echo(box_row(f"Accuracy: {m.accuracy:.4f}"))
    click.echo(box_row(f"NLL:      {m.loss:.4f}"))
    click.echo(box_bot())

    table = Table(title="Per-class F1")
    table.add_column("Class", justify="right")
    table.add_column("Name")
    table.add_column("F1", justify="right")
    for k, score in enumerate(m.per_class_f1):
        label = EMOTIONS[k] if data.num_classes == len(EMOTIONS) else ""
        table.add_row(str(k), label, f"{score:.4f}")
    Console().print(table)
    dim(f"Report: {run.report_file}")
    click.echo()


# ── bgrpo gradcheck ──────────────────────────────────────────────────────

@cli.command()
@click.option("--loss", "kinds", type=click.Choice(["ce", "bgrpo", "both"]), default="both", show_default=True)
@click.option("--dim", "D", default=8, show_default=True, type=click.IntRange(min=1))
@click.option("--hidden", "H", default=4, show_default=True, type=click.IntRange(min=1))
@click.option("--classes", "N", default=6, show_default=True, type=click.IntRange(min=2))
@click.option("--batch", "B", default=5, show_default=True, type=click.IntRange(min=2))
@click.option("--seed", default=0, show_default=True, help="First instance seed.")
@click.option("--instances", default=1, show_default=True, type=click.IntRange(min=1), help="Seeds to check.")
@click.option("--epsilon", default=0.2, show_default=True, type=click.FloatRange(0, 1, min_open=True, max_open=True))
@click.option("--beta", default=0.1, show_default=True, type=click.FloatRange(min=0))
@click.option("--step", "h", default=1e-5, show_default=True, type=click.FloatRange(min=0, min_open=True), help="Finite-difference step.")
@click.option("--tol", default=1e-4, show_default=True, type=click.FloatRange(min=0, min_open=True), help="Max relative error.")
@click.option("--debug", is_flag=True, help="Enable debug logging.")
@guarded
def gradcheck(
    kinds: str, D: int, H: int, N: int, B: int, seed: int, instances: int,
    epsilon: float, beta: float, h: float, tol: float, debug: bool,
) -> None:
    """Compare analytic gradients with central finite differences."""
    setup_logging(debug=debug)
    losses = ["ce", "bgrpo"] if kinds == "both" else [kinds]
    worst = 0.0
    ok = True

    click.echo()
    click.echo(box_top("Gradient Check"))
    for s in range(seed, seed + instances):
        inst = GradCheckInstance(D=D, H=H, N=N, B=B, seed=s, epsilon=epsilon, beta=beta)
        for kind in losses:
            r = grad_check(kind, inst, h=h, tol=tol)
            worst = max(worst, r.max_rel_error)
            ok = ok and r.passed
            mark = "✓" if r.passed else "✗"
            click.echo(box_row(f"{mark} {kind:<6} seed {s:<4} max rel err {r.max_rel_error:.2e}"))
    click.echo(box_bot())

    if ok:
        success(f"All gradients match (max rel error {worst:.2e} < {tol:g})")
        click.echo()
    else:
        fail(f"Gradient mismatch (max rel error {worst:.2e} >= {tol:g})")
        click.echo("error: gradcheck: analytic and numeric gradients disagree", err=True)
        sys.exit(1)


# ── bgrpo protocol / ablate ──────────────────────────────────────────────

def comparison_options(fn: Callable[..., Any]) -> Callable[..., Any]:
    fn = click.option("--synthetic", "synthetic_seed", type=int,
                      help="Use a generated 6-class corpus with this seed instead of files.")(fn)
    fn = click.option("--teacher-features", type=click.Path(dir_okay=False, path_type=Path))(fn)
    fn = click.option("--teacher", type=click.Path(dir_okay=False, path_type=Path))(fn)
    fn = click.option("--eval", "eval_file", type=click.Path(dir_okay=False, path_type=Path))(fn)
    fn = click.option("--rl", type=click.Path(dir_okay=False, path_type=Path))(fn)
    fn = click.option("--train", type=click.Path(dir_okay=False, path_type=Path))(fn)
    return run_options(fn)


def _comparison_splits(config: RunConfig, synthetic_seed: int | None) -> Splits:
    if synthetic_seed is not None:
        return synthetic_splits(MixtureSpec(seed=synthetic_seed, per_class=300))
    train = load_feature_file(config.require("train"))
    eval_set = load_feature_file(config.require("eval"))
    return protocol_splits(train, eval_set, config, _optional_dataset(config, "rl"))


def _run_name(command: str, synthetic_seed: int | None) -> str:
    return command if synthetic_seed is None else f"{command}-synthetic{synthetic_seed}"


def _comparison_overrides(output, train, rl, eval_file, teacher, teacher_features) -> dict[str, Any]:
    return {
        "paths.output": output, "paths.train": train, "paths.rl": rl, "paths.eval": eval_file,
        "paths.teacher": teacher, "paths.teacher_features": teacher_features,
    }


@cli.command()
@comparison_options
@guarded
def protocol(
    config_file: Path | None, output: Path | None, debug: bool, train: Path | None, rl: Path | None,
    eval_file: Path | None, teacher: Path | None, teacher_features: Path | None, synthetic_seed: int | None,
) -> None:
    """Baseline, same-epochs, full-labeled and B-GRPO rows."""
    config, run = _start_run(
        _run_name("protocol", synthetic_seed), config_file, _comparison_overrides(output, train, rl, eval_file, teacher, teacher_features), debug
    )
    splits = _comparison_splits(config, synthetic_seed)
    rows = run_protocol(splits, config, _teacher_for(config))
    write_comparison(rows, run.path("comparison.tsv"))

    click.echo()
    _print_rows("Protocol comparison", rows)
    dim(f"Comparison: {run.path('comparison.tsv')}")
    click.echo()


@cli.command()
@comparison_options
@click.option("--what", type=click.Choice(["advantage", "reward"]), default="advantage", show_default=True,
              help="Ablate advantage modes or compare reward functions.")
@guarded
def ablate(
    config_file: Path | None, output: Path | None, debug: bool, train: Path | None, rl: Path | None,
    eval_file: Path | None, teacher: Path | None, teacher_features: Path | None, synthetic_seed: int | None,
    what: str,
) -> None:
    """Advantage-mode ablation or reward-function comparison."""
    config, run = _start_run(
        _run_name(f"ablate-{what}", synthetic_seed), config_file,
        _comparison_overrides(output, train, rl, eval_file, teacher, teacher_features), debug,
    )
    splits = _comparison_splits(config, synthetic_seed)
    teacher_src = _teacher_for(config)
    if what == "advantage":
        rows = run_advantage_ablation(splits, config, teacher_src)
    else:
        rows = run_reward_comparison(splits, config, teacher_src)
    write_comparison(rows, run.path("comparison.tsv"))

    click.echo()
    _print_rows(f"{what.capitalize()} ablation", rows)
    dim(f"Comparison: {run.path('comparison.tsv')}")
    click.echo()


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
