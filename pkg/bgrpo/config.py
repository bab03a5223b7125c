"""
B-GRPO Configuration
=====================

Pydantic configuration for training runs.

Sources, highest precedence first: command-line flags, a run-config file of
``dotted.key = value`` lines, model defaults. The output root comes from
``BGRPO_HOME`` (default ``./runs``).
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from bgrpo.errors import ConfigError

logger = logging.getLogger(__name__)

RewardKind = Literal["r1", "r2", "r3", "r4", "r5"]
AdvantageMode = Literal["positive_clip", "signed", "none"]
TEACHER_REWARDS: frozenset[str] = frozenset({"r3", "r4", "r5"})


class EnvSettings(BaseSettings):
    """Environment overrides (``BGRPO_HOME``)."""
    model_config = SettingsConfigDict(env_prefix="BGRPO_")

    home: Path = Path("runs")


class PathsConfig(BaseModel):
    train: Path | None = None
    rl: Path | None = None          # unset = unlabeled half of `train`
    eval: Path | None = None
    teacher: Path | None = None     # prediction table or checkpoint
    teacher_features: Path | None = None
    baseline: Path | None = None    # warmup checkpoint, also π_ref
    output: Path | None = None      # unset = derived under BGRPO_HOME


class ModelConfig(BaseModel):
    hidden: int = Field(default=128, ge=1)
    init_seed: int = 0


class SplitConfig(BaseModel):
    fraction: float = Field(default=0.5, gt=0.0, lt=1.0)
    seed: int = 0


class OptimizerConfig(BaseModel):
    kind: Literal["adam", "sgd"] = "adam"
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    eps: float = Field(default=1e-8, gt=0.0)


class RewardConfig(BaseModel):
    """Reward kind r1..r5 and its constants.

    ``theta`` left unset resolves to ln(N)/2, half the KL between a one-hot
    and the uniform distribution.
    """
    kind: RewardKind = "r1"
    C: float = Field(default=1.0, gt=0.0)
    delta: float = Field(default=0.5, ge=0.0, lt=1.0)
    theta: float | None = Field(default=None, gt=0.0)
    penalty: float = Field(default=0.0, le=0.0)

    @property
    def needs_teacher(self) -> bool:
        return self.kind in TEACHER_REWARDS

    def resolved_theta(self, num_classes: int) -> float:
        if self.theta is not None:
            return self.theta
        return math.log(num_classes) / 2.0 if num_classes > 1 else 1.0


class BGRPOConfig(BaseModel):
    epsilon: float = Field(default=0.2, gt=0.0, lt=1.0)
    beta: float = Field(default=0.04, ge=0.0)
    batch_size: int = Field(default=32, ge=2)
    eps_std: float = Field(default=1e-8, gt=0.0)
    advantage_mode: AdvantageMode = "positive_clip"
    learning_rate: float = Field(default=1e-4, gt=0.0)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    warmup_epochs: int = Field(default=100, ge=0)
    rl_epochs: int = Field(default=100, ge=0)
    inner_steps: int = Field(default=1, ge=1)
    action_mode: Literal["argmax", "sample"] = "argmax"
    checkpoint_every: int = Field(default=0, ge=0)
    seed: int = 0


class RunConfig(BaseModel):
    model_config = {"extra": "forbid"}
    paths: PathsConfig = Field(default_factory=PathsConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    split: SplitConfig = Field(default_factory=SplitConfig)
    bgrpo: BGRPOConfig = Field(default_factory=BGRPOConfig)
    reward: RewardConfig = Field(default_factory=RewardConfig)

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True) + "\n")
        logger.debug("Config snapshot saved to %s", path)
        return path

    def require(self, field: str) -> Path:
        """Return ``paths.<field>``, insisting that it is set and exists."""
        value = getattr(self.paths, field)
        if value is None:
            raise ConfigError(f"paths.{field} is not set")
        if not Path(value).exists():
            raise ConfigError(f"paths.{field}: file not found: {value}")
        return Path(value)

    def fingerprint(self) -> str:
        """Short stable hash of the effective configuration."""
        blob = json.dumps(self.model_dump(mode="json"), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:12]


# ── Config file and dotted overrides ─────────────────────────────────────

def _coerce(old: Any, value: str, key: str, optional: bool) -> Any:
    # Only None-defaulted fields can be cleared; "none" is also an advantage mode.
    if optional and value.lower() in ("none", "null", ""):
        return None
    if old is None:
        return value
    if isinstance(old, bool):
        return value.lower() in ("true", "1", "yes")
    try:
        if isinstance(old, int):
            return int(value)
        if isinstance(old, float):
            return float(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r} as {type(old).__name__}") from None
    return value


_DEFAULTS: dict[str, Any] = RunConfig().model_dump(mode="python")


def set_dotted(data: dict[str, Any], key: str, value: Any) -> None:
    """Set ``a.b.c`` in a nested dict, coercing strings against the existing value."""
    parts = key.split(".")
    target, defaults = data, _DEFAULTS
    for p in parts[:-1]:
        if not isinstance(target.get(p), dict):
            raise ConfigError(f"Unknown config key: {key}")
        target, defaults = target[p], defaults[p]

    final_key = parts[-1]
    if final_key not in target:
        raise ConfigError(f"Unknown config key: {key}")
    if isinstance(value, str):
        value = _coerce(target[final_key], value, key, defaults[final_key] is None)
    target[final_key] = value


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse ``key = value`` lines. ``#`` starts a comment."""
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        entries[key] = value
    return entries


def build_config(
    config_file: str | Path | None = None,
    overrides: dict[str, Any] | None = None,
) -> RunConfig:
    """Defaults, then the config file, then ``overrides`` (None values are skipped)."""
    data = RunConfig().model_dump(mode="python")

    if config_file is not None:
        path = Path(config_file)
        if not path.exists():
            raise ConfigError(f"Config file not found: {path}")
        try:
            text = path.read_text(encoding="utf-8")
        except UnicodeDecodeError:
            raise ConfigError(f"{path}: not valid UTF-8") from None
        for key, value in parse_config_text(text, str(path)).items():
            set_dotted(data, key, value)

    for key, value in (overrides or {}).items():
        if value is not None:
            set_dotted(data, key, value)

    try:
        return RunConfig(**data)
    except ValidationError as e:
        first = e.errors()[0]
        loc = ".".join(str(p) for p in first["loc"])
        raise ConfigError(f"{loc}: {first['msg']}") from None


def output_root() -> Path:
    return EnvSettings().home
