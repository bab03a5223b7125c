"""Shared fixtures: tiny synthetic corpora and fast run configs."""

import logging

import numpy as np
import pytest

from bgrpo.config import BGRPOConfig, ModelConfig, RewardConfig, RunConfig
from bgrpo.data.features import Dataset, UtteranceSample
from bgrpo.data.synthetic import MixtureSpec, generate


@pytest.fixture(autouse=True)
def _isolate(tmp_path, monkeypatch):
    """Keep runs under tmp_path and drop handlers bound to captured streams."""
    monkeypatch.setenv("BGRPO_HOME", str(tmp_path / "runs"))
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()


@pytest.fixture
def make_dataset():
    def _make(X, labels=None, name="toy", num_classes=None):
        X = np.asarray(X, dtype=np.float64)
        if labels is None:
            labels = [None] * len(X)
        n_cls = num_classes or (max(l for l in labels if l is not None) + 1 if any(l is not None for l in labels) else 2)
        samples = [
            UtteranceSample(id=f"{name}-{i}", features=X[i], label=labels[i], corpus=name)
            for i in range(len(X))
        ]
        return Dataset(samples=samples, dim=X.shape[1], num_classes=n_cls, name=name)

    return _make


@pytest.fixture
def small_spec():
    return MixtureSpec(num_classes=3, dim=4, per_class=20, separation=3.0, seed=0, name="small")


@pytest.fixture
def small_data(small_spec):
    return generate(small_spec)


@pytest.fixture
def fast_bgrpo():
    return BGRPOConfig(
        batch_size=8,
        learning_rate=1e-2,
        warmup_epochs=4,
        rl_epochs=3,
        seed=0,
    )


@pytest.fixture
def fast_config(fast_bgrpo):
    return RunConfig(model=ModelConfig(hidden=8), bgrpo=fast_bgrpo, reward=RewardConfig())
