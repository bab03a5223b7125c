"""Two-stage training: warmup, then label-free B-GRPO."""

from dataclasses import replace

import numpy as np
import pytest

from bgrpo.config import RewardConfig
from bgrpo.data.features import Dataset, split_half
from bgrpo.data.synthetic import second_view
from bgrpo.errors import ConfigError, DimensionError
from bgrpo.metrics import evaluate
from bgrpo.models.policy import init_params
from bgrpo.models.teacher import CheckpointTeacher
from bgrpo.training.trainer import train_bgrpo, train_supervised


@pytest.fixture
def halves(small_data):
    return split_half(small_data, 0.5, seed=0)


@pytest.fixture
def baseline(halves, fast_bgrpo):
    labeled, _ = halves
    init = init_params(labeled.dim, 8, labeled.num_classes, seed=0)
    params, _ = train_supervised(init, labeled, None, fast_bgrpo)
    return params


class TestSupervised:
    """Cross-entropy warmup."""

    def test_loss_goes_down(self, halves, fast_bgrpo):
        labeled, eval_set = halves
        init = init_params(labeled.dim, 8, labeled.num_classes, seed=0)
        _, report = train_supervised(init, labeled, eval_set, fast_bgrpo, epochs=30)
        assert len(report.records) == 30
        assert report.records[-1].loss < report.records[0].loss
        assert 0.0 <= report.records[-1].macro_f1 <= 1.0

    def test_zero_epochs_returns_initialization(self, halves, fast_bgrpo):
        labeled, _ = halves
        init = init_params(labeled.dim, 8, labeled.num_classes, seed=4)
        params, report = train_supervised(init, labeled, None, fast_bgrpo, epochs=0)
        assert params.digest() == init.digest()
        assert params is not init
        assert report.records == []

    def test_hook_sees_every_epoch(self, halves, fast_bgrpo):
        labeled, _ = halves
        seen = []
        train_supervised(
            init_params(labeled.dim, 8, labeled.num_classes, seed=0), labeled, None, fast_bgrpo,
            epochs=3, on_epoch=lambda epoch, params, record: seen.append((epoch, record.stage)),
        )
        assert seen == [(0, "warmup"), (1, "warmup"), (2, "warmup")]

    def test_dimension_mismatch(self, halves, fast_bgrpo):
        labeled, _ = halves
        with pytest.raises(DimensionError):
            train_supervised(init_params(labeled.dim + 1, 8, labeled.num_classes, seed=0), labeled, None, fast_bgrpo)

    def test_fits_separable_data(self, make_dataset, fast_bgrpo):
        rng = np.random.default_rng(0)
        means = np.eye(3, 4) * 6.0
        labels = np.repeat(np.arange(3), 30)
        data = make_dataset(means[labels] + 0.5 * rng.normal(size=(90, 4)), labels.tolist())
        params, _ = train_supervised(init_params(4, 8, 3, seed=0), data, None, fast_bgrpo, epochs=50)
        assert evaluate(params, data).accuracy > 0.95


class TestBGRPO:
    """Refinement without labels."""

    def test_report_fields(self, baseline, halves, fast_bgrpo):
        _, rl = halves
        _, report = train_bgrpo(baseline, rl, rl, RewardConfig(), None, fast_bgrpo)
        assert [r.epoch for r in report.records] == [0, 1, 2]
        for r in report.records:
            assert r.stage == "bgrpo"
            assert 0.0 <= r.frac_pos_adv <= 1.0
            assert 0.0 <= r.frac_degenerate_batches <= 1.0
            assert 0.0 <= r.mean_reward <= 1.0
            assert 0.0 < r.mean_confidence <= 1.0

    def test_reference_and_baseline_are_untouched(self, baseline, halves, fast_bgrpo):
        _, rl = halves
        before = baseline.digest()
        params, report = train_bgrpo(baseline, rl, None, RewardConfig(kind="r2"), None, fast_bgrpo)
        assert baseline.digest() == before
        assert report.reference_digest == before
        assert params.digest() != before

    def test_gold_labels_of_rl_set_are_ignored(self, baseline, halves, fast_bgrpo):
        _, rl = halves
        rng = np.random.default_rng(99)
        scrambled = Dataset(
            samples=[replace(s, label=int(rng.integers(0, rl.num_classes))) for s in rl.samples],
            dim=rl.dim, num_classes=rl.num_classes, name=rl.name,
        )
        a, report_a = train_bgrpo(baseline, rl, None, RewardConfig(), None, fast_bgrpo)
        b, report_b = train_bgrpo(baseline, scrambled, None, RewardConfig(), None, fast_bgrpo)
        assert a.digest() == b.digest()
        assert [r.to_row() for r in report_a.records] == [r.to_row() for r in report_b.records]

    def test_unlabeled_rl_set_is_accepted(self, baseline, halves, fast_bgrpo):
        _, rl = halves
        a, _ = train_bgrpo(baseline, rl, None, RewardConfig(), None, fast_bgrpo)
        b, _ = train_bgrpo(baseline, rl.without_labels(), None, RewardConfig(), None, fast_bgrpo)
        assert a.digest() == b.digest()

    @pytest.mark.parametrize("action_mode", ["argmax", "sample"])
    def test_deterministic(self, baseline, halves, fast_bgrpo, action_mode):
        _, rl = halves
        cfg = fast_bgrpo.model_copy(update={"action_mode": action_mode, "inner_steps": 2})
        a, ra = train_bgrpo(baseline, rl, rl, RewardConfig(kind="r2"), None, cfg)
        b, rb = train_bgrpo(baseline, rl, rl, RewardConfig(kind="r2"), None, cfg)
        assert a.digest() == b.digest()
        assert [r.to_row() for r in ra.records] == [r.to_row() for r in rb.records]

    def test_all_rewarded_batches_leave_policy_unchanged(self, baseline, halves, fast_bgrpo):
        """δ = 0 rewards every sample, so every batch is degenerate."""
        _, rl = halves
        params, report = train_bgrpo(baseline, rl, None, RewardConfig(kind="r1", delta=0.0), None, fast_bgrpo)
        assert params.digest() == baseline.digest()
        for r in report.records:
            assert r.frac_degenerate_batches == 1.0
            assert r.frac_pos_adv == 0.0
            assert r.mean_reward == 1.0

    def test_self_confidence_reward_sharpens_the_policy(self, baseline, halves, fast_bgrpo):
        _, rl = halves
        cfg = fast_bgrpo.model_copy(update={"advantage_mode": "none", "beta": 0.0, "learning_rate": 1e-3})
        _, report = train_bgrpo(baseline, rl, None, RewardConfig(kind="r2"), None, cfg, epochs=40)
        confidence = [r.mean_confidence for r in report.records]
        assert np.mean(confidence[20:]) > np.mean(confidence[:20])

    def test_teacher_reward_needs_teacher(self, baseline, halves, fast_bgrpo):
        _, rl = halves
        with pytest.raises(ConfigError):
            train_bgrpo(baseline, rl, None, RewardConfig(kind="r3"), None, fast_bgrpo)

    @pytest.mark.parametrize("kind", ["r3", "r4", "r5"])
    def test_checkpoint_teacher_over_second_view(self, baseline, halves, fast_bgrpo, kind):
        labeled, rl = halves
        view = second_view(rl, rotation_seed=5)
        teacher_params, _ = train_supervised(
            init_params(view.dim, 8, view.num_classes, seed=1), second_view(labeled, rotation_seed=5), None, fast_bgrpo
        )
        teacher = CheckpointTeacher(teacher_params, view, name="view-teacher")
        before = teacher.frozen.params.digest()
        _, report = train_bgrpo(baseline, rl, None, RewardConfig(kind=kind), teacher, fast_bgrpo)
        assert len(report.records) == fast_bgrpo.rl_epochs
        assert teacher.frozen.params.digest() == before

    def test_empty_rl_set(self, baseline, halves, fast_bgrpo):
        _, rl = halves
        with pytest.raises(ConfigError):
            train_bgrpo(baseline, rl.subset([]), None, RewardConfig(), None, fast_bgrpo)
