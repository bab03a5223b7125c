"""Frozen teacher sources."""

import numpy as np
import pytest

from bgrpo.data.features import write_feature_file, write_teacher_predictions
from bgrpo.data.synthetic import second_view
from bgrpo.errors import ConfigError, DimensionError, TeacherCoverageError
from bgrpo.models.policy import forward_batch, init_params, save_checkpoint
from bgrpo.models.teacher import CheckpointTeacher, TableTeacher, load_teacher


class TestCheckpointTeacher:
    def test_predictions_match_forward_pass(self, small_data):
        view = second_view(small_data, rotation_seed=1)
        params = init_params(view.dim, 5, view.num_classes, seed=2)
        teacher = CheckpointTeacher(params, view)
        ids = view.ids[::7]
        expected = forward_batch(params, view.features[::7]).probs
        np.testing.assert_array_equal(teacher.distributions(ids), expected)

    def test_later_updates_do_not_leak_in(self, small_data):
        params = init_params(small_data.dim, 5, small_data.num_classes, seed=2)
        teacher = CheckpointTeacher(params, small_data)
        before = teacher.distributions(small_data.ids[:3]).copy()
        params.W2 *= -1.0
        np.testing.assert_array_equal(teacher.distributions(small_data.ids[:3]), before)

    def test_unknown_id(self, small_data):
        teacher = CheckpointTeacher(init_params(small_data.dim, 5, small_data.num_classes, seed=0), small_data)
        with pytest.raises(TeacherCoverageError, match="nope"):
            teacher.distributions(["nope"])

    def test_dimension_mismatch(self, small_data):
        with pytest.raises(DimensionError):
            CheckpointTeacher(init_params(small_data.dim + 2, 5, small_data.num_classes, seed=0), small_data)

    def test_agreement_with_itself(self, small_data):
        params = init_params(small_data.dim, 5, small_data.num_classes, seed=0)
        teacher = CheckpointTeacher(params, small_data)
        probs = forward_batch(params, small_data.features).probs
        assert teacher.agreement(small_data.ids, probs) == 1.0


class TestLoadTeacher:
    def test_prediction_table(self, tmp_path):
        path = write_teacher_predictions(["a", "b"], np.array([[0.9, 0.1], [0.3, 0.7]]), tmp_path / "t.pred")
        teacher = load_teacher(path)
        assert isinstance(teacher, TableTeacher)
        assert teacher.name == "t"
        np.testing.assert_allclose(teacher.distributions(["b"]), [[0.3, 0.7]])

    def test_checkpoint_with_features(self, tmp_path, small_data):
        ckpt = save_checkpoint(init_params(small_data.dim, 5, small_data.num_classes, seed=0), tmp_path / "t.ckpt")
        feats = write_feature_file(small_data, tmp_path / "view.feat")
        teacher = load_teacher(ckpt, feats)
        assert isinstance(teacher, CheckpointTeacher)
        assert teacher.distributions(small_data.ids).shape == (len(small_data), small_data.num_classes)

    def test_checkpoint_without_features(self, tmp_path):
        ckpt = save_checkpoint(init_params(3, 5, 2, seed=0), tmp_path / "t.ckpt")
        with pytest.raises(ConfigError, match="teacher feature file"):
            load_teacher(ckpt)
