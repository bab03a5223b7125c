"""Command-line interface, driven through click's CliRunner."""

import logging

import numpy as np
import pytest
from click.testing import CliRunner

from bgrpo.cli import cli
from bgrpo.data.features import load_feature_file, write_feature_file
from bgrpo.models.policy import CHECKPOINT_MAGIC, PolicyParams, init_params, load_checkpoint, save_checkpoint
from bgrpo.report import read_report

FAST = ["--hidden", "8", "--lr", "0.01", "--batch-size", "8"]


@pytest.fixture
def run():
    runner = CliRunner()

    def _invoke(*args):
        result = runner.invoke(cli, [str(a) for a in args], catch_exceptions=False)
        root = logging.getLogger()
        for handler in list(root.handlers):
            root.removeHandler(handler)
        return result

    return _invoke


@pytest.fixture
def corpus(run, tmp_path):
    out = tmp_path / "data"
    result = run("gen", "--classes", 3, "--dim", 4, "--per-class", 20, "--seed", 0,
                 "--separation", 3.0, "--eval-fraction", 0.25, "--second-view", "--out", out)
    assert result.exit_code == 0, result.output
    return out


@pytest.fixture
def baseline_ckpt(run, corpus, tmp_path):
    result = run("train-baseline", "--train", corpus / "synthetic.train.feat", "--epochs", 3,
                 *FAST, "--out", tmp_path / "warm")
    assert result.exit_code == 0, result.output
    return tmp_path / "warm" / "policy.ckpt"


class TestRoot:
    def test_banner_lists_commands(self, run):
        result = run()
        assert result.exit_code == 0
        for name in ("gen", "train-baseline", "train-bgrpo", "eval", "gradcheck"):
            assert name in result.output

    def test_version(self, run):
        assert "0.1.0" in run("--version").output


class TestGen:
    def test_writes_requested_size(self, run, tmp_path):
        result = run("gen", "--classes", 6, "--dim", 32, "--per-class", 200, "--seed", 1, "--out", tmp_path)
        assert result.exit_code == 0, result.output
        data = load_feature_file(tmp_path / "synthetic.feat")
        assert len(data) == 1200
        assert (tmp_path / "synthetic.spec.json").exists()

    def test_second_view_has_same_ids(self, corpus):
        base = load_feature_file(corpus / "synthetic.feat")
        view = load_feature_file(corpus / "synthetic.view.feat")
        assert base.ids == view.ids
        assert not np.array_equal(base.features, view.features)

    def test_eval_split(self, corpus):
        assert len(load_feature_file(corpus / "synthetic.eval.feat")) == 15
        assert len(load_feature_file(corpus / "synthetic.train.feat")) == 45

    @pytest.mark.parametrize("sigma", ["0", "-1"])
    def test_nonpositive_sigma_is_a_usage_error(self, run, tmp_path, sigma):
        result = run("gen", "--sigma", sigma, "--out", tmp_path)
        assert result.exit_code == 2
        assert not (tmp_path / "synthetic.feat").exists()

    def test_output_is_reproducible(self, run, tmp_path):
        run("gen", "--per-class", 5, "--seed", 3, "--out", tmp_path / "a")
        run("gen", "--per-class", 5, "--seed", 3, "--out", tmp_path / "b")
        assert (tmp_path / "a" / "synthetic.feat").read_bytes() == (tmp_path / "b" / "synthetic.feat").read_bytes()


class TestTrainBaseline:
    def test_writes_run_directory(self, baseline_ckpt):
        run_dir = baseline_ckpt.parent
        for name in ("config.json", "run.log", "report.tsv", "summary.json", "policy.ckpt"):
            assert (run_dir / name).exists(), name
        records = read_report(run_dir / "report.tsv")
        assert [r.stage for r in records] == ["warmup"] * 3

    def test_zero_epochs_saves_initialization(self, run, corpus, tmp_path):
        result = run("train-baseline", "--train", corpus / "synthetic.train.feat", "--epochs", 0,
                     "--hidden", 8, "--init-seed", 5, "--out", tmp_path / "zero")
        assert result.exit_code == 0, result.output
        params = load_checkpoint(tmp_path / "zero" / "policy.ckpt")
        assert params.digest() == init_params(4, 8, 3, seed=5).digest()

    def test_missing_train_file_names_path(self, run, tmp_path):
        result = run("train-baseline", "--train", tmp_path / "absent.feat")
        assert result.exit_code == 2
        assert "error: config:" in result.output
        assert "absent.feat" in result.output

    def test_config_file_and_flag_precedence(self, run, corpus, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text(f"paths.train = {corpus / 'synthetic.train.feat'}\nbgrpo.warmup_epochs = 5\nmodel.hidden = 8\n")
        result = run("train-baseline", "--config", conf, "--epochs", 2, "--out", tmp_path / "prec")
        assert result.exit_code == 0, result.output
        assert len(read_report(tmp_path / "prec" / "report.tsv")) == 2

    def test_checkpoint_every(self, run, corpus, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("bgrpo.checkpoint_every = 2\n")
        result = run("train-baseline", "--config", conf, "--train", corpus / "synthetic.train.feat",
                     "--epochs", 4, *FAST, "--out", tmp_path / "ck")
        assert result.exit_code == 0, result.output
        names = sorted(p.name for p in (tmp_path / "ck" / "checkpoints").iterdir())
        assert names == ["warmup-epoch0002.ckpt", "warmup-epoch0004.ckpt"]


class TestTrainBGRPO:
    def test_default_reward_run(self, run, corpus, baseline_ckpt, tmp_path):
        result = run("train-bgrpo", "--baseline", baseline_ckpt, "--train", corpus / "synthetic.train.feat",
                     "--eval", corpus / "synthetic.eval.feat", "--reward", "r1", "--delta", 0.5, "--C", 1,
                     "--epochs", 2, *FAST[2:], "--out", tmp_path / "rl")
        assert result.exit_code == 0, result.output
        records = read_report(tmp_path / "rl" / "report.tsv")
        assert [r.stage for r in records] == ["bgrpo", "bgrpo"]
        assert (tmp_path / "rl" / "policy.ckpt").exists()

    def test_teacher_reward_without_teacher(self, run, baseline_ckpt, corpus, tmp_path):
        result = run("train-bgrpo", "--baseline", baseline_ckpt, "--train", corpus / "synthetic.train.feat",
                     "--reward", "r3", "--out", tmp_path / "r3")
        assert result.exit_code == 2
        assert "error: config: reward r3 needs a teacher" in result.output
        assert not (tmp_path / "r3").exists()

    @pytest.mark.parametrize("mode", ["signed", "none"])
    def test_advantage_modes(self, run, corpus, baseline_ckpt, tmp_path, mode):
        result = run("train-bgrpo", "--baseline", baseline_ckpt, "--rl", corpus / "synthetic.eval.feat",
                     "--advantage-mode", mode, "--epochs", 1, "--batch-size", 4, "--out", tmp_path / mode)
        assert result.exit_code == 0, result.output

    def test_exported_predictions_serve_as_teacher(self, run, corpus, baseline_ckpt, tmp_path):
        table = tmp_path / "teacher.pred"
        result = run("eval", baseline_ckpt, corpus / "synthetic.train.feat", "--export-predictions", table)
        assert result.exit_code == 0, result.output
        result = run("train-bgrpo", "--baseline", baseline_ckpt, "--train", corpus / "synthetic.train.feat",
                     "--teacher", table, "--reward", "r4", "--epochs", 1, "--batch-size", 8, "--out", tmp_path / "r4")
        assert result.exit_code == 0, result.output

    def test_checkpoint_teacher_needs_its_features(self, run, corpus, baseline_ckpt, tmp_path):
        result = run("train-bgrpo", "--baseline", baseline_ckpt, "--train", corpus / "synthetic.train.feat",
                     "--teacher", baseline_ckpt, "--reward", "r5", "--epochs", 1, "--out", tmp_path / "r5")
        assert result.exit_code == 2
        assert "teacher feature file" in result.output


class TestEval:
    @pytest.fixture
    def perfect(self, tmp_path):
        params = PolicyParams(np.eye(2), np.zeros(2), np.eye(2) * 10.0, np.zeros(2))
        ckpt = save_checkpoint(params, tmp_path / "perfect.ckpt")
        feats = tmp_path / "sep.feat"
        feats.write_text("# dim=2 classes=2\na\t0\t5 0\nb\t1\t0 5\nc\t0\t4 0\nd\t1\t0 3\n")
        return ckpt, feats

    def test_perfect_model(self, run, perfect, tmp_path):
        ckpt, feats = perfect
        result = run("eval", ckpt, feats, "--out", tmp_path / "ev")
        assert result.exit_code == 0, result.output
        assert "Macro F1: 1.0000" in result.output
        records = read_report(tmp_path / "ev" / "report.tsv")
        assert records[0].stage == "eval"
        assert records[0].macro_f1 == 1.0

    def test_dimension_mismatch(self, run, perfect, tmp_path, small_data):
        ckpt, _ = perfect
        feats = write_feature_file(small_data, tmp_path / "wide.feat")
        result = run("eval", ckpt, feats)
        assert result.exit_code == 1
        assert "error: dimension:" in result.output

    def test_corrupt_checkpoint(self, run, perfect, tmp_path):
        _, feats = perfect
        bad = tmp_path / "bad.ckpt"
        bad.write_bytes(b"garbage")
        result = run("eval", bad, feats)
        assert result.exit_code == 1
        assert "error: checkpoint:" in result.output

    def test_checkpoint_header_without_sizes(self, run, perfect, tmp_path):
        _, feats = perfect
        bad = tmp_path / "headless.ckpt"
        bad.write_bytes(CHECKPOINT_MAGIC + b'{"format_version": 1}\n')
        result = run("eval", bad, feats)
        assert result.exit_code == 1
        assert "error: checkpoint:" in result.output
        assert "missing D" in result.output

    def test_undecodable_features(self, run, perfect, tmp_path):
        ckpt, _ = perfect
        feats = tmp_path / "latin.feat"
        feats.write_bytes(b"# dim=2 classes=2\na\t0\t5 0\xff\n")
        result = run("eval", ckpt, feats)
        assert result.exit_code == 1
        assert "error: feature-format:" in result.output
        assert "latin.feat:2:" in result.output


class TestGradcheck:
    def test_defaults_pass(self, run):
        result = run("gradcheck")
        assert result.exit_code == 0, result.output
        assert "All gradients match" in result.output

    @pytest.mark.parametrize("loss", ["ce", "bgrpo"])
    def test_single_loss(self, run, loss):
        result = run("gradcheck", "--loss", loss, "--instances", 2)
        assert result.exit_code == 0, result.output

    def test_failure_exits_one(self, run):
        result = run("gradcheck", "--tol", "1e-300")
        assert result.exit_code == 1
        assert "error: gradcheck:" in result.output

    @pytest.mark.parametrize("flag,value", [("--epsilon", "0"), ("--epsilon", "1"), ("--beta", "-0.1")])
    def test_out_of_range_loss_settings_are_usage_errors(self, run, flag, value):
        result = run("gradcheck", flag, value)
        assert result.exit_code == 2
        assert "Invalid value" in result.output


class TestDeterminism:
    def test_pipeline_is_bitwise_reproducible(self, run, corpus, tmp_path):
        outputs = []
        for tag in ("one", "two"):
            warm, rl = tmp_path / f"warm-{tag}", tmp_path / f"rl-{tag}"
            run("train-baseline", "--train", corpus / "synthetic.train.feat", "--eval", corpus / "synthetic.eval.feat",
                "--epochs", 3, *FAST, "--out", warm)
            run("train-bgrpo", "--baseline", warm / "policy.ckpt", "--train", corpus / "synthetic.train.feat",
                "--eval", corpus / "synthetic.eval.feat", "--epochs", 2, *FAST[2:], "--out", rl)
            outputs.append([(d / name).read_bytes() for d in (warm, rl) for name in ("report.tsv", "policy.ckpt")])
        assert outputs[0] == outputs[1]


class TestComparisons:
    def test_protocol_rows(self, run, corpus, tmp_path):
        conf = tmp_path / "fast.conf"
        conf.write_text(
            "model.hidden = 8\nbgrpo.warmup_epochs = 2\nbgrpo.rl_epochs = 2\n"
            "bgrpo.batch_size = 8\nbgrpo.learning_rate = 0.01\n"
        )
        result = run("protocol", "--config", conf, "--train", corpus / "synthetic.train.feat",
                     "--eval", corpus / "synthetic.eval.feat", "--out", tmp_path / "proto")
        assert result.exit_code == 0, result.output
        rows = (tmp_path / "proto" / "comparison.tsv").read_text().splitlines()
        assert [r.split("\t")[0] for r in rows] == ["name", "baseline", "same-epochs", "full-labeled", "b-grpo"]

    def test_advantage_ablation_rows(self, run, corpus, tmp_path):
        conf = tmp_path / "fast.conf"
        conf.write_text("model.hidden = 8\nbgrpo.warmup_epochs = 2\nbgrpo.rl_epochs = 1\nbgrpo.batch_size = 8\n")
        result = run("ablate", "--config", conf, "--train", corpus / "synthetic.train.feat",
                     "--eval", corpus / "synthetic.eval.feat", "--out", tmp_path / "abl")
        assert result.exit_code == 0, result.output
        rows = (tmp_path / "abl" / "comparison.tsv").read_text().splitlines()
        assert [r.split("\t")[0] for r in rows[1:]] == ["positive_clip", "signed", "none"]
