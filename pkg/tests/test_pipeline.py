"""Tests for the Experiment facade."""

import pytest

from usegnet import Experiment
from usegnet.data import write_phantom_cohort
from usegnet.exceptions import ConfigError, ValidationError
from usegnet.pipeline import Cohort

SMALL = {
    "width": 4,
    "phantom_count": 3,
    "phantom_dims": "48,48,2",
    "split_train": 1,
    "split_val": 1,
    "split_test": 1,
    "batch_size": 4,
}


def small_experiment(tmp_path, **overrides):
    values = {**SMALL, "output_dir": str(tmp_path), **overrides}
    return Experiment.from_overrides(values)


class TestExperiment:
    """Test cases for Experiment."""

    def test_zero_epochs(self, tmp_path):
        """Test that an untrained run keeps the initial weights and skips testing."""
        outcome = small_experiment(tmp_path, max_epochs=0).train()

        assert outcome.fit.best_checkpoint.name == "initial.usgn"
        assert outcome.report is None
        assert outcome.files["manifest"].exists()
        assert sorted(map(len, outcome.split)) == [1, 1, 1]

    def test_train_and_report(self, tmp_path):
        """Test one epoch with a test report written next to the history."""
        outcome = small_experiment(tmp_path, max_epochs=1).train()

        assert outcome.fit.best_checkpoint.name == "best.usgn"
        assert outcome.report is not None
        assert len(outcome.report.per_volume) == 1
        assert outcome.report.per_volume[0].volume_id == outcome.split[2][0]
        assert (tmp_path / "report.txt").read_text().startswith(" ")
        assert (tmp_path / "history.csv").read_text().count("\n") == 2

    def test_finetune_stages(self, tmp_path):
        """Test that each fine-tuning stage gets its own checkpoint directory."""
        outcome = small_experiment(
            tmp_path, max_epochs=1, finetune_stages=2, stage_epochs=1
        ).train()
        checkpoints = tmp_path / "checkpoints"

        assert (checkpoints / "stage_01" / "initial.usgn").exists()
        assert (checkpoints / "stage_02" / "initial.usgn").exists()
        assert outcome.fit.best_checkpoint == checkpoints / "best.usgn"

    def test_finetune_only_run_is_reported(self, tmp_path):
        """Test that fine-tuning without a main fit still trains and reports."""
        outcome = small_experiment(
            tmp_path, max_epochs=0, finetune_stages=1, stage_epochs=2
        ).train()

        assert outcome.report is not None
        assert outcome.fit.best_epoch in (1, 2)
        assert outcome.fit.best_checkpoint == tmp_path / "checkpoints" / "best.usgn"
        assert (tmp_path / "report.csv").exists()

    def test_manifest_cohort(self, tmp_path):
        """Test that a cohort manifest replaces phantom generation."""
        manifest = write_phantom_cohort(tmp_path / "data", 2, dims=(48, 48, 2))
        split = {"split_train": 1, "split_val": 0, "split_test": 1}
        exp = Experiment.from_overrides({"manifest": str(manifest), **split})
        cohort = exp.load_cohort()

        assert cohort.ids == ["phantom_00", "phantom_01"]
        train, val, test = exp.split(cohort)
        assert val == [] and len(train) == len(test) == 1

    def test_manifest_lines_include_param_count(self, tmp_path):
        """Test that the run manifest ends with the parameter total."""
        exp = small_experiment(tmp_path)
        lines = exp.manifest_lines(exp.build_graph())
        assert lines[-1].startswith("param_count=")
        assert "width=4" in lines

    def test_config_file_and_overrides(self, tmp_path):
        """Test building from a file with an override on top."""
        path = tmp_path / "run.cfg"
        path.write_text("width=8\nmodel=segnet\n")
        exp = Experiment.from_overrides({"width": 4}, path)
        assert exp.config.width == 4
        assert exp.build_graph().name == "segnet"

    def test_unknown_override(self):
        """Test that unknown keys raise ConfigError."""
        with pytest.raises(ConfigError):
            Experiment.from_overrides({"epochs": 3})

    def test_cohort_select_unknown(self):
        """Test that selecting a missing id raises ValidationError."""
        with pytest.raises(ValidationError, match="Unknown volume ids"):
            Cohort().select(["ghost"])


@pytest.mark.slow
def test_desk_scale_experiment(tmp_path):
    """Test U-SegNet on 6/3/9 phantoms: weighted Dice >= 80 and >= SegNet."""
    settings = {
        "width": 8,
        "max_epochs": 15,
        "batch_size": 16,
        "phantom_count": 18,
        "phantom_dims": "64,64,16",
        "seed": 0,
    }
    scores = {}
    for model in ("segnet", "usegnet"):
        exp = Experiment.from_overrides(
            {**settings, "model": model, "output_dir": str(tmp_path / model)}
        )
        outcome = exp.train()
        scores[model] = outcome.report.weighted

    assert scores["usegnet"] >= 80.0
    assert scores["usegnet"] >= scores["segnet"]
