"""Tests for the command-line interface."""

from pathlib import Path
from unittest import mock

import numpy as np
import pytest

from usegnet.cli import build_parser, main, train_overrides
from usegnet.data import RawElement, save_raw
from usegnet.pipeline import Experiment

SMALL_RUN = [
    "--width",
    "4",
    "--phantom-count",
    "3",
    "--phantom-dims",
    "48,48,2",
    "--split",
    "1,1,1",
    "--batch-size",
    "4",
]


@pytest.fixture
def cohort_dir(tmp_path):
    """One small phantom pair written as raw payloads."""
    out = tmp_path / "cohort"
    args = ["phantom", "--count", "1", "--dims", "48,48,2", "--out", str(out)]
    assert main(args) == 0
    return out


class TestParser:
    """Test cases for argument parsing."""

    def test_no_command(self, capsys):
        """Test that a bare invocation prints help and exits 1."""
        assert main([]) == 1
        assert "usage" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        """Test that argument errors exit 1 instead of argparse's 2."""
        assert main(["params", "--bogus"]) == 1
        assert "unrecognized arguments" in capsys.readouterr().err

    def test_bad_dims(self):
        """Test that --dims needs three positive integers."""
        assert main(["phantom", "--dims", "48,48", "--out", "x"]) == 1

    def test_version(self, capsys):
        """Test that --version prints the package version."""
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert "0.1.0" in capsys.readouterr().out

    def test_train_overrides(self):
        """Test flag-to-key mapping, --split and --set."""
        args = build_parser().parse_args(
            [
                "train",
                "--epochs",
                "5",
                "--lr",
                "0.01",
                "--split",
                "2,0,1",
                "--set",
                "noise_std=0.2",
                "--out",
                "runs/x",
            ]
        )
        overrides = train_overrides(args)

        assert overrides["max_epochs"] == 5
        assert overrides["learning_rate"] == 0.01
        assert overrides["output_dir"] == "runs/x"
        assert overrides["noise_std"] == "0.2"
        assert (
            overrides["split_train"],
            overrides["split_val"],
            overrides["split_test"],
        ) == (2, 0, 1)
        assert "momentum" not in overrides


class TestCommands:
    """Test cases for the subcommands."""

    @pytest.mark.parametrize(
        "model,total", [("segnet", 3_475_396), ("usegnet", 3_483_652)]
    )
    def test_params(self, capsys, model, total):
        """Test the printed parameter totals."""
        assert main(["params", "--model", model]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[-1] == f"total {total}"
        assert out[0].split()[0] == "enc1_conv1"

    def test_phantom_zero_count(self, tmp_path):
        """Test that --count 0 writes a header-only manifest."""
        out = tmp_path / "empty"
        assert main(["phantom", "--count", "0", "--out", str(out)]) == 0
        assert (out / "cohort.csv").read_text().count("\n") == 1

    def test_phantom_negative_count(self, tmp_path):
        """Test that a negative count is a usage error."""
        assert main(["phantom", "--count", "-1", "--out", str(tmp_path)]) == 1

    def test_train_zero_epochs(self, tmp_path, capsys):
        """Test that --epochs 0 writes the initial checkpoint and manifest."""
        out = tmp_path / "run"
        code = main(["train", *SMALL_RUN, "--epochs", "0", "--out", str(out)])
        manifest = (out / "manifest.txt").read_text().splitlines()

        assert code == 0
        assert (out / "checkpoints" / "initial.usgn").exists()
        assert not (out / "report.csv").exists()
        assert "max_epochs=0" in manifest
        assert "split_train=1" in manifest
        assert manifest[-1].startswith("param_count=")
        assert "initial.usgn" in capsys.readouterr().out

    def test_train_passes_flags_to_experiment(self, tmp_path, capsys):
        """Test that train hands the merged config to Experiment.train."""
        outcome = mock.Mock(report=None)
        outcome.fit.best_checkpoint = Path("best.usgn")
        with mock.patch.object(
            Experiment, "train", autospec=True, return_value=outcome
        ) as train:
            code = main(["train", *SMALL_RUN, "--set", "noise_std=0.2"])

        assert code == 0
        train.assert_called_once()
        config = train.call_args.args[0].config
        assert config.width == 4
        assert config.noise_std == 0.2
        assert config.split_test == 1
        assert "best.usgn" in capsys.readouterr().out

    def test_train_is_deterministic(self, tmp_path):
        """Test that equal configurations give byte-identical run outputs."""
        for name in ("a", "b"):
            args = ["train", *SMALL_RUN, "--epochs", "1", "--out", str(tmp_path / name)]
            assert main(args) == 0

        outputs = [
            "checkpoints/initial.usgn",
            "checkpoints/best.usgn",
            "history.csv",
            "report.csv",
        ]
        for name in outputs:
            first = (tmp_path / "a" / name).read_bytes()
            assert first == (tmp_path / "b" / name).read_bytes(), name

    def test_train_unknown_set_key(self, tmp_path):
        """Test that an unknown --set key exits 1."""
        code = main(["train", "--set", "dropout=0.5", "--out", str(tmp_path)])
        assert code == 1

    def test_train_split_mismatch(self, tmp_path, capsys):
        """Test that a split not covering the phantoms exits 1."""
        code = main(["train", "--phantom-count", "4", "--out", str(tmp_path)])
        assert code == 1
        assert "invalid configuration" in capsys.readouterr().err

    def test_evaluate_identical(self, cohort_dir, capsys):
        """Test that a label volume scored against itself reaches 99.99."""
        labels = str(cohort_dir / "phantom_00_labels.raw")
        code = main(
            ["evaluate", "--pred", labels, "--truth", labels, "--dims", "48,48,2"]
        )
        table = capsys.readouterr().out.splitlines()

        assert code == 0
        assert table[-2].split()[1:] == ["100.00", "100.00", "100.00", "99.99"]

    def test_evaluate_needs_dims_for_raw(self, cohort_dir):
        """Test that raw inputs without --dims exit 1."""
        labels = str(cohort_dir / "phantom_00_labels.raw")
        assert main(["evaluate", "--pred", labels, "--truth", labels]) == 1

    def test_evaluate_missing_file(self, tmp_path):
        """Test that an unreadable volume exits 2."""
        missing = str(tmp_path / "missing.raw")
        code = main(
            ["evaluate", "--pred", missing, "--truth", missing, "--dims", "48,48,2"]
        )
        assert code == 2

    def test_evaluate_label_out_of_range(self, cohort_dir, tmp_path, capsys):
        """Test that a truth file with an unknown class id is a data error."""
        labels = str(cohort_dir / "phantom_00_labels.raw")
        bad = np.zeros((48, 48, 2), dtype=np.uint8)
        bad[0, 0, 0] = 7
        truth = tmp_path / "bad_labels.raw"
        save_raw(bad, truth, RawElement.U8)
        code = main(
            ["evaluate", "--pred", labels, "--truth", str(truth), "--dims", "48,48,2"]
        )

        assert code == 2
        err = capsys.readouterr().err
        assert "0..3" in err
        assert "invalid configuration" not in err

    def test_segment_non_finite_volume(self, tmp_path, capsys):
        """Test that a volume holding NaN is a data error."""
        voxels = np.ones((48, 48, 2))
        voxels[3, 4, 1] = np.nan
        volume = tmp_path / "nan_t1.raw"
        volume.write_bytes(voxels.astype("<f8").tobytes())
        code = main(
            [
                "segment",
                "--checkpoint",
                str(tmp_path / "unused.usgn"),
                "--volume",
                str(volume),
                "--dims",
                "48,48,2",
                "--out",
                str(tmp_path / "pred.nii"),
            ]
        )

        assert code == 2
        assert "finite" in capsys.readouterr().err

    def test_segment_untrained_checkpoint(self, cohort_dir, tmp_path):
        """Test that weights without BN statistics exit 3."""
        run = tmp_path / "run"
        assert main(["train", *SMALL_RUN, "--epochs", "0", "--out", str(run)]) == 0
        pred = tmp_path / "pred.nii"
        code = main(
            [
                "segment",
                "--checkpoint",
                str(run / "checkpoints" / "initial.usgn"),
                "--volume",
                str(cohort_dir / "phantom_00_t1.raw"),
                "--dims",
                "48,48,2",
                "--width",
                "4",
                "--out",
                str(pred),
                "--overlay",
                "1",
            ]
        )
        assert code == 3

    def test_segment_fingerprint_mismatch(self, cohort_dir, tmp_path, capsys):
        """Test that a checkpoint of another variant exits 2."""
        run = tmp_path / "run"
        assert main(["train", *SMALL_RUN, "--epochs", "1", "--out", str(run)]) == 0
        code = main(
            [
                "segment",
                "--checkpoint",
                str(run / "checkpoints" / "best.usgn"),
                "--volume",
                str(cohort_dir / "phantom_00_t1.raw"),
                "--dims",
                "48,48,2",
                "--model",
                "segnet",
                "--width",
                "4",
                "--out",
                str(tmp_path / "pred.raw"),
            ]
        )
        assert code == 2
        assert "does not match" in capsys.readouterr().err

    def test_segment_then_evaluate(self, cohort_dir, tmp_path):
        """Test segment output, overlays and scoring the written labels."""
        run = tmp_path / "run"
        assert main(["train", *SMALL_RUN, "--epochs", "1", "--out", str(run)]) == 0
        pred = tmp_path / "pred.nii"
        code = main(
            [
                "segment",
                "--checkpoint",
                str(run / "checkpoints" / "best.usgn"),
                "--volume",
                str(cohort_dir / "phantom_00_t1.raw"),
                "--dims",
                "48,48,2",
                "--width",
                "4",
                "--fusion",
                "average",
                "--out",
                str(pred),
                "--overlay",
                "0",
                "--overlay",
                "1",
            ]
        )

        assert code == 0
        assert (tmp_path / "pred_z000.ppm").exists()
        assert (tmp_path / "pred_z001.ppm").read_bytes().startswith(b"P6\n48 48\n")
        labels = str(cohort_dir / "phantom_00_labels.raw")
        report_dir = tmp_path / "report"
        code = main(
            [
                "evaluate",
                "--pred",
                str(pred),
                "--truth",
                labels,
                "--dims",
                "48,48,2",
                "--out",
                str(report_dir),
            ]
        )
        assert code == 0
        assert (report_dir / "report.csv").read_text().startswith("volume_id,")
