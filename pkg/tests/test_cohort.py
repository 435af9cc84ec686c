"""Tests for cohort manifests."""

import numpy as np
import pytest

from usegnet.data import (
    generate_phantom,
    load_entry,
    read_cohort,
    save_nifti,
    save_raw,
    write_cohort,
    write_phantom_cohort,
)
from usegnet.data.cohort import COLUMNS
from usegnet.exceptions import DataError
from usegnet.models import CohortEntry, LabelConvention, PhantomSpec


class TestCohort:
    """Test cases for writing, reading and loading cohorts."""

    def test_phantom_cohort_round_trip(self, tmp_path):
        """Test that written phantoms load back voxel-exact."""
        manifest = write_phantom_cohort(
            tmp_path, 2, dims=(48, 48, 2), seed=5, noise_std=0.05
        )
        entries = read_cohort(manifest)

        assert [e.volume_id for e in entries] == ["phantom_00", "phantom_01"]
        assert entries[1].seed == 6
        volume, labels = load_entry(entries[1], tmp_path)
        expected, expected_labels = generate_phantom(
            PhantomSpec(dims=(48, 48, 2), seed=6, noise_std=0.05)
        )
        np.testing.assert_array_equal(volume.voxels, expected.voxels)
        np.testing.assert_array_equal(labels.labels, expected_labels.labels)
        assert volume.provenance == "phantom_01"

    def test_zero_count_writes_header_only(self, tmp_path):
        """Test that an empty cohort is a header line."""
        manifest = write_phantom_cohort(tmp_path / "empty", 0)
        assert manifest.read_text() == ",".join(COLUMNS) + "\n"
        assert read_cohort(manifest) == []

    def test_ibsr_labels_are_remapped(self, tmp_path):
        """Test that an IBSR-convention entry loads in the model convention."""
        save_nifti(np.ones((2, 2, 1)), tmp_path / "t1.nii")
        ibsr = np.array([0, 1, 2, 3], dtype=np.float64).reshape(2, 2, 1)
        save_raw(ibsr, tmp_path / "seg.raw", "u8")
        entry = CohortEntry(
            volume_id="ibsr_01",
            intensity_path="t1.nii",
            label_path="seg.raw",
            dims=(2, 2, 1),
            convention=LabelConvention.IBSR,
        )
        write_cohort([entry], tmp_path / "cohort.csv")

        (loaded,) = read_cohort(tmp_path / "cohort.csv")
        assert loaded == entry
        _, labels = load_entry(loaded, tmp_path)
        np.testing.assert_array_equal(labels.labels.ravel(), [0, 3, 1, 2])
        assert labels.convention is LabelConvention.MODEL

    def test_missing_manifest(self, tmp_path):
        """Test that a missing manifest raises DataError."""
        with pytest.raises(DataError, match="not found"):
            read_cohort(tmp_path / "nope.csv")

    def test_missing_columns(self, tmp_path):
        """Test that manifests must carry every column."""
        path = tmp_path / "cohort.csv"
        path.write_text("volume_id,x\n")
        with pytest.raises(DataError, match="missing columns"):
            read_cohort(path)

    def test_malformed_row(self, tmp_path):
        """Test that a non-numeric dim names the offending line."""
        path = tmp_path / "cohort.csv"
        path.write_text(",".join(COLUMNS) + "\nv,a.raw,b.raw,4,four,1,,model\n")
        with pytest.raises(DataError, match=":2: malformed row"):
            read_cohort(path)

    def test_missing_volume_file(self, tmp_path):
        """Test that a manifest row pointing nowhere raises DataError."""
        entry = CohortEntry(
            volume_id="v", intensity_path="a.raw", label_path="b.raw", dims=(2, 2, 2)
        )
        with pytest.raises(DataError, match="not found"):
            load_entry(entry, tmp_path)

    def test_header_dims_must_match_manifest(self, tmp_path):
        """Test that NIfTI dims disagreeing with the manifest raise DataError."""
        save_nifti(np.ones((3, 2, 1)), tmp_path / "t1.nii")
        save_raw(np.zeros((2, 2, 1)), tmp_path / "seg.raw", "u8")
        entry = CohortEntry(
            volume_id="v", intensity_path="t1.nii", label_path="seg.raw", dims=(2, 2, 1)
        )
        with pytest.raises(DataError, match="header dims"):
            load_entry(entry, tmp_path)
