"""Tests for NIfTI and raw volume I/O and label conventions."""

import numpy as np
import pytest

from usegnet.data import (
    labels_from_volume,
    load_nifti,
    load_raw,
    remap_labels,
    require_model_convention,
    save_nifti,
    save_raw,
)
from usegnet.data.labels import IBSR_TO_MODEL, MODEL_TO_IBSR
from usegnet.data.nifti import detect_byte_order, header_dtype
from usegnet.data.raw import RawElement
from usegnet.exceptions import (
    DataError,
    LabelConventionError,
    NiftiMagicError,
    PayloadLengthError,
    TruncatedPayloadError,
    UnsupportedDatatypeError,
    ValidationError,
)
from usegnet.models import LabelConvention, LabelVolume, Volume


@pytest.fixture
def ramp():
    """Asymmetric (X, Y, Z) volume so axis mix-ups are visible."""
    return np.arange(5 * 4 * 3, dtype=np.float64).reshape(5, 4, 3)


def patch_header(path, byte_order, **fields):
    """Overwrite header fields of a written .nii file."""
    raw = bytearray(path.read_bytes())
    hdr = np.frombuffer(bytes(raw[:348]), dtype=header_dtype(byte_order)).copy()
    for name, value in fields.items():
        hdr[name][0] = value
    raw[:348] = hdr.tobytes()
    path.write_bytes(bytes(raw))


class TestNifti:
    """Test cases for the NIfTI-1 reader and writer."""

    @pytest.mark.parametrize("byte_order", ["<", ">"])
    @pytest.mark.parametrize("datatype", [2, 4, 16, 64])
    def test_voxel_exact_both_byte_orders(self, ramp, tmp_path, byte_order, datatype):
        """Test self-written fixtures in every datatype and byte order."""
        path = save_nifti(ramp, tmp_path / "v.nii", datatype, byte_order)
        volume, meta = load_nifti(path)

        np.testing.assert_array_equal(volume.voxels, ramp)
        assert meta.byte_order == byte_order
        assert meta.datatype == datatype
        assert meta.dims == (5, 4, 3)
        assert meta.magic == "n+1"
        assert meta.vox_offset == 352.0

    def test_payload_is_x_fastest(self, ramp, tmp_path):
        """Test that voxel (1, 0, 0) is the second stored value."""
        path = save_nifti(ramp, tmp_path / "v.nii")
        payload = np.frombuffer(path.read_bytes()[352:], dtype="<f8")
        assert payload[1] == ramp[1, 0, 0]

    def test_detect_byte_order(self, ramp, tmp_path):
        """Test detection from dim[0]."""
        big = save_nifti(ramp, tmp_path / "b.nii", byte_order=">").read_bytes()
        little = save_nifti(ramp, tmp_path / "l.nii").read_bytes()
        assert detect_byte_order(big) == ">"
        assert detect_byte_order(little) == "<"

    def test_scaling_applied(self, tmp_path):
        """Test that slope and intercept scale stored integers."""
        stored = np.arange(8, dtype=np.float64).reshape(2, 2, 2)
        path = save_nifti(stored, tmp_path / "s.nii", 4, scl_slope=2.0, scl_inter=1.0)
        volume, meta = load_nifti(path)
        np.testing.assert_array_equal(volume.voxels, stored * 2.0 + 1.0)
        assert meta.scl_slope == 2.0

    def test_zero_slope_means_unscaled(self, ramp, tmp_path):
        """Test that scl_slope 0 leaves values untouched."""
        path = save_nifti(ramp, tmp_path / "z.nii", scl_slope=0.0, scl_inter=5.0)
        volume, meta = load_nifti(path)
        np.testing.assert_array_equal(volume.voxels, ramp)
        assert meta.scl_slope == 1.0

    def test_header_image_pair(self, ramp, tmp_path):
        """Test ni1 headers reading the payload from the .img sibling."""
        single = save_nifti(ramp, tmp_path / "pair.nii", 16).read_bytes()
        hdr_path = tmp_path / "pair.hdr"
        hdr_path.write_bytes(single[:348])
        (tmp_path / "pair.img").write_bytes(single[352:])
        patch_header(hdr_path, "<", magic=b"ni1\x00", vox_offset=0.0)

        volume, meta = load_nifti(hdr_path)
        np.testing.assert_array_equal(volume.voxels, ramp)
        assert meta.magic == "ni1"

    def test_missing_image_file(self, ramp, tmp_path):
        """Test that a header without its .img raises DataError."""
        hdr_path = tmp_path / "lonely.hdr"
        hdr_path.write_bytes(save_nifti(ramp, tmp_path / "x.nii").read_bytes()[:348])
        patch_header(hdr_path, "<", magic=b"ni1\x00", vox_offset=0.0)
        with pytest.raises(DataError, match="not found"):
            load_nifti(hdr_path)

    def test_bad_magic(self, ramp, tmp_path):
        """Test that a header without n+1/ni1 magic is rejected."""
        path = save_nifti(ramp, tmp_path / "m.nii")
        patch_header(path, "<", magic=b"abc\x00")
        with pytest.raises(NiftiMagicError, match="magic"):
            load_nifti(path)

    def test_unsupported_datatype(self, ramp, tmp_path):
        """Test that complex datatypes are rejected with their code."""
        path = save_nifti(ramp, tmp_path / "c.nii")
        patch_header(path, "<", datatype=32)
        with pytest.raises(UnsupportedDatatypeError) as exc:
            load_nifti(path)
        assert exc.value.datatype == 32

    def test_truncated_payload(self, ramp, tmp_path):
        """Test that a short payload is rejected."""
        path = save_nifti(ramp, tmp_path / "t.nii")
        path.write_bytes(path.read_bytes()[:-16])
        with pytest.raises(TruncatedPayloadError, match="payload needs"):
            load_nifti(path)

    def test_truncated_header(self, tmp_path):
        """Test that files shorter than 348 bytes are rejected."""
        path = tmp_path / "h.nii"
        path.write_bytes(b"\x00" * 100)
        with pytest.raises(TruncatedPayloadError, match="348"):
            load_nifti(path)

    def test_writer_rejects_unknown_datatype(self, ramp, tmp_path):
        """Test that save_nifti validates its datatype."""
        with pytest.raises(ValidationError, match="datatype"):
            save_nifti(ramp, tmp_path / "x.nii", datatype=8)


class TestRaw:
    """Test cases for raw payloads."""

    @pytest.mark.parametrize("element", list(RawElement))
    def test_round_trip(self, tmp_path, element):
        """Test bit-exact round trips of integral values."""
        voxels = np.arange(24, dtype=np.float64).reshape(2, 3, 4)
        path = save_raw(voxels, tmp_path / "v.raw", element)
        volume = load_raw(path, (2, 3, 4), element)

        np.testing.assert_array_equal(volume.voxels, voxels)
        assert path.stat().st_size == 24 * element.dtype.itemsize

    def test_row_major_order(self, tmp_path):
        """Test that z varies fastest in the file."""
        voxels = np.arange(8, dtype=np.float64).reshape(2, 2, 2)
        path = save_raw(voxels, tmp_path / "v.raw")
        stored = np.frombuffer(path.read_bytes(), dtype="<f8")
        assert stored[1] == voxels[0, 0, 1]

    def test_length_mismatch(self, tmp_path):
        """Test that a wrong file size names expected and actual bytes."""
        path = tmp_path / "v.raw"
        path.write_bytes(b"\x00" * 10)
        with pytest.raises(PayloadLengthError) as exc:
            load_raw(path, (2, 2, 2), RawElement.U8)
        assert exc.value.expected == 8
        assert exc.value.actual == 10

    def test_unrepresentable_values(self, tmp_path):
        """Test that 300 cannot be stored as u8."""
        with pytest.raises(ValidationError, match="representable"):
            save_raw(np.full((1, 1, 1), 300.0), tmp_path / "v.raw", RawElement.U8)

    def test_invalid_dims(self, tmp_path):
        """Test that non-positive dims are rejected."""
        path = tmp_path / "v.raw"
        path.write_bytes(b"")
        with pytest.raises(ValidationError, match="dims"):
            load_raw(path, (0, 2, 2))


class TestLabels:
    """Test cases for label conventions."""

    def test_tables_are_inverse(self):
        """Test that the two lookup tables undo each other."""
        np.testing.assert_array_equal(MODEL_TO_IBSR[IBSR_TO_MODEL], np.arange(4))
        np.testing.assert_array_equal(IBSR_TO_MODEL[MODEL_TO_IBSR], np.arange(4))

    def test_ibsr_to_model(self):
        """Test CSF 1 -> 3, GM 2 -> 1, WM 3 -> 2."""
        lv = LabelVolume(
            labels=np.array([0, 1, 2, 3], dtype=np.uint8).reshape(4, 1, 1),
            convention=LabelConvention.IBSR,
        )
        out = remap_labels(lv, "model")
        np.testing.assert_array_equal(out.labels.ravel(), [0, 3, 1, 2])
        assert out.convention is LabelConvention.MODEL

    def test_same_convention_is_identity(self, small_labels):
        """Test that remapping to the current convention returns the input."""
        assert remap_labels(small_labels, LabelConvention.MODEL) is small_labels

    def test_undeclared_convention(self, small_labels):
        """Test that remapping undeclared labels raises LabelConventionError."""
        lv = LabelVolume(labels=small_labels.labels, convention=None)
        with pytest.raises(LabelConventionError, match="no declared convention"):
            remap_labels(lv, LabelConvention.MODEL)

    def test_require_model(self, small_labels):
        """Test the model-convention guard."""
        require_model_convention(small_labels)
        ibsr = remap_labels(small_labels, LabelConvention.IBSR)
        with pytest.raises(LabelConventionError, match="found ibsr"):
            require_model_convention(ibsr)

    def test_labels_from_volume(self):
        """Test interpreting whole-number intensities as class ids."""
        vol = Volume(voxels=np.full((2, 2, 2), 3.0), provenance="lab")
        lv = labels_from_volume(vol, "ibsr")
        assert lv.labels.dtype == np.uint8
        assert lv.convention is LabelConvention.IBSR
        assert lv.provenance == "lab"

    def test_fractional_labels_rejected(self):
        """Test that non-integral values cannot become labels."""
        vol = Volume(voxels=np.full((1, 1, 1), 1.5))
        with pytest.raises(ValueError, match="whole numbers"):
            labels_from_volume(vol, "model")
