"""Tests for the binary checkpoint format."""

import numpy as np
import pytest

from usegnet.exceptions import CheckpointFormatError, FingerprintMismatchError
from usegnet.models import Mode
from usegnet.network import (
    build_segnet,
    build_usegnet,
    checkpoint_size,
    load_weights,
    read_header,
    save_weights,
)
from usegnet.network.checkpoint import HEADER


@pytest.fixture
def trained_graph(rng):
    """Graph whose BN statistics have been updated once."""
    graph = build_usegnet(width=4, seed=1)
    graph.forward(rng.normal(size=(2, 3, 40, 40)), Mode.TRAIN)
    return graph


class TestCheckpoint:
    """Test cases for save_weights / load_weights."""

    def test_round_trip_is_bit_exact(self, trained_graph, tmp_path):
        """Test that parameters and statistics survive a save/load."""
        path = save_weights(trained_graph, tmp_path / "w.usgn")
        other = build_usegnet(width=4, seed=99)
        load_weights(other, path)

        for layer_id, arrays in trained_graph.parameter_store().items():
            for name, arr in arrays.items():
                loaded = other.parameter_store()[layer_id][name]
                np.testing.assert_array_equal(loaded, arr)
        for a, b in zip(trained_graph.batchnorm_layers(), other.batchnorm_layers()):
            np.testing.assert_array_equal(a.running_mean, b.running_mean)
            np.testing.assert_array_equal(a.running_var, b.running_var)
            assert b.stats_ready

    def test_resave_is_identical(self, trained_graph, tmp_path):
        """Test that a loaded graph writes the same bytes."""
        first = save_weights(trained_graph, tmp_path / "a.usgn")
        other = build_usegnet(width=4, seed=7)
        load_weights(other, first)
        second = save_weights(other, tmp_path / "b.usgn")
        assert first.read_bytes() == second.read_bytes()

    def test_size_and_header(self, trained_graph, tmp_path):
        """Test the declared counts and the exact file size."""
        path = save_weights(trained_graph, tmp_path / "w.usgn")
        header = read_header(path)

        assert path.stat().st_size == checkpoint_size(trained_graph)
        assert header["version"] == 1
        assert header["fingerprint"] == trained_graph.fingerprint
        assert path.read_bytes()[:4] == b"USGN"
        assert not (tmp_path / "w.usgn.tmp").exists()

    def test_unready_statistics_survive(self, tmp_path):
        """Test that the not-ready flag of fresh BN layers is kept."""
        path = save_weights(build_usegnet(width=4), tmp_path / "w.usgn")
        other = build_usegnet(width=4)
        other.batchnorm_layers()[0].initialize_running_stats()
        load_weights(other, path)
        assert not any(bn.stats_ready for bn in other.batchnorm_layers())

    def test_fingerprint_mismatch(self, tmp_path):
        """Test that a SegNet checkpoint cannot load into U-SegNet."""
        path = save_weights(build_segnet(width=4), tmp_path / "segnet.usgn")
        target = build_usegnet(width=4)
        with pytest.raises(FingerprintMismatchError) as exc:
            load_weights(target, path)
        assert exc.value.expected == target.fingerprint
        assert exc.value.found == build_segnet(width=4).fingerprint

    def test_truncated_file(self, trained_graph, tmp_path):
        """Test that a shortened payload is rejected."""
        path = save_weights(trained_graph, tmp_path / "w.usgn")
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(CheckpointFormatError, match="truncated"):
            load_weights(trained_graph, path)

    def test_truncated_header(self, tmp_path):
        """Test that a file shorter than the header is rejected."""
        path = tmp_path / "short.usgn"
        path.write_bytes(b"USGN")
        with pytest.raises(CheckpointFormatError, match="header"):
            read_header(path)

    def test_bad_magic(self, trained_graph, tmp_path):
        """Test that foreign files are rejected."""
        path = save_weights(trained_graph, tmp_path / "w.usgn")
        raw = bytearray(path.read_bytes())
        raw[:4] = b"XXXX"
        path.write_bytes(bytes(raw))
        with pytest.raises(CheckpointFormatError, match="bad magic"):
            load_weights(trained_graph, path)

    def test_unsupported_version(self, trained_graph, tmp_path):
        """Test that a newer format version is rejected."""
        path = save_weights(trained_graph, tmp_path / "w.usgn")
        raw = path.read_bytes()
        _, _, fp, n_values, n_stats = HEADER.unpack_from(raw)
        path.write_bytes(
            HEADER.pack(b"USGN", 2, fp, n_values, n_stats) + raw[HEADER.size :]
        )
        with pytest.raises(CheckpointFormatError, match="version 2"):
            load_weights(trained_graph, path)

    def test_inference_after_load(self, trained_graph, rng, tmp_path):
        """Test that a loaded graph reproduces inference outputs."""
        x = rng.normal(size=(1, 3, 40, 40))
        expected = trained_graph.forward(x).probabilities
        path = save_weights(trained_graph, tmp_path / "w.usgn")
        other = build_usegnet(width=4, seed=42)
        load_weights(other, path)
        np.testing.assert_array_equal(other.forward(x).probabilities, expected)
