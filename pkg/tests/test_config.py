"""Tests for run configuration."""

import pydantic
import pytest

from usegnet.config import RunConfig
from usegnet.evaluation import Fusion
from usegnet.exceptions import ConfigError
from usegnet.models import ModelVariant


class TestRunConfig:
    """Test cases for RunConfig."""

    def test_defaults(self):
        """Test the default training protocol values."""
        config = RunConfig()

        assert config.model is ModelVariant.USEGNET
        assert config.width == 64
        assert config.learning_rate == 1e-3
        assert config.momentum == 0.9
        assert config.max_epochs == 700
        assert (config.split_train, config.split_val, config.split_test) == (6, 3, 9)
        assert config.fusion is Fusion.MAJORITY
        assert config.manifest is None

    def test_unknown_key(self):
        """Test that unknown keys raise ConfigError naming the key."""
        with pytest.raises(ConfigError, match="'dropout'") as exc:
            RunConfig.from_mapping({"width": 8, "dropout": 0.5})
        assert exc.value.key == "dropout"

    def test_invalid_value(self):
        """Test that out-of-range values fail pydantic validation."""
        with pytest.raises(pydantic.ValidationError):
            RunConfig.from_mapping({"momentum": 1.5})

    def test_split_must_cover_phantoms(self):
        """Test that split counts must add up to the phantom count."""
        with pytest.raises(pydantic.ValidationError, match="phantom_count"):
            RunConfig(phantom_count=10)

    def test_split_ignored_with_manifest(self):
        """Test that a cohort manifest lifts the phantom split check."""
        config = RunConfig(manifest="cohort.csv", phantom_count=10)
        assert config.manifest == "cohort.csv"

    def test_manifest_none_string(self):
        """Test that 'none' clears the manifest."""
        assert RunConfig.from_mapping({"manifest": "none"}).manifest is None

    def test_from_file(self, tmp_path):
        """Test key=value parsing with comments and command-line overrides."""
        path = tmp_path / "run.cfg"
        path.write_text(
            "# small run\n"
            "model = segnet\n"
            "width=8  # narrow\n"
            "\n"
            "phantom_dims=48x48x4\n"
            "fusion=average\n"
        )
        config = RunConfig.from_file(path, {"width": 16})

        assert config.model is ModelVariant.SEGNET
        assert config.width == 16
        assert config.phantom_dims == (48, 48, 4)
        assert config.fusion is Fusion.AVERAGE

    def test_from_file_malformed_line(self, tmp_path):
        """Test that a line without '=' names its position."""
        path = tmp_path / "run.cfg"
        path.write_text("width=8\nbogus\n")
        with pytest.raises(ConfigError, match="run.cfg:2"):
            RunConfig.from_file(path)

    def test_phantom_dims_comma_form(self):
        """Test the comma-separated dims form."""
        config = RunConfig.from_mapping({"phantom_dims": "64,64,8"})
        assert config.phantom_dims == (64, 64, 8)

    def test_manifest_lines(self):
        """Test that every key plus the patch constants is echoed."""
        lines = RunConfig(width=8).manifest_lines()

        assert "model=usegnet" in lines
        assert "width=8" in lines
        assert "phantom_dims=64,64,16" in lines
        assert "manifest=none" in lines
        assert "fusion=majority" in lines
        assert lines[-2:] == ["patch_size=40", "stride=10"]
        assert len(lines) == len(RunConfig.model_fields) + 2

    def test_item_access(self):
        """Test __getitem__ and get."""
        config = RunConfig(width=8)
        assert config["width"] == 8
        assert config.get("missing", "fallback") == "fallback"
        with pytest.raises(KeyError):
            config["missing"]

    def test_derived_specs(self):
        """Test optimizer and phantom settings derived from the config."""
        config = RunConfig(learning_rate=0.01, batch_size=8, phantom_seed=5)
        optim = config.optim_config()
        spec = config.phantom_spec(2)

        assert optim.learning_rate == 0.01
        assert optim.batch_size == 8
        assert optim.freeze_mask == {}
        assert spec.seed == 7
        assert spec.dims == (64, 64, 16)

    def test_frozen(self):
        """Test that configs are immutable."""
        with pytest.raises(pydantic.ValidationError):
            RunConfig().width = 8
