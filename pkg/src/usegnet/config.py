"""Run configuration for usegnet experiments."""

import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .data.patches import PATCH_SIZE, STRIDE
from .evaluation.segment import Fusion
from .exceptions import ConfigError
from .models.network import ModelVariant
from .models.training import OptimConfig
from .models.volumes import PhantomSpec

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class RunConfig(BaseModel):
    """Flat key/value configuration of one experiment.

    Unknown keys are rejected. Values may come from a ``key=value`` file and
    be overridden from the command line; the merged result is echoed into
    the run manifest.
    """

    model_config = ConfigDict(extra="forbid", frozen=True, use_enum_values=False)

    # Network
    model: ModelVariant = Field(ModelVariant.USEGNET, description="Network variant")
    width: int = Field(64, ge=1, description="Base channel width")

    # Optimizer
    learning_rate: float = Field(1e-3, ge=0.0)
    momentum: float = Field(0.9, ge=0.0, lt=1.0)
    l2: float = Field(1e-4, ge=0.0)
    batch_size: int = Field(64, ge=1)
    max_epochs: int = Field(700, ge=0)
    seed: int = Field(0, ge=0, description="Initialization and shuffling seed")
    finetune_stages: int = Field(
        0, ge=0, description="Sequential one-layer stages after the main fit"
    )
    stage_epochs: int = Field(10, ge=0, description="Epochs per fine-tuning stage")

    # Data
    manifest: Optional[str] = Field(None, description="Cohort CSV; phantoms if unset")
    phantom_count: int = Field(18, ge=0)
    phantom_dims: Tuple[int, int, int] = Field((64, 64, 16))
    phantom_seed: int = Field(0, ge=0)
    noise_std: float = Field(0.1, ge=0.0)
    bias_amplitude: float = Field(0.1, ge=0.0, lt=1.0)
    split_train: int = Field(6, ge=0)
    split_val: int = Field(3, ge=0)
    split_test: int = Field(9, ge=0)
    split_seed: int = Field(0, ge=0)
    max_bg_fraction: float = Field(1.0, ge=0.0, le=1.0)

    # Evaluation and output
    fusion: Fusion = Field(Fusion.MAJORITY)
    output_dir: str = Field("runs/default")

    @field_validator("phantom_dims", mode="before")
    @classmethod
    def _parse_dims(cls, v: Any) -> Any:
        if isinstance(v, str):
            parts = v.replace("x", ",").split(",")
            return tuple(int(p) for p in parts if p.strip())
        return v

    @field_validator("manifest", mode="before")
    @classmethod
    def _empty_manifest(cls, v: Any) -> Any:
        if isinstance(v, str) and v.strip().lower() in ("", "none"):
            return None
        return v

    @model_validator(mode="after")
    def _check_split(self) -> "RunConfig":
        if self.manifest is None:
            total = self.split_train + self.split_val + self.split_test
            if total != self.phantom_count:
                raise ValueError(
                    f"split_train+split_val+split_test = {total} but "
                    f"phantom_count = {self.phantom_count}"
                )
        return self

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "RunConfig":
        """Build a config, naming the first unknown key if there is one.

        Raises:
            ConfigError: If a key is not a RunConfig field
        """
        for key in values:
            if key not in cls.model_fields:
                raise ConfigError(f"Unknown configuration key {key!r}", key=key)
        return cls(**values)

    @classmethod
    def from_file(
        cls, path: PathLike, overrides: Optional[Mapping[str, Any]] = None
    ) -> "RunConfig":
        """Read ``key=value`` lines (``#`` comments allowed) and apply overrides.

        Raises:
            ConfigError: On a malformed line or an unknown key
        """
        path = Path(path)
        values: Dict[str, Any] = {}
        for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key] = value
        values.update(overrides or {})
        logger.debug(f"Loaded {len(values)} configuration values from {path}")
        return cls.from_mapping(values)

    def __getitem__(self, key: str) -> Any:
        """Get configuration value by key.

        Args:
            key: Configuration key

        Returns:
            Configuration value

        Raises:
            KeyError: If the key is not a configuration field
        """
        if key not in type(self).model_fields:
            raise KeyError(key)
        return getattr(self, key)

    def get(self, key: str, default: Optional[Any] = None) -> Any:
        """Get configuration value with default."""
        try:
            return self[key]
        except KeyError:
            return default

    def to_dict(self) -> Dict[str, Any]:
        """Plain-value dictionary in field order."""
        return self.model_dump(mode="json")

    def optim_config(self) -> OptimConfig:
        """Optimizer settings derived from this config."""
        return OptimConfig(
            learning_rate=self.learning_rate,
            momentum=self.momentum,
            l2=self.l2,
            batch_size=self.batch_size,
            max_epochs=self.max_epochs,
            seed=self.seed,
        )

    def phantom_spec(self, index: int = 0) -> PhantomSpec:
        """Spec of the index-th phantom of the generated cohort."""
        return PhantomSpec(
            dims=self.phantom_dims,
            seed=self.phantom_seed + index,
            noise_std=self.noise_std,
            bias_amplitude=self.bias_amplitude,
        )

    def manifest_lines(self) -> List[str]:
        """``key=value`` lines for every field plus the fixed patch constants."""
        lines = []
        for key, value in self.to_dict().items():
            if isinstance(value, (list, tuple)):
                value = ",".join(str(v) for v in value)
            lines.append(f"{key}={'none' if value is None else value}")
        lines.append(f"patch_size={PATCH_SIZE}")
        lines.append(f"stride={STRIDE}")
        return lines
