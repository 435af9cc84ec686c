"""Optimizer configuration and training history models."""

import math
from enum import Enum
from typing import Dict

from pydantic import BaseModel, ConfigDict, Field


class DatasetRole(str, Enum):
    """What a patch dataset is used for."""

    TRAIN = "train"
    VAL = "val"
    TEST = "test"


class OptimConfig(BaseModel):
    """Mini-batch SGD settings.

    ``freeze_mask`` maps parametric layer ids to True when the layer is frozen;
    layers missing from the mask are trainable.
    """

    model_config = ConfigDict(frozen=True)

    learning_rate: float = Field(1e-3, ge=0.0, description="Step size")
    momentum: float = Field(0.9, ge=0.0, lt=1.0, description="Heavy-ball momentum")
    l2: float = Field(1e-4, ge=0.0, description="L2 regularization strength")
    batch_size: int = Field(64, ge=1, description="Patches per mini-batch")
    max_epochs: int = Field(700, ge=0, description="Epoch budget")
    seed: int = Field(0, ge=0, description="Shuffling seed")
    freeze_mask: Dict[str, bool] = Field(
        default_factory=dict, description="Layer id -> frozen"
    )

    def is_frozen(self, layer_id: str) -> bool:
        """Whether updates to a layer are suppressed."""
        return self.freeze_mask.get(layer_id, False)


class EpochRecord(BaseModel):
    """One row of the training history."""

    model_config = ConfigDict(frozen=True)

    epoch: int = Field(..., ge=1)
    train_loss: float
    val_loss: float

    def csv_row(self) -> str:
        """Render as an ``epoch,train_loss,val_loss`` line."""
        val = "nan" if math.isnan(self.val_loss) else repr(self.val_loss)
        return f"{self.epoch},{self.train_loss!r},{val}"
