"""Network description models."""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class Mode(str, Enum):
    """Execution mode of a forward pass."""

    TRAIN = "train"
    INFER = "infer"


class ModelVariant(str, Enum):
    """The four network variants."""

    SEGNET = "segnet"
    USEGNET = "usegnet"
    USEGNET2 = "usegnet2"
    UNET = "unet"


class LayerKind(str, Enum):
    """Layer types of a LayerGraph."""

    CONV = "conv"
    BN = "bn"
    RELU = "relu"
    POOL = "pool"
    UNPOOL = "unpool"
    UPCONV = "upconv"
    TAP = "tap"
    CONCAT = "concat"
    SOFTMAX = "softmax"


PARAMETRIC_KINDS = (LayerKind.CONV, LayerKind.BN, LayerKind.UPCONV)


class LayerSpec(BaseModel):
    """One node of a layer graph."""

    model_config = ConfigDict(frozen=True, use_enum_values=False)

    id: str = Field(..., min_length=1, description="Unique layer id")
    kind: LayerKind = Field(..., description="Layer type")
    in_channels: int = Field(0, ge=0, description="Input channels")
    out_channels: int = Field(0, ge=0, description="Output channels")
    kernel: int = Field(0, ge=0, description="Kernel side (conv/upconv only)")
    source: Optional[str] = Field(
        None, description="Tap read by a concat, or pool read by an unpool"
    )

    @property
    def is_parametric(self) -> bool:
        """Whether the layer owns learnable parameters."""
        return self.kind in PARAMETRIC_KINDS

    def signature(self) -> str:
        """Canonical text form used for topology fingerprints."""
        return (
            f"{self.id}:{self.kind.value}:{self.in_channels}:{self.out_channels}:"
            f"{self.kernel}:{self.source or ''}"
        )
