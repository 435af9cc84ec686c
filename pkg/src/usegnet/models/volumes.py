"""Volume, label volume and phantom models."""

from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class LabelConvention(str, Enum):
    """Class-id orderings.

    IBSR: 0 background, 1 CSF, 2 GM, 3 WM.
    MODEL: 0 background, 1 GM, 2 WM, 3 CSF (canonical inside the package).
    """

    IBSR = "ibsr"
    MODEL = "model"


class TissueClass(int, Enum):
    """Class ids in the MODEL convention."""

    BACKGROUND = 0
    GM = 1
    WM = 2
    CSF = 3


class Volume(BaseModel):
    """3-D scalar intensity grid indexed (X, Y, Z); axial slices are along Z."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    voxels: np.ndarray = Field(..., description="Float64 intensities (X, Y, Z)")
    provenance: str = Field("", description="Source file path or phantom seed")

    @field_validator("voxels", mode="before")
    @classmethod
    def _check_voxels(cls, v: np.ndarray) -> np.ndarray:
        v = np.ascontiguousarray(v, dtype=np.float64)
        if v.ndim != 3 or min(v.shape) < 1:
            raise ValueError(f"Volume must be 3-D with all dims >= 1, got {v.shape}")
        if not np.isfinite(v).all():
            raise ValueError("Volume intensities must be finite")
        return v

    @property
    def dims(self) -> Tuple[int, int, int]:
        """Voxel counts (X, Y, Z)."""
        return tuple(int(d) for d in self.voxels.shape)  # type: ignore[return-value]

    def axial_slice(self, z: int) -> np.ndarray:
        """Intensities of axial slice z as an (X, Y) array."""
        return self.voxels[:, :, z]


class LabelVolume(BaseModel):
    """3-D class-id grid aligned with a Volume."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    labels: np.ndarray = Field(..., description="uint8 class ids (X, Y, Z)")
    convention: Optional[LabelConvention] = Field(
        LabelConvention.MODEL, description="Declared label convention"
    )
    provenance: str = Field("", description="Source file path or phantom seed")

    @field_validator("labels", mode="before")
    @classmethod
    def _check_labels(cls, v: np.ndarray) -> np.ndarray:
        arr = np.asarray(v)
        if arr.ndim != 3 or min(arr.shape) < 1:
            raise ValueError(
                f"LabelVolume must be 3-D with all dims >= 1, got {arr.shape}"
            )
        if arr.dtype.kind == "f":
            if not np.isfinite(arr).all() or (arr != np.round(arr)).any():
                raise ValueError("Label values must be whole numbers")
        if arr.size and (arr.min() < 0 or arr.max() > 3):
            raise ValueError(
                f"Labels must lie in 0..3, got range [{arr.min()}, {arr.max()}]"
            )
        return np.ascontiguousarray(arr, dtype=np.uint8)

    @property
    def dims(self) -> Tuple[int, int, int]:
        """Voxel counts (X, Y, Z)."""
        return tuple(int(d) for d in self.labels.shape)  # type: ignore[return-value]

    def axial_slice(self, z: int) -> np.ndarray:
        """Class ids of axial slice z as an (X, Y) array."""
        return self.labels[:, :, z]


class PhantomSpec(BaseModel):
    """Parameters of a synthetic brain phantom."""

    model_config = ConfigDict(frozen=True)

    dims: Tuple[int, int, int] = Field((64, 64, 16), description="(X, Y, Z)")
    seed: int = Field(0, ge=0, description="Generator seed")
    noise_std: float = Field(
        0.1, ge=0.0, description="Gaussian noise std as a fraction of the tissue gap"
    )
    bias_amplitude: float = Field(
        0.1, ge=0.0, lt=1.0, description="Multiplicative low-frequency field strength"
    )
    csf_mean: float = Field(250.0, gt=0.0, description="Mean CSF intensity")
    gm_mean: float = Field(600.0, gt=0.0, description="Mean GM intensity")
    wm_mean: float = Field(900.0, gt=0.0, description="Mean WM intensity")

    @field_validator("dims")
    @classmethod
    def _check_dims(cls, v: Tuple[int, int, int]) -> Tuple[int, int, int]:
        x, y, z = v
        if x < 48 or y < 48:
            raise ValueError(f"In-plane dims must be >= 48, got {x}x{y}")
        if z < 1:
            raise ValueError(f"Z must be >= 1, got {z}")
        return v

    @model_validator(mode="after")
    def _check_tissue_order(self) -> "PhantomSpec":
        if not self.csf_mean < self.gm_mean < self.wm_mean:
            raise ValueError("Tissue means must satisfy CSF < GM < WM")
        return self

    @property
    def tissue_gap(self) -> float:
        """Smallest intensity gap between adjacent tissue means."""
        return min(self.gm_mean - self.csf_mean, self.wm_mean - self.gm_mean)


class NiftiMetadata(BaseModel):
    """Header fields of a NIfTI-1 file that survive into a loaded Volume."""

    model_config = ConfigDict(frozen=True)

    byte_order: str = Field(..., description="'<' little-endian or '>' big-endian")
    magic: str = Field(..., description="'n+1' single file or 'ni1' hdr/img pair")
    datatype: int = Field(..., description="NIfTI datatype code")
    dims: Tuple[int, int, int] = Field(..., description="(X, Y, Z)")
    pixdim: Tuple[float, float, float] = Field((1.0, 1.0, 1.0))
    vox_offset: float = Field(0.0, ge=0.0)
    scl_slope: float = Field(1.0, description="Effective slope (0 in file -> 1)")
    scl_inter: float = Field(0.0)
    qform_code: int = Field(0)
    sform_code: int = Field(0)
    descrip: str = Field("")


class CohortEntry(BaseModel):
    """One row of a cohort manifest: a paired intensity and label volume."""

    model_config = ConfigDict(frozen=True)

    volume_id: str = Field(..., min_length=1)
    intensity_path: str = Field(..., description="Relative to the manifest directory")
    label_path: str = Field(..., description="Relative to the manifest directory")
    dims: Tuple[int, int, int] = Field(..., description="(X, Y, Z)")
    seed: Optional[int] = Field(None, description="Phantom seed, if generated")
    convention: LabelConvention = Field(LabelConvention.MODEL)

    @field_validator("dims")
    @classmethod
    def _check_dims(cls, v: Tuple[int, int, int]) -> Tuple[int, int, int]:
        if min(v) < 1:
            raise ValueError(f"dims must all be >= 1, got {v}")
        return v
