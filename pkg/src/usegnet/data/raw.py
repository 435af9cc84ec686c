"""Bare little-endian volume payloads with externally supplied dims."""

import logging
from enum import Enum
from pathlib import Path
from typing import Sequence, Union

import numpy as np
import pydantic

from ..exceptions import DataError, PayloadLengthError, ValidationError
from ..models.volumes import Volume
from ..utils.validation import validate_dims

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class RawElement(str, Enum):
    """Element types of raw payloads."""

    U8 = "u8"
    I16 = "i16"
    F32 = "f32"
    F64 = "f64"

    @property
    def dtype(self) -> np.dtype:
        """Little-endian numpy dtype."""
        return np.dtype(
            {"u8": "<u1", "i16": "<i2", "f32": "<f4", "f64": "<f8"}[self.value]
        )


def load_raw(
    path: PathLike,
    dims: Sequence[int],
    element: Union[RawElement, str] = RawElement.F64,
) -> Volume:
    """Read a row-major (X, Y, Z) payload.

    Args:
        path: File to read
        dims: (X, Y, Z) voxel counts
        element: Stored element type

    Returns:
        Volume with float64 intensities

    Raises:
        PayloadLengthError: If the file size differs from product(dims) * element size
        DataError: If the decoded voxels are not finite
    """
    element = RawElement(element)
    validate_dims(dims, minimum=1, name="dims")
    if len(dims) != 3:
        raise ValidationError(f"Raw volumes need (X, Y, Z) dims, got {tuple(dims)}")
    dims = tuple(int(d) for d in dims)
    path = Path(path)
    raw = path.read_bytes()
    expected = int(np.prod(dims)) * element.dtype.itemsize
    if len(raw) != expected:
        raise PayloadLengthError(
            f"{path}: expected {expected} bytes for dims {tuple(dims)} "
            f"({element.value}), found {len(raw)}",
            expected=expected,
            actual=len(raw),
        )
    voxels = np.frombuffer(raw, dtype=element.dtype).reshape(dims).astype(np.float64)
    logger.debug(f"Loaded raw {path}: dims={tuple(dims)} element={element.value}")
    return volume_from_voxels(voxels, str(path))


def save_raw(
    volume: Union[Volume, np.ndarray],
    path: PathLike,
    element: Union[RawElement, str] = RawElement.F64,
) -> Path:
    """Write a volume as a bare row-major little-endian payload.

    Args:
        volume: Volume or 3-D array
        path: Destination file
        element: Element type to store; values must fit it exactly

    Returns:
        The written path

    Raises:
        ValidationError: If values are not representable in the element type
    """
    element = RawElement(element)
    voxels = volume.voxels if isinstance(volume, Volume) else np.asarray(volume)
    stored = voxels.astype(element.dtype)
    if element is not RawElement.F32 and not np.array_equal(stored, voxels):
        raise ValidationError(
            f"Values of {path} are not exactly representable as {element.value}"
        )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(np.ascontiguousarray(stored).tobytes())
    return path


def volume_from_voxels(voxels: np.ndarray, provenance: str) -> Volume:
    """Wrap decoded voxels in a Volume, reporting bad content as a DataError.

    Raises:
        DataError: If the voxels are not a finite 3-D array
    """
    try:
        return Volume(voxels=voxels, provenance=provenance)
    except pydantic.ValidationError as e:
        raise DataError(f"{provenance}: {e.errors()[0]['msg']}") from e
