"""Color overlays of label slices as binary PPM images."""

import logging
from pathlib import Path
from typing import Union

import numpy as np

from ..exceptions import ValidationError
from ..models.volumes import LabelVolume

logger = logging.getLogger(__name__)

# Indexed by MODEL class id: background black, GM green, WM blue, CSF red
PALETTE = np.array(
    [
        [0, 0, 0],
        [0, 255, 0],
        [0, 0, 255],
        [255, 0, 0],
    ],
    dtype=np.uint8,
)

PathLike = Union[str, Path]


def export_overlay(labels: LabelVolume, z: int, path: PathLike) -> Path:
    """Write axial slice z as a P6 image of H x W pixels (H along the X axis).

    Raises:
        ValidationError: If z is outside the volume
    """
    depth = labels.dims[2]
    if not 0 <= z < depth:
        raise ValidationError(f"Slice {z} outside [0, {depth})")
    rgb = PALETTE[labels.axial_slice(z)]
    h, w = rgb.shape[:2]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(rgb).tobytes())
    logger.debug(f"Wrote overlay of slice {z} to {path}")
    return path
