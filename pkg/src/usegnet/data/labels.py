"""Label convention handling.

MODEL is the canonical convention inside the package; IBSR ordering exists
only at the I/O boundary.
"""

import logging
from typing import Optional, Union

import numpy as np
import pydantic

from ..exceptions import DataError, LabelConventionError
from ..models.volumes import LabelConvention, LabelVolume, Volume

logger = logging.getLogger(__name__)

# Lookup tables indexed by source class id
IBSR_TO_MODEL = np.array([0, 3, 1, 2], dtype=np.uint8)
MODEL_TO_IBSR = np.argsort(IBSR_TO_MODEL).astype(np.uint8)


def remap_labels(
    lv: LabelVolume, to: Union[LabelConvention, str]
) -> LabelVolume:
    """Translate a label volume into another convention.

    Args:
        lv: Label volume with a declared convention
        to: Target convention

    Returns:
        New LabelVolume in the target convention (the input itself when the
        conventions already agree)

    Raises:
        LabelConventionError: If the source convention is undeclared
    """
    target = LabelConvention(to)
    if lv.convention is None:
        raise LabelConventionError(
            f"Label volume {lv.provenance or '<unnamed>'} has no declared convention"
        )
    if lv.convention is target:
        return lv
    table = IBSR_TO_MODEL if target is LabelConvention.MODEL else MODEL_TO_IBSR
    logger.debug(f"Remapping labels {lv.convention.value} -> {target.value}")
    return LabelVolume(
        labels=table[lv.labels], convention=target, provenance=lv.provenance
    )


def labels_from_volume(
    volume: Volume, convention: Optional[Union[LabelConvention, str]]
) -> LabelVolume:
    """Interpret a loaded intensity volume as class ids.

    Args:
        volume: Volume whose voxels hold whole-number class ids
        convention: Convention the file was written in (None if unknown)

    Returns:
        LabelVolume with the declared convention

    Raises:
        DataError: If a voxel is not a whole number in 0..3
    """
    conv = LabelConvention(convention) if convention is not None else None
    try:
        return LabelVolume(
            labels=volume.voxels, convention=conv, provenance=volume.provenance
        )
    except pydantic.ValidationError as e:
        raise DataError(f"{volume.provenance}: {e.errors()[0]['msg']}") from e


def require_model_convention(lv: LabelVolume) -> None:
    """Raise LabelConventionError unless a label volume uses the MODEL convention."""
    if lv.convention is not LabelConvention.MODEL:
        found = lv.convention.value if lv.convention else "undeclared"
        raise LabelConventionError(
            f"Label volume {lv.provenance or '<unnamed>'} must use the model "
            f"convention, found {found}"
        )
