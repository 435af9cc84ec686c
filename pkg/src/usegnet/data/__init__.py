"""Volume I/O, phantoms, cohort splits and patch datasets."""

from .cohort import (
    load_entry,
    read_cohort,
    write_cohort,
    write_phantom_cohort,
)
from .labels import labels_from_volume, remap_labels, require_model_convention
from .nifti import load_nifti, save_nifti
from .patches import (
    PATCH_SIZE,
    STRIDE,
    Dataset,
    NormStats,
    PatchStack,
    TilePlan,
    build_dataset,
    extract_patch_stack,
    filter_background,
    input_stack,
    normalize,
    tile_positions,
)
from .phantom import generate_phantom, tissue_fractions
from .raw import RawElement, load_raw, save_raw
from .split import split_volumes

__all__ = [
    "PATCH_SIZE",
    "STRIDE",
    "Dataset",
    "NormStats",
    "PatchStack",
    "RawElement",
    "TilePlan",
    "build_dataset",
    "extract_patch_stack",
    "filter_background",
    "generate_phantom",
    "input_stack",
    "labels_from_volume",
    "load_entry",
    "load_nifti",
    "load_raw",
    "normalize",
    "read_cohort",
    "remap_labels",
    "require_model_convention",
    "save_nifti",
    "save_raw",
    "split_volumes",
    "tile_positions",
    "tissue_fractions",
    "write_cohort",
    "write_phantom_cohort",
]
