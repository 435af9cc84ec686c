"""Cohort manifests: CSV lists of paired intensity/label volumes.

Columns: ``volume_id,intensity_path,label_path,x,y,z,seed,convention``.
Paths ending in ``.nii`` are read with the NIfTI reader; anything else is a
raw payload (intensities f64, labels u8).
"""

import csv
import logging
from pathlib import Path
from typing import List, Sequence, Tuple, Union

from ..exceptions import DataError, ShapeError
from ..models.volumes import (
    CohortEntry,
    LabelConvention,
    LabelVolume,
    PhantomSpec,
    Volume,
)
from .labels import labels_from_volume, remap_labels
from .nifti import load_nifti
from .phantom import generate_phantom
from .raw import RawElement, load_raw, save_raw

logger = logging.getLogger(__name__)

COLUMNS = [
    "volume_id",
    "intensity_path",
    "label_path",
    "x",
    "y",
    "z",
    "seed",
    "convention",
]
MANIFEST_NAME = "cohort.csv"

PathLike = Union[str, Path]


def write_cohort(entries: Sequence[CohortEntry], path: PathLike) -> Path:
    """Write a cohort manifest (header only when entries is empty)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        for e in entries:
            writer.writerow(
                [
                    e.volume_id,
                    e.intensity_path,
                    e.label_path,
                    *e.dims,
                    "" if e.seed is None else e.seed,
                    e.convention.value,
                ]
            )
    return path


def read_cohort(path: PathLike) -> List[CohortEntry]:
    """Parse a cohort manifest.

    Raises:
        DataError: If the file is missing, lacks columns or has a malformed row
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"Cohort manifest {path} not found")
    entries: List[CohortEntry] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise DataError(f"{path}: missing columns {sorted(missing)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                entries.append(
                    CohortEntry(
                        volume_id=row["volume_id"],
                        intensity_path=row["intensity_path"],
                        label_path=row["label_path"],
                        dims=(int(row["x"]), int(row["y"]), int(row["z"])),
                        seed=int(row["seed"]) if row["seed"] else None,
                        convention=row["convention"] or LabelConvention.MODEL,
                    )
                )
            except ValueError as e:
                raise DataError(f"{path}:{lineno}: malformed row ({e})") from e
    logger.info(f"Read cohort of {len(entries)} volumes from {path}")
    return entries


def load_entry(entry: CohortEntry, base_dir: PathLike) -> Tuple[Volume, LabelVolume]:
    """Load one pair and bring its labels into the MODEL convention.

    Args:
        entry: Manifest row
        base_dir: Directory the relative paths are resolved against

    Returns:
        (Volume, LabelVolume in the MODEL convention)

    Raises:
        DataError: If a file is missing or the pair's dims disagree
    """
    base = Path(base_dir)
    volume = _load(base / entry.intensity_path, entry.dims, RawElement.F64)
    label_source = _load(base / entry.label_path, entry.dims, RawElement.U8)
    labels = remap_labels(
        labels_from_volume(label_source, entry.convention), LabelConvention.MODEL
    )
    if volume.dims != labels.dims:
        raise ShapeError(
            f"{entry.volume_id}: intensity dims {volume.dims} differ from label "
            f"dims {labels.dims}"
        )
    return (
        Volume(voxels=volume.voxels, provenance=entry.volume_id),
        LabelVolume(
            labels=labels.labels,
            convention=LabelConvention.MODEL,
            provenance=entry.volume_id,
        ),
    )


def _load(path: Path, dims: Tuple[int, int, int], element: RawElement) -> Volume:
    if not path.exists():
        raise DataError(f"Volume file {path} not found")
    if path.suffix == ".nii":
        volume, meta = load_nifti(path)
        if meta.dims != tuple(dims):
            raise DataError(
                f"{path}: header dims {meta.dims} differ from manifest dims {dims}"
            )
        return volume
    return load_raw(path, dims, element)


def write_phantom_cohort(
    out_dir: PathLike,
    count: int,
    dims: Tuple[int, int, int] = (64, 64, 16),
    seed: int = 0,
    noise_std: float = 0.1,
    bias_amplitude: float = 0.1,
) -> Path:
    """Generate phantoms and write them with their manifest.

    Phantom ``i`` uses seed ``seed + i`` and is stored as
    ``phantom_XX_t1.raw`` (f64) and ``phantom_XX_labels.raw`` (u8).

    Returns:
        Path of the written manifest
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries: List[CohortEntry] = []
    for i in range(count):
        spec = PhantomSpec(
            dims=dims,
            seed=seed + i,
            noise_std=noise_std,
            bias_amplitude=bias_amplitude,
        )
        volume, labels = generate_phantom(spec)
        volume_id = f"phantom_{i:02d}"
        intensity_name = f"{volume_id}_t1.raw"
        label_name = f"{volume_id}_labels.raw"
        save_raw(volume, out / intensity_name, RawElement.F64)
        save_raw(labels.labels, out / label_name, RawElement.U8)
        entries.append(
            CohortEntry(
                volume_id=volume_id,
                intensity_path=intensity_name,
                label_path=label_name,
                dims=spec.dims,
                seed=spec.seed,
                convention=LabelConvention.MODEL,
            )
        )
    manifest = write_cohort(entries, out / MANIFEST_NAME)
    logger.info(f"Wrote {count} phantom pairs to {out}")
    return manifest
