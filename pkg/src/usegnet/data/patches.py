"""Tri-slice patch stacks tiled over axial slices.

An axial slice ``z`` of a volume indexed (X, Y, Z) is the (H, W) = (X, Y)
plane ``voxels[:, :, z]``. Patch origins ``(y, x)`` index H and W of that
plane. Each patch carries slices z-1, z and z+1 as channels and the labels
of slice z.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import ShapeError, ValidationError
from ..models.training import DatasetRole
from ..models.volumes import LabelVolume, Volume
from ..utils.validation import validate_fraction
from .labels import require_model_convention

logger = logging.getLogger(__name__)

PATCH_SIZE = 40
STRIDE = 10

Origin = Tuple[str, int, int, int]


def tile_positions(
    dim: int, patch: int = PATCH_SIZE, stride: int = STRIDE
) -> List[int]:
    """Patch origins along one axis with a clamped final tile.

    Args:
        dim: Axis length in pixels
        patch: Patch side
        stride: Step between origins

    Returns:
        Strictly increasing origins 0, stride, ... plus ``dim - patch`` when the
        regular grid does not end there

    Raises:
        ValidationError: If dim < patch or stride < 1
    """
    if stride < 1:
        raise ValidationError(f"stride must be >= 1, got {stride}")
    if dim < patch:
        raise ValidationError(f"Axis of {dim} pixels is smaller than patch {patch}")
    origins = list(range(0, dim - patch + 1, stride))
    if origins[-1] != dim - patch:
        origins.append(dim - patch)
    return origins


@dataclass(frozen=True)
class TilePlan:
    """Origins covering one (H, W) slice."""

    height: int
    width: int
    y_origins: Tuple[int, ...]
    x_origins: Tuple[int, ...]

    @classmethod
    def for_slice(cls, height: int, width: int) -> "TilePlan":
        """Plan for an H x W slice."""
        return cls(
            height,
            width,
            tuple(tile_positions(height)),
            tuple(tile_positions(width)),
        )

    def __len__(self) -> int:
        return len(self.y_origins) * len(self.x_origins)

    def __iter__(self) -> Iterator[Tuple[int, int]]:
        for y in self.y_origins:
            for x in self.x_origins:
                yield y, x


@dataclass(frozen=True)
class PatchStack:
    """One training/inference unit.

    ``inputs`` is (3, 40, 40) for slices (z-1, z, z+1); channel 1 is the
    labeled slice. ``labels`` is (40, 40) in the MODEL convention.
    """

    inputs: np.ndarray
    labels: np.ndarray
    origin: Origin


def _slice_window(voxels: np.ndarray, z: int, y: int, x: int) -> np.ndarray:
    return voxels[y : y + PATCH_SIZE, x : x + PATCH_SIZE, z]


def _neighbor_slices(z: int, depth: int) -> Tuple[int, int, int]:
    """Slice indices (z-1, z, z+1) with edge replication."""
    return max(z - 1, 0), z, min(z + 1, depth - 1)


def input_stack(voxels: np.ndarray, z: int, y: int, x: int) -> np.ndarray:
    """(3, 40, 40) window of slices z-1, z, z+1 at origin (y, x)."""
    depth = voxels.shape[2]
    return np.stack(
        [_slice_window(voxels, k, y, x) for k in _neighbor_slices(z, depth)]
    )


def extract_patch_stack(
    vol: Volume, labels: LabelVolume, z: int, y: int, x: int, volume_id: str = ""
) -> PatchStack:
    """Cut one patch stack.

    Args:
        vol: Intensity volume
        labels: Matching label volume
        z: Axial slice index
        y: Origin along H (the volume's X axis)
        x: Origin along W (the volume's Y axis)
        volume_id: Identifier stored in the origin

    Returns:
        PatchStack; at z = 0 and z = Z-1 the missing neighbor repeats the
        edge slice

    Raises:
        ShapeError: If the volumes disagree in dims
        ValidationError: If the window leaves the volume
    """
    if vol.dims != labels.dims:
        raise ShapeError(f"Volume dims {vol.dims} differ from label dims {labels.dims}")
    h, w, depth = vol.dims
    if not 0 <= z < depth:
        raise ValidationError(f"Slice {z} outside [0, {depth})")
    if not (0 <= y <= h - PATCH_SIZE and 0 <= x <= w - PATCH_SIZE):
        raise ValidationError(f"Patch origin ({y}, {x}) leaves the {h}x{w} slice")
    inputs = input_stack(vol.voxels, z, y, x)
    window = _slice_window(labels.labels, z, y, x).copy()
    return PatchStack(inputs, window, (volume_id or vol.provenance, z, y, x))


@dataclass(frozen=True)
class NormStats:
    """Mean and standard deviation of a volume's nonzero voxels."""

    mean: float
    std: float

    @classmethod
    def of(cls, vol: Volume) -> "NormStats":
        """Statistics of one volume; std 0 (or no tissue) is guarded to 1."""
        tissue = vol.voxels[vol.voxels != 0]
        if tissue.size == 0:
            return cls(0.0, 1.0)
        std = float(tissue.std())
        return cls(float(tissue.mean()), std if std > 0 else 1.0)

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Z-score nonzero values; zeros stay zero."""
        return np.where(values != 0, (values - self.mean) / self.std, 0.0)


@dataclass(frozen=True)
class Dataset:
    """Ordered patch collection stored as stacked arrays.

    ``inputs`` is (N, 3, 40, 40) float64, ``labels`` (N, 40, 40) uint8 and
    ``origins`` holds one (volume_id, z, y, x) per patch. ``stats`` maps each
    volume id to its own normalization statistics.
    """

    inputs: np.ndarray
    labels: np.ndarray
    origins: List[Origin]
    role: DatasetRole = DatasetRole.TRAIN
    stats: Dict[str, NormStats] = field(default_factory=dict)
    normalized: bool = False

    @classmethod
    def empty(cls, role: DatasetRole = DatasetRole.TRAIN) -> "Dataset":
        """Dataset with no patches."""
        return cls(
            np.zeros((0, 3, PATCH_SIZE, PATCH_SIZE)),
            np.zeros((0, PATCH_SIZE, PATCH_SIZE), dtype=np.uint8),
            [],
            role,
        )

    def __len__(self) -> int:
        return len(self.origins)

    def __getitem__(self, i: int) -> PatchStack:
        return PatchStack(self.inputs[i], self.labels[i], self.origins[i])

    def subset(self, indices: Union[Sequence[int], np.ndarray]) -> "Dataset":
        """Dataset restricted to the given patch indices (order kept)."""
        idx = np.asarray(indices, dtype=np.int64)
        return replace(
            self,
            inputs=self.inputs[idx],
            labels=self.labels[idx],
            origins=[self.origins[i] for i in idx],
        )

    def batches(
        self, batch_size: int, seed: Optional[int] = None
    ) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        """Yield (inputs, labels) mini-batches; the last batch may be short.

        Args:
            batch_size: Patches per batch
            seed: Shuffle seed; None keeps dataset order
        """
        if batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {batch_size}")
        n = len(self)
        order = (
            np.arange(n) if seed is None else np.random.default_rng(seed).permutation(n)
        )
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            yield self.inputs[idx], self.labels[idx].astype(np.int64)


def normalize(ds: Dataset) -> Dataset:
    """Z-score each patch with the statistics of the volume it came from.

    Already-normalized datasets are returned unchanged.

    Raises:
        ValidationError: If a patch's volume has no statistics
    """
    if ds.normalized or len(ds) == 0:
        return replace(ds, normalized=True)
    inputs = np.empty_like(ds.inputs)
    for i, origin in enumerate(ds.origins):
        stats = ds.stats.get(origin[0])
        if stats is None:
            raise ValidationError(f"No normalization statistics for {origin[0]!r}")
        inputs[i] = stats.apply(ds.inputs[i])
    return replace(ds, inputs=inputs, normalized=True)


def filter_background(ds: Dataset, max_bg_fraction: float = 1.0) -> Dataset:
    """Drop training patches dominated by background.

    A patch is dropped iff its background fraction is >= max_bg_fraction, so
    the default 1.0 drops only patches with no tissue at all.

    Raises:
        ValidationError: If the fraction is outside [0, 1] or the dataset is
            not a training set
    """
    validate_fraction(max_bg_fraction, "max_bg_fraction")
    if ds.role is not DatasetRole.TRAIN:
        raise ValidationError(
            f"Background filtering applies to training sets only, not {ds.role.value}"
        )
    if len(ds) == 0:
        return ds
    bg = (ds.labels == 0).reshape(len(ds), -1).mean(axis=1)
    keep = np.flatnonzero(bg < max_bg_fraction)
    logger.info(
        f"Background filter kept {keep.size} of {len(ds)} patches "
        f"(max_bg_fraction={max_bg_fraction})"
    )
    return ds.subset(keep)


def build_dataset(
    volumes: Sequence[Volume],
    labels: Sequence[LabelVolume],
    role: Union[DatasetRole, str] = DatasetRole.TRAIN,
    ids: Optional[Sequence[str]] = None,
    max_bg_fraction: float = 1.0,
) -> Dataset:
    """Enumerate every tile position of every axial slice.

    Args:
        volumes: Intensity volumes
        labels: Label volumes in the MODEL convention, paired with volumes
        role: train, val or test; only training sets are background-filtered
        ids: Volume identifiers (defaults to provenance, then position)
        max_bg_fraction: Background filter threshold for training sets

    Returns:
        Normalized Dataset in (volume, z, y, x) order

    Raises:
        LabelConventionError: If a label volume is not in the MODEL convention
        ShapeError: If a pair's dims disagree
    """
    role = DatasetRole(role)
    if len(volumes) != len(labels):
        raise ValidationError(f"{len(volumes)} volumes but {len(labels)} label volumes")
    if ids is None:
        ids = [v.provenance or f"volume_{i}" for i, v in enumerate(volumes)]
    if len(set(ids)) != len(ids):
        raise ValidationError("Volume ids must be unique")
    if not volumes:
        return Dataset.empty(role)

    inputs: List[np.ndarray] = []
    targets: List[np.ndarray] = []
    origins: List[Origin] = []
    stats: Dict[str, NormStats] = {}
    for vol, lv, vid in zip(volumes, labels, ids):
        require_model_convention(lv)
        if vol.dims != lv.dims:
            raise ShapeError(f"{vid}: volume dims {vol.dims} differ from {lv.dims}")
        stats[vid] = NormStats.of(vol)
        h, w, depth = vol.dims
        plan = TilePlan.for_slice(h, w)
        for z in range(depth):
            for y, x in plan:
                patch = extract_patch_stack(vol, lv, z, y, x, vid)
                inputs.append(patch.inputs)
                targets.append(patch.labels)
                origins.append(patch.origin)
        logger.debug(f"{vid}: {depth * len(plan)} patches")

    ds = Dataset(
        np.stack(inputs).astype(np.float64),
        np.stack(targets).astype(np.uint8),
        origins,
        role,
        stats,
    )
    ds = normalize(ds)
    if role is DatasetRole.TRAIN:
        ds = filter_background(ds, max_bg_fraction)
    logger.info(
        f"Built {role.value} dataset: {len(ds)} patches from {len(ids)} volumes"
    )
    return ds
