"""Sliding-window segmentation of whole volumes with overlap fusion."""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple, Union

import numpy as np

from ..data.patches import PATCH_SIZE, NormStats, TilePlan, input_stack
from ..exceptions import ShapeError, ValidationError
from ..models.network import Mode
from ..models.volumes import LabelConvention, LabelVolume, Volume
from ..network.graph import LayerGraph
from ..utils.validation import NUM_CLASSES

logger = logging.getLogger(__name__)


class Fusion(str, Enum):
    """How overlapping patch predictions are combined per pixel."""

    MAJORITY = "majority"
    AVERAGE = "average"


@dataclass
class VoteGrid:
    """Per-pixel accumulator over one axial slice.

    ``scores`` holds class vote counts (majority) or summed probabilities
    (average); ``coverage`` counts the patches covering each pixel.
    """

    scores: np.ndarray
    coverage: np.ndarray
    fusion: Fusion = Fusion.MAJORITY

    @classmethod
    def empty(
        cls, height: int, width: int, fusion: Union[Fusion, str] = Fusion.MAJORITY
    ) -> "VoteGrid":
        """Zeroed grid for an H x W slice."""
        fusion = Fusion(fusion)
        dtype = np.int64 if fusion is Fusion.MAJORITY else np.float64
        return cls(
            np.zeros((NUM_CLASSES, height, width), dtype=dtype),
            np.zeros((height, width), dtype=np.int64),
            fusion,
        )

    def add(self, y: int, x: int, probabilities: np.ndarray) -> None:
        """Accumulate one (4, 40, 40) patch prediction at origin (y, x)."""
        window = (slice(None), slice(y, y + PATCH_SIZE), slice(x, x + PATCH_SIZE))
        if self.fusion is Fusion.MAJORITY:
            winner = probabilities.argmax(axis=0)
            classes = np.arange(NUM_CLASSES)[:, None, None]
            self.scores[window] += winner[None] == classes
        else:
            self.scores[window] += probabilities
        self.coverage[window[1:]] += 1

    def resolve(self) -> np.ndarray:
        """Winning class per pixel; ties go to the lowest class index."""
        if (self.coverage == 0).any():
            raise ValidationError("Vote grid has pixels not covered by any patch")
        return self.scores.argmax(axis=0).astype(np.uint8)


def _predict(
    graph: LayerGraph, inputs: List[np.ndarray], batch_size: int
) -> np.ndarray:
    out = []
    for start in range(0, len(inputs), batch_size):
        batch = np.stack(inputs[start : start + batch_size])
        out.append(graph.forward(batch, Mode.INFER).probabilities)
    return np.concatenate(out)


def segment_volume(
    graph: LayerGraph,
    vol: Volume,
    fusion: Union[Fusion, str] = Fusion.MAJORITY,
    batch_size: int = 64,
    normalized: bool = False,
) -> LabelVolume:
    """Label every voxel of a volume slice by slice.

    Args:
        graph: Trained graph (run in inference mode)
        vol: Intensity volume indexed (X, Y, Z)
        fusion: majority (count argmax votes) or average (sum probabilities)
        batch_size: Patches per forward pass
        normalized: Set when vol is already z-scored; otherwise it is
            normalized with its own nonzero-voxel statistics as in training

    Returns:
        LabelVolume in the MODEL convention
    """
    fusion = Fusion(fusion)
    h, w, depth = vol.dims
    if depth < 1:
        raise ShapeError("Volume has no axial slices")
    voxels = vol.voxels if normalized else NormStats.of(vol).apply(vol.voxels)
    plan = TilePlan.for_slice(h, w)
    origins: List[Tuple[int, int]] = list(plan)

    labels = np.zeros(vol.dims, dtype=np.uint8)
    for z in range(depth):
        probs = _predict(
            graph, [input_stack(voxels, z, y, x) for y, x in origins], batch_size
        )
        grid = VoteGrid.empty(h, w, fusion)
        for (y, x), p in zip(origins, probs):
            grid.add(y, x, p)
        labels[:, :, z] = grid.resolve()
        logger.debug(f"Segmented slice {z + 1}/{depth} of {vol.provenance}")
    return LabelVolume(
        labels=labels, convention=LabelConvention.MODEL, provenance=vol.provenance
    )
