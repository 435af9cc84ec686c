"""Confusion matrices and Dice scores."""

from typing import Tuple, Union

import numpy as np

from ..exceptions import ValidationError
from ..models.volumes import LabelVolume, TissueClass
from ..utils.validation import NUM_CLASSES, validate_same_shape

# Mean tissue volume fractions of the reference test cohort, used unnormalized
WEIGHT_GM = 0.6584
WEIGHT_WM = 0.3280
WEIGHT_CSF = 0.0135

LabelsLike = Union[LabelVolume, np.ndarray]


def _labels(x: LabelsLike) -> np.ndarray:
    return x.labels if isinstance(x, LabelVolume) else np.asarray(x)


def confusion_matrix(pred: LabelsLike, truth: LabelsLike) -> np.ndarray:
    """4x4 voxel counts; entry [t, p] counts truth t predicted as p.

    Raises:
        ShapeError: If the label grids differ in shape
        ValidationError: If either grid holds a class outside 0..3 or the two
            label volumes declare different conventions
    """
    if isinstance(pred, LabelVolume) and isinstance(truth, LabelVolume):
        if pred.convention != truth.convention:
            raise ValidationError("Prediction and truth use different conventions")
    p_grid, t_grid = _labels(pred), _labels(truth)
    validate_same_shape(p_grid, t_grid, "Prediction against truth")
    p = p_grid.astype(np.int64).ravel()
    t = t_grid.astype(np.int64).ravel()
    for arr in (p, t):
        if arr.size and (arr.min() < 0 or arr.max() >= NUM_CLASSES):
            raise ValidationError(f"Labels must lie in 0..{NUM_CLASSES - 1}")
    counts = np.bincount(t * NUM_CLASSES + p, minlength=NUM_CLASSES * NUM_CLASSES)
    return counts.reshape(NUM_CLASSES, NUM_CLASSES)


def dice_per_class(cm: np.ndarray, c: int) -> float:
    """Dice of one class as a percentage: 100 * 2TP / (2TP + FP + FN).

    A class absent from both prediction and truth scores 100.
    """
    if not 0 <= c < NUM_CLASSES:
        raise ValidationError(f"Class {c} outside 0..{NUM_CLASSES - 1}")
    cm = np.asarray(cm)
    tp = float(cm[c, c])
    fp = float(cm[:, c].sum()) - tp
    fn = float(cm[c, :].sum()) - tp
    denom = 2.0 * tp + fp + fn
    if denom == 0:
        return 100.0
    return 100.0 * 2.0 * tp / denom


def weighted_dice(gm: float, wm: float, csf: float) -> float:
    """Volume-fraction weighted Dice (weights sum to 0.9999, not renormalized)."""
    return WEIGHT_GM * gm + WEIGHT_WM * wm + WEIGHT_CSF * csf


def tissue_dice(cm: np.ndarray) -> Tuple[float, float, float, float]:
    """(GM, WM, CSF, weighted) Dice percentages of a confusion matrix."""
    gm = dice_per_class(cm, TissueClass.GM)
    wm = dice_per_class(cm, TissueClass.WM)
    csf = dice_per_class(cm, TissueClass.CSF)
    return gm, wm, csf, weighted_dice(gm, wm, csf)
