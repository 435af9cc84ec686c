"""Softmax over channels and weighted softmax cross-entropy."""

from typing import Optional, Sequence, Tuple

import numpy as np

from ..exceptions import ShapeError, ValidationError
from ..utils.validation import NUM_CLASSES, validate_labels, validate_tensor


def softmax(logits: np.ndarray) -> np.ndarray:
    """Per-pixel softmax over the channel axis, stabilized by max subtraction."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax_ce(
    logits: np.ndarray,
    labels: np.ndarray,
    class_weights: Optional[Sequence[float]] = None,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Mean per-pixel weighted negative log-likelihood of a 4-way softmax.

    Args:
        logits: Tensor (N, 4, H, W)
        labels: Integer class ids (N, H, W) in 0..3
        class_weights: Optional per-class weights (length 4)

    Returns:
        Tuple of (loss, probabilities, grad_logits)

    Raises:
        ShapeError: If logits do not have 4 channels or labels disagree in shape
        ValidationError: If a label lies outside 0..3
    """
    validate_tensor(logits, "logits")
    n, c, h, w = logits.shape
    if c != NUM_CLASSES:
        raise ShapeError(f"logits must have {NUM_CLASSES} channels, got {c}")
    labels = np.asarray(labels)
    if labels.shape != (n, h, w):
        raise ShapeError(f"labels shape {labels.shape} does not match {(n, h, w)}")
    validate_labels(labels)
    labels = labels.astype(np.int64)

    if class_weights is None:
        weights = np.ones(NUM_CLASSES)
    else:
        weights = np.asarray(class_weights, dtype=np.float64)
        if weights.shape != (NUM_CLASSES,) or (weights < 0).any():
            raise ValidationError(
                f"class_weights must be {NUM_CLASSES} non-negative values"
            )

    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    z = e.sum(axis=1, keepdims=True)
    probs = e / z
    log_probs = shifted - np.log(z)

    pixel_w = weights[labels]
    picked = np.take_along_axis(log_probs, labels[:, None], axis=1)[:, 0]
    normalizer = float(n * h * w)
    loss = float(-(pixel_w * picked).sum() / normalizer)

    onehot = np.zeros_like(probs)
    np.put_along_axis(onehot, labels[:, None], 1.0, axis=1)
    grad = (probs - onehot) * (pixel_w[:, None] / normalizer)
    return loss, probs, grad
