"""ReLU and channel concatenation."""

from typing import Tuple

import numpy as np

from ..exceptions import ShapeError
from ..utils.validation import validate_tensor


def relu_forward(x: np.ndarray) -> np.ndarray:
    """Elementwise max(0, x)."""
    return np.maximum(x, 0.0)


def relu_backward(grad_out: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Pass gradients where the forward input was positive (zero at exactly 0)."""
    return grad_out * (x > 0)


def concat_channels(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Concatenate two tensors along the channel axis, ``a`` first.

    Args:
        a: Tensor (N, Ca, H, W)
        b: Tensor (N, Cb, H, W); Cb may be 0

    Returns:
        Tensor (N, Ca + Cb, H, W)

    Raises:
        ShapeError: If batch or spatial sizes disagree
    """
    validate_tensor(a, "a")
    validate_tensor(b, "b")
    if (a.shape[0], a.shape[2], a.shape[3]) != (b.shape[0], b.shape[2], b.shape[3]):
        raise ShapeError(
            f"Cannot concatenate {a.shape} and {b.shape}: batch and spatial "
            "sizes must agree"
        )
    return np.concatenate([a, b], axis=1)


def split_channels(
    grad_out: np.ndarray, a_channels: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Split a concatenation gradient back into its two inputs."""
    return grad_out[:, :a_channels], grad_out[:, a_channels:]
