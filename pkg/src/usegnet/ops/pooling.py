"""2x2 max pooling with recorded argmax indices, and index-driven unpooling."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..exceptions import ShapeError, StateError
from ..utils.validation import validate_even_spatial, validate_tensor


@dataclass(frozen=True)
class PoolIndices:
    """Argmax positions of a 2x2 max pool.

    ``offsets[n, c, i, j]`` is the flat offset ``row * W + col`` into the
    pre-pool (H, W) plane of the maximum of window (i, j).
    """

    offsets: np.ndarray
    input_shape: Tuple[int, int, int, int]

    @property
    def pooled_shape(self) -> Tuple[int, int, int, int]:
        """Shape of the pooled tensor these indices belong to."""
        n, c, h, w = self.input_shape
        return (n, c, h // 2, w // 2)

    def validate(self) -> None:
        """Check that every offset lies inside its own 2x2 window.

        Raises:
            StateError: If any offset points outside its window
        """
        n, c, h, w = self.input_shape
        if self.offsets.shape != self.pooled_shape:
            raise StateError(
                f"Pool indices shape {self.offsets.shape} does not match "
                f"pooled shape {self.pooled_shape}"
            )
        rows, cols = np.divmod(self.offsets, w)
        ii = np.arange(h // 2)[:, None]
        jj = np.arange(w // 2)[None, :]
        inside = (
            (self.offsets >= 0)
            & (self.offsets < h * w)
            & (rows // 2 == ii)
            & (cols // 2 == jj)
        )
        if not inside.all():
            raise StateError("Pool indices point outside their 2x2 windows")


def maxpool2x2_forward(x: np.ndarray) -> Tuple[np.ndarray, PoolIndices]:
    """2x2 stride-2 max pooling.

    Ties are broken by the first occurrence in row-major window order.

    Args:
        x: Input tensor (N, C, H, W) with even H and W

    Returns:
        Tuple of (pooled tensor (N, C, H/2, W/2), PoolIndices)

    Raises:
        ShapeError: If H or W is odd
    """
    validate_tensor(x)
    validate_even_spatial(x)
    n, c, h, w = x.shape
    hh, hw = h // 2, w // 2
    windows = x.reshape(n, c, hh, 2, hw, 2).transpose(0, 1, 2, 4, 3, 5)
    windows = windows.reshape(n, c, hh, hw, 4)
    k = windows.argmax(axis=-1)
    out = np.take_along_axis(windows, k[..., None], axis=-1)[..., 0]
    rows = 2 * np.arange(hh)[:, None] + k // 2
    cols = 2 * np.arange(hw)[None, :] + k % 2
    offsets = (rows * w + cols).astype(np.int64)
    return np.ascontiguousarray(out), PoolIndices(offsets, (n, c, h, w))


def unpool2x2(x: np.ndarray, indices: PoolIndices) -> np.ndarray:
    """Place pooled values back at their recorded argmax positions.

    All other positions of the doubled output are exactly zero.

    Args:
        x: Pooled-resolution tensor (N, C, H/2, W/2)
        indices: Indices from the matching maxpool2x2_forward

    Returns:
        Tensor of the pre-pool shape (N, C, H, W)

    Raises:
        ShapeError: If x does not match the indices' pooled shape
        StateError: If the indices are corrupted
    """
    validate_tensor(x)
    if x.shape != indices.offsets.shape:
        raise ShapeError(
            f"Unpool input shape {x.shape} does not match indices "
            f"{indices.offsets.shape}"
        )
    indices.validate()
    n, c, h, w = indices.input_shape
    out = np.zeros((n, c, h * w))
    np.put_along_axis(
        out, indices.offsets.reshape(n, c, -1), x.reshape(n, c, -1), axis=2
    )
    return out.reshape(n, c, h, w)


def unpool2x2_backward(grad_out: np.ndarray, indices: PoolIndices) -> np.ndarray:
    """Gather the upsampled gradient at the recorded argmax positions.

    Args:
        grad_out: Gradient with respect to the unpooled (N, C, H, W) output
        indices: Indices used by the forward unpooling

    Returns:
        Gradient with respect to the pooled input (N, C, H/2, W/2)
    """
    if grad_out.shape != indices.input_shape:
        raise ShapeError(
            f"grad_out shape {grad_out.shape} does not match unpooled shape "
            f"{indices.input_shape}"
        )
    n, c, _, _ = indices.input_shape
    gathered = np.take_along_axis(
        grad_out.reshape(n, c, -1), indices.offsets.reshape(n, c, -1), axis=2
    )
    return gathered.reshape(indices.pooled_shape)


def maxpool2x2_backward(
    grad_out: np.ndarray,
    indices: PoolIndices,
    input_shape: Tuple[int, int, int, int],
) -> np.ndarray:
    """Route pooled gradients to the argmax positions; zeros elsewhere.

    Args:
        grad_out: Gradient with respect to the pooled output
        indices: Indices from the matching forward call
        input_shape: Shape of the forward input

    Returns:
        Gradient with respect to the forward input

    Raises:
        ShapeError: If input_shape disagrees with the indices
        StateError: If an index lies outside its window
    """
    if tuple(input_shape) != tuple(indices.input_shape):
        raise ShapeError(
            f"input_shape {tuple(input_shape)} does not match indices "
            f"{indices.input_shape}"
        )
    return unpool2x2(grad_out, indices)
