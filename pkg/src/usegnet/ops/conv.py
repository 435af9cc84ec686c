"""Convolution kernels.

Convolutions are computed as a sum over kernel offsets: each (dy, dx) tap
contributes one tensordot between the shifted input window and the
(out_channels, in_channels) weight slice. This keeps memory at the size of the
output instead of materializing a full patch matrix.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from ..exceptions import ShapeError
from ..utils.validation import validate_tensor


@dataclass
class ConvParams:
    """Learnable convolution parameters and their gradient buffers.

    For ordinary convolutions ``weights`` has shape
    (out_channels, in_channels, k, k). For 2x2 transposed convolutions it has
    shape (in_channels, out_channels, 2, 2).
    """

    weights: np.ndarray
    bias: np.ndarray
    grad_weights: np.ndarray = field(init=False)
    grad_bias: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        self.bias = np.ascontiguousarray(self.bias, dtype=np.float64)
        self.grad_weights = np.zeros_like(self.weights)
        self.grad_bias = np.zeros_like(self.bias)

    @classmethod
    def he_normal(
        cls,
        in_channels: int,
        out_channels: int,
        kernel: int,
        rng: np.random.Generator,
        transposed: bool = False,
        gain: float = 1.0,
    ) -> "ConvParams":
        """Create zero-bias parameters with Gaussian weights of std gain*sqrt(2/fan_in).

        Args:
            in_channels: Number of input channels
            out_channels: Number of output channels
            kernel: Kernel side length
            rng: Seeded random generator
            transposed: Use the (in, out, k, k) transposed-convolution layout
            gain: Multiplier on the He standard deviation

        Returns:
            ConvParams with zero bias
        """
        if transposed:
            # Stride equals kernel, so each output pixel sees one tap per channel.
            fan_in = in_channels
            shape: Tuple[int, ...] = (in_channels, out_channels, kernel, kernel)
        else:
            fan_in = in_channels * kernel * kernel
            shape = (out_channels, in_channels, kernel, kernel)
        weights = rng.normal(0.0, gain * np.sqrt(2.0 / fan_in), size=shape)
        return cls(weights=weights, bias=np.zeros(out_channels))

    @property
    def count(self) -> int:
        """Number of learnable values (weights plus biases)."""
        return int(self.weights.size + self.bias.size)

    def zero_grad(self) -> None:
        """Reset gradient buffers to zero."""
        self.grad_weights.fill(0.0)
        self.grad_bias.fill(0.0)


def _resolve_padding(params: ConvParams, padding: Optional[int]) -> int:
    if padding is None:
        return params.weights.shape[2] // 2
    if padding < 0:
        raise ShapeError(f"padding must be non-negative, got {padding}")
    return padding


def _check_conv_input(x: np.ndarray, params: ConvParams) -> None:
    validate_tensor(x)
    out_c, in_c, kh, kw = params.weights.shape
    if kh != kw:
        raise ShapeError(f"Only square kernels are supported, got {kh}x{kw}")
    if x.shape[1] != in_c:
        raise ShapeError(
            f"Input has {x.shape[1]} channels but the kernel expects {in_c}"
        )
    if params.bias.shape != (out_c,):
        raise ShapeError(
            f"Bias shape {params.bias.shape} does not match {out_c} output channels"
        )


def conv2d_forward(
    x: np.ndarray, params: ConvParams, padding: Optional[int] = None
) -> np.ndarray:
    """Stride-1 2-D convolution with zero padding.

    Args:
        x: Input tensor (N, C, H, W)
        params: Convolution parameters (O, C, k, k)
        padding: Zero padding per side; defaults to k // 2 (size preserving)

    Returns:
        Output tensor (N, O, H + 2p - k + 1, W + 2p - k + 1)

    Raises:
        ShapeError: If channels or bias disagree with the kernel
        NumericalError: If the input holds non-finite values
    """
    _check_conv_input(x, params)
    pad = _resolve_padding(params, padding)
    w = params.weights
    k = w.shape[2]
    n, _, h, wd = x.shape
    ho, wo = h + 2 * pad - k + 1, wd + 2 * pad - k + 1
    if ho < 1 or wo < 1:
        raise ShapeError(f"Kernel {k}x{k} does not fit a {h}x{wd} input")

    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
    acc = np.zeros((n, ho, wo, w.shape[0]))
    for dy in range(k):
        for dx in range(k):
            window = xp[:, :, dy : dy + ho, dx : dx + wo]
            acc += np.tensordot(window, w[:, :, dy, dx], axes=([1], [1]))
    out = acc.transpose(0, 3, 1, 2) + params.bias[None, :, None, None]
    return np.ascontiguousarray(out)


def conv2d_backward(
    x: np.ndarray,
    params: ConvParams,
    grad_out: np.ndarray,
    padding: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of conv2d_forward with respect to input, weights and bias.

    Args:
        x: Input tensor of the matching forward call
        params: Convolution parameters of the matching forward call
        grad_out: Gradient of the loss with respect to the forward output
        padding: Padding of the matching forward call

    Returns:
        Tuple of (grad_input, grad_weights, grad_bias)

    Raises:
        ShapeError: If grad_out disagrees with the forward output shape
    """
    _check_conv_input(x, params)
    validate_tensor(grad_out, "grad_out")
    pad = _resolve_padding(params, padding)
    w = params.weights
    k = w.shape[2]
    n, c, h, wd = x.shape
    ho, wo = h + 2 * pad - k + 1, wd + 2 * pad - k + 1
    if grad_out.shape != (n, w.shape[0], ho, wo):
        raise ShapeError(
            f"grad_out shape {grad_out.shape} does not match forward output "
            f"{(n, w.shape[0], ho, wo)}"
        )

    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
    g = grad_out.transpose(0, 2, 3, 1)
    grad_w = np.zeros_like(w)
    grad_xp = np.zeros((n, h + 2 * pad, wd + 2 * pad, c))
    for dy in range(k):
        for dx in range(k):
            window = xp[:, :, dy : dy + ho, dx : dx + wo]
            grad_w[:, :, dy, dx] = np.tensordot(g, window, axes=([0, 1, 2], [0, 2, 3]))
            grad_xp[:, dy : dy + ho, dx : dx + wo, :] += np.tensordot(
                g, w[:, :, dy, dx], axes=([3], [0])
            )
    grad_x = grad_xp[:, pad : pad + h, pad : pad + wd, :].transpose(0, 3, 1, 2)
    grad_b = grad_out.sum(axis=(0, 2, 3))
    return np.ascontiguousarray(grad_x), grad_w, grad_b


def conv_transpose2x2_forward(x: np.ndarray, params: ConvParams) -> np.ndarray:
    """Learnable 2x upsampling: transposed convolution with a 2x2 kernel, stride 2.

    Args:
        x: Input tensor (N, C, H, W)
        params: Parameters with weights (C, O, 2, 2)

    Returns:
        Output tensor (N, O, 2H, 2W)

    Raises:
        ShapeError: If the input channels disagree with the kernel
    """
    validate_tensor(x)
    w = params.weights
    if w.ndim != 4 or w.shape[2:] != (2, 2):
        raise ShapeError(f"Transposed kernel must be (C, O, 2, 2), got {w.shape}")
    if x.shape[1] != w.shape[0]:
        raise ShapeError(
            f"Input has {x.shape[1]} channels but the kernel expects {w.shape[0]}"
        )
    n, _, h, wd = x.shape
    o = w.shape[1]
    y = np.tensordot(x, w, axes=([1], [0]))  # (N, H, W, O, 2, 2)
    out = y.transpose(0, 3, 1, 4, 2, 5).reshape(n, o, 2 * h, 2 * wd)
    return out + params.bias[None, :, None, None]


def conv_transpose2x2_backward(
    x: np.ndarray, params: ConvParams, grad_out: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of conv_transpose2x2_forward.

    Args:
        x: Input tensor of the matching forward call
        params: Parameters of the matching forward call
        grad_out: Gradient with respect to the (N, O, 2H, 2W) output

    Returns:
        Tuple of (grad_input, grad_weights, grad_bias)
    """
    w = params.weights
    n, c, h, wd = x.shape
    o = w.shape[1]
    if grad_out.shape != (n, o, 2 * h, 2 * wd):
        raise ShapeError(
            f"grad_out shape {grad_out.shape} does not match forward output "
            f"{(n, o, 2 * h, 2 * wd)}"
        )
    g = grad_out.reshape(n, o, h, 2, wd, 2).transpose(0, 2, 4, 1, 3, 5)
    grad_x = np.tensordot(g, w, axes=([3, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
    grad_w = np.tensordot(x, g, axes=([0, 2, 3], [0, 1, 2]))
    grad_b = grad_out.sum(axis=(0, 2, 3))
    return np.ascontiguousarray(grad_x), grad_w, grad_b
