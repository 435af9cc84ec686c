"""Differentiable tensor kernels on (N, C, H, W) float64 arrays."""

from .activation import concat_channels, relu_backward, relu_forward, split_channels
from .conv import (
    ConvParams,
    conv2d_backward,
    conv2d_forward,
    conv_transpose2x2_backward,
    conv_transpose2x2_forward,
)
from .loss import softmax, softmax_ce
from .normalization import (
    BatchNormCache,
    BatchNormParams,
    batchnorm_backward,
    batchnorm_forward,
)
from .pooling import (
    PoolIndices,
    maxpool2x2_backward,
    maxpool2x2_forward,
    unpool2x2,
    unpool2x2_backward,
)

__all__ = [
    "BatchNormCache",
    "BatchNormParams",
    "ConvParams",
    "PoolIndices",
    "batchnorm_backward",
    "batchnorm_forward",
    "concat_channels",
    "conv2d_backward",
    "conv2d_forward",
    "conv_transpose2x2_backward",
    "conv_transpose2x2_forward",
    "maxpool2x2_backward",
    "maxpool2x2_forward",
    "relu_backward",
    "relu_forward",
    "softmax",
    "softmax_ce",
    "split_channels",
    "unpool2x2",
    "unpool2x2_backward",
]
