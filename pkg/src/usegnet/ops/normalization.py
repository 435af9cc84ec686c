"""Per-channel batch normalization over (N, H, W)."""

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Tuple

import numpy as np

from ..exceptions import ShapeError, StateError, ValidationError
from ..models.network import Mode
from ..utils.validation import validate_tensor

DEFAULT_EPSILON = 1e-5
DEFAULT_MOMENTUM = 0.1


@dataclass
class BatchNormParams:
    """Scale/shift parameters and running statistics of one BN layer."""

    gamma: np.ndarray
    beta: np.ndarray
    running_mean: np.ndarray
    running_var: np.ndarray
    epsilon: float = DEFAULT_EPSILON
    momentum_stat: float = DEFAULT_MOMENTUM
    stats_ready: bool = False
    grad_gamma: np.ndarray = field(init=False)
    grad_beta: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        if not 0.0 < self.momentum_stat < 1.0:
            raise ValidationError(
                f"momentum_stat must lie in (0, 1), got {self.momentum_stat}"
            )
        if self.epsilon <= 0:
            raise ValidationError(f"epsilon must be positive, got {self.epsilon}")
        self.grad_gamma = np.zeros_like(self.gamma)
        self.grad_beta = np.zeros_like(self.beta)

    @classmethod
    def identity(cls, channels: int) -> "BatchNormParams":
        """BN with gamma=1, beta=0 and statistics mean=0, var=1 (not yet ready)."""
        return cls(
            gamma=np.ones(channels),
            beta=np.zeros(channels),
            running_mean=np.zeros(channels),
            running_var=np.ones(channels),
        )

    @property
    def channels(self) -> int:
        """Number of normalized channels."""
        return int(self.gamma.size)

    @property
    def count(self) -> int:
        """Number of learnable values (gamma plus beta)."""
        return 2 * self.channels

    def initialize_running_stats(
        self, mean: Optional[np.ndarray] = None, var: Optional[np.ndarray] = None
    ) -> None:
        """Declare running statistics usable for inference.

        Args:
            mean: Optional per-channel mean; keeps the current value if omitted
            var: Optional per-channel variance; keeps the current value if omitted
        """
        if mean is not None:
            self.running_mean = np.asarray(mean, dtype=np.float64).copy()
        if var is not None:
            var = np.asarray(var, dtype=np.float64)
            if (var < 0).any():
                raise ValidationError("running_var entries must be >= 0")
            self.running_var = var.copy()
        self.stats_ready = True

    def zero_grad(self) -> None:
        """Reset gradient buffers to zero."""
        self.grad_gamma.fill(0.0)
        self.grad_beta.fill(0.0)


class BatchNormCache(NamedTuple):
    """Intermediates kept by a train-mode forward pass."""

    x_hat: np.ndarray
    inv_std: np.ndarray
    gamma: np.ndarray


def batchnorm_forward(
    x: np.ndarray, params: BatchNormParams, mode: Mode
) -> Tuple[np.ndarray, Optional[BatchNormCache]]:
    """Batch normalization forward pass.

    In train mode the batch statistics normalize the input and the running
    statistics are updated by exponential moving average (unbiased variance).
    In infer mode the running statistics are used.

    Args:
        x: Input tensor (N, C, H, W)
        params: BN parameters for C channels
        mode: Mode.TRAIN or Mode.INFER

    Returns:
        Tuple of (output, cache); the cache is None in infer mode

    Raises:
        ShapeError: If the channel count disagrees
        ValidationError: If train mode sees fewer than 2 values per channel
        StateError: If infer mode runs before statistics exist
    """
    validate_tensor(x)
    n, c, h, w = x.shape
    if c != params.channels:
        raise ShapeError(f"BN expects {params.channels} channels, got {c}")
    gamma = params.gamma[None, :, None, None]
    beta = params.beta[None, :, None, None]

    if Mode(mode) is Mode.INFER:
        if not params.stats_ready:
            raise StateError(
                "BN inference requested before any training update; "
                "train first or call initialize_running_stats()"
            )
        mean = params.running_mean[None, :, None, None]
        var = params.running_var[None, :, None, None]
        inv_std = 1.0 / np.sqrt(var + params.epsilon)
        return (x - mean) * inv_std * gamma + beta, None

    m = n * h * w
    if m < 2:
        raise ValidationError(
            f"BN train mode needs at least 2 values per channel, got {m}"
        )
    mean = x.mean(axis=(0, 2, 3))
    var = x.var(axis=(0, 2, 3))
    inv_std = 1.0 / np.sqrt(var + params.epsilon)
    x_hat = (x - mean[None, :, None, None]) * inv_std[None, :, None, None]
    out = x_hat * gamma + beta

    mom = params.momentum_stat
    params.running_mean = (1.0 - mom) * params.running_mean + mom * mean
    params.running_var = (1.0 - mom) * params.running_var + mom * var * m / (m - 1)
    params.stats_ready = True
    return out, BatchNormCache(x_hat, inv_std, params.gamma.copy())


def batchnorm_backward(
    grad_out: np.ndarray, cache: Optional[BatchNormCache]
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of a train-mode batch normalization.

    Args:
        grad_out: Gradient with respect to the BN output
        cache: Cache returned by the train-mode forward pass

    Returns:
        Tuple of (grad_input, grad_gamma, grad_beta)

    Raises:
        StateError: If no train-mode cache is available
    """
    if cache is None:
        raise StateError("BN backward needs the cache of a train-mode forward pass")
    x_hat, inv_std, gamma = cache
    if grad_out.shape != x_hat.shape:
        raise ShapeError(
            f"grad_out shape {grad_out.shape} does not match BN output {x_hat.shape}"
        )
    n, _, h, w = grad_out.shape
    m = n * h * w
    grad_beta = grad_out.sum(axis=(0, 2, 3))
    grad_gamma = (grad_out * x_hat).sum(axis=(0, 2, 3))
    g_hat = grad_out * gamma[None, :, None, None]
    sum_g = g_hat.sum(axis=(0, 2, 3))[None, :, None, None]
    sum_gx = (g_hat * x_hat).sum(axis=(0, 2, 3))[None, :, None, None]
    grad_x = inv_std[None, :, None, None] / m * (m * g_hat - sum_g - x_hat * sum_gx)
    return grad_x, grad_gamma, grad_beta
