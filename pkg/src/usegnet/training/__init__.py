"""Mini-batch SGD training."""

from .optim import (
    TrainState,
    apply_freeze_schedule,
    sequential_schedule,
    sgd_step,
    zero_velocity,
)
from .trainer import (
    FitResult,
    evaluate_loss,
    fit,
    pixel_accuracy,
    train_epoch,
    write_history,
)

__all__ = [
    "FitResult",
    "TrainState",
    "apply_freeze_schedule",
    "evaluate_loss",
    "fit",
    "pixel_accuracy",
    "sequential_schedule",
    "sgd_step",
    "train_epoch",
    "write_history",
    "zero_velocity",
]
