"""Validation utilities for the usegnet package."""

from typing import Sequence

import numpy as np

from ..exceptions import NumericalError, ShapeError, ValidationError

NUM_CLASSES = 4


def validate_tensor(x: np.ndarray, name: str = "input") -> None:
    """Validate that an array is a finite 4-D (N, C, H, W) tensor.

    Args:
        x: Array to validate
        name: Name used in error messages

    Raises:
        ShapeError: If the array is not 4-D
        NumericalError: If the array holds NaN or Inf
    """
    if not isinstance(x, np.ndarray) or x.ndim != 4:
        shape = getattr(x, "shape", None)
        raise ShapeError(f"{name} must be a 4-D (N, C, H, W) array, got shape {shape}")
    validate_finite(x, name)


def validate_finite(x: np.ndarray, name: str = "input") -> None:
    """Validate that an array holds only finite values.

    Args:
        x: Array to validate
        name: Name used in error messages

    Raises:
        NumericalError: If the array holds NaN or Inf
    """
    if not np.isfinite(x).all():
        raise NumericalError(f"{name} contains non-finite values")


def validate_same_shape(a: np.ndarray, b: np.ndarray, what: str) -> None:
    """Validate that two arrays share a shape.

    Args:
        a: First array
        b: Second array
        what: Description used in error messages

    Raises:
        ShapeError: If the shapes differ
    """
    if a.shape != b.shape:
        raise ShapeError(f"{what}: shape {a.shape} does not match {b.shape}")


def validate_even_spatial(x: np.ndarray) -> None:
    """Validate that a tensor's height and width are even.

    Args:
        x: 4-D tensor

    Raises:
        ShapeError: If either spatial dimension is odd
    """
    _, _, h, w = x.shape
    if h % 2 or w % 2:
        raise ShapeError(f"2x2 pooling needs even spatial dims, got {h}x{w}")


def validate_labels(labels: np.ndarray, num_classes: int = NUM_CLASSES) -> None:
    """Validate that every label is a class id in [0, num_classes).

    Args:
        labels: Integer label array
        num_classes: Number of classes

    Raises:
        ValidationError: If any label lies outside the class range
    """
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise ValidationError(
            f"Labels must lie in 0..{num_classes - 1}, "
            f"got range [{labels.min()}, {labels.max()}]"
        )


def validate_dims(dims: Sequence[int], minimum: int = 1, name: str = "dims") -> None:
    """Validate a tuple of positive dimensions.

    Args:
        dims: Dimension sizes
        minimum: Smallest allowed size
        name: Name used in error messages

    Raises:
        ValidationError: If any dimension is below the minimum
    """
    if not dims or any(int(d) < minimum for d in dims):
        raise ValidationError(f"{name} must all be >= {minimum}, got {tuple(dims)}")


def validate_fraction(value: float, name: str) -> None:
    """Validate a value in the closed unit interval.

    Args:
        value: Value to validate
        name: Name used in error messages

    Raises:
        ValidationError: If the value lies outside [0, 1]
    """
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"{name} must be between 0 and 1, got {value}")
