"""Utilities module for usegnet."""

from .validation import (
    NUM_CLASSES,
    validate_dims,
    validate_even_spatial,
    validate_finite,
    validate_fraction,
    validate_labels,
    validate_same_shape,
    validate_tensor,
)

__all__ = [
    "NUM_CLASSES",
    "validate_dims",
    "validate_even_spatial",
    "validate_finite",
    "validate_fraction",
    "validate_labels",
    "validate_same_shape",
    "validate_tensor",
]
