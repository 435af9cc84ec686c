"""Layer graphs, network builders and checkpoints."""

from .builders import (
    DEFAULT_WIDTH,
    build_model,
    build_segnet,
    build_unet_variant,
    build_usegnet,
    build_usegnet2,
)
from .checkpoint import checkpoint_size, load_weights, read_header, save_weights
from .graph import ForwardResult, GraphCache, LayerGraph, layer_breakdown, param_count

__all__ = [
    "DEFAULT_WIDTH",
    "ForwardResult",
    "GraphCache",
    "LayerGraph",
    "build_model",
    "build_segnet",
    "build_unet_variant",
    "build_usegnet",
    "build_usegnet2",
    "checkpoint_size",
    "layer_breakdown",
    "load_weights",
    "param_count",
    "read_header",
    "save_weights",
]
