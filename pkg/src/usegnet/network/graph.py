"""Layer graph: a fixed single-path schedule with skip edges.

A graph is an ordered list of LayerSpec nodes. Encoder feature maps are
captured by ``tap`` nodes and consumed by ``concat`` nodes at the same
resolution; pooling indices flow from each ``pool`` node to the ``unpool``
node that closes the same level. Forward runs the list in order, backward
runs it in reverse, so no general autodiff machinery is needed.
"""

import hashlib
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import NumericalError, ShapeError, StateError, ValidationError
from ..models.network import LayerKind, LayerSpec, Mode
from ..ops import (
    BatchNormParams,
    ConvParams,
    PoolIndices,
    batchnorm_backward,
    batchnorm_forward,
    concat_channels,
    conv2d_backward,
    conv2d_forward,
    conv_transpose2x2_backward,
    conv_transpose2x2_forward,
    maxpool2x2_backward,
    maxpool2x2_forward,
    relu_backward,
    relu_forward,
    softmax,
    split_channels,
    unpool2x2,
    unpool2x2_backward,
)
from ..utils.validation import NUM_CLASSES

logger = logging.getLogger(__name__)

# Std multiplier for the final conv, keeping initial logits near zero.
CLASSIFIER_GAIN = 0.1

LayerParams = Union[ConvParams, BatchNormParams]
GradientStore = Dict[str, Dict[str, np.ndarray]]


@dataclass
class GraphCache:
    """Per-layer intermediates of a train-mode forward pass."""

    entries: List[Any]
    input_shape: Tuple[int, int, int, int]


@dataclass
class ForwardResult:
    """Output of LayerGraph.forward."""

    probabilities: np.ndarray
    logits: np.ndarray
    cache: Optional[GraphCache] = None
    shapes: Dict[str, Tuple[int, ...]] = field(default_factory=dict)


class LayerGraph:
    """Ordered layer list with a parameter store and skip/pool side channels."""

    def __init__(
        self,
        name: str,
        layers: Sequence[LayerSpec],
        seed: int = 0,
        input_channels: int = 3,
    ):
        """Initialize LayerGraph.

        Args:
            name: Variant name (informational; not part of the fingerprint)
            layers: Ordered layer specifications
            seed: Seed for weight initialization
            input_channels: Channels of the network input

        Raises:
            ValidationError: If the layer list violates the structural rules
        """
        self.name = name
        self.layers: List[LayerSpec] = list(layers)
        self.input_channels = input_channels
        self.seed = seed
        self.pool_depth = self._check_structure()
        self.params: Dict[str, LayerParams] = {}
        self.reset_parameters(seed)

    def _check_structure(self) -> int:
        """Validate channel flow, LIFO pool/unpool pairing and skip resolution.

        Returns:
            Maximum pooling depth of the graph
        """
        ids = [spec.id for spec in self.layers]
        if len(set(ids)) != len(ids):
            raise ValidationError("Layer ids must be unique")

        channels = self.input_channels
        pool_stack: List[str] = []
        taps: Dict[str, Tuple[int, int]] = {}
        depth = 0
        for pos, spec in enumerate(self.layers):
            kind = spec.kind
            if kind in (LayerKind.CONV, LayerKind.UPCONV, LayerKind.BN):
                if spec.in_channels != channels:
                    raise ValidationError(
                        f"{spec.id}: expects {spec.in_channels} input channels, "
                        f"receives {channels}"
                    )
                if kind is LayerKind.CONV and spec.kernel not in (1, 3):
                    raise ValidationError(f"{spec.id}: kernel must be 1 or 3")
                if kind is LayerKind.UPCONV and spec.kernel != 2:
                    raise ValidationError(f"{spec.id}: upconv kernel must be 2")
                if kind is LayerKind.BN and spec.out_channels != spec.in_channels:
                    raise ValidationError(f"{spec.id}: BN must preserve channels")
                channels = spec.out_channels
            if kind is LayerKind.POOL:
                pool_stack.append(spec.id)
                depth = max(depth, len(pool_stack))
            elif kind in (LayerKind.UNPOOL, LayerKind.UPCONV):
                if not pool_stack:
                    raise ValidationError(f"{spec.id}: no open pool level to close")
                opened = pool_stack.pop()
                if kind is LayerKind.UNPOOL and spec.source != opened:
                    raise ValidationError(
                        f"{spec.id}: consumes indices of {spec.source!r} but the "
                        f"innermost open pool is {opened!r} (LIFO order violated)"
                    )
            elif kind is LayerKind.TAP:
                taps[spec.id] = (channels, len(pool_stack))
            elif kind is LayerKind.CONCAT:
                if spec.source not in taps:
                    raise ValidationError(f"{spec.id}: unknown tap {spec.source!r}")
                tap_channels, tap_level = taps[spec.source]
                if tap_level != len(pool_stack):
                    raise ValidationError(
                        f"{spec.id}: tap {spec.source!r} has a different resolution"
                    )
                if spec.in_channels != channels or (
                    spec.out_channels != channels + tap_channels
                ):
                    raise ValidationError(f"{spec.id}: concat channel mismatch")
                channels = spec.out_channels
            elif kind is LayerKind.SOFTMAX:
                if pos != len(self.layers) - 1:
                    raise ValidationError("softmax must be the last layer")
                if channels != NUM_CLASSES:
                    raise ValidationError(
                        f"softmax head needs {NUM_CLASSES} channels, got {channels}"
                    )
        if pool_stack:
            raise ValidationError(
                f"Pool layers without matching upsampling: {pool_stack}"
            )
        return depth

    def reset_parameters(self, seed: int) -> None:
        """(Re)initialize every parameter deterministically from a seed.

        The conv feeding the softmax head starts at CLASSIFIER_GAIN times the He
        scale so a fresh graph predicts close to uniform class probabilities.
        """
        rng = np.random.default_rng(seed)
        convs = [spec.id for spec in self.layers if spec.kind is LayerKind.CONV]
        head_id = convs[-1] if convs else None
        self.params = {}
        for spec in self.layers:
            if spec.kind is LayerKind.CONV:
                gain = CLASSIFIER_GAIN if spec.id == head_id else 1.0
                self.params[spec.id] = ConvParams.he_normal(
                    spec.in_channels, spec.out_channels, spec.kernel, rng, gain=gain
                )
            elif spec.kind is LayerKind.UPCONV:
                self.params[spec.id] = ConvParams.he_normal(
                    spec.in_channels, spec.out_channels, 2, rng, transposed=True
                )
            elif spec.kind is LayerKind.BN:
                self.params[spec.id] = BatchNormParams.identity(spec.out_channels)
        self.seed = seed

    @property
    def spec_string(self) -> str:
        """Canonical text form of the topology."""
        return "|".join(spec.signature() for spec in self.layers)

    @property
    def fingerprint(self) -> int:
        """64-bit hash of the topology."""
        digest = hashlib.blake2b(self.spec_string.encode(), digest_size=8).digest()
        return int.from_bytes(digest, "little")

    def parametric_layers(self) -> List[LayerSpec]:
        """Layers owning learnable parameters, in graph order."""
        return [spec for spec in self.layers if spec.is_parametric]

    def batchnorm_layers(self) -> List[BatchNormParams]:
        """BN parameter blocks in graph order."""
        return [p for p in self.params.values() if isinstance(p, BatchNormParams)]

    def _conv(self, layer_id: str) -> ConvParams:
        p = self.params[layer_id]
        if not isinstance(p, ConvParams):
            raise StateError(f"Layer {layer_id!r} has no convolution parameters")
        return p

    def _bn(self, layer_id: str) -> BatchNormParams:
        p = self.params[layer_id]
        if not isinstance(p, BatchNormParams):
            raise StateError(f"Layer {layer_id!r} has no batch-norm parameters")
        return p

    def zero_grad(self) -> None:
        """Reset every gradient buffer."""
        for p in self.params.values():
            p.zero_grad()

    def gradient_store(self) -> GradientStore:
        """Gradient buffers keyed by layer id and parameter name."""
        store: GradientStore = {}
        for layer_id, p in self.params.items():
            if isinstance(p, ConvParams):
                store[layer_id] = {"weights": p.grad_weights, "bias": p.grad_bias}
            else:
                store[layer_id] = {"gamma": p.grad_gamma, "beta": p.grad_beta}
        return store

    def parameter_store(self) -> Dict[str, Dict[str, np.ndarray]]:
        """Learnable arrays keyed by layer id and parameter name."""
        store: Dict[str, Dict[str, np.ndarray]] = {}
        for layer_id, p in self.params.items():
            if isinstance(p, ConvParams):
                store[layer_id] = {"weights": p.weights, "bias": p.bias}
            else:
                store[layer_id] = {"gamma": p.gamma, "beta": p.beta}
        return store

    def _check_input(self, x: np.ndarray) -> None:
        if not isinstance(x, np.ndarray) or x.ndim != 4:
            shape = getattr(x, "shape", None)
            raise ShapeError(f"Input must be (N, C, H, W), got {shape}")
        n, c, h, w = x.shape
        step = 2**self.pool_depth
        if n < 1 or c != self.input_channels or h % step or w % step or h < step:
            raise ShapeError(
                f"Input shape {x.shape} invalid: need {self.input_channels} channels "
                f"and spatial sizes divisible by {step}"
            )
        if not np.isfinite(x).all():
            raise NumericalError("Network input contains non-finite values", "input")

    def forward(self, x: np.ndarray, mode: Mode = Mode.INFER) -> ForwardResult:
        """Run the graph.

        Args:
            x: Input patches (N, 3, 40, 40)
            mode: Mode.TRAIN keeps caches and uses batch statistics

        Returns:
            ForwardResult with (N, 4, H, W) probabilities and logits; the cache is
            set only in train mode

        Raises:
            ShapeError: If the input shape is invalid
            NumericalError: If a layer produces non-finite values (names the layer)
            StateError: If the graph has no softmax head
        """
        mode = Mode(mode)
        if not self.layers or self.layers[-1].kind is not LayerKind.SOFTMAX:
            raise StateError(f"Graph {self.name!r} has no softmax head")
        self._check_input(x)
        train = mode is Mode.TRAIN

        entries: List[Any] = []
        indices: Dict[str, PoolIndices] = {}
        taps: Dict[str, np.ndarray] = {}
        shapes: Dict[str, Tuple[int, ...]] = {}
        act = x
        logits = x
        for spec in self.layers:
            cache: Any = None
            kind = spec.kind
            if kind is LayerKind.CONV:
                out = conv2d_forward(act, self._conv(spec.id))
                cache = act
            elif kind is LayerKind.UPCONV:
                out = conv_transpose2x2_forward(act, self._conv(spec.id))
                cache = act
            elif kind is LayerKind.BN:
                out, cache = batchnorm_forward(act, self._bn(spec.id), mode)
            elif kind is LayerKind.RELU:
                cache = act > 0
                out = relu_forward(act)
            elif kind is LayerKind.POOL:
                out, idx = maxpool2x2_forward(act)
                indices[spec.id] = idx
                cache = idx
            elif kind is LayerKind.UNPOOL:
                idx = indices[str(spec.source)]
                out = unpool2x2(act, idx)
                cache = idx
            elif kind is LayerKind.TAP:
                taps[spec.id] = act
                out = act
            elif kind is LayerKind.CONCAT:
                out = concat_channels(act, taps[str(spec.source)])
                cache = act.shape[1]
            else:
                logits = act
                out = softmax(act)

            if not np.isfinite(out).all():
                raise NumericalError(
                    f"Layer {spec.id!r} produced non-finite values", spec.id
                )
            shapes[spec.id] = out.shape
            if train:
                entries.append(cache)
            act = out

        graph_cache = GraphCache(entries, tuple(x.shape)) if train else None
        return ForwardResult(act, logits, graph_cache, shapes)

    def backward(
        self, cache: Optional[GraphCache], grad_logits: np.ndarray
    ) -> GradientStore:
        """Backpropagate a logits gradient through the whole graph.

        Gradient buffers are overwritten (not accumulated across calls). A tap
        receives the sum of the gradient from the main path and from every
        concat that consumed it.

        Args:
            cache: Cache of a train-mode forward pass
            grad_logits: Gradient with respect to the logits (N, 4, H, W)

        Returns:
            The gradient store (layer id -> parameter name -> gradient)

        Raises:
            StateError: If the cache is missing or does not belong to this graph
        """
        if cache is None:
            raise StateError("backward needs the cache of a train-mode forward pass")
        if len(cache.entries) != len(self.layers):
            raise StateError("Cache does not match this graph's layer list")
        self.zero_grad()

        grad = grad_logits
        skip_grads: Dict[str, np.ndarray] = {}
        for spec, entry in zip(reversed(self.layers), reversed(cache.entries)):
            kind = spec.kind
            if kind is LayerKind.SOFTMAX:
                continue
            if kind is LayerKind.CONV:
                conv = self._conv(spec.id)
                grad, gw, gb = conv2d_backward(entry, conv, grad)
                conv.grad_weights += gw
                conv.grad_bias += gb
            elif kind is LayerKind.UPCONV:
                conv = self._conv(spec.id)
                grad, gw, gb = conv_transpose2x2_backward(entry, conv, grad)
                conv.grad_weights += gw
                conv.grad_bias += gb
            elif kind is LayerKind.BN:
                bn = self._bn(spec.id)
                grad, gg, gbeta = batchnorm_backward(grad, entry)
                bn.grad_gamma += gg
                bn.grad_beta += gbeta
            elif kind is LayerKind.RELU:
                grad = relu_backward(grad, entry)
            elif kind is LayerKind.POOL:
                grad = maxpool2x2_backward(grad, entry, entry.input_shape)
            elif kind is LayerKind.UNPOOL:
                grad = unpool2x2_backward(grad, entry)
            elif kind is LayerKind.CONCAT:
                grad, skip = split_channels(grad, entry)
                source = str(spec.source)
                prior = skip_grads.get(source)
                skip_grads[source] = skip if prior is None else prior + skip
            elif kind is LayerKind.TAP:
                skip = skip_grads.pop(spec.id, None)
                if skip is not None:
                    grad = grad + skip
        return self.gradient_store()

    def __repr__(self) -> str:
        """String representation of the graph."""
        return (
            f"LayerGraph(name={self.name!r}, layers={len(self.layers)}, "
            f"params={param_count(self)})"
        )


def param_count(graph: LayerGraph) -> int:
    """Number of learnable values: conv weights and biases plus BN gamma and beta.

    Args:
        graph: Any layer graph (an empty graph counts 0)

    Returns:
        Learnable parameter total
    """
    return sum(p.count for p in graph.params.values())


def layer_breakdown(graph: LayerGraph) -> List[Tuple[str, str, str, int]]:
    """Per-layer parameter rows.

    Args:
        graph: Layer graph

    Returns:
        List of (layer_id, kind, shape description, count) for parametric layers
    """
    rows: List[Tuple[str, str, str, int]] = []
    for spec in graph.parametric_layers():
        p = graph.params[spec.id]
        if isinstance(p, ConvParams):
            shape = "x".join(str(s) for s in p.weights.shape) + f" +{p.bias.size}"
        else:
            shape = f"2x{p.channels}"
        rows.append((spec.id, spec.kind.value, shape, p.count))
    return rows
