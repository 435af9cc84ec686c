"""Builders for the four network variants.

The reference architecture fixes input size, kernel sizes, pool size, skip
placement and total parameter counts, but not per-layer widths. The widths
below are a reconstruction: with base width 64 (channels 64/128/256) and BN
after every convolution except the classifier and the 1x1 merge convolutions,
the closed-form counts are

    SegNet     3,471,300 conv + 4,096 BN = 3,475,396
    U-SegNet   SegNet + (128*64 + 64)    = 3,483,652
    U-SegNet-2 U-SegNet + (256*128 + 128) = 3,516,548

The U-Net variant's per-layer layout is unspecified; the one built here has
4,594,052 parameters at width 64 (reference U-Net count: 3,900,996).
"""

import logging
from typing import FrozenSet, List, Union

from ..exceptions import ValidationError
from ..models.network import LayerKind, LayerSpec, ModelVariant
from ..utils.validation import NUM_CLASSES
from .graph import LayerGraph, param_count

logger = logging.getLogger(__name__)

REFERENCE_UNET_PARAMS = 3_900_996
DEFAULT_WIDTH = 64


class _Builder:
    """Accumulates LayerSpecs while tracking the current channel count."""

    def __init__(self, input_channels: int = 3):
        self.layers: List[LayerSpec] = []
        self.channels = input_channels

    def _add(self, layer_id: str, kind: LayerKind, **fields: object) -> None:
        self.layers.append(LayerSpec(id=layer_id, kind=kind, **fields))

    def conv(
        self,
        layer_id: str,
        out: int,
        kernel: int = 3,
        bn: bool = True,
        relu: bool = True,
    ) -> None:
        self._add(
            layer_id,
            LayerKind.CONV,
            in_channels=self.channels,
            out_channels=out,
            kernel=kernel,
        )
        self.channels = out
        if bn:
            self._add(
                _sibling_id(layer_id, "bn"),
                LayerKind.BN,
                in_channels=out,
                out_channels=out,
            )
        if relu:
            self._add(_sibling_id(layer_id, "relu"), LayerKind.RELU)

    def tap(self, layer_id: str) -> None:
        self._add(layer_id, LayerKind.TAP)

    def pool(self, layer_id: str) -> None:
        self._add(layer_id, LayerKind.POOL)

    def unpool(self, layer_id: str, source: str) -> None:
        self._add(layer_id, LayerKind.UNPOOL, source=source)

    def upconv(self, layer_id: str, out: int) -> None:
        self._add(
            layer_id,
            LayerKind.UPCONV,
            in_channels=self.channels,
            out_channels=out,
            kernel=2,
        )
        self.channels = out

    def concat(self, layer_id: str, source: str, tap_channels: int) -> None:
        self._add(
            layer_id,
            LayerKind.CONCAT,
            in_channels=self.channels,
            out_channels=self.channels + tap_channels,
            source=source,
        )
        self.channels += tap_channels

    def head(self) -> None:
        self._add("softmax", LayerKind.SOFTMAX)


def _sibling_id(conv_id: str, kind: str) -> str:
    """enc1_conv2 -> enc1_bn2; ids without 'conv' get a suffix (dec1_merge_relu)."""
    if "conv" in conv_id:
        return conv_id.replace("conv", kind)
    return f"{conv_id}_{kind}"


def _widths(width: int) -> List[int]:
    if width < 1:
        raise ValidationError(f"width must be >= 1, got {width}")
    return [width, 2 * width, 4 * width]


def _encoder(b: _Builder, widths: List[int], taps: FrozenSet[int]) -> None:
    w1, w2, w3 = widths
    b.conv("enc1_conv1", w1)
    b.conv("enc1_conv2", w1)
    if 1 in taps:
        b.tap("enc1_tap")
    b.pool("pool1")
    b.conv("enc2_conv1", w2)
    b.conv("enc2_conv2", w2)
    if 2 in taps:
        b.tap("enc2_tap")
    b.pool("pool2")
    b.conv("enc3_conv1", w3)
    b.conv("enc3_conv2", w3)
    b.conv("enc3_conv3", w3)
    if 3 in taps:
        b.tap("enc3_tap")
    b.pool("pool3")


def _merge_skip(b: _Builder, level: int, tap_channels: int, out: int) -> None:
    """Concatenate an encoder tap and fold the channels back with a biased 1x1 conv."""
    b.concat(f"dec{level}_skip", f"enc{level}_tap", tap_channels)
    b.conv(f"dec{level}_merge", out, kernel=1, bn=False)


def _index_decoder(b: _Builder, widths: List[int], skips: FrozenSet[int]) -> None:
    w1, w2, w3 = widths
    b.unpool("unpool3", "pool3")
    b.conv("dec3_conv1", w3)
    b.conv("dec3_conv2", w3)
    b.conv("dec3_conv3", w2)
    b.unpool("unpool2", "pool2")
    if 2 in skips:
        _merge_skip(b, 2, w2, w2)
    b.conv("dec2_conv1", w2)
    b.conv("dec2_conv2", w1)
    b.unpool("unpool1", "pool1")
    if 1 in skips:
        _merge_skip(b, 1, w1, w1)
    b.conv("dec1_conv1", w1)
    b.conv("classifier", NUM_CLASSES, bn=False, relu=False)
    b.head()


def _index_graph(
    name: str, width: int, seed: int, skips: FrozenSet[int]
) -> LayerGraph:
    widths = _widths(width)
    b = _Builder()
    _encoder(b, widths, skips)
    _index_decoder(b, widths, skips)
    graph = LayerGraph(name, b.layers, seed=seed)
    logger.debug(f"Built {name} (width {width}): {param_count(graph)} parameters")
    return graph


def build_segnet(width: int = DEFAULT_WIDTH, seed: int = 0) -> LayerGraph:
    """SegNet with depth reduced to three pooling levels for 40x40x3 patches.

    Args:
        width: Base channel width (64 reproduces the reference count)
        seed: Weight initialization seed

    Returns:
        LayerGraph with index unpooling and no skip connections
    """
    return _index_graph(ModelVariant.SEGNET.value, width, seed, frozenset())


def build_usegnet(width: int = DEFAULT_WIDTH, seed: int = 0) -> LayerGraph:
    """SegNet plus one skip connection at the top decoder level.

    The tapped encoder map (after enc1_conv2's ReLU, before pooling) is
    concatenated after the last unpool and merged by a biased 1x1 conv + ReLU.

    Args:
        width: Base channel width
        seed: Weight initialization seed

    Returns:
        LayerGraph
    """
    return _index_graph(ModelVariant.USEGNET.value, width, seed, frozenset({1}))


def build_usegnet2(width: int = DEFAULT_WIDTH, seed: int = 0) -> LayerGraph:
    """U-SegNet plus a second skip connection at the middle decoder level.

    Args:
        width: Base channel width
        seed: Weight initialization seed

    Returns:
        LayerGraph
    """
    return _index_graph(ModelVariant.USEGNET2.value, width, seed, frozenset({1, 2}))


def build_unet_variant(width: int = DEFAULT_WIDTH, seed: int = 0) -> LayerGraph:
    """U-Net style decoder on the SegNet encoder.

    Each decoder level upsamples with a learnable 2x2 stride-2 transposed
    convolution, concatenates the same-resolution encoder tap and merges the
    doubled channels with a 3x3 conv + BN + ReLU. Pool indices are never read
    by the decoder.

    Args:
        width: Base channel width
        seed: Weight initialization seed

    Returns:
        LayerGraph
    """
    w1, w2, w3 = _widths(width)
    b = _Builder()
    _encoder(b, [w1, w2, w3], frozenset({1, 2, 3}))
    b.upconv("up3", w3)
    b.concat("dec3_skip", "enc3_tap", w3)
    b.conv("dec3_conv1", w3)
    b.conv("dec3_conv2", w3)
    b.conv("dec3_conv3", w2)
    b.upconv("up2", w2)
    b.concat("dec2_skip", "enc2_tap", w2)
    b.conv("dec2_conv1", w2)
    b.conv("dec2_conv2", w1)
    b.upconv("up1", w1)
    b.concat("dec1_skip", "enc1_tap", w1)
    b.conv("dec1_conv1", w1)
    b.conv("classifier", NUM_CLASSES, bn=False, relu=False)
    b.head()
    graph = LayerGraph(ModelVariant.UNET.value, b.layers, seed=seed)

    count = param_count(graph)
    if width == DEFAULT_WIDTH:
        logger.warning(
            f"U-Net variant has {count} parameters; reference U-Net has "
            f"{REFERENCE_UNET_PARAMS} (deviation {count - REFERENCE_UNET_PARAMS:+d})"
        )
    return graph


def build_model(
    variant: Union[ModelVariant, str], width: int = DEFAULT_WIDTH, seed: int = 0
) -> LayerGraph:
    """Build a graph by variant name.

    Args:
        variant: ModelVariant or its string value
        width: Base channel width
        seed: Weight initialization seed

    Returns:
        LayerGraph

    Raises:
        ValidationError: If the variant name is unknown
    """
    try:
        variant = ModelVariant(variant)
    except ValueError:
        valid = [v.value for v in ModelVariant]
        raise ValidationError(f"Unknown model {variant!r}; expected one of {valid}")
    builders = {
        ModelVariant.SEGNET: build_segnet,
        ModelVariant.USEGNET: build_usegnet,
        ModelVariant.USEGNET2: build_usegnet2,
        ModelVariant.UNET: build_unet_variant,
    }
    return builders[variant](width=width, seed=seed)
