"""Binary checkpoint format.

Layout (all little-endian)::

    header   4s magic "USGN" | u32 version | u64 fingerprint
             | u64 parameter count | u64 statistics count
    params   f64 x parameter count   (graph order; conv weights then bias,
                                      BN gamma then beta)
    stats    f64 x statistics count  (per BN layer: ready flag, running mean,
                                      running var)
"""

import logging
import os
import struct
from pathlib import Path
from typing import List, Union

import numpy as np

from ..exceptions import CheckpointFormatError, FingerprintMismatchError
from ..ops import BatchNormParams, ConvParams
from .graph import LayerGraph

logger = logging.getLogger(__name__)

MAGIC = b"USGN"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sIQQQ")
PAYLOAD_DTYPE = np.dtype("<f8")

PathLike = Union[str, Path]


def _parameter_arrays(graph: LayerGraph) -> List[np.ndarray]:
    arrays: List[np.ndarray] = []
    for spec in graph.parametric_layers():
        p = graph.params[spec.id]
        if isinstance(p, ConvParams):
            arrays.extend([p.weights, p.bias])
        else:
            arrays.extend([p.gamma, p.beta])
    return arrays


def _statistics_vector(graph: LayerGraph) -> np.ndarray:
    parts: List[np.ndarray] = []
    for bn in graph.batchnorm_layers():
        parts.append(np.array([1.0 if bn.stats_ready else 0.0]))
        parts.append(bn.running_mean.ravel())
        parts.append(bn.running_var.ravel())
    if not parts:
        return np.zeros(0)
    return np.concatenate(parts)


def checkpoint_size(graph: LayerGraph) -> int:
    """Exact byte size of a checkpoint for this graph."""
    n_values = sum(a.size for a in _parameter_arrays(graph))
    n_stats = sum(1 + 2 * bn.channels for bn in graph.batchnorm_layers())
    return HEADER.size + PAYLOAD_DTYPE.itemsize * (n_values + n_stats)


def save_weights(graph: LayerGraph, path: PathLike) -> Path:
    """Write all parameters and BN statistics of a graph.

    The file is written to a sibling temporary path and renamed into place so
    that an interrupted write never leaves a truncated checkpoint behind.

    Args:
        graph: Graph to serialize
        path: Destination file

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = _parameter_arrays(graph)
    values = (
        np.concatenate([a.ravel() for a in arrays]) if arrays else np.zeros(0)
    ).astype(PAYLOAD_DTYPE)
    stats = _statistics_vector(graph).astype(PAYLOAD_DTYPE)
    header = HEADER.pack(
        MAGIC, FORMAT_VERSION, graph.fingerprint, values.size, stats.size
    )

    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(values.tobytes())
        fh.write(stats.tobytes())
    os.replace(tmp, path)
    logger.info(f"Saved {values.size} parameters of {graph.name} to {path}")
    return path


def read_header(path: PathLike) -> dict:
    """Parse only the header of a checkpoint.

    Returns:
        Dict with version, fingerprint, n_values and n_stats

    Raises:
        CheckpointFormatError: If the file is too short or the magic is wrong
    """
    with open(path, "rb") as fh:
        raw = fh.read(HEADER.size)
    return _unpack_header(raw, Path(path))


def _unpack_header(raw: bytes, path: Path) -> dict:
    if len(raw) < HEADER.size:
        raise CheckpointFormatError(f"{path}: truncated checkpoint header")
    magic, version, fingerprint, n_values, n_stats = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise CheckpointFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise CheckpointFormatError(
            f"{path}: unsupported checkpoint version {version}"
        )
    return {
        "version": version,
        "fingerprint": fingerprint,
        "n_values": n_values,
        "n_stats": n_stats,
    }


def load_weights(graph: LayerGraph, path: PathLike) -> None:
    """Restore parameters and BN statistics into a graph in place.

    Args:
        graph: Receiving graph; its topology must match the writer's
        path: Checkpoint file

    Raises:
        CheckpointFormatError: On bad magic, unknown version or truncation
        FingerprintMismatchError: If the checkpoint belongs to another topology
    """
    path = Path(path)
    raw = path.read_bytes()
    header = _unpack_header(raw, path)
    if header["fingerprint"] != graph.fingerprint:
        raise FingerprintMismatchError(
            f"{path}: checkpoint topology {header['fingerprint']:016x} does not "
            f"match graph {graph.name!r} ({graph.fingerprint:016x})",
            expected=graph.fingerprint,
            found=header["fingerprint"],
        )

    arrays = _parameter_arrays(graph)
    bns = graph.batchnorm_layers()
    n_values = sum(a.size for a in arrays)
    n_stats = sum(1 + 2 * bn.channels for bn in bns)
    if header["n_values"] != n_values or header["n_stats"] != n_stats:
        raise CheckpointFormatError(
            f"{path}: header declares {header['n_values']} parameters and "
            f"{header['n_stats']} statistics, graph needs {n_values} and {n_stats}"
        )
    expected = HEADER.size + PAYLOAD_DTYPE.itemsize * (n_values + n_stats)
    if len(raw) != expected:
        raise CheckpointFormatError(
            f"{path}: checkpoint is {len(raw)} bytes, expected {expected} (truncated)"
        )

    payload = np.frombuffer(raw, dtype=PAYLOAD_DTYPE, offset=HEADER.size)
    offset = 0
    for arr in arrays:
        arr[...] = payload[offset : offset + arr.size].reshape(arr.shape)
        offset += arr.size
    for bn in bns:
        _restore_statistics(bn, payload, offset)
        offset += 1 + 2 * bn.channels
    logger.info(f"Loaded {n_values} parameters into {graph.name} from {path}")


def _restore_statistics(bn: BatchNormParams, payload: np.ndarray, offset: int) -> None:
    c = bn.channels
    ready = payload[offset] != 0.0
    bn.running_mean = payload[offset + 1 : offset + 1 + c].astype(np.float64)
    bn.running_var = payload[offset + 1 + c : offset + 1 + 2 * c].astype(np.float64)
    bn.stats_ready = bool(ready)
