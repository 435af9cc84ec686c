"""Minimal NIfTI-1 reader and writer for scalar 3-D volumes.

Only the header fields needed for skull-stripped structural scans are
honored: dim, pixdim, datatype, vox_offset and the intensity scaling pair.
Orientation matrices are parsed but ignored for geometry.
"""

import logging
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np

from ..exceptions import (
    DataError,
    NiftiMagicError,
    TruncatedPayloadError,
    UnsupportedDatatypeError,
    ValidationError,
)
from ..models.volumes import NiftiMetadata, Volume
from .raw import volume_from_voxels

logger = logging.getLogger(__name__)

HEADER_SIZE = 348
SINGLE_FILE_OFFSET = 352

# Field layout of the 348-byte header without byte order; header_dtype adds
# the detected order to every multi-byte field.
HEADER_FIELDS = [
    ("sizeof_hdr", "i4"),
    ("data_type", "S10"),
    ("db_name", "S18"),
    ("extents", "i4"),
    ("session_error", "i2"),
    ("regular", "S1"),
    ("dim_info", "u1"),
    ("dim", "i2", (8,)),
    ("intent_p1", "f4"),
    ("intent_p2", "f4"),
    ("intent_p3", "f4"),
    ("intent_code", "i2"),
    ("datatype", "i2"),
    ("bitpix", "i2"),
    ("slice_start", "i2"),
    ("pixdim", "f4", (8,)),
    ("vox_offset", "f4"),
    ("scl_slope", "f4"),
    ("scl_inter", "f4"),
    ("slice_end", "i2"),
    ("slice_code", "u1"),
    ("xyzt_units", "u1"),
    ("cal_max", "f4"),
    ("cal_min", "f4"),
    ("slice_duration", "f4"),
    ("toffset", "f4"),
    ("glmax", "i4"),
    ("glmin", "i4"),
    ("descrip", "S80"),
    ("aux_file", "S24"),
    ("qform_code", "i2"),
    ("sform_code", "i2"),
    ("quatern_b", "f4"),
    ("quatern_c", "f4"),
    ("quatern_d", "f4"),
    ("qoffset_x", "f4"),
    ("qoffset_y", "f4"),
    ("qoffset_z", "f4"),
    ("srow_x", "f4", (4,)),
    ("srow_y", "f4", (4,)),
    ("srow_z", "f4", (4,)),
    ("intent_name", "S16"),
    ("magic", "S4"),
]

# NIfTI datatype code -> numpy element type
DATATYPES: Dict[int, str] = {
    2: "u1",
    4: "i2",
    16: "f4",
    64: "f8",
}

PathLike = Union[str, Path]


def header_dtype(byte_order: str) -> np.dtype:
    """Structured dtype of the NIfTI-1 header in the given byte order."""
    fields = []
    for entry in HEADER_FIELDS:
        name, code = entry[0], entry[1]
        if code[0] in "iuf" and code != "u1":
            code = byte_order + code
        fields.append((name, code) + tuple(entry[2:]))
    dtype = np.dtype(fields)
    if dtype.itemsize != HEADER_SIZE:
        raise DataError(f"NIfTI header layout is {dtype.itemsize} bytes")
    return dtype


def detect_byte_order(raw: bytes) -> str:
    """Detect header byte order from dim[0], which must lie in 1..7.

    Args:
        raw: At least the first 348 header bytes

    Returns:
        '<' or '>'

    Raises:
        DataError: If dim[0] is implausible in both byte orders
    """
    for order in ("<", ">"):
        ndim = int(np.frombuffer(raw, dtype=order + "i2", count=1, offset=40)[0])
        if 1 <= ndim <= 7:
            return order
    raise DataError("Cannot determine NIfTI byte order: dim[0] outside 1..7")


def _parse_header(raw: bytes, path: Path) -> Tuple[np.ndarray, str]:
    if len(raw) < HEADER_SIZE:
        raise TruncatedPayloadError(
            f"{path}: file has {len(raw)} bytes, shorter than the {HEADER_SIZE}-byte "
            "NIfTI-1 header"
        )
    magic = raw[344:348]
    if magic not in (b"n+1\x00", b"ni1\x00"):
        raise NiftiMagicError(f"{path}: missing NIfTI-1 magic (found {magic!r})")
    order = detect_byte_order(raw)
    hdr = np.frombuffer(raw, dtype=header_dtype(order), count=1)[0]
    if int(hdr["sizeof_hdr"]) != HEADER_SIZE:
        logger.warning(f"{path}: sizeof_hdr is {int(hdr['sizeof_hdr'])}, not 348")
    return hdr, order


def _volume_dims(dim: np.ndarray, path: Path) -> Tuple[int, int, int]:
    ndim = int(dim[0])
    sizes = [int(d) for d in dim[1 : ndim + 1]]
    if any(s < 1 for s in sizes):
        raise DataError(f"{path}: non-positive dimension in {sizes}")
    if any(s != 1 for s in sizes[3:]):
        raise DataError(f"{path}: only scalar 3-D volumes are supported, got {sizes}")
    sizes = (sizes + [1, 1, 1])[:3]
    return sizes[0], sizes[1], sizes[2]


def load_nifti(path: PathLike) -> Tuple[Volume, NiftiMetadata]:
    """Read a NIfTI-1 volume.

    Single-file images (``n+1``) read the payload from ``vox_offset``; header
    and image pairs (``ni1``) read it from the sibling ``.img`` file.

    Args:
        path: ``.nii`` file or ``.hdr`` of a pair

    Returns:
        (Volume with float64 intensities indexed (X, Y, Z), header metadata)

    Raises:
        NiftiMagicError: If the header magic is neither 'n+1' nor 'ni1'
        TruncatedPayloadError: If the file ends before the declared payload
        DataError: If the decoded intensities are not finite
        TruncatedPayloadError: If the file ends before the declared payload
    """
    path = Path(path)
    raw = path.read_bytes()
    hdr, order = _parse_header(raw, path)
    magic = bytes(hdr["magic"]).rstrip(b"\x00").decode("ascii")

    datatype = int(hdr["datatype"])
    if datatype not in DATATYPES:
        raise UnsupportedDatatypeError(
            f"{path}: unsupported NIfTI datatype {datatype}", datatype=datatype
        )
    dims = _volume_dims(hdr["dim"], path)
    element = np.dtype(order + DATATYPES[datatype])
    count = dims[0] * dims[1] * dims[2]

    if magic == "n+1":
        payload, offset = raw, int(hdr["vox_offset"])
    else:
        img = path.with_suffix(".img")
        if not img.exists():
            raise DataError(f"{path}: paired image file {img} not found")
        payload, offset = img.read_bytes(), int(hdr["vox_offset"])
    needed = offset + count * element.itemsize
    if len(payload) < needed:
        raise TruncatedPayloadError(
            f"{path}: payload needs {needed} bytes, file has {len(payload)}"
        )

    data = np.frombuffer(payload, dtype=element, count=count, offset=offset)
    # NIfTI stores x fastest
    voxels = data.reshape(dims, order="F").astype(np.float64)

    slope = float(hdr["scl_slope"])
    inter = float(hdr["scl_inter"])
    if slope == 0.0 or not np.isfinite(slope):
        slope, inter = 1.0, 0.0
    elif not np.isfinite(inter):
        inter = 0.0
    if slope != 1.0 or inter != 0.0:
        voxels = voxels * slope + inter

    meta = NiftiMetadata(
        byte_order=order,
        magic=magic,
        datatype=datatype,
        dims=dims,
        pixdim=tuple(float(p) for p in hdr["pixdim"][1:4]),
        vox_offset=float(hdr["vox_offset"]),
        scl_slope=slope,
        scl_inter=inter,
        qform_code=int(hdr["qform_code"]),
        sform_code=int(hdr["sform_code"]),
        descrip=bytes(hdr["descrip"]).rstrip(b"\x00").decode("ascii", "replace"),
    )
    logger.debug(
        f"Loaded {path}: dims={dims} datatype={datatype} byte_order={order!r}"
    )
    return volume_from_voxels(voxels, str(path)), meta


def save_nifti(
    volume: Union[Volume, np.ndarray],
    path: PathLike,
    datatype: int = 64,
    byte_order: str = "<",
    scl_slope: float = 1.0,
    scl_inter: float = 0.0,
    descrip: str = "",
) -> Path:
    """Write a single-file (``n+1``) NIfTI-1 image.

    Args:
        volume: Volume or 3-D array indexed (X, Y, Z)
        path: Destination ``.nii`` file
        datatype: One of 2, 4, 16, 64
        byte_order: '<' or '>'
        scl_slope: Stored scaling slope (0 means unscaled)
        scl_inter: Stored scaling intercept
        descrip: Free-text description (at most 80 bytes)

    Returns:
        The written path

    Raises:
        ValidationError: On an unsupported datatype or byte order
    """
    if datatype not in DATATYPES:
        raise ValidationError(f"Cannot write NIfTI datatype {datatype}")
    if byte_order not in ("<", ">"):
        raise ValidationError(f"byte_order must be '<' or '>', got {byte_order!r}")
    voxels = volume.voxels if isinstance(volume, Volume) else np.asarray(volume)
    if voxels.ndim != 3:
        raise ValidationError(f"Expected a 3-D array, got shape {voxels.shape}")

    element = np.dtype(byte_order + DATATYPES[datatype])
    hdr = np.zeros((), dtype=header_dtype(byte_order))
    hdr["sizeof_hdr"] = HEADER_SIZE
    hdr["dim"] = [3, *voxels.shape, 1, 1, 1, 1]
    hdr["datatype"] = datatype
    hdr["bitpix"] = element.itemsize * 8
    hdr["pixdim"] = [1.0] * 8
    hdr["vox_offset"] = SINGLE_FILE_OFFSET
    hdr["scl_slope"] = scl_slope
    hdr["scl_inter"] = scl_inter
    hdr["descrip"] = descrip.encode("ascii", "replace")[:80]
    hdr["magic"] = b"n+1\x00"

    payload = np.asarray(voxels).astype(element).tobytes(order="F")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(hdr.tobytes())
        fh.write(b"\x00" * (SINGLE_FILE_OFFSET - HEADER_SIZE))
        fh.write(payload)
    logger.debug(f"Wrote {path}: dims={voxels.shape} datatype={datatype}")
    return path
