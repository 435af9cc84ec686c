"""Synthetic brain phantoms with exact ground truth.

The geometry is a deformed ellipsoid indexed (X, Y, Z). In each axial slice
the normalized in-plane radius ``r`` decides the tissue:

    r > 1            background
    0.95 < r <= 1    CSF rim
    r_wm < r <= 0.95 GM ribbon, r_wm = 0.6 + 0.07 sin(n phi + phase)
    r <= r_wm        WM core, with two CSF ventricles

so the expected non-background fractions are roughly GM 54%, WM 35% and
CSF 11%. Labels are taken from the geometry, never from the intensities.
"""

import logging
from typing import Tuple

import numpy as np
from scipy.ndimage import gaussian_filter

from ..models.volumes import (
    LabelConvention,
    LabelVolume,
    PhantomSpec,
    TissueClass,
    Volume,
)

logger = logging.getLogger(__name__)

SEMI_AXIS_FRACTION = 0.42
CSF_RIM = 0.95
WM_RADIUS = 0.6
FOLD_AMPLITUDE = 0.07
DEFORMATION = 0.04
Z_TAPER = 0.35
VENTRICLE_CENTERS = ((-0.12, 0.05), (0.12, 0.05))
VENTRICLE_AXES = (0.05, 0.12)


def _smooth_field(
    rng: np.random.Generator, shape: Tuple[int, ...], sigma: float
) -> np.ndarray:
    """Low-frequency random field rescaled to [-1, 1]."""
    field = gaussian_filter(rng.standard_normal(shape), sigma=sigma, mode="wrap")
    peak = np.abs(field).max()
    return field / peak if peak > 0 else field


def phantom_geometry(spec: PhantomSpec, rng: np.random.Generator) -> np.ndarray:
    """Class ids (MODEL convention) of the generating geometry.

    Args:
        spec: Phantom parameters (only dims are used here)
        rng: Generator; consumes the deformation and folding draws

    Returns:
        uint8 array of shape spec.dims
    """
    nx, ny, nz = spec.dims
    x = (np.arange(nx) - (nx - 1) / 2.0) / (SEMI_AXIS_FRACTION * nx)
    y = (np.arange(ny) - (ny - 1) / 2.0) / (SEMI_AXIS_FRACTION * ny)
    u, v = np.meshgrid(x, y, indexing="ij")

    deform = DEFORMATION * _smooth_field(rng, (nx, ny), sigma=max(nx, ny) / 6.0)
    folds = int(rng.integers(6, 10))
    phase = float(rng.uniform(0.0, 2.0 * np.pi))
    twist = float(rng.uniform(-0.5, 0.5))

    labels = np.zeros(spec.dims, dtype=np.uint8)
    for k in range(nz):
        w = 0.0 if nz == 1 else (k - (nz - 1) / 2.0) / (nz / 2.0)
        scale = np.sqrt(1.0 - Z_TAPER * w * w)
        us, vs = u / scale, v / scale
        r = np.sqrt(us**2 + vs**2) * (1.0 + deform)
        phi = np.arctan2(vs, us)
        r_wm = WM_RADIUS + FOLD_AMPLITUDE * np.sin(folds * phi + phase + twist * w)

        slab = np.zeros((nx, ny), dtype=np.uint8)
        slab[r <= 1.0] = TissueClass.CSF
        slab[r <= CSF_RIM] = TissueClass.GM
        slab[r <= r_wm] = TissueClass.WM
        for cu, cv in VENTRICLE_CENTERS:
            inside = ((us - cu) / VENTRICLE_AXES[0]) ** 2 + (
                (vs - cv) / VENTRICLE_AXES[1]
            ) ** 2 <= 1.0
            slab[inside & (r <= r_wm)] = TissueClass.CSF
        labels[:, :, k] = slab
    return labels


def generate_phantom(spec: PhantomSpec) -> Tuple[Volume, LabelVolume]:
    """Generate an intensity volume and its exact labels.

    Intensities are the tissue means times ``1 + bias`` plus Gaussian noise
    with standard deviation ``noise_std * tissue_gap``; both perturbations are
    confined to the brain and background stays exactly 0.

    Args:
        spec: Phantom parameters

    Returns:
        (Volume, LabelVolume in the MODEL convention); a pure function of spec
    """
    rng = np.random.default_rng(spec.seed)
    labels = phantom_geometry(spec, rng)

    means = np.array([0.0, spec.gm_mean, spec.wm_mean, spec.csf_mean])
    voxels = means[labels]
    brain = labels != TissueClass.BACKGROUND

    if spec.bias_amplitude > 0:
        bias = _smooth_field(rng, spec.dims, sigma=max(spec.dims[:2]) / 4.0)
        voxels = voxels * (1.0 + spec.bias_amplitude * bias)
    if spec.noise_std > 0:
        sigma = spec.noise_std * spec.tissue_gap
        voxels = voxels + sigma * rng.standard_normal(spec.dims)
    voxels = np.where(brain, voxels, 0.0)

    provenance = f"phantom:seed={spec.seed}"
    counts = np.bincount(labels.ravel(), minlength=4)
    logger.debug(
        f"Phantom seed={spec.seed} dims={spec.dims}: GM={counts[1]} WM={counts[2]} "
        f"CSF={counts[3]} voxels"
    )
    return (
        Volume(voxels=voxels, provenance=provenance),
        LabelVolume(
            labels=labels, convention=LabelConvention.MODEL, provenance=provenance
        ),
    )


def tissue_fractions(labels: LabelVolume) -> Tuple[float, float, float]:
    """GM, WM and CSF shares of the non-background voxels."""
    counts = np.bincount(labels.labels.ravel(), minlength=4).astype(np.float64)
    tissue = counts[1:].sum()
    if tissue == 0:
        return 0.0, 0.0, 0.0
    return counts[1] / tissue, counts[2] / tissue, counts[3] / tissue
