"""Pytest configuration and fixtures."""

import numpy as np
import pytest

from usegnet.data import build_dataset, generate_phantom
from usegnet.models import (
    DatasetRole,
    LabelConvention,
    LabelVolume,
    OptimConfig,
    PhantomSpec,
    Volume,
)
from usegnet.network import build_model

SMALL_WIDTH = 4


@pytest.fixture
def rng():
    """Seeded random generator."""
    return np.random.default_rng(1234)


@pytest.fixture
def phantom_spec():
    """Small phantom spec (one 48x48 tile grid per slice)."""
    return PhantomSpec(dims=(48, 48, 3), seed=7, noise_std=0.05, bias_amplitude=0.05)


@pytest.fixture
def phantom(phantom_spec):
    """Generated (Volume, LabelVolume) pair."""
    return generate_phantom(phantom_spec)


@pytest.fixture
def small_volume(rng):
    """Random 40x40x3 intensity volume with a zero border."""
    voxels = rng.uniform(100.0, 900.0, size=(40, 40, 3))
    voxels[:4] = 0.0
    return Volume(voxels=voxels, provenance="small")


@pytest.fixture
def small_labels(rng):
    """Random 40x40x3 label volume in the model convention."""
    labels = rng.integers(0, 4, size=(40, 40, 3)).astype(np.uint8)
    return LabelVolume(
        labels=labels, convention=LabelConvention.MODEL, provenance="small"
    )


@pytest.fixture
def small_graph():
    """Narrow U-SegNet for fast forward/backward passes."""
    return build_model("usegnet", width=SMALL_WIDTH, seed=3)


@pytest.fixture
def tiny_dataset(phantom):
    """Training dataset cut from the small phantom."""
    vol, lv = phantom
    return build_dataset([vol], [lv], DatasetRole.TRAIN, ["p0"])


@pytest.fixture
def optim_config():
    """Optimizer settings for short test runs."""
    return OptimConfig(
        learning_rate=1e-3, momentum=0.9, l2=1e-4, batch_size=4, max_epochs=2, seed=0
    )


@pytest.fixture
def table_rows():
    """Per-class Dice rows and the weighted score of a reference results table."""
    return [
        (83.11, 91.83, 21.70, 85.13),
        (87.36, 84.15, 59.04, 85.92),
        (86.87, 83.58, 58.36, 85.40),
        (90.33, 89.23, 66.58, 89.64),
        (88.17, 85.95, 57.81, 87.03),
    ]
