"""Domain models for usegnet."""

from .network import LayerKind, LayerSpec, Mode, ModelVariant
from .reports import EvalReport, VolumeMetrics
from .training import DatasetRole, EpochRecord, OptimConfig
from .volumes import (
    CohortEntry,
    LabelConvention,
    LabelVolume,
    NiftiMetadata,
    PhantomSpec,
    TissueClass,
    Volume,
)

__all__ = [
    # Network
    "LayerKind",
    "LayerSpec",
    "Mode",
    "ModelVariant",
    # Volumes
    "CohortEntry",
    "LabelConvention",
    "LabelVolume",
    "NiftiMetadata",
    "PhantomSpec",
    "TissueClass",
    "Volume",
    # Training
    "DatasetRole",
    "EpochRecord",
    "OptimConfig",
    # Reports
    "EvalReport",
    "VolumeMetrics",
]
