"""usegnet: brain tissue segmentation with SegNet/U-Net hybrids.

Numpy implementation of slice-wise encoder-decoder segmentation of T1
brain MRI into background, gray matter, white matter and CSF.

Example:
    Basic usage:
    >>> from usegnet import Experiment
    >>> exp = Experiment.from_overrides({"width": 8, "max_epochs": 5})
    >>> outcome = exp.train()
    >>> print(outcome.report.weighted)
"""

from .config import RunConfig
from .data import (
    Dataset,
    NormStats,
    build_dataset,
    generate_phantom,
    load_nifti,
    load_raw,
    remap_labels,
    save_nifti,
    save_raw,
)
from .evaluation import Fusion, evaluate, export_overlay, segment_volume
from .exceptions import (
    CheckpointError,
    CheckpointFormatError,
    ConfigError,
    DataError,
    FingerprintMismatchError,
    LabelConventionError,
    NiftiMagicError,
    NumericalError,
    PayloadLengthError,
    ShapeError,
    StateError,
    TruncatedPayloadError,
    UnsupportedDatatypeError,
    USegNetError,
    ValidationError,
)
from .models import (
    EvalReport,
    LabelConvention,
    LabelVolume,
    ModelVariant,
    OptimConfig,
    PhantomSpec,
    Volume,
)
from .network import LayerGraph, build_model, load_weights, param_count, save_weights
from .pipeline import Experiment
from .training import fit

__version__ = "0.1.0"

__all__ = [
    "Experiment",
    "RunConfig",
    # Exceptions
    "USegNetError",
    "ValidationError",
    "ConfigError",
    "ShapeError",
    "StateError",
    "NumericalError",
    "DataError",
    "NiftiMagicError",
    "UnsupportedDatatypeError",
    "TruncatedPayloadError",
    "PayloadLengthError",
    "LabelConventionError",
    "CheckpointError",
    "CheckpointFormatError",
    "FingerprintMismatchError",
    # Models
    "EvalReport",
    "LabelConvention",
    "LabelVolume",
    "ModelVariant",
    "OptimConfig",
    "PhantomSpec",
    "Volume",
    # Network
    "LayerGraph",
    "build_model",
    "load_weights",
    "param_count",
    "save_weights",
    # Data
    "Dataset",
    "NormStats",
    "build_dataset",
    "generate_phantom",
    "load_nifti",
    "load_raw",
    "remap_labels",
    "save_nifti",
    "save_raw",
    # Training and evaluation
    "Fusion",
    "evaluate",
    "export_overlay",
    "fit",
    "segment_volume",
]
