"""Open-set fault diagnostics on multichannel condition-monitoring signals.

The package covers the full experiment loop: a synthetic turbofan-style
dataset generator, a small dense-network engine with exact gradients,
variational representation learning with knowledge-induced loss terms,
one-class fault detection with a calibrated threshold, density-based
fault segmentation, information-theoretic evaluation metrics, and a CLI
that writes reproducible run directories.
"""

__version__ = "0.1.0"

from .clustering import OpticsParams, OpticsResult, optics
from .datagen import (
    CHANNELS,
    CsvParseError,
    Dataset,
    DetectabilityError,
    FaultSpec,
    GenerationSpec,
    Scaler,
    default_generation_spec,
    generate,
    load_csv,
)
from .detector import DetectorTrainConfig, OneClassDetector, fit_detector
from .metrics import (
    adjusted_mutual_info,
    amig,
    detection_scores,
    expected_mi,
    homogeneity_completeness,
    ksg_mi,
    lsg,
    mmi,
    mutual_info_discrete,
    noise_as_cluster,
)
from .nncore import Adam, DenseNet
from .projection import TsneParams, tsne
from .vae import TrainConfig, VariantSpec, VARIANTS, VaeModel, build_model, train_vae

__all__ = [
    "__version__",
    "Adam",
    "CHANNELS",
    "CsvParseError",
    "Dataset",
    "DenseNet",
    "DetectabilityError",
    "DetectorTrainConfig",
    "FaultSpec",
    "GenerationSpec",
    "OneClassDetector",
    "OpticsParams",
    "OpticsResult",
    "Scaler",
    "TrainConfig",
    "TsneParams",
    "VARIANTS",
    "VaeModel",
    "VariantSpec",
    "adjusted_mutual_info",
    "amig",
    "build_model",
    "default_generation_spec",
    "detection_scores",
    "expected_mi",
    "fit_detector",
    "generate",
    "homogeneity_completeness",
    "ksg_mi",
    "load_csv",
    "lsg",
    "mmi",
    "mutual_info_discrete",
    "noise_as_cluster",
    "optics",
    "train_vae",
    "tsne",
]
