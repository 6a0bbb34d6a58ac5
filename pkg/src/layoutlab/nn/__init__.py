"""From-scratch numpy network stack for the domain-adaptation demo."""

from .nets import Conv2d, PdNet, SGD, TConv2d, Tensor4, ToyExtractor
from .synth import BLUR_FILL, MEAN_FILL, SynthData, SyntheticDomainConfig, synth_dataset
from .train import (
    TraceRecord,
    TrainingDiverged,
    TrainResult,
    feature_domain_gap,
    pixel_auc,
    train_adversarial,
    train_pd_only,
)

__all__ = [
    "BLUR_FILL",
    "Conv2d",
    "MEAN_FILL",
    "PdNet",
    "SGD",
    "SynthData",
    "SyntheticDomainConfig",
    "TConv2d",
    "Tensor4",
    "ToyExtractor",
    "TraceRecord",
    "TrainResult",
    "TrainingDiverged",
    "feature_domain_gap",
    "pixel_auc",
    "synth_dataset",
    "train_adversarial",
    "train_pd_only",
]
