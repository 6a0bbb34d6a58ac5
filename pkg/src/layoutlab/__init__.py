"""layoutlab: poster-layout quality metrics and a pixel-level
adversarial domain-adaptation trainer."""

from .features import (
    FeatureProviderSpec,
    FeatureSet,
    GaussianStats,
    ProviderError,
    builtin_provider_features,
    fid_pipeline,
    fit_gaussian,
    frechet_distance,
    layout_feature_set,
    layout_feature_vector,
    psd_sqrt,
    saliency_occlusion,
)
from .graphic import (
    alignment_distance,
    bbox_area,
    bbox_intersection_area,
    occupancy_ratio,
    overlap_degree,
    underlay_coverage,
)
from .layout import BBox, Domain, Element, ElementKind, Layout, element
from .losses import (
    LossWeights,
    PixelMapBatch,
    PredictedSet,
    giou,
    pd_generator_loss,
    pd_loss,
    pd_loss_terms,
    reconstruction_loss,
    smooth_one_target,
    total_generator_loss,
)
from .matching import MatchResult, hungarian
from .raster import (
    Raster,
    attention_occlusion,
    background_complexity,
    gaussian_blur,
    make_white_patch_map,
    mask_layout_regions,
    sobel_gradient_magnitude,
)
from .report import MetricReport, aggregate

__version__ = "0.1.0"

__all__ = [
    "BBox",
    "Domain",
    "Element",
    "ElementKind",
    "FeatureProviderSpec",
    "FeatureSet",
    "GaussianStats",
    "Layout",
    "LossWeights",
    "MatchResult",
    "MetricReport",
    "PixelMapBatch",
    "PredictedSet",
    "ProviderError",
    "Raster",
    "aggregate",
    "alignment_distance",
    "attention_occlusion",
    "background_complexity",
    "bbox_area",
    "bbox_intersection_area",
    "builtin_provider_features",
    "element",
    "fid_pipeline",
    "fit_gaussian",
    "frechet_distance",
    "gaussian_blur",
    "giou",
    "hungarian",
    "layout_feature_set",
    "layout_feature_vector",
    "make_white_patch_map",
    "mask_layout_regions",
    "occupancy_ratio",
    "overlap_degree",
    "pd_generator_loss",
    "pd_loss",
    "pd_loss_terms",
    "psd_sqrt",
    "reconstruction_loss",
    "saliency_occlusion",
    "smooth_one_target",
    "sobel_gradient_magnitude",
    "total_generator_loss",
    "underlay_coverage",
]
