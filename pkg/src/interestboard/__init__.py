"""Learn an operator's image-interest function from pairwise comparisons.

Pipeline: pairwise judgments -> Bayesian ranking (expectation propagation)
-> Gaussian-process smoothing over CNN feature space -> interest scores for
every image, storyboards, and occlusion saliency maps.
"""

from .errors import ExtractorError, FeatureLoadError, NumericalError
from .features import (
    FeatureStore,
    KernelConfig,
    cosine_distance,
    kernel_value,
    load_features,
)
from .gaussians import FLAT, Gaussian1D, truncation_moments
from .gp import GPModel, fit, predict, smooth_all
from .ranking import (
    Comparison,
    InterestPosterior,
    PriorConfig,
    infer_ep,
    predict_outcome,
)
from .saliency import OcclusionConfig, SaliencyMap, occlusion_map, render_overlay
from .storyboard import StoryboardSpec, cluster_baseline, select_top_spaced

__version__ = "0.1.0"

__all__ = [
    "Comparison",
    "ExtractorError",
    "FLAT",
    "FeatureLoadError",
    "FeatureStore",
    "GPModel",
    "Gaussian1D",
    "InterestPosterior",
    "KernelConfig",
    "NumericalError",
    "OcclusionConfig",
    "PriorConfig",
    "SaliencyMap",
    "StoryboardSpec",
    "cluster_baseline",
    "cosine_distance",
    "fit",
    "infer_ep",
    "kernel_value",
    "load_features",
    "occlusion_map",
    "predict",
    "predict_outcome",
    "render_overlay",
    "select_top_spaced",
    "smooth_all",
    "truncation_moments",
    "__version__",
]
