"""Decision trees and random forests on mixed-curvature product manifolds."""

__version__ = "0.1.0"

from .forest import ForestConfig, RandomForest, fit_forest, predict_forest
from .manifolds import Kind, ManifoldSpec
from .product import ProductSignature, parse_signature, product_distance, product_origin, tangent_features
from .sampler import MixtureConfig, MixtureDraw, sample_mixture
from .splits import SplitCandidate
from .tree import DecisionTree, FitConfig, fit, predict

__all__ = [
    "DecisionTree",
    "FitConfig",
    "ForestConfig",
    "Kind",
    "ManifoldSpec",
    "MixtureConfig",
    "MixtureDraw",
    "ProductSignature",
    "RandomForest",
    "SplitCandidate",
    "fit",
    "fit_forest",
    "parse_signature",
    "predict",
    "predict_forest",
    "product_distance",
    "product_origin",
    "sample_mixture",
    "tangent_features",
]
