"""Event-based local and global explanations for time-series classifiers."""

from .config import ExplainerConfig, PipelineConfig
from .data import Dataset, load_ucr_tsv, sample_per_class, save_ucr_tsv, standardize
from .local import LocalExplanation, explain_instance
from .predict import ExternalPredictor, NearestCentroidModel, fit_nearest_centroid
from .synthesis import GlobalSummary, PipelineResult, run_pipeline

__all__ = [
    "Dataset",
    "ExplainerConfig",
    "ExternalPredictor",
    "GlobalSummary",
    "LocalExplanation",
    "NearestCentroidModel",
    "PipelineConfig",
    "PipelineResult",
    "explain_instance",
    "fit_nearest_centroid",
    "load_ucr_tsv",
    "run_pipeline",
    "sample_per_class",
    "save_ucr_tsv",
    "standardize",
]

__version__ = "0.1.0"
