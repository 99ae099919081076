"""
mixplan - dynamic content planning with mixed content-item-conditioned language models.
"""

from .config import ExperimentConfig, ModelConfig, TrainingConfig
from .content_model import ContentItem, ItemMask, Sample, load_corpus, save_corpus
from .error_handler import MixplanError
from .mixed_lm import DecodeMode, MixedLMModel
from .pipeline import ExperimentPipeline, run_pipeline

__version__ = "0.1.0"
__all__ = [
    "ContentItem",
    "DecodeMode",
    "ExperimentConfig",
    "ExperimentPipeline",
    "ItemMask",
    "MixedLMModel",
    "MixplanError",
    "ModelConfig",
    "Sample",
    "TrainingConfig",
    "load_corpus",
    "run_pipeline",
    "save_corpus",
]
