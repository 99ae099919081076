"""
Central finite-difference check of the training gradient on a tiny double-precision model.
"""
from dataclasses import dataclass, field
from typing import Dict, Optional
import random

import numpy as np
import torch

from ..config import ModelConfig
from ..content_model import ContentItem, Sample, serialize_item
from ..error_codes import ErrorCode
from ..error_handler import DataError
from .model import MixedLMModel
from .training import forward_train
from .vocab import Vocabulary

MAX_CHECK_PARAMETERS = 2000
RELATIVE_ERROR_FLOOR = 1e-4
UNUSED_TOKEN = "unused"

TINY_CONFIG = ModelConfig(
    embedding_size=4,
    hidden_size=4,
    num_heads=1,
    num_layers=1,
    ffn_size=8,
    plan_hidden_size=4,
    max_item_len=16,
    max_target_len=8,
    dtype="float64",
)

_WORDS = ("alpha", "beta", "gamma", "delta", "omega")

def tiny_sample(seed: int) -> Sample:
    """Two-item sample with a short partially labeled target."""
    rng = random.Random(seed)
    items = []
    for index in range(2):
        core, expanded = rng.sample(_WORDS, 2)
        items.append(ContentItem(
            entities=frozenset([f"ent_{index}"]),
            core_concepts=frozenset([core]),
            expanded_concepts=frozenset([expanded]),
        ))
    target = [rng.choice(_WORDS) for _ in range(4)]
    return Sample(id=f"gradcheck-{seed}", title="topic", items=tuple(items), target=" ".join(target),
                  plan_labels=(0, 0, 1, None))

def tiny_vocabulary(sample: Sample) -> Vocabulary:
    """Vocabulary of the sample plus one token that never occurs in it."""
    streams = [serialize_item(sample.title_tokens, item).tokens for item in sample.items]
    streams.append(sample.target_tokens)
    streams.append([UNUSED_TOKEN])
    return Vocabulary.build(streams)

@dataclass
class GradCheckReport:
    max_relative_error: float
    worst_parameter: str
    num_parameters: int
    analytic: Dict[str, np.ndarray] = field(default_factory=dict)
    numeric: Dict[str, np.ndarray] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        return {
            "max_relative_error": self.max_relative_error,
            "worst_parameter": self.worst_parameter,
            "num_parameters": self.num_parameters,
        }

def finite_difference_check(
    config: ModelConfig = TINY_CONFIG,
    seed: int = 0,
    step: float = 1e-5,
    sample: Optional[Sample] = None,
) -> GradCheckReport:
    """
    Compare analytic dL/dtheta with central differences on every parameter coordinate.

    Relative error per coordinate is |a - n| / max(|a|, |n|, RELATIVE_ERROR_FLOOR).
    """
    config = config.model_copy(update={"dtype": "float64"})
    sample = sample or tiny_sample(seed)
    vocab = tiny_vocabulary(sample)
    model = MixedLMModel(config, vocab, seed=seed)
    if model.num_parameters() > MAX_CHECK_PARAMETERS:
        raise DataError(
            ErrorCode.INVALID_ARGUMENT,
            name="config",
            details=f"{model.num_parameters()} parameters exceed {MAX_CHECK_PARAMETERS} for a gradient check",
        )

    model.zero_grad()
    forward_train(model, sample).loss.backward()
    analytic = {
        name: (param.grad.detach().clone() if param.grad is not None else torch.zeros_like(param)).numpy()
        for name, param in model.named_parameters()
    }

    numeric: Dict[str, np.ndarray] = {}
    with torch.no_grad():
        for name, param in model.named_parameters():
            flat = param.data.view(-1)
            estimates = np.zeros(flat.numel())
            for index in range(flat.numel()):
                original = float(flat[index])
                flat[index] = original + step
                plus = float(forward_train(model, sample).loss)
                flat[index] = original - step
                minus = float(forward_train(model, sample).loss)
                flat[index] = original
                estimates[index] = (plus - minus) / (2 * step)
            numeric[name] = estimates.reshape(tuple(param.shape))

    worst_error = 0.0
    worst_parameter = ""
    for name in analytic:
        a, n = analytic[name], numeric[name]
        errors = np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), RELATIVE_ERROR_FLOOR)
        if errors.size and float(errors.max()) > worst_error:
            worst_error = float(errors.max())
            worst_parameter = name
    return GradCheckReport(
        max_relative_error=worst_error,
        worst_parameter=worst_parameter,
        num_parameters=model.num_parameters(),
        analytic=analytic,
        numeric=numeric,
    )
