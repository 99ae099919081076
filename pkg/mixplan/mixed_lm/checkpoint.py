"""
Self-describing model checkpoints.
"""
from pathlib import Path
from typing import Any, Dict, Optional

import torch

from ..config import ModelConfig
from ..error_codes import ErrorCode
from ..error_handler import DataError, SerializationError
from ..logging_config import training_logger as logger
from .model import MixedLMModel
from .vocab import Vocabulary

CHECKPOINT_VERSION = 1

def save_checkpoint(model: MixedLMModel, path: Path, metadata: Optional[Dict[str, Any]] = None) -> None:
    """Write version, config, vocabulary and named parameter tensors to one file."""
    path = Path(path)
    payload = {
        "version": CHECKPOINT_VERSION,
        "config": model.config.model_dump(),
        "vocab": list(model.vocab.tokens),
        "state_dict": {name: tensor.detach().cpu() for name, tensor in model.state_dict().items()},
        "metadata": dict(metadata or {}),
    }
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        torch.save(payload, path)
    except OSError as e:
        raise SerializationError(ErrorCode.UNWRITABLE_PATH, path=str(path), details=str(e)) from e
    logger.info(f"Saved checkpoint to {path}", extra={"num_parameters": model.num_parameters()})

def load_checkpoint(path: Path) -> MixedLMModel:
    path = Path(path)
    if not path.exists():
        raise DataError(ErrorCode.MISSING_RESOURCE, path=str(path))
    payload = torch.load(path, map_location="cpu", weights_only=True)
    version = payload.get("version")
    if version != CHECKPOINT_VERSION:
        raise DataError(ErrorCode.CHECKPOINT_VERSION, found=version, path=str(path), expected=CHECKPOINT_VERSION)
    model = MixedLMModel(ModelConfig(**payload["config"]), Vocabulary(payload["vocab"]))
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model

def load_checkpoint_metadata(path: Path) -> Dict[str, Any]:
    return torch.load(Path(path), map_location="cpu", weights_only=True).get("metadata", {})
