"""
Configuration models for mixplan experiments.

ExperimentConfig is the flat key-value schema read from a JSON file; ModelConfig and
TrainingConfig are the nested views handed to the mixed language model and its trainer.
"""
from typing import Any, Dict, List, Literal, Optional
import hashlib
import json
import logging
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .content_model import ItemMask
from .error_codes import ErrorCode
from .error_handler import ConfigError

logger = logging.getLogger(__name__)

DecodeModeName = Literal["weighted", "greedy_select", "random_select"]
SystemName = Literal["mixed", "seq2seqfull"]

class ModelConfig(BaseModel):
    """Dimensions of the shared per-item encoder-decoder and the plan scorer."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    embedding_size: int = Field(64, gt=0)
    hidden_size: int = Field(64, gt=0)
    num_heads: int = Field(2, gt=0)
    num_layers: int = Field(1, gt=0)
    ffn_size: int = Field(128, gt=0)
    plan_hidden_size: int = Field(64, gt=0)
    max_item_len: int = Field(128, gt=0)
    max_target_len: int = Field(200, gt=0)
    max_items: int = Field(10, gt=0)
    dtype: Literal["float32", "float64"] = "float32"

    @model_validator(mode="after")
    def _heads_divide_hidden(self) -> "ModelConfig":
        if self.hidden_size % self.num_heads != 0:
            raise ValueError(f"hidden_size {self.hidden_size} is not divisible by num_heads {self.num_heads}")
        return self

    @property
    def torch_dtype(self):
        import torch
        return torch.float64 if self.dtype == "float64" else torch.float32

class TrainingConfig(BaseModel):
    """Optimization settings for joint planner and generator training."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    seed: int = Field(..., ge=0)
    batch_size: int = Field(8, gt=0)
    learning_rate: float = Field(3e-4, gt=0)
    patience: int = Field(3, ge=0)
    max_epochs: int = Field(50, gt=0)
    plan_loss_weight: float = Field(1.0, ge=0)
    max_grad_norm: Optional[float] = Field(None, gt=0)
    deterministic: bool = True

class ExperimentConfig(BaseModel):
    """Flat experiment configuration; every key has a default except seed."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    seed: int = Field(..., ge=0)

    # Paths
    raw_corpus: Optional[Path] = None
    entities: Optional[Path] = None
    concepts: Optional[Path] = None
    concreteness: Optional[Path] = None
    abbreviations: Optional[Path] = None
    claims_train: Optional[Path] = None
    facts_train: Optional[Path] = None
    output_dir: Path = Path("experiments/default")

    # Data splits
    val_fraction: float = Field(0.1, gt=0, lt=1)
    test_fraction: float = Field(0.1, gt=0, lt=1)

    # System and inputs
    system: SystemName = "mixed"
    augment_concepts: bool = False
    augment_claims: bool = False
    masks: List[ItemMask] = Field(default_factory=list)
    min_vocab_freq: int = Field(1, gt=0)
    classifier_c: float = Field(10.0, gt=0)

    # Model dimensions
    embedding_size: int = Field(64, gt=0)
    hidden_size: int = Field(64, gt=0)
    num_heads: int = Field(2, gt=0)
    num_layers: int = Field(1, gt=0)
    ffn_size: int = Field(128, gt=0)
    plan_hidden_size: int = Field(64, gt=0)
    max_item_len: int = Field(128, gt=0)
    max_target_len: int = Field(200, gt=0)
    max_items: int = Field(10, gt=0)
    dtype: Literal["float32", "float64"] = "float32"

    # Training
    batch_size: int = Field(8, gt=0)
    learning_rate: float = Field(3e-4, gt=0)
    patience: int = Field(3, ge=0)
    max_epochs: int = Field(50, gt=0)
    plan_loss_weight: float = Field(1.0, ge=0)
    max_grad_norm: Optional[float] = Field(None, gt=0)
    deterministic: bool = True
    augment_max_epochs: int = Field(30, gt=0)

    # Decoding
    decode_mode: DecodeModeName = "weighted"
    max_decode_len: int = Field(200, ge=0)
    nucleus_p: float = Field(0.9, gt=0, le=1)

    @model_validator(mode="after")
    def _splits_leave_training_data(self) -> "ExperimentConfig":
        if self.val_fraction + self.test_fraction >= 1:
            raise ValueError("val_fraction + test_fraction must be below 1")
        if self.hidden_size % self.num_heads != 0:
            raise ValueError(f"hidden_size {self.hidden_size} is not divisible by num_heads {self.num_heads}")
        return self

    @classmethod
    def from_file(cls, path: Path, **overrides: Any) -> "ExperimentConfig":
        """Load a JSON config file, applying keyword overrides on top."""
        path = Path(path)
        if not path.exists():
            raise ConfigError(ErrorCode.MISSING_CONFIG_FILE, path=str(path))
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigError(ErrorCode.INVALID_CONFIG, details=f"{path}: {e}") from e
        data.update({k: v for k, v in overrides.items() if v is not None})
        config = cls.from_dict(data)
        logger.info(f"Loaded config {path} (hash {config.config_hash()[:12]})")
        return config

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            details = "; ".join(
                f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
            )
            raise ConfigError(ErrorCode.INVALID_CONFIG, details=details) from e

    def to_model_config(self) -> ModelConfig:
        return ModelConfig(**{name: getattr(self, name) for name in ModelConfig.model_fields})

    def to_training_config(self, max_epochs: Optional[int] = None) -> TrainingConfig:
        values = {name: getattr(self, name) for name in TrainingConfig.model_fields}
        if max_epochs is not None:
            values["max_epochs"] = max_epochs
        return TrainingConfig(**values)

    def normalized_dict(self) -> Dict[str, Any]:
        """All fields, defaults included, with paths resolved to absolute POSIX strings."""
        data = self.model_dump(mode="json")
        for name, value in data.items():
            if isinstance(getattr(self, name), Path):
                data[name] = Path(value).expanduser().resolve().as_posix()
        # Masks act as a set
        data["masks"] = sorted(data["masks"])
        return data

    def config_hash(self) -> str:
        canonical = json.dumps(self.normalized_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
