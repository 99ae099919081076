"""Mixed content-item-conditioned language model: model, training, decoding and alignment."""
from .alignment import AlignmentResult, align_output, sentence_spans
from .checkpoint import CHECKPOINT_VERSION, load_checkpoint, save_checkpoint
from .data import Batch, EncodedExample, collate, encode_sample, item_token_sequences
from .decoding import DecodeMode, DecodeResult, decode
from .gradcheck import TINY_CONFIG, GradCheckReport, finite_difference_check
from .model import EncodedItems, MixedLMModel, MixtureOutput, PlanScorer, encode_items
from .planning import StepPlanScores, mixture_step, plan_scores
from .training import (
    EpochRecord,
    TrainResult,
    TrainStepOutput,
    compute_losses,
    evaluate_examples_loss,
    evaluate_loss,
    forward_train,
    teacher_forced_accuracy,
    teacher_forced_alignment,
    train,
    train_examples,
)
from .vocab import Vocabulary

__all__ = [
    "AlignmentResult",
    "align_output",
    "sentence_spans",
    "CHECKPOINT_VERSION",
    "load_checkpoint",
    "save_checkpoint",
    "Batch",
    "EncodedExample",
    "collate",
    "encode_sample",
    "item_token_sequences",
    "DecodeMode",
    "DecodeResult",
    "decode",
    "TINY_CONFIG",
    "GradCheckReport",
    "finite_difference_check",
    "EncodedItems",
    "MixedLMModel",
    "MixtureOutput",
    "PlanScorer",
    "encode_items",
    "StepPlanScores",
    "mixture_step",
    "plan_scores",
    "EpochRecord",
    "TrainResult",
    "TrainStepOutput",
    "compute_losses",
    "evaluate_examples_loss",
    "evaluate_loss",
    "forward_train",
    "teacher_forced_accuracy",
    "teacher_forced_alignment",
    "train",
    "train_examples",
    "Vocabulary",
]
