"""
Joint training of the item-conditioned generators and the plan scorer.

L_gen is the mean negative log-likelihood of the target under the mixture; L_plan is the
mean negative log plan probability of the gold item over labeled target tokens. Both are
averaged per sample, then over the batch.
"""
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence
import math

import torch
import torch.nn.functional as F

from ..config import TrainingConfig
from ..content_model import ItemMask, Sample
from ..error_codes import ErrorCode
from ..error_handler import DataError, NonFiniteLossError
from ..logging_config import training_logger as logger
from ..seeding import derive_seed, torch_generator
from .alignment import align_output, sentence_spans
from .data import Batch, EncodedExample, collate, encode_sample, iterate_batches
from .model import MixedLMModel, MixtureOutput

PROB_FLOOR = 1e-12

@dataclass
class TrainStepOutput:
    gen_loss: torch.Tensor
    plan_loss: torch.Tensor
    loss: torch.Tensor

    def to_dict(self) -> Dict[str, float]:
        return {"gen_loss": self.gen_loss.item(), "plan_loss": self.plan_loss.item(), "loss": self.loss.item()}

def compute_losses(output: MixtureOutput, batch: Batch, plan_loss_weight: float = 1.0) -> TrainStepOutput:
    log_probs = output.item_log_probs
    batch_size, num_items, target_len, _ = log_probs.shape
    gold = batch.target.view(batch_size, 1, target_len, 1).expand(batch_size, num_items, target_len, 1)
    gold_probs = log_probs.gather(-1, gold).squeeze(-1).exp().transpose(1, 2)  # [B, T, N]
    token_probs = (output.plan_distribution * gold_probs).sum(dim=-1)
    token_nll = -torch.log(token_probs.clamp_min(PROB_FLOOR))
    mask = batch.target_mask.to(token_nll.dtype)
    gen_loss = ((token_nll * mask).sum(dim=1) / mask.sum(dim=1).clamp_min(1)).mean()

    labeled = batch.plan_labels >= 0
    log_plan = F.log_softmax(output.plan_scores, dim=-1)
    gold_log_plan = log_plan.gather(-1, batch.plan_labels.clamp_min(0).unsqueeze(-1)).squeeze(-1)
    gold_log_plan = torch.where(labeled, gold_log_plan, torch.zeros_like(gold_log_plan))
    counts = labeled.sum(dim=1).clamp_min(1).to(gold_log_plan.dtype)
    plan_loss = (-gold_log_plan.sum(dim=1) / counts).mean()

    return TrainStepOutput(gen_loss=gen_loss, plan_loss=plan_loss, loss=gen_loss + plan_loss_weight * plan_loss)

def forward_train(
    model: MixedLMModel, sample: Sample, masks: Iterable[ItemMask] = (), plan_loss_weight: float = 1.0
) -> TrainStepOutput:
    """Teacher-forced losses for one sample."""
    batch = collate([encode_sample(sample, model.vocab, model.config, masks)])
    return compute_losses(model(batch), batch, plan_loss_weight)


def evaluate_examples_loss(
    model: MixedLMModel, examples: Sequence[EncodedExample], batch_size: int = 8, plan_loss_weight: float = 1.0
) -> float:
    total = 0.0
    with torch.no_grad():
        for batch in iterate_batches(examples, batch_size):
            total += compute_losses(model(batch), batch, plan_loss_weight).loss.item() * batch.size
    return total / max(len(examples), 1)

def evaluate_loss(
    model: MixedLMModel,
    samples: Sequence[Sample],
    masks: Iterable[ItemMask] = (),
    batch_size: int = 8,
    plan_loss_weight: float = 1.0,
) -> float:
    """Mean per-sample loss L over the samples."""
    masks = list(masks)
    examples = [encode_sample(sample, model.vocab, model.config, masks) for sample in samples]
    return evaluate_examples_loss(model, examples, batch_size, plan_loss_weight)

def teacher_forced_accuracy(
    model: MixedLMModel, samples: Sequence[Sample], masks: Iterable[ItemMask] = (), batch_size: int = 8
) -> float:
    """Fraction of target tokens (EOS included) whose mixture argmax equals the gold token."""
    masks = list(masks)
    examples = [encode_sample(sample, model.vocab, model.config, masks) for sample in samples]
    correct = 0
    total = 0
    with torch.no_grad():
        for batch in iterate_batches(examples, batch_size):
            predicted = model(batch).mixture().argmax(dim=-1)
            hits = (predicted == batch.target) & batch.target_mask
            correct += int(hits.sum())
            total += int(batch.target_mask.sum())
    return correct / total if total else 0.0

def gold_sentence_items(tokens: Sequence[str], labels: Sequence[Optional[int]]) -> List[Optional[int]]:
    """Gold item per sentence span: the shared label of all its tokens, else None."""
    gold = []
    for start, end in sentence_spans(tokens):
        span_labels = set(labels[start:end])
        gold.append(span_labels.pop() if len(span_labels) == 1 else None)
    return gold

def teacher_forced_alignment(
    model: MixedLMModel, samples: Sequence[Sample], masks: Iterable[ItemMask] = ()
) -> Optional[float]:
    """
    Share of gold sentence-to-item mappings recovered by align_output on teacher-forced
    plan distributions; None when no sentence has a gold item.
    """
    masks = list(masks)
    recovered = 0
    total = 0
    with torch.no_grad():
        for sample in samples:
            batch = collate([encode_sample(sample, model.vocab, model.config, masks)])
            tokens = sample.target_tokens[:model.config.max_target_len]
            plans = model(batch).plan_distribution[0, :len(tokens)]
            labels = list(sample.plan_labels[:len(tokens)])
            spans = sentence_spans(tokens)
            alignment = align_output(tokens, plans, spans, num_items=len(sample.items))
            for gold, predicted in zip(gold_sentence_items(tokens, labels), alignment.sentence_items):
                if gold is None:
                    continue
                total += 1
                recovered += int(predicted == gold)
    return recovered / total if total else None

@dataclass
class EpochRecord:
    epoch: int
    gen_loss: float
    plan_loss: float
    loss: float
    val_loss: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)

@dataclass
class TrainResult:
    history: List[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    best_val_loss: float = math.inf
    stopped_early: bool = False

    def to_dict(self) -> Dict[str, object]:
        return {
            "history": [record.to_dict() for record in self.history],
            "best_epoch": self.best_epoch,
            "best_val_loss": self.best_val_loss,
            "stopped_early": self.stopped_early,
        }

def train_examples(
    model: MixedLMModel,
    examples: Sequence[EncodedExample],
    val_examples: Sequence[EncodedExample],
    config: TrainingConfig,
    on_epoch: Optional[Callable[[EpochRecord], None]] = None,
) -> TrainResult:
    """
    Minimize L with Adam and early stopping on validation loss.

    Training stops once the validation loss has not improved for more than `patience`
    consecutive epochs; the model is left holding the best-validation parameters. Without
    validation examples the training examples stand in for them.

    Raises:
        NonFiniteLossError: A batch or validation loss is NaN or infinite
    """
    if not examples:
        raise DataError(ErrorCode.INVALID_ARGUMENT, name="train_samples", details="no training samples")
    val_examples = val_examples or examples
    generator = torch_generator(derive_seed(config.seed, "shuffle"))
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)

    result = TrainResult()
    best_state = None
    epochs_without_improvement = 0
    step = 0
    logger.info(
        f"Training on {len(examples)} examples ({len(val_examples)} validation), "
        f"{model.num_parameters()} parameters",
        extra={"seed": config.seed, "batch_size": config.batch_size, "learning_rate": config.learning_rate},
    )
    for epoch in range(1, config.max_epochs + 1):
        model.train()
        sums = {"gen_loss": 0.0, "plan_loss": 0.0, "loss": 0.0}
        for batch in iterate_batches(examples, config.batch_size, generator):
            step += 1
            output = compute_losses(model(batch), batch, config.plan_loss_weight)
            if not torch.isfinite(output.loss):
                raise NonFiniteLossError(step, batch.example_ids, output.loss.item())
            optimizer.zero_grad()
            output.loss.backward()
            if config.max_grad_norm is not None:
                torch.nn.utils.clip_grad_norm_(model.parameters(), config.max_grad_norm)
            optimizer.step()
            for key, value in output.to_dict().items():
                sums[key] += value * batch.size
        model.eval()
        val_loss = evaluate_examples_loss(model, val_examples, config.batch_size, config.plan_loss_weight)
        if not math.isfinite(val_loss):
            raise NonFiniteLossError(step, ["validation"], val_loss)

        record = EpochRecord(
            epoch=epoch,
            gen_loss=sums["gen_loss"] / len(examples),
            plan_loss=sums["plan_loss"] / len(examples),
            loss=sums["loss"] / len(examples),
            val_loss=val_loss,
        )
        result.history.append(record)
        logger.info(
            f"Epoch {epoch}: L_gen={record.gen_loss:.4f} L_plan={record.plan_loss:.4f} val={val_loss:.4f}",
            extra=record.to_dict(),
        )
        if on_epoch is not None:
            on_epoch(record)

        if val_loss < result.best_val_loss:
            result.best_val_loss = val_loss
            result.best_epoch = epoch
            best_state = {name: tensor.detach().clone() for name, tensor in model.state_dict().items()}
            epochs_without_improvement = 0
        else:
            epochs_without_improvement += 1
        if epochs_without_improvement > config.patience:
            result.stopped_early = True
            logger.info(f"Early stopping after epoch {epoch}; best epoch {result.best_epoch}")
            break

    if best_state is not None:
        model.load_state_dict(best_state)
    return result

def train(
    model: MixedLMModel,
    train_samples: Sequence[Sample],
    val_samples: Sequence[Sample],
    config: TrainingConfig,
    masks: Iterable[ItemMask] = (),
    on_epoch: Optional[Callable[[EpochRecord], None]] = None,
) -> TrainResult:
    """Train on samples; see train_examples for the stopping rule."""
    masks = list(masks)
    examples = [encode_sample(sample, model.vocab, model.config, masks) for sample in train_samples]
    val_examples = [encode_sample(sample, model.vocab, model.config, masks) for sample in val_samples]
    return train_examples(model, examples, val_examples, config, on_epoch)
