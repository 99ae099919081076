"""
Tensor encoding of samples for the mixed language model.
"""
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Sequence

import torch

from ..config import ModelConfig
from ..content_model import ContentItem, ItemMask, Sample, mask_item, serialize_item
from ..error_codes import ErrorCode
from ..error_handler import DataError
from ..logging_config import get_logger
from .vocab import BOS_ID, EOS_ID, PAD_ID, Vocabulary

logger = get_logger(__name__)

NO_LABEL = -1

@dataclass
class EncodedExample:
    example_id: str
    items: List[List[int]]
    target: List[int]
    plan_labels: List[int]

@dataclass
class Batch:
    """
    Padded tensors for B examples with up to N items of up to L tokens and T target tokens.

    item_ids/item_mask are [B, N, L]; item_present is [B, N]; decoder_input, target,
    target_mask and plan_labels are [B, T]. Unlabeled and padded target positions carry
    plan label NO_LABEL.
    """
    example_ids: List[str]
    item_ids: torch.Tensor
    item_mask: torch.Tensor
    item_present: torch.Tensor
    decoder_input: torch.Tensor
    target: torch.Tensor
    target_mask: torch.Tensor
    plan_labels: torch.Tensor

    @property
    def size(self) -> int:
        return len(self.example_ids)

def item_token_sequences(
    title: Sequence[str], items: Sequence[ContentItem], masks: Iterable[ItemMask] = ()
) -> List[List[str]]:
    """Serialized token sequences of the (masked) items."""
    masks = list(masks)
    return [list(serialize_item(title, mask_item(item, masks)).tokens) for item in items]

def encode_item_tokens(
    sequences: Sequence[Sequence[str]], vocab: Vocabulary, config: ModelConfig
) -> List[List[int]]:
    if not sequences:
        raise DataError(ErrorCode.EMPTY_ITEM_LIST)
    if len(sequences) > config.max_items:
        raise DataError(
            ErrorCode.INVALID_ARGUMENT, name="items", details=f"{len(sequences)} items exceed the cap of {config.max_items}"
        )
    encoded = []
    truncated = []
    for tokens in sequences:
        if not tokens:
            raise DataError(ErrorCode.INVALID_ARGUMENT, name="items", details="item token sequence is empty")
        if len(tokens) > config.max_item_len:
            truncated.append(len(tokens))
        encoded.append(vocab.encode(tokens[:config.max_item_len]))
    if truncated:
        logger.warning(
            f"Truncated {len(truncated)} item(s) of up to {max(truncated)} tokens to max_item_len {config.max_item_len}",
            extra={"truncated_lengths": truncated},
        )
    return encoded

def encode_sample(
    sample: Sample, vocab: Vocabulary, config: ModelConfig, masks: Iterable[ItemMask] = ()
) -> EncodedExample:
    """Encode items and target; the target is truncated to max_target_len and gets EOS."""
    sequences = item_token_sequences(sample.title_tokens, sample.items, masks)
    target = sample.target_tokens[:config.max_target_len]
    labels = [NO_LABEL if label is None else label for label in sample.plan_labels[:config.max_target_len]]
    return EncodedExample(
        example_id=sample.id,
        items=encode_item_tokens(sequences, vocab, config),
        target=vocab.encode(target) + [EOS_ID],
        plan_labels=labels + [NO_LABEL],
    )

def collate(examples: Sequence[EncodedExample]) -> Batch:
    batch_size = len(examples)
    num_items = max(len(example.items) for example in examples)
    item_len = max(len(tokens) for example in examples for tokens in example.items)
    target_len = max(len(example.target) for example in examples)

    item_ids = torch.full((batch_size, num_items, item_len), PAD_ID, dtype=torch.long)
    item_mask = torch.zeros((batch_size, num_items, item_len), dtype=torch.bool)
    item_present = torch.zeros((batch_size, num_items), dtype=torch.bool)
    decoder_input = torch.full((batch_size, target_len), PAD_ID, dtype=torch.long)
    target = torch.full((batch_size, target_len), PAD_ID, dtype=torch.long)
    target_mask = torch.zeros((batch_size, target_len), dtype=torch.bool)
    plan_labels = torch.full((batch_size, target_len), NO_LABEL, dtype=torch.long)

    for b, example in enumerate(examples):
        for n, tokens in enumerate(example.items):
            item_ids[b, n, :len(tokens)] = torch.tensor(tokens, dtype=torch.long)
            item_mask[b, n, :len(tokens)] = True
            item_present[b, n] = True
        # Empty item slots attend to a single pad token
        item_mask[b, len(example.items):, 0] = True
        length = len(example.target)
        if not length:
            continue
        target[b, :length] = torch.tensor(example.target, dtype=torch.long)
        decoder_input[b, :length] = torch.tensor([BOS_ID] + example.target[:-1], dtype=torch.long)
        target_mask[b, :length] = True
        plan_labels[b, :length] = torch.tensor(example.plan_labels, dtype=torch.long)

    return Batch(
        example_ids=[example.example_id for example in examples],
        item_ids=item_ids,
        item_mask=item_mask,
        item_present=item_present,
        decoder_input=decoder_input,
        target=target,
        target_mask=target_mask,
        plan_labels=plan_labels,
    )

def iterate_batches(
    examples: Sequence[EncodedExample], batch_size: int, generator: Optional[torch.Generator] = None
) -> Iterator[Batch]:
    """Batches in storage order, or in a permutation drawn from `generator`."""
    if generator is None:
        order = list(range(len(examples)))
    else:
        order = torch.randperm(len(examples), generator=generator).tolist()
    for start in range(0, len(order), batch_size):
        yield collate([examples[i] for i in order[start:start + batch_size]])
