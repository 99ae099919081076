"""
Greedy autoregressive decoding from the mixed language model.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Sequence

import torch

from ..error_codes import ErrorCode
from ..error_handler import DataError
from ..logging_config import decode_logger as logger
from ..seeding import torch_generator
from .data import EncodedExample, collate, encode_item_tokens
from .model import MixedLMModel
from .planning import StepPlanScores, mixture_step, plan_scores
from .vocab import BOS_ID, EOS_ID

class DecodeMode(str, Enum):
    """How the plan distribution is used at each step."""
    WEIGHTED = "weighted"
    GREEDY_SELECT = "greedy_select"
    RANDOM_SELECT = "random_select"

@dataclass
class DecodeResult:
    token_ids: List[int] = field(default_factory=list)
    tokens: List[str] = field(default_factory=list)
    plans: List[StepPlanScores] = field(default_factory=list)

    def plan_rows(self) -> List[List[float]]:
        return [plan.to_list() for plan in self.plans]

def _one_hot(like: torch.Tensor, index: int) -> torch.Tensor:
    selected = torch.zeros_like(like)
    selected[index] = 1.0
    return selected

def decode(
    model: MixedLMModel,
    items: Sequence[Sequence[str]],
    mode: DecodeMode = DecodeMode.WEIGHTED,
    max_len: int = 200,
    seed: int = 0,
) -> DecodeResult:
    """
    Decode greedily from the mixture of item-conditioned distributions.

    Args:
        model: Trained model
        items: Serialized item token sequences
        mode: weighted mixes with d; greedy_select uses a one-hot d at argmax d;
            random_select uses a one-hot d at a uniformly drawn item
        max_len: Maximum number of emitted tokens; also capped by the decoder positions
        seed: Seed of the item draws in random_select mode

    Returns:
        DecodeResult with the emitted tokens (EOS excluded) and the d used at each step
    """
    mode = DecodeMode(mode)
    if max_len < 0:
        raise DataError(ErrorCode.INVALID_ARGUMENT, name="max_len", details=f"{max_len} is negative")
    ids = encode_item_tokens(items, model.vocab, model.config)
    batch = collate([EncodedExample(example_id="decode", items=ids, target=[], plan_labels=[])])
    generator = torch_generator(seed)
    steps = min(max_len, model.decoder_capacity)
    result = DecodeResult()
    prefix = [BOS_ID]
    model.eval()
    with torch.no_grad():
        encoded = model.encode(batch.item_ids, batch.item_mask, batch.item_present)
        num_items = len(ids)
        for _ in range(steps):
            decoder_input = torch.tensor([prefix], dtype=torch.long)
            states = model.decode_states(encoded, decoder_input)[0, :, -1]  # [N, H]
            distributions = model.item_log_probs(states).exp()
            step = plan_scores(model, encoded.summaries[0], states)
            weights = step.distribution
            if mode is DecodeMode.GREEDY_SELECT:
                weights = _one_hot(weights, int(torch.argmax(weights)))
            elif mode is DecodeMode.RANDOM_SELECT:
                weights = _one_hot(weights, int(torch.randint(num_items, (1,), generator=generator)))
            token = int(torch.argmax(mixture_step(distributions, weights)))
            if token == EOS_ID:
                break
            prefix.append(token)
            result.token_ids.append(token)
            result.plans.append(StepPlanScores(scores=step.scores, distribution=weights))
    result.tokens = model.vocab.decode(result.token_ids)
    logger.debug(f"Decoded {len(result.tokens)} tokens in {mode.value} mode from {num_items} items")
    return result
