"""
Token and sentence alignment of generated text to content items.

A token maps to the argmax item of its step's plan distribution when that item's weight
is strictly above 0.5. A sentence aligns to an item when every one of its tokens maps to
that item.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Set, Tuple, Union

import torch

from ..error_codes import ErrorCode
from ..error_handler import NumericError
from ..preprocess.resources import load_abbreviations

ALIGNMENT_THRESHOLD = 0.5
SENTENCE_END = (".", "?", "!")

Span = Tuple[int, int]

@lru_cache(maxsize=1)
def _packaged_abbreviations() -> FrozenSet[str]:
    return load_abbreviations()

def sentence_spans(tokens: Sequence[str], abbreviations: Optional[FrozenSet[str]] = None) -> List[Span]:
    """
    [start, end) spans closed by tokens ending in sentence punctuation; a trailing rest
    forms a span. Known abbreviations such as "u.s." never close a sentence.
    """
    if abbreviations is None:
        abbreviations = _packaged_abbreviations()
    spans: List[Span] = []
    start = 0
    for index, token in enumerate(tokens):
        if token.endswith(SENTENCE_END) and token.lower().lstrip("\"'([") not in abbreviations:
            spans.append((start, index + 1))
            start = index + 1
    if start < len(tokens):
        spans.append((start, len(tokens)))
    return spans

@dataclass
class AlignmentResult:
    token_items: List[Optional[int]]
    spans: List[Span]
    sentence_items: List[Optional[int]]
    num_items: int
    item_has_claim: List[bool] = field(default_factory=list)

    @property
    def aligned_items(self) -> Set[int]:
        return {item for item in self.sentence_items if item is not None}

    @property
    def coverage(self) -> float:
        """Fraction of items aligned to at least one sentence."""
        return len(self.aligned_items) / self.num_items if self.num_items else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "token_items": self.token_items,
            "spans": [list(span) for span in self.spans],
            "sentence_items": self.sentence_items,
            "num_items": self.num_items,
            "item_has_claim": self.item_has_claim,
            "coverage": self.coverage,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AlignmentResult":
        return cls(
            token_items=list(data["token_items"]),
            spans=[tuple(span) for span in data["spans"]],
            sentence_items=list(data["sentence_items"]),
            num_items=data["num_items"],
            item_has_claim=list(data.get("item_has_claim", [])),
        )

def _rows(plans: Union[torch.Tensor, Sequence[Any]]) -> List[List[float]]:
    if isinstance(plans, torch.Tensor):
        return plans.detach().cpu().tolist()
    rows = []
    for plan in plans:
        if hasattr(plan, "distribution"):
            plan = plan.distribution
        if isinstance(plan, torch.Tensor):
            plan = plan.detach().cpu().tolist()
        rows.append([float(x) for x in plan])
    return rows

def align_output(
    tokens: Sequence[str],
    plans: Union[torch.Tensor, Sequence[Any]],
    spans: Optional[Sequence[Span]] = None,
    num_items: Optional[int] = None,
) -> AlignmentResult:
    """
    Align output tokens and sentences to items.

    Args:
        tokens: Output tokens
        plans: Per-token plan distributions, one row per token ([T, N] tensor, StepPlanScores
            or lists of floats)
        spans: Sentence spans; derived from sentence punctuation when omitted
        num_items: Item count; the plan width when omitted
    """
    rows = _rows(plans)
    if len(rows) != len(tokens):
        raise NumericError(ErrorCode.DIMENSION_MISMATCH, details=f"{len(rows)} plan distributions for {len(tokens)} tokens")
    if num_items is None:
        num_items = len(rows[0]) if rows else 0
    spans = list(sentence_spans(tokens) if spans is None else spans)

    token_items: List[Optional[int]] = []
    for row in rows:
        # Lowest index wins ties
        best = max(range(len(row)), key=lambda i: (row[i], -i))
        token_items.append(best if row[best] > ALIGNMENT_THRESHOLD else None)

    sentence_items: List[Optional[int]] = []
    for start, end in spans:
        mapped = set(token_items[start:end])
        sentence_items.append(mapped.pop() if len(mapped) == 1 and None not in mapped else None)

    return AlignmentResult(
        token_items=token_items, spans=[tuple(span) for span in spans], sentence_items=sentence_items, num_items=num_items
    )
