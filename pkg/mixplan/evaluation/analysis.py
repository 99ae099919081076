"""
Analyses of generated text against its input items: item coverage and claim realization.
"""
from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple

from ..error_codes import ErrorCode
from ..error_handler import DataError
from ..logging_config import eval_logger as logger
from ..mixed_lm.alignment import AlignmentResult
from ..preprocess.claims import ClaimClassifier, ClaimLabel

def coverage_report(alignments: Sequence[AlignmentResult]) -> float:
    """Percentage of items aligned to at least one output sentence, micro-averaged over samples."""
    if not alignments:
        raise DataError(ErrorCode.INVALID_ARGUMENT, name="alignments", details="at least one alignment is required")
    total = sum(alignment.num_items for alignment in alignments)
    if not total:
        raise DataError(ErrorCode.INVALID_ARGUMENT, name="alignments", details="alignments cover no items")
    aligned = sum(len(alignment.aligned_items) for alignment in alignments)
    return 100.0 * aligned / total

@dataclass
class ClaimRealization:
    """rate is None when no output sentence is aligned to an item with a claim."""
    rate: Optional[float]
    claim_sentences: int
    aligned_sentences: int

    @property
    def is_defined(self) -> bool:
        return self.rate is not None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

def claim_aligned_sentences(tokens: Sequence[str], alignment: AlignmentResult) -> Iterable[str]:
    """Output sentences aligned to an item that carries a claim."""
    for (start, end), item in zip(alignment.spans, alignment.sentence_items):
        if item is not None and item < len(alignment.item_has_claim) and alignment.item_has_claim[item]:
            yield " ".join(tokens[start:end])

def claim_realization_rate(
    generations: Sequence[Tuple[Sequence[str], AlignmentResult]], classifier: ClaimClassifier
) -> ClaimRealization:
    """
    Among output sentences aligned to an item with a claim, the percentage the classifier
    labels as claims.
    """
    claims = 0
    aligned = 0
    for tokens, alignment in generations:
        for sentence in claim_aligned_sentences(tokens, alignment):
            aligned += 1
            claims += int(classifier.classify(sentence) is ClaimLabel.CLAIM)
    if not aligned:
        logger.info("Claim realization undefined: no output sentence is aligned to an item with a claim")
        return ClaimRealization(rate=None, claim_sentences=0, aligned_sentences=0)
    return ClaimRealization(rate=100.0 * claims / aligned, claim_sentences=claims, aligned_sentences=aligned)
