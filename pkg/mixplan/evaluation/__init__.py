"""Automatic metrics and alignment-based analyses of generated text."""
from .analysis import ClaimRealization, claim_aligned_sentences, claim_realization_rate, coverage_report
from .metrics import MetricReport, RougeScore, bleu2, evaluate_pairs, meteor, meteor_sentence, rouge2

__all__ = [
    "ClaimRealization",
    "claim_aligned_sentences",
    "claim_realization_rate",
    "coverage_report",
    "MetricReport",
    "RougeScore",
    "bleu2",
    "evaluate_pairs",
    "meteor",
    "meteor_sentence",
    "rouge2",
]
