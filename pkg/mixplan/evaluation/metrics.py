"""
Corpus-level automatic metrics: BLEU-2, ROUGE-2 and METEOR, all reported as percentages.

Inputs are token sequences; callers lowercase or otherwise normalize them beforehand.
"""
from collections import Counter
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Set, Tuple

from nltk.translate.bleu_score import SmoothingFunction, corpus_bleu
from pydantic import BaseModel, Field

from ..error_codes import ErrorCode
from ..error_handler import DataError
from ..logging_config import eval_logger as logger
from ..preprocess.text import stem_token

BLEU_WEIGHTS = (0.5, 0.5)
BLEU_EPSILON = 1e-9

METEOR_ALPHA = 0.9
METEOR_BETA = 3.0
METEOR_GAMMA = 0.5

Tokens = Sequence[str]
SynonymTable = Mapping[str, Iterable[str]]

def _bounded(score: float) -> float:
    # Floating-point rounding can overshoot 100 by an ulp
    return min(max(score, 0.0), 100.0)

def _check_pairs(hypotheses: Sequence[Tokens], references: Sequence[Tokens]) -> None:
    if not hypotheses:
        raise DataError(ErrorCode.INVALID_ARGUMENT, name="hypotheses", details="at least one hypothesis is required")
    if len(hypotheses) != len(references):
        raise DataError(
            ErrorCode.INVALID_ARGUMENT,
            name="references",
            details=f"{len(references)} references for {len(hypotheses)} hypotheses",
        )

def bleu2(hypotheses: Sequence[Tokens], references: Sequence[Tokens]) -> float:
    """Corpus BLEU over unigrams and bigrams with uniform weights and epsilon smoothing."""
    _check_pairs(hypotheses, references)
    smoothing = SmoothingFunction(epsilon=BLEU_EPSILON).method1
    score = corpus_bleu(
        [[list(reference)] for reference in references],
        [list(hypothesis) for hypothesis in hypotheses],
        weights=BLEU_WEIGHTS,
        smoothing_function=smoothing,
    )
    return _bounded(100.0 * float(score))

def _bigrams(tokens: Tokens) -> Counter:
    return Counter(zip(tokens, tokens[1:]))

class RougeScore(NamedTuple):
    recall: float
    f1: float
    skipped: int

def rouge2(hypotheses: Sequence[Tokens], references: Sequence[Tokens]) -> RougeScore:
    """
    Mean per-pair bigram recall and F1. Pairs whose reference has fewer than two tokens
    carry no bigram and are skipped.
    """
    _check_pairs(hypotheses, references)
    recalls: List[float] = []
    f1s: List[float] = []
    skipped = 0
    for hypothesis, reference in zip(hypotheses, references):
        reference_bigrams = _bigrams(reference)
        if not reference_bigrams:
            skipped += 1
            continue
        hypothesis_bigrams = _bigrams(hypothesis)
        overlap = sum((hypothesis_bigrams & reference_bigrams).values())
        recall = overlap / sum(reference_bigrams.values())
        precision = overlap / sum(hypothesis_bigrams.values()) if hypothesis_bigrams else 0.0
        recalls.append(recall)
        f1s.append(2 * precision * recall / (precision + recall) if precision + recall else 0.0)
    if not recalls:
        raise DataError(ErrorCode.INVALID_ARGUMENT, name="references", details="every reference has fewer than 2 tokens")
    if skipped:
        logger.debug(f"ROUGE-2 skipped {skipped} pairs with references shorter than 2 tokens")
    return RougeScore(recall=100.0 * sum(recalls) / len(recalls), f1=100.0 * sum(f1s) / len(f1s), skipped=skipped)

def _are_synonyms(a: str, b: str, synonyms: Optional[SynonymTable]) -> bool:
    if synonyms is None:
        return False
    return b in set(synonyms.get(a, ())) or a in set(synonyms.get(b, ()))

def meteor_alignment(
    hypothesis: Tokens, reference: Tokens, synonyms: Optional[SynonymTable] = None
) -> List[Tuple[int, int]]:
    """
    Word alignment built in three stages: exact, stem, synonym. Each stage matches every
    still-unmatched hypothesis word, left to right, to the first unmatched reference word
    it accepts.
    """
    hyp = [token.lower() for token in hypothesis]
    ref = [token.lower() for token in reference]
    hyp_stems = [stem_token(token) for token in hyp]
    ref_stems = [stem_token(token) for token in ref]
    stages = [
        lambda i, j: hyp[i] == ref[j],
        lambda i, j: hyp_stems[i] == ref_stems[j],
        lambda i, j: _are_synonyms(hyp[i], ref[j], synonyms),
    ]
    matched_hyp: Set[int] = set()
    matched_ref: Set[int] = set()
    alignment: List[Tuple[int, int]] = []
    for accepts in stages:
        for i in range(len(hyp)):
            if i in matched_hyp:
                continue
            for j in range(len(ref)):
                if j not in matched_ref and accepts(i, j):
                    matched_hyp.add(i)
                    matched_ref.add(j)
                    alignment.append((i, j))
                    break
    return sorted(alignment)

def _chunks(alignment: Sequence[Tuple[int, int]]) -> int:
    chunks = 0
    previous: Optional[Tuple[int, int]] = None
    for i, j in alignment:
        if previous is None or i != previous[0] + 1 or j != previous[1] + 1:
            chunks += 1
        previous = (i, j)
    return chunks

def meteor_sentence(hypothesis: Tokens, reference: Tokens, synonyms: Optional[SynonymTable] = None) -> float:
    """Sentence METEOR in [0, 1]."""
    alignment = meteor_alignment(hypothesis, reference, synonyms)
    matches = len(alignment)
    if not matches:
        return 0.0
    precision = matches / len(hypothesis)
    recall = matches / len(reference)
    f_mean = precision * recall / (METEOR_ALPHA * precision + (1 - METEOR_ALPHA) * recall)
    penalty = METEOR_GAMMA * (_chunks(alignment) / matches) ** METEOR_BETA
    return f_mean * (1 - penalty)

def meteor(
    hypotheses: Sequence[Tokens], references: Sequence[Tokens], synonym_table: Optional[SynonymTable] = None
) -> float:
    _check_pairs(hypotheses, references)
    scores = [meteor_sentence(h, r, synonym_table) for h, r in zip(hypotheses, references)]
    return _bounded(100.0 * sum(scores) / len(scores))

class MetricReport(BaseModel):
    """Automatic metric scores of one generation run."""
    bleu2: float = Field(..., ge=0, le=100)
    rouge2_recall: float = Field(..., ge=0, le=100)
    rouge2_f1: float = Field(..., ge=0, le=100)
    meteor: float = Field(..., ge=0, le=100)
    mean_output_length: float = Field(..., ge=0)
    num_pairs: int = Field(..., gt=0)
    rouge_skipped: int = Field(0, ge=0)

    def to_dict(self) -> Dict[str, float]:
        return self.model_dump()

def evaluate_pairs(
    hypotheses: Sequence[Tokens], references: Sequence[Tokens], synonym_table: Optional[SynonymTable] = None
) -> MetricReport:
    """All metrics plus the mean hypothesis length."""
    _check_pairs(hypotheses, references)
    rouge = rouge2(hypotheses, references)
    report = MetricReport(
        bleu2=bleu2(hypotheses, references),
        rouge2_recall=rouge.recall,
        rouge2_f1=rouge.f1,
        meteor=meteor(hypotheses, references, synonym_table),
        mean_output_length=sum(len(h) for h in hypotheses) / len(hypotheses),
        num_pairs=len(hypotheses),
        rouge_skipped=rouge.skipped,
    )
    logger.info(
        f"BLEU-2 {report.bleu2:.2f}, ROUGE-2 R {report.rouge2_recall:.2f}, METEOR {report.meteor:.2f} "
        f"over {report.num_pairs} pairs",
        extra=report.to_dict(),
    )
    return report
