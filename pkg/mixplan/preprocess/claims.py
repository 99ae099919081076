"""
Claim detection: a logistic classifier over bag-of-words and opinion-marker features.
"""
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import joblib
import numpy as np
from sklearn.feature_extraction import DictVectorizer
from sklearn.linear_model import LogisticRegression

from ..error_codes import ErrorCode
from ..error_handler import DataError, NotTrainedError, ResourceError
from ..logging_config import preprocess_logger as logger
from .text import MODALS, normalize_token

CLAIM_THRESHOLD = 0.5

OPINION_MARKERS = frozenset(
    "believe think should must ought need needs better worse best worst wrong right "
    "unfair fair important necessary bad good clearly obviously argue".split()
)

class ClaimLabel(str, Enum):
    CLAIM = "claim"
    FACT = "fact"

def sentence_features(sentence: str) -> Dict[str, float]:
    """Unigram counts, scaled length and modal/opinion marker indicators."""
    tokens = [word for word in (normalize_token(token) for token in sentence.split()) if word]
    features: Dict[str, float] = {}
    for token in tokens:
        key = f"w={token}"
        features[key] = features.get(key, 0.0) + 1.0
    features["length"] = len(tokens) / 10.0
    features["has_modal"] = float(any(token in MODALS for token in tokens))
    features["has_opinion_marker"] = float(any(token in OPINION_MARKERS for token in tokens))
    return features

class ClaimClassifier:
    """Binary claim/fact classifier; prediction is deterministic for fixed state."""

    def __init__(self, c: float = 10.0, seed: int = 0):
        self.c = c
        self.seed = seed
        self._vectorizer: Optional[DictVectorizer] = None
        self._model: Optional[LogisticRegression] = None
        self._constant: Optional[ClaimLabel] = None
        self.training_accuracy: Optional[float] = None

    @property
    def is_trained(self) -> bool:
        return self._model is not None or self._constant is not None

    def fit(self, claims: Sequence[str], facts: Sequence[str]) -> "ClaimClassifier":
        """Fit on labeled sentences; with a single class the classifier always predicts it."""
        if not claims and not facts:
            raise DataError(ErrorCode.EMPTY_CLASS, label="claim and fact")
        self._vectorizer = None
        self._model = None
        self._constant = None
        if not facts or not claims:
            self._constant = ClaimLabel.CLAIM if claims else ClaimLabel.FACT
            self.training_accuracy = 1.0
            logger.warning(f"Claim classifier trained on one class only; always predicting '{self._constant.value}'")
            return self
        sentences = list(claims) + list(facts)
        labels = np.array([1] * len(claims) + [0] * len(facts))
        self._vectorizer = DictVectorizer(sparse=True)
        features = self._vectorizer.fit_transform([sentence_features(s) for s in sentences])
        self._model = LogisticRegression(C=self.c, max_iter=1000, random_state=self.seed)
        self._model.fit(features, labels)
        predictions = [self.classify(sentence) for sentence in sentences]
        expected = [ClaimLabel.CLAIM] * len(claims) + [ClaimLabel.FACT] * len(facts)
        self.training_accuracy = float(np.mean([p == e for p, e in zip(predictions, expected)]))
        logger.info(
            f"Claim classifier trained on {len(claims)} claims and {len(facts)} facts",
            extra={"training_accuracy": self.training_accuracy},
        )
        return self

    def claim_probability(self, sentence: str) -> float:
        if self._constant is not None:
            return 1.0 if self._constant is ClaimLabel.CLAIM else 0.0
        if self._model is None or self._vectorizer is None:
            raise NotTrainedError("Claim classifier")
        features = self._vectorizer.transform([sentence_features(sentence)])
        return float(self._model.predict_proba(features)[0, 1])

    def classify(self, sentence: str) -> ClaimLabel:
        return ClaimLabel.CLAIM if self.claim_probability(sentence) > CLAIM_THRESHOLD else ClaimLabel.FACT

    def save(self, path: Path) -> None:
        if not self.is_trained:
            raise NotTrainedError("Claim classifier")
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        joblib.dump(
            {
                "c": self.c,
                "seed": self.seed,
                "vectorizer": self._vectorizer,
                "model": self._model,
                "constant": self._constant.value if self._constant else None,
                "training_accuracy": self.training_accuracy,
            },
            path,
        )

    @classmethod
    def load(cls, path: Path) -> "ClaimClassifier":
        state = joblib.load(path)
        classifier = cls(c=state["c"], seed=state["seed"])
        classifier._vectorizer = state["vectorizer"]
        classifier._model = state["model"]
        classifier._constant = ClaimLabel(state["constant"]) if state["constant"] else None
        classifier.training_accuracy = state["training_accuracy"]
        return classifier

def classify_claim(sentence: str, classifier: ClaimClassifier) -> ClaimLabel:
    return classifier.classify(sentence)

def train_claim_classifier(
    claims: Sequence[str], facts: Sequence[str], seed: int = 0, c: float = 10.0
) -> ClaimClassifier:
    """Train on claim and fact sentences; both lists must be nonempty."""
    if not claims:
        raise DataError(ErrorCode.EMPTY_CLASS, label=ClaimLabel.CLAIM.value)
    if not facts:
        raise DataError(ErrorCode.EMPTY_CLASS, label=ClaimLabel.FACT.value)
    return ClaimClassifier(c=c, seed=seed).fit(claims, facts)

def read_sentences(path: Path) -> List[str]:
    """One sentence per nonblank line."""
    if not Path(path).exists():
        raise ResourceError(ErrorCode.MISSING_RESOURCE, path=str(path))
    return [line.strip() for line in Path(path).read_text(encoding="utf-8").splitlines() if line.strip()]
