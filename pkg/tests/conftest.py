"""
Shared fixtures for the mixplan test suite.
"""
from pathlib import Path
from typing import Callable, Optional, Sequence

import pytest

from mixplan.config import ModelConfig, TrainingConfig
from mixplan.content_model import ContentItem, Sample
from mixplan.mixed_lm.model import MixedLMModel
from mixplan.mixed_lm.vocab import Vocabulary
from mixplan.pipeline import build_vocabulary
from mixplan.preprocess import ClaimClassifier, PreprocessResources, train_claim_classifier
from mixplan.synthetic import claim_and_fact_sentences, synthetic_samples

ENTITY_LINES = [
    "Bill Clinton\tBill_Clinton",
    "New York\tNew_York",
    "New York Times\tThe_New_York_Times",
    "Green Party\tGreen_Party",
]
CONCEPT_LINES = [
    "attack\tNOUN",
    "happen\tVERB",
    "make\tVERB",
    "mistake\tNOUN",
    "policy\tNOUN",
    "park\tNOUN",
    "support\tVERB",
]
CONCRETENESS_LINES = [
    "attack\t3.9",
    "mistake\t2.1",
    "policy\t1.8",
    "park\t4.8",
    "freedom\t3.0",
]

@pytest.fixture
def resource_files(tmp_path: Path):
    """Entity, concept and concreteness files in the tab-separated resource format."""
    files = {
        "entities": tmp_path / "entities.tsv",
        "concepts": tmp_path / "concepts.tsv",
        "concreteness": tmp_path / "concreteness.tsv",
    }
    files["entities"].write_text("\n".join(ENTITY_LINES) + "\n", encoding="utf-8")
    files["concepts"].write_text("# lemma\tPOS\n" + "\n".join(CONCEPT_LINES) + "\n", encoding="utf-8")
    files["concreteness"].write_text("\n".join(CONCRETENESS_LINES) + "\n", encoding="utf-8")
    return files

@pytest.fixture
def resources(resource_files) -> PreprocessResources:
    return PreprocessResources.from_paths(
        resource_files["entities"], resource_files["concepts"], resource_files["concreteness"]
    )

@pytest.fixture(scope="session")
def claim_classifier() -> ClaimClassifier:
    claims, facts = claim_and_fact_sentences()
    return train_claim_classifier(claims, facts, seed=0)

@pytest.fixture
def make_sample() -> Callable[..., Sample]:
    """Factory for small valid samples; every item gets one entity and one core concept."""

    def _make(
        sample_id: str = "s0",
        title: str = "Transit Plan",
        sentences: Sequence[str] = ("the council should fund the plan .", "riders oppose it ."),
        claims: Optional[Sequence[bool]] = None,
    ) -> Sample:
        claims = claims or [False] * len(sentences)
        items = []
        target = []
        labels = []
        for index, (sentence, has_claim) in enumerate(zip(sentences, claims)):
            tokens = sentence.split()
            items.append(ContentItem(
                entities=frozenset([f"Entity_{index}"]),
                core_concepts=frozenset([f"concept{index}"]),
                claim=sentence if has_claim else None,
            ))
            target.extend(tokens)
            labels.extend([index] * len(tokens))
        return Sample(id=sample_id, title=title, items=tuple(items), target=" ".join(target), plan_labels=tuple(labels))

    return _make

@pytest.fixture
def double_config() -> ModelConfig:
    """Small double-precision model for oracle comparisons."""
    return ModelConfig(
        embedding_size=8,
        hidden_size=8,
        num_heads=2,
        num_layers=1,
        ffn_size=16,
        plan_hidden_size=8,
        max_item_len=32,
        max_target_len=24,
        dtype="float64",
    )

@pytest.fixture
def model_factory(double_config) -> Callable[..., MixedLMModel]:
    def _build(samples: Sequence[Sample], seed: int = 0, config: Optional[ModelConfig] = None) -> MixedLMModel:
        return MixedLMModel(config or double_config, build_vocabulary(samples), seed=seed)

    return _build

@pytest.fixture(scope="session")
def synthetic_corpus():
    return synthetic_samples(num_samples=50, seed=0)

@pytest.fixture
def fast_training() -> TrainingConfig:
    return TrainingConfig(seed=0, batch_size=4, learning_rate=0.01, patience=1, max_epochs=3)

@pytest.fixture
def toy_vocabulary() -> Vocabulary:
    return Vocabulary.build([["a", "b", "c", "d"]])
