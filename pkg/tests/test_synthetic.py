"""
Tests for the template-generated corpus and dataset writer.
"""
import json

import pytest

from mixplan.content_model import load_corpus
from mixplan.error_handler import DataError
from mixplan.preprocess import PreprocessResources, build_corpus, load_raw_corpus
from mixplan.synthetic import VERBS, synthetic_samples, write_synthetic_dataset

def test_seeded_and_valid():
    first = synthetic_samples(num_samples=20, seed=4)
    assert first == synthetic_samples(num_samples=20, seed=4)
    assert first != synthetic_samples(num_samples=20, seed=5)
    for sample in first:
        assert 1 <= len(sample.items) <= 3
        assert len(sample.plan_labels) == len(sample.target_tokens)

def test_items_follow_verb_order(synthetic_corpus):
    order = list(VERBS)
    for sample in synthetic_corpus:
        verbs = [next(c for c in item.core_concepts if c in VERBS) for item in sample.items]
        assert verbs == sorted(verbs, key=order.index)

def test_closing_sentence_is_unlabeled(synthetic_corpus):
    three_items = [sample for sample in synthetic_corpus if len(sample.items) == 3]
    assert three_items
    for sample in three_items:
        assert sample.target_tokens[-2:] == ["Debate", "continues."]
        assert sample.plan_labels[-2:] == (None, None)

def test_item_count_bounds():
    with pytest.raises(DataError):
        synthetic_samples(num_samples=1, min_items=3, max_items=2)

def test_dataset_preprocesses_back_to_gold_items(tmp_path):
    dataset = write_synthetic_dataset(tmp_path, num_samples=10, seed=1)
    gold = load_corpus(dataset.gold_corpus)
    resources = PreprocessResources.from_paths(dataset.entities, dataset.concepts, dataset.concreteness)
    rebuilt = build_corpus(load_raw_corpus(dataset.raw_corpus), resources)
    assert [sample.id for sample in rebuilt] == [sample.id for sample in gold]
    for ours, theirs in zip(rebuilt, gold):
        assert [item.entities for item in ours.items] == [item.entities for item in theirs.items]
        assert [item.core_concepts for item in ours.items] == [item.core_concepts for item in theirs.items]
        assert [item.expanded_concepts for item in ours.items] == [item.expanded_concepts for item in theirs.items]
        assert ours.plan_labels == theirs.plan_labels

def test_dataset_config_points_at_files(tmp_path):
    dataset = write_synthetic_dataset(tmp_path, num_samples=3, seed=0, config_overrides={"max_epochs": 2})
    config = json.loads(dataset.config.read_text(encoding="utf-8"))
    assert config["max_epochs"] == 2
    for key in ("raw_corpus", "entities", "concepts", "concreteness", "claims_train", "facts_train"):
        assert (tmp_path / config[key]).exists()
