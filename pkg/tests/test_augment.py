"""
Tests for nucleus filtering and the concept-expansion and claim-generation generators.
"""
import pytest
import torch

from mixplan.augment import (
    AugmentMode,
    ConditionalGenerator,
    augment_corpus,
    augment_sample,
    claim_condition,
    claim_generation_pairs,
    concept_condition,
    concept_expansion_pairs,
    expand_concepts,
    generate_claim,
    nucleus_filter,
    train_generator,
)
from mixplan.config import ModelConfig, TrainingConfig
from mixplan.content_model import SEGMENTER
from mixplan.error_handler import DataError, DistributionError, NotTrainedError
from mixplan.mixed_lm import EncodedExample, collate
from mixplan.mixed_lm.data import NO_LABEL
from mixplan.mixed_lm.vocab import EOS_ID

GENERATOR_CONFIG = ModelConfig(
    embedding_size=16,
    hidden_size=16,
    num_heads=2,
    ffn_size=32,
    plan_hidden_size=8,
    max_item_len=32,
    max_target_len=16,
    dtype="float64",
)
OVERFIT_TRAINING = TrainingConfig(seed=0, batch_size=2, learning_rate=0.01, patience=20, max_epochs=150)

def _f64(values):
    return torch.tensor(values, dtype=torch.float64)

class TestNucleusFilter:
    def test_top_token_reaches_mass(self):
        assert nucleus_filter(_f64([0.7, 0.2, 0.1]), 0.7).tolist() == [1.0, 0.0, 0.0]

    def test_p_one_is_identity(self):
        dist = _f64([0.7, 0.2, 0.1])
        assert torch.equal(nucleus_filter(dist, 1.0), dist)

    def test_ties_break_by_index(self):
        assert nucleus_filter(_f64([0.25] * 4), 0.5).tolist() == [0.5, 0.5, 0.0, 0.0]

    def test_support_grows_with_p(self):
        generator = torch.Generator().manual_seed(0)
        for _ in range(50):
            dist = torch.softmax(torch.randn(12, generator=generator, dtype=torch.float64), dim=0)
            previous = 0
            for p in (0.1, 0.3, 0.5, 0.7, 0.9, 1.0):
                filtered = nucleus_filter(dist, p)
                support = int((filtered > 0).sum())
                assert support >= previous
                assert float(filtered.sum()) == pytest.approx(1.0, abs=1e-12)
                assert float(dist[filtered > 0].sum()) >= p - 1e-12
                previous = support

    def test_unnormalized_input(self):
        with pytest.raises(DistributionError):
            nucleus_filter(_f64([0.5, 0.6]), 0.9)

    @pytest.mark.parametrize("p", [0.0, -0.5, 1.5])
    def test_p_out_of_range(self, p):
        with pytest.raises(DataError):
            nucleus_filter(_f64([0.5, 0.5]), p)

class TestTrainingPairs:
    def test_concept_pairs_sort_expanded_concepts(self, synthetic_corpus):
        pairs = concept_expansion_pairs(synthetic_corpus[:5])
        assert len(pairs) == sum(len(sample.items) for sample in synthetic_corpus[:5])
        for condition, target in pairs:
            assert condition.count(SEGMENTER) == 2
            assert target == sorted(target)

    def test_claim_pairs_only_for_claim_items(self, synthetic_corpus):
        pairs = claim_generation_pairs(synthetic_corpus)
        expected = sum(1 for sample in synthetic_corpus for item in sample.items if item.claim)
        assert len(pairs) == expected
        assert all(" ".join(target).endswith(".") for _, target in pairs)

    def test_claim_condition_layout(self):
        assert claim_condition(["Energy", "Policy"], ["Coal", "Acme"]) == ["Energy", "Policy", SEGMENTER, "Acme", "Coal"]

class TestConditionalGenerator:
    def test_untrained_generator(self):
        with pytest.raises(NotTrainedError):
            ConditionalGenerator("concepts").generate(["t", SEGMENTER])
        with pytest.raises(NotTrainedError):
            expand_concepts(["t"], ["A"], ["x"], ConditionalGenerator("concepts"))

    def test_fit_needs_pairs(self):
        with pytest.raises(DataError):
            ConditionalGenerator("claims").fit([], GENERATOR_CONFIG, OVERFIT_TRAINING)

class TestConceptExpansion:
    @pytest.fixture(scope="class")
    def concept_generator(self):
        pairs = [
            (concept_condition(["topic"], ["A"], ["run"]), ["run", "tree"]),
            (concept_condition(["topic"], ["B"], ["make"]), ["car", "road"]),
        ]
        generator = ConditionalGenerator("concepts")
        generator.fit(pairs, GENERATOR_CONFIG, OVERFIT_TRAINING)
        return generator

    def test_recovers_training_target(self, concept_generator):
        condition = concept_condition(["topic"], ["B"], ["make"])
        assert concept_generator.generate(condition) == ["car", "road"]

    def test_expansion_excludes_core(self, concept_generator):
        expanded = expand_concepts(["topic"], ["A"], ["run"], concept_generator)
        assert "run" not in expanded
        assert expanded == {"tree"}

    def test_save_and_load(self, tmp_path, concept_generator):
        path = tmp_path / "concepts.pt"
        concept_generator.save(path)
        loaded = ConditionalGenerator.load(path)
        assert loaded.name == "concepts"
        condition = concept_condition(["topic"], ["A"], ["run"])
        assert loaded.generate(condition) == concept_generator.generate(condition)

    def test_augment_replaces_expanded_concepts(self, concept_generator, make_sample):
        sample = make_sample(title="topic")
        augmented = augment_sample(sample, concept_generator=concept_generator)
        for before, after in zip(sample.items, augmented.items):
            assert after.core_concepts == before.core_concepts
            assert not after.core_concepts & after.expanded_concepts
            assert after.entities == before.entities
        assert augmented.plan_labels == sample.plan_labels

class TestClaimGeneration:
    @pytest.fixture(scope="class")
    def claim_generator(self, synthetic_corpus):
        training = OVERFIT_TRAINING.model_copy(update={"max_epochs": 20})
        return train_generator(AugmentMode.CLAIMS, synthetic_corpus[:10], GENERATOR_CONFIG, training)

    def test_same_seed_same_claim(self, claim_generator):
        first = generate_claim(["Transit", "Plan"], ["Tom_Reyes"], claim_generator, nucleus_p=0.9, seed=7)
        second = generate_claim(["Transit", "Plan"], ["Tom_Reyes"], claim_generator, nucleus_p=0.9, seed=7)
        assert first == second

    def test_tiny_nucleus_matches_greedy(self, claim_generator):
        condition = claim_condition(["Transit", "Plan"], ["Tom_Reyes"])
        assert claim_generator.sample(condition, nucleus_p=1e-9, seed=0) == claim_generator.generate(condition)

    def test_invalid_nucleus_p(self, claim_generator):
        with pytest.raises(DataError):
            generate_claim(["T"], ["A"], claim_generator, nucleus_p=0.0)

    def test_only_existing_claims_are_replaced(self, claim_generator, make_sample):
        sample = make_sample(claims=[True, False])
        augmented = augment_corpus([sample], claim_generator=claim_generator, seed=3)[0]
        assert augmented.items[1].claim is None
        assert augmented.items[0].concepts == sample.items[0].concepts
        repeated = augment_corpus([sample], claim_generator=claim_generator, seed=3)[0]
        assert repeated == augmented

def test_expansion_recovers_associated_concepts():
    title = ["Clinton", "Legacy"]
    entities = ["Bill_Clinton", "9/11_attacks"]
    core = ["make", "happen"]
    generator = ConditionalGenerator("concepts")
    generator.fit([(concept_condition(title, entities, core), ["administration", "mistake"])], GENERATOR_CONFIG, OVERFIT_TRAINING)
    assert expand_concepts(title, entities, core, generator) >= {"mistake", "administration"}

def test_confident_claim_generator_samples_its_training_claim():
    title, entities = ["Energy", "Policy"], ["Coal"]
    condition = claim_condition(title, entities)
    target = "Coal is not reliable .".split()
    generator = ConditionalGenerator("claims")
    generator.fit([(condition, target)], GENERATOR_CONFIG, OVERFIT_TRAINING.model_copy(update={"max_epochs": 300}))

    model = generator.model
    gold = model.vocab.encode(target) + [EOS_ID]
    batch = collate([EncodedExample("claim", [model.vocab.encode(condition)], gold, [NO_LABEL] * len(gold))])
    model.eval()
    with torch.no_grad():
        probs = model(batch).mixture()[0]
    peak, argmax = probs.max(dim=-1)
    assert argmax.tolist() == gold
    assert float(peak.min()) >= 0.9

    for seed in range(10):
        assert generate_claim(title, entities, generator, nucleus_p=0.9, seed=seed) == "coal is not reliable ."
