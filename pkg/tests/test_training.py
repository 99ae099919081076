"""
Tests for joint training: stopping rule, reproducibility, failure modes and the
overfitting check on the synthetic corpus.
"""
import math

import pytest
import torch

from mixplan.config import ModelConfig, TrainingConfig
from mixplan.error_handler import DataError, NonFiniteLossError
from mixplan.evaluation import bleu2
from mixplan.mixed_lm import (
    decode,
    evaluate_loss,
    item_token_sequences,
    teacher_forced_accuracy,
    teacher_forced_alignment,
    train,
)
from mixplan.mixed_lm.model import MixedLMModel
from mixplan.mixed_lm.training import gold_sentence_items
from mixplan.pipeline import build_seq2seqfull_input, build_vocabulary

@pytest.fixture
def small_corpus(synthetic_corpus):
    return synthetic_corpus[:8]

class TestStoppingRule:
    def test_stops_when_validation_worsens(self, mocker, model_factory, small_corpus):
        mocker.patch("mixplan.mixed_lm.training.evaluate_examples_loss", side_effect=[1.0, 2.0, 3.0, 4.0])
        config = TrainingConfig(seed=0, batch_size=4, learning_rate=0.01, patience=0, max_epochs=10)
        result = train(model_factory(small_corpus), small_corpus, small_corpus, config)
        assert len(result.history) == 2
        assert result.stopped_early
        assert result.best_epoch == 1
        assert result.best_val_loss == 1.0

    def test_patience_allows_extra_epochs(self, mocker, model_factory, small_corpus):
        mocker.patch("mixplan.mixed_lm.training.evaluate_examples_loss", side_effect=[1.0, 2.0, 3.0, 0.5, 0.6, 0.7, 0.8])
        config = TrainingConfig(seed=0, batch_size=4, learning_rate=0.01, patience=2, max_epochs=10)
        result = train(model_factory(small_corpus), small_corpus, small_corpus, config)
        assert result.best_epoch == 4
        assert len(result.history) == 7

    def test_best_parameters_are_restored(self, mocker, model_factory, small_corpus):
        mocker.patch("mixplan.mixed_lm.training.evaluate_examples_loss", side_effect=[1.0, 2.0])
        model = model_factory(small_corpus)
        snapshots = []

        def snapshot(record):
            snapshots.append({name: tensor.detach().clone() for name, tensor in model.state_dict().items()})

        config = TrainingConfig(seed=0, batch_size=4, learning_rate=0.01, patience=0, max_epochs=5)
        train(model, small_corpus, small_corpus, config, on_epoch=snapshot)
        assert len(snapshots) == 2
        for name, tensor in model.state_dict().items():
            assert torch.equal(tensor, snapshots[0][name])

    def test_runs_to_max_epochs_without_stopping(self, model_factory, small_corpus, fast_training):
        config = fast_training.model_copy(update={"patience": 100})
        result = train(model_factory(small_corpus), small_corpus, small_corpus, config)
        assert len(result.history) == config.max_epochs
        assert not result.stopped_early

class TestReproducibility:
    def test_same_seed_same_curves(self, model_factory, small_corpus, fast_training):
        first = train(model_factory(small_corpus, seed=1), small_corpus, [], fast_training)
        second = train(model_factory(small_corpus, seed=1), small_corpus, [], fast_training)
        assert [r.to_dict() for r in first.history] == [r.to_dict() for r in second.history]

    def test_loss_is_finite_and_positive(self, model_factory, small_corpus):
        model = model_factory(small_corpus)
        loss = evaluate_loss(model, small_corpus)
        assert math.isfinite(loss)
        assert loss > 0

class TestFailures:
    def test_non_finite_loss_names_the_batch(self, model_factory, small_corpus, fast_training):
        model = model_factory(small_corpus)
        with torch.no_grad():
            model.output.weight.fill_(float("nan"))
        with pytest.raises(NonFiniteLossError) as excinfo:
            train(model, small_corpus, small_corpus, fast_training)
        assert excinfo.value.step == 1
        assert set(excinfo.value.sample_ids) <= {sample.id for sample in small_corpus}

    def test_no_training_samples(self, model_factory, small_corpus, fast_training):
        with pytest.raises(DataError):
            train(model_factory(small_corpus), [], small_corpus, fast_training)

def test_gold_sentence_items():
    tokens = "a b . c d . e .".split()
    labels = [0, 0, 0, 1, 1, 1, None, None]
    assert gold_sentence_items(tokens, labels) == [0, 1, None]

@pytest.mark.slow
class TestOverfitting:
    @pytest.fixture(scope="class")
    def overfit_model(self, synthetic_corpus):
        config = ModelConfig(
            embedding_size=32,
            hidden_size=32,
            num_heads=2,
            ffn_size=64,
            plan_hidden_size=32,
            max_item_len=64,
            max_target_len=64,
        )
        training = TrainingConfig(seed=0, batch_size=8, learning_rate=0.003, patience=20, max_epochs=200)
        model = MixedLMModel(config, build_vocabulary(synthetic_corpus), seed=0)
        result = train(model, synthetic_corpus, synthetic_corpus, training)
        return model, result

    def test_memorizes_training_targets(self, overfit_model, synthetic_corpus):
        model, _ = overfit_model
        assert teacher_forced_accuracy(model, synthetic_corpus) >= 0.99

    def test_recovers_gold_sentence_alignment(self, overfit_model, synthetic_corpus):
        model, _ = overfit_model
        assert teacher_forced_alignment(model, synthetic_corpus) >= 0.95

    def test_training_loss_decreases(self, overfit_model):
        _, result = overfit_model
        assert result.history[-1].loss < result.history[0].loss

@pytest.mark.slow
@pytest.mark.xfail(strict=False, reason="advisory comparison; small corpora can invert the ordering")
def test_mixed_model_beats_single_input_baseline(synthetic_corpus):
    config = ModelConfig(embedding_size=32, hidden_size=32, ffn_size=64, plan_hidden_size=32,
                         max_item_len=128, max_target_len=64)
    train_samples, val_samples, test_samples = synthetic_corpus[:40], synthetic_corpus[40:45], synthetic_corpus[45:]
    references = [[token.lower() for token in sample.target_tokens] for sample in test_samples]

    def held_out_bleu(samples_for_system, seed):
        train_split, val_split, test_split = (samples_for_system(split) for split in (train_samples, val_samples, test_samples))
        training = TrainingConfig(seed=seed, batch_size=8, learning_rate=0.003, patience=3, max_epochs=60)
        model = MixedLMModel(config, build_vocabulary(train_split), seed=seed)
        train(model, train_split, val_split, training)
        hypotheses = [
            decode(model, item_token_sequences(sample.title_tokens, sample.items), max_len=64).tokens
            for sample in test_split
        ]
        return bleu2(hypotheses, references)

    mixed_scores = [held_out_bleu(list, seed) for seed in (0, 1, 2)]
    baseline_scores = [
        held_out_bleu(lambda split: [build_seq2seqfull_input(sample) for sample in split], seed) for seed in (0, 1, 2)
    ]
    assert sum(mixed_scores) / 3 >= sum(baseline_scores) / 3
