"""
Tests for greedy decoding in the three plan modes and for generation records.
"""
import pytest
import torch

from mixplan.error_handler import DataError
from mixplan.generation import decode_sample, generate_corpus, load_generations, save_generations
from mixplan.mixed_lm import DecodeMode, decode, item_token_sequences

@pytest.fixture
def sample(make_sample):
    return make_sample(sentences=["the council should fund the plan .", "riders oppose it ."])

@pytest.fixture
def model(model_factory, sample):
    return model_factory([sample], seed=2)

def _sequences(sample):
    return item_token_sequences(sample.title_tokens, sample.items)

class TestDecode:
    def test_zero_length(self, model, sample):
        result = decode(model, _sequences(sample), max_len=0)
        assert result.tokens == []
        assert result.plans == []

    def test_negative_length(self, model, sample):
        with pytest.raises(DataError):
            decode(model, _sequences(sample), max_len=-1)

    def test_no_items(self, model):
        with pytest.raises(DataError):
            decode(model, [], max_len=5)

    def test_respects_max_len(self, model, sample):
        result = decode(model, _sequences(sample), max_len=3)
        assert len(result.tokens) <= 3
        assert len(result.plans) == len(result.tokens)

    def test_single_item_modes_agree(self, model_factory, make_sample):
        single = make_sample(sentences=["a b c d ."])
        model = model_factory([single], seed=5)
        outputs = {mode: decode(model, _sequences(single), mode, max_len=10, seed=9) for mode in DecodeMode}
        assert outputs[DecodeMode.WEIGHTED].tokens == outputs[DecodeMode.GREEDY_SELECT].tokens
        assert outputs[DecodeMode.WEIGHTED].tokens == outputs[DecodeMode.RANDOM_SELECT].tokens
        assert all(row == [1.0] for row in outputs[DecodeMode.WEIGHTED].plan_rows())

    def test_saturated_plan_makes_weighted_equal_greedy_select(self, model, sample):
        with torch.no_grad():
            model.plan_scorer.W_o.weight.mul_(1e6)
        weighted = decode(model, _sequences(sample), DecodeMode.WEIGHTED, max_len=12)
        assert all(max(row) == 1.0 for row in weighted.plan_rows())
        greedy = decode(model, _sequences(sample), DecodeMode.GREEDY_SELECT, max_len=12)
        assert weighted.tokens == greedy.tokens

    def test_random_select_is_seeded(self, model, sample):
        first = decode(model, _sequences(sample), DecodeMode.RANDOM_SELECT, max_len=8, seed=3)
        second = decode(model, _sequences(sample), DecodeMode.RANDOM_SELECT, max_len=8, seed=3)
        assert first.tokens == second.tokens
        assert first.plan_rows() == second.plan_rows()
        assert all(sorted(row) == [0.0, 1.0] for row in first.plan_rows())

    def test_item_order_does_not_change_output(self, model_factory, make_sample):
        three = make_sample(sentences=["a b .", "c d e f .", "g h i ."])
        sequences = _sequences(three)
        order = [2, 0, 1]
        for seed in range(5):
            model = model_factory([three], seed=seed)
            original = decode(model, sequences, max_len=10)
            permuted = decode(model, [sequences[i] for i in order], max_len=10)
            assert permuted.tokens == original.tokens
            for a, b in zip(original.plans, permuted.plans):
                assert torch.allclose(b.distribution, a.distribution[order], atol=1e-12, rtol=0)

    def test_mode_accepts_strings(self, model, sample):
        assert decode(model, _sequences(sample), "greedy_select", max_len=4).tokens == \
            decode(model, _sequences(sample), DecodeMode.GREEDY_SELECT, max_len=4).tokens

class TestGenerationRecords:
    def test_record_carries_plans_and_claims(self, model_factory, make_sample):
        sample = make_sample(claims=[True, False])
        record = decode_sample(model_factory([sample]), sample, max_len=6)
        assert record.num_items == 2
        assert record.item_has_claim == [True, False]
        assert len(record.plans) == len(record.tokens)
        assert record.alignment().item_has_claim == [True, False]

    def test_masked_claims_are_not_counted(self, model_factory, make_sample):
        sample = make_sample(claims=[True, False])
        record = decode_sample(model_factory([sample]), sample, max_len=2, masks=["claims"])
        assert record.item_has_claim == [False, False]

    def test_save_and_load(self, tmp_path, model, sample, make_sample):
        samples = [sample, make_sample("s1")]
        records = generate_corpus(model, samples, DecodeMode.RANDOM_SELECT, max_len=5, seed=1)
        path = tmp_path / "gen.jsonl"
        save_generations(records, path)
        assert load_generations(path) == records
        assert [record.id for record in records] == ["s0", "s1"]

    def test_generation_is_reproducible(self, tmp_path, model, sample):
        first, second = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        save_generations(generate_corpus(model, [sample], DecodeMode.RANDOM_SELECT, max_len=6, seed=4), first)
        save_generations(generate_corpus(model, [sample], DecodeMode.RANDOM_SELECT, max_len=6, seed=4), second)
        assert first.read_bytes() == second.read_bytes()

    def test_missing_generations_file(self, tmp_path):
        with pytest.raises(DataError):
            load_generations(tmp_path / "absent.jsonl")
