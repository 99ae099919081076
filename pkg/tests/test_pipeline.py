"""
Tests for corpus splitting, baseline inputs, the experiment manifest and end-to-end runs
on the synthetic dataset.
"""
import json

import pytest

from mixplan.config import ExperimentConfig
from mixplan.content_model import serialize_item
from mixplan.error_handler import DataError, ExitCode, PipelineStageError
from mixplan.pipeline import (
    MANIFEST_NAME,
    STAGES,
    ExperimentPipeline,
    Manifest,
    StageStatus,
    build_seq2seqfull_input,
    split_corpus,
    system_inputs,
)
from mixplan.synthetic import write_synthetic_dataset

FAST_OVERRIDES = {
    "embedding_size": 16,
    "hidden_size": 16,
    "ffn_size": 32,
    "plan_hidden_size": 16,
    "max_epochs": 2,
    "augment_max_epochs": 1,
    "max_decode_len": 20,
}

def _config(dataset, **overrides):
    return ExperimentConfig.from_file(dataset.config, **overrides)

class TestSplitCorpus:
    def test_sizes_and_partition(self, synthetic_corpus):
        train, val, test = split_corpus(synthetic_corpus, 0.1, 0.2, seed=3)
        assert (len(train), len(val), len(test)) == (35, 5, 10)
        ids = [s.id for s in train + val + test]
        assert sorted(ids) == sorted(s.id for s in synthetic_corpus)

    def test_seeded(self, synthetic_corpus):
        assert split_corpus(synthetic_corpus, 0.1, 0.1, seed=1) == split_corpus(synthetic_corpus, 0.1, 0.1, seed=1)
        assert split_corpus(synthetic_corpus, 0.1, 0.1, seed=1) != split_corpus(synthetic_corpus, 0.1, 0.1, seed=2)

    def test_tiny_corpus_keeps_one_sample_per_split(self, synthetic_corpus):
        train, val, test = split_corpus(synthetic_corpus[:3], 0.1, 0.1, seed=0)
        assert (len(train), len(val), len(test)) == (1, 1, 1)

    def test_too_few_samples(self, synthetic_corpus):
        with pytest.raises(DataError):
            split_corpus(synthetic_corpus[:2], 0.1, 0.1, seed=0)

class TestSeq2seqFullInput:
    def test_single_composite_item(self, make_sample):
        sample = make_sample(sentences=["a b c .", "d e .", "f g h ."])
        full = build_seq2seqfull_input(sample)
        assert len(full.items) == 1
        assert full.items[0].parts == sample.items
        assert set(full.plan_labels) == {0}
        assert full.target == sample.target

    def test_token_count_shares_one_title(self, make_sample):
        sample = make_sample(sentences=["a b c .", "d e .", "f g h ."])
        assert len(sample.title_tokens) == 2
        separate = sum(len(serialize_item(sample.title_tokens, item).tokens) for item in sample.items)
        combined = len(serialize_item(sample.title_tokens, build_seq2seqfull_input(sample).items[0]).tokens)
        assert combined == separate - 2 * (len(sample.items) - 1)

    def test_system_inputs(self, make_sample):
        samples = [make_sample()]
        assert system_inputs(samples, "mixed") == samples
        assert len(system_inputs(samples, "seq2seqfull")[0].items) == 1

class TestPipelineStages:
    @pytest.fixture
    def dataset(self, tmp_path):
        return write_synthetic_dataset(tmp_path / "data", num_samples=20, seed=0, config_overrides=FAST_OVERRIDES)

    def test_preprocess_only(self, dataset):
        config = _config(dataset)
        manifest = ExperimentPipeline(config).run(stages=STAGES[:1])
        assert [record.name for record in manifest.stages] == ["preprocess"]
        record = manifest.stage("preprocess")
        assert record.status == StageStatus.COMPLETED
        assert record.details["samples"] == 20
        assert record.details["classifier_training_accuracy"] == 1.0
        assert set(record.outputs) >= {"corpus.jsonl", "train.jsonl", "val.jsonl", "test.jsonl"}
        saved = json.loads((config.output_dir / MANIFEST_NAME).read_text(encoding="utf-8"))
        assert saved["seed"] == 0
        assert saved["config"]["hidden_size"] == 16

    def test_resume_caches_unchanged_stage(self, dataset):
        config = _config(dataset)
        ExperimentPipeline(config).run(stages=STAGES[:1])
        manifest = ExperimentPipeline(config).run(resume=True, stages=STAGES[:1])
        assert manifest.stage("preprocess").status == StageStatus.CACHED

    def test_resume_reruns_changed_outputs(self, dataset):
        config = _config(dataset)
        ExperimentPipeline(config).run(stages=STAGES[:1])
        (config.output_dir / "train.jsonl").write_text("", encoding="utf-8")
        manifest = ExperimentPipeline(config).run(resume=True, stages=STAGES[:1])
        assert manifest.stage("preprocess").status == StageStatus.COMPLETED

    def test_config_change_invalidates_cache(self, dataset):
        ExperimentPipeline(_config(dataset)).run(stages=STAGES[:1])
        changed = _config(dataset, classifier_c=1.0)
        manifest = ExperimentPipeline(changed).run(resume=True, stages=STAGES[:1])
        assert manifest.stage("preprocess").status == StageStatus.COMPLETED

    def test_missing_input_names_stage(self, tmp_path):
        config = ExperimentConfig(seed=0, output_dir=tmp_path / "exp")
        with pytest.raises(PipelineStageError) as excinfo:
            ExperimentPipeline(config).run()
        assert excinfo.value.stage == "preprocess"
        assert excinfo.value.exit_code == ExitCode.DATA

    def test_manifest_round_trip(self, dataset):
        config = _config(dataset)
        manifest = ExperimentPipeline(config).run(stages=STAGES[:1])
        loaded = Manifest.load(config.output_dir / MANIFEST_NAME)
        assert loaded.to_dict() == json.loads(json.dumps(manifest.to_dict()))

    def test_unreadable_manifest_is_ignored(self, tmp_path):
        path = tmp_path / MANIFEST_NAME
        path.write_text("{broken", encoding="utf-8")
        assert Manifest.load(path) is None

@pytest.mark.slow
class TestEndToEnd:
    @pytest.fixture(scope="class")
    def runs(self, tmp_path_factory):
        root = tmp_path_factory.mktemp("e2e")
        overrides = {**FAST_OVERRIDES, "augment_concepts": True, "augment_claims": True}
        dataset = write_synthetic_dataset(root / "data", num_samples=20, seed=0, config_overrides=overrides)
        first = _config(dataset, output_dir=str(root / "first"))
        second = _config(dataset, output_dir=str(root / "second"))
        return {
            "first": (first, ExperimentPipeline(first).run()),
            "second": (second, ExperimentPipeline(second).run()),
        }

    def test_all_stages_complete(self, runs):
        config, manifest = runs["first"]
        assert [record.name for record in manifest.stages] == list(STAGES)
        assert all(record.status == StageStatus.COMPLETED for record in manifest.stages)
        for name in ("model.pt", "generations.jsonl", "report.json", "analysis.json", "training_log.json"):
            assert (config.output_dir / name).exists()

    def test_report_is_bounded(self, runs):
        config, _ = runs["first"]
        report = json.loads((config.output_dir / "report.json").read_text(encoding="utf-8"))
        for key in ("bleu2", "rouge2_recall", "meteor"):
            assert 0.0 <= report[key] <= 100.0

    def test_generations_are_byte_identical(self, runs):
        first, _ = runs["first"]
        second, _ = runs["second"]
        assert (first.output_dir / "generations.jsonl").read_bytes() == \
            (second.output_dir / "generations.jsonl").read_bytes()

    def test_resume_marks_every_stage_cached(self, runs):
        config, _ = runs["first"]
        manifest = ExperimentPipeline(config).run(resume=True)
        assert all(record.status == StageStatus.CACHED for record in manifest.stages)
