"""
Experiment pipeline: preprocess -> augment -> train -> generate -> evaluate -> analyze.

Each stage writes its outputs under the experiment directory and records their sha256
digests in manifest.json together with the config hash, the seed and every config value.
With resume set, a stage whose recorded outputs are still present and unchanged is marked
"cached" and skipped, as long as the config hash matches and no earlier stage reran.
"""
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple
import hashlib
import json
import random
import time

from .augment import AugmentMode, ConditionalGenerator, augment_corpus, train_generator
from .config import ExperimentConfig
from .content_model import ContentItem, ItemMask, Sample, load_corpus, save_corpus
from .error_codes import ErrorCode
from .error_handler import DataError, MixplanError, PipelineStageError, SerializationError
from .evaluation import MetricReport, claim_realization_rate, coverage_report, evaluate_pairs
from .generation import GenerationRecord, generate_corpus, load_generations, save_generations
from .logging_config import pipeline_logger as logger
from .mixed_lm.checkpoint import load_checkpoint, save_checkpoint
from .mixed_lm.data import item_token_sequences
from .mixed_lm.decoding import DecodeMode
from .mixed_lm.model import MixedLMModel
from .mixed_lm.training import TrainResult, teacher_forced_accuracy, train
from .mixed_lm.vocab import Vocabulary
from .preprocess import (
    ClaimClassifier,
    PreprocessResources,
    build_corpus,
    load_raw_corpus,
    read_sentences,
    train_claim_classifier,
)
from .seeding import derive_seed_map, seed_everything

STAGES = ("preprocess", "augment", "train", "generate", "evaluate", "analyze")
MANIFEST_NAME = "manifest.json"

class StageStatus:
    COMPLETED = "completed"
    CACHED = "cached"

# Stage outputs, relative to the experiment directory
CORPUS_FILE = "corpus.jsonl"
TRAIN_FILE = "train.jsonl"
VAL_FILE = "val.jsonl"
TEST_FILE = "test.jsonl"
CLASSIFIER_FILE = "claim_classifier.joblib"
TEST_INPUT_FILE = "test_input.jsonl"
CONCEPT_GENERATOR_FILE = "concept_generator.pt"
CLAIM_GENERATOR_FILE = "claim_generator.pt"
MODEL_FILE = "model.pt"
TRAINING_LOG_FILE = "training_log.json"
GENERATIONS_FILE = "generations.jsonl"
REPORT_FILE = "report.json"
ANALYSIS_FILE = "analysis.json"

def build_seq2seqfull_input(sample: Sample) -> Sample:
    """Concatenate all items into one composite item; every target token is labeled 0."""
    return sample.model_copy(update={
        "items": (ContentItem(parts=tuple(sample.items)),),
        "plan_labels": tuple(0 for _ in sample.plan_labels),
    })

def system_inputs(samples: Sequence[Sample], system: str) -> List[Sample]:
    if system == "seq2seqfull":
        return [build_seq2seqfull_input(sample) for sample in samples]
    return list(samples)

def build_vocabulary(samples: Sequence[Sample], masks: Iterable[ItemMask] = (), min_freq: int = 1) -> Vocabulary:
    """Vocabulary over serialized (masked) items and targets."""
    masks = list(masks)
    streams: List[List[str]] = []
    for sample in samples:
        streams.extend(item_token_sequences(sample.title_tokens, sample.items, masks))
        streams.append(sample.target_tokens)
    return Vocabulary.build(streams, min_freq)

def split_corpus(
    samples: Sequence[Sample], val_fraction: float, test_fraction: float, seed: int
) -> Tuple[List[Sample], List[Sample], List[Sample]]:
    """Seeded shuffle into train/val/test; val and test get at least one sample each."""
    if len(samples) < 3:
        raise DataError(ErrorCode.INVALID_ARGUMENT, name="corpus", details=f"{len(samples)} samples cannot fill 3 splits")
    order = list(range(len(samples)))
    random.Random(seed).shuffle(order)
    num_test = max(1, round(len(samples) * test_fraction))
    num_val = max(1, round(len(samples) * val_fraction))
    if num_test + num_val >= len(samples):
        raise DataError(ErrorCode.INVALID_ARGUMENT, name="corpus", details=f"{len(samples)} samples leave no training data")
    test = [samples[i] for i in order[:num_test]]
    val = [samples[i] for i in order[num_test:num_test + num_val]]
    train_split = [samples[i] for i in order[num_test + num_val:]]
    return train_split, val, test

def train_model(
    train_samples: Sequence[Sample],
    val_samples: Sequence[Sample],
    config: ExperimentConfig,
    seed: int,
) -> Tuple[MixedLMModel, TrainResult]:
    """Build the vocabulary and a fresh model from the training split and train it."""
    train_inputs = system_inputs(train_samples, config.system)
    val_inputs = system_inputs(val_samples, config.system)
    seed_everything(seed, config.deterministic)
    vocab = build_vocabulary(train_inputs, config.masks, config.min_vocab_freq)
    model = MixedLMModel(config.to_model_config(), vocab, seed=seed)
    training = config.to_training_config().model_copy(update={"seed": seed})
    result = train(model, train_inputs, val_inputs, training, config.masks)
    return model, result

def file_digest(path: Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()

def write_json(data: Any, path: Path) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as e:
        raise SerializationError(ErrorCode.UNWRITABLE_PATH, path=str(path), details=str(e)) from e

@dataclass
class StageRecord:
    name: str
    status: str
    outputs: Dict[str, str] = field(default_factory=dict)
    duration_seconds: float = 0.0
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "StageRecord":
        return cls(**data)

@dataclass
class Manifest:
    config_hash: str
    seed: int
    seeds: Dict[str, int]
    config: Dict[str, Any]
    stages: List[StageRecord] = field(default_factory=list)

    def stage(self, name: str) -> Optional[StageRecord]:
        return next((record for record in self.stages if record.name == name), None)

    def set_stage(self, record: StageRecord) -> None:
        self.stages = [r for r in self.stages if r.name != record.name] + [record]
        self.stages.sort(key=lambda r: STAGES.index(r.name))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "config_hash": self.config_hash,
            "seed": self.seed,
            "seeds": self.seeds,
            "config": self.config,
            "stages": [record.to_dict() for record in self.stages],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Manifest":
        return cls(
            config_hash=data["config_hash"],
            seed=data["seed"],
            seeds=dict(data["seeds"]),
            config=dict(data["config"]),
            stages=[StageRecord.from_dict(record) for record in data.get("stages", [])],
        )

    @classmethod
    def load(cls, path: Path) -> Optional["Manifest"]:
        path = Path(path)
        if not path.exists():
            return None
        try:
            return cls.from_dict(json.loads(path.read_text(encoding="utf-8")))
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            logger.warning(f"Ignoring unreadable manifest {path}: {e}")
            return None

class ExperimentPipeline:
    """Runs the experiment stages in order under one output directory."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.output_dir = Path(config.output_dir)
        self.seeds = derive_seed_map(config.seed)
        self._stages: Dict[str, Callable[[], Dict[str, Any]]] = {
            "preprocess": self.preprocess,
            "augment": self.augment,
            "train": self.train,
            "generate": self.generate,
            "evaluate": self.evaluate,
            "analyze": self.analyze,
        }
        self._outputs: Dict[str, List[str]] = {name: [] for name in STAGES}

    def path(self, name: str) -> Path:
        return self.output_dir / name

    def _produced(self, stage: str, *names: str) -> None:
        self._outputs[stage].extend(names)

    # Stages

    def preprocess(self) -> Dict[str, Any]:
        config = self.config
        for name in ("raw_corpus", "entities", "concepts", "concreteness"):
            if getattr(config, name) is None:
                raise DataError(ErrorCode.INVALID_ARGUMENT, name=name, details="required by the preprocess stage")
        classifier: Optional[ClaimClassifier] = None
        if config.claims_train is not None and config.facts_train is not None:
            classifier = train_claim_classifier(
                read_sentences(config.claims_train),
                read_sentences(config.facts_train),
                seed=self.seeds["preprocess"],
                c=config.classifier_c,
            )
            classifier.save(self.path(CLASSIFIER_FILE))
            self._produced("preprocess", CLASSIFIER_FILE)
        resources = PreprocessResources.from_paths(
            config.entities, config.concepts, config.concreteness, config.abbreviations, classifier
        )
        samples = build_corpus(load_raw_corpus(config.raw_corpus), resources)
        train_split, val, test = split_corpus(samples, config.val_fraction, config.test_fraction, self.seeds["split"])
        for name, split in ((CORPUS_FILE, samples), (TRAIN_FILE, train_split), (VAL_FILE, val), (TEST_FILE, test)):
            save_corpus(split, self.path(name))
            self._produced("preprocess", name)
        details: Dict[str, Any] = {"samples": len(samples), "train": len(train_split), "val": len(val), "test": len(test)}
        if classifier is not None:
            details["classifier_training_accuracy"] = classifier.training_accuracy
        return details

    def augment(self) -> Dict[str, Any]:
        config = self.config
        test = load_corpus(self.path(TEST_FILE))
        if not (config.augment_concepts or config.augment_claims):
            save_corpus(test, self.path(TEST_INPUT_FILE))
            self._produced("augment", TEST_INPUT_FILE)
            return {"augmented": False}
        train_split = load_corpus(self.path(TRAIN_FILE))
        model_config = config.to_model_config()
        training = config.to_training_config(max_epochs=config.augment_max_epochs).model_copy(
            update={"seed": self.seeds["augment"]}
        )
        concept_generator: Optional[ConditionalGenerator] = None
        claim_generator: Optional[ConditionalGenerator] = None
        if config.augment_concepts:
            concept_generator = train_generator(AugmentMode.CONCEPTS, train_split, model_config, training)
            concept_generator.save(self.path(CONCEPT_GENERATOR_FILE))
            self._produced("augment", CONCEPT_GENERATOR_FILE)
        if config.augment_claims:
            claim_generator = train_generator(AugmentMode.CLAIMS, train_split, model_config, training)
            claim_generator.save(self.path(CLAIM_GENERATOR_FILE))
            self._produced("augment", CLAIM_GENERATOR_FILE)
        augmented = augment_corpus(test, concept_generator, claim_generator, config.nucleus_p, self.seeds["augment"])
        save_corpus(augmented, self.path(TEST_INPUT_FILE))
        self._produced("augment", TEST_INPUT_FILE)
        return {"augmented": True, "concepts": config.augment_concepts, "claims": config.augment_claims}

    def train(self) -> Dict[str, Any]:
        train_split = load_corpus(self.path(TRAIN_FILE))
        val = load_corpus(self.path(VAL_FILE))
        model, result = train_model(train_split, val, self.config, self.seeds["train"])
        accuracy = teacher_forced_accuracy(model, system_inputs(train_split, self.config.system), self.config.masks)
        save_checkpoint(model, self.path(MODEL_FILE), metadata={"system": self.config.system, "best_epoch": result.best_epoch})
        write_json({**result.to_dict(), "train_accuracy": accuracy}, self.path(TRAINING_LOG_FILE))
        self._produced("train", MODEL_FILE, TRAINING_LOG_FILE)
        return {"best_epoch": result.best_epoch, "best_val_loss": result.best_val_loss, "train_accuracy": accuracy}

    def generate(self) -> Dict[str, Any]:
        model = load_checkpoint(self.path(MODEL_FILE))
        samples = system_inputs(load_corpus(self.path(TEST_INPUT_FILE)), self.config.system)
        records = generate_corpus(
            model,
            samples,
            DecodeMode(self.config.decode_mode),
            self.config.max_decode_len,
            self.seeds["generate"],
            self.config.masks,
        )
        save_generations(records, self.path(GENERATIONS_FILE))
        self._produced("generate", GENERATIONS_FILE)
        return {"outputs": len(records)}

    def evaluate(self) -> Dict[str, Any]:
        report = evaluate_generations(load_generations(self.path(GENERATIONS_FILE)), load_corpus(self.path(TEST_FILE)))
        write_json(report.to_dict(), self.path(REPORT_FILE))
        self._produced("evaluate", REPORT_FILE)
        return report.to_dict()

    def analyze(self) -> Dict[str, Any]:
        classifier_path = self.path(CLASSIFIER_FILE)
        classifier = ClaimClassifier.load(classifier_path) if classifier_path.exists() else None
        analysis = analyze_generations(load_generations(self.path(GENERATIONS_FILE)), classifier)
        write_json(analysis, self.path(ANALYSIS_FILE))
        self._produced("analyze", ANALYSIS_FILE)
        return analysis

    # Orchestration

    def _cached(self, previous: Optional[Manifest], name: str) -> Optional[StageRecord]:
        if previous is None:
            return None
        record = previous.stage(name)
        if record is None or record.status not in (StageStatus.COMPLETED, StageStatus.CACHED):
            return None
        for output, digest in record.outputs.items():
            path = self.path(output)
            if not path.exists() or file_digest(path) != digest:
                return None
        return StageRecord(name=name, status=StageStatus.CACHED, outputs=dict(record.outputs), details=record.details)

    def run(self, resume: bool = False, stages: Sequence[str] = STAGES) -> Manifest:
        """
        Run the stages in order and return the manifest.

        Raises:
            PipelineStageError: A stage failed; carries the stage name and the cause
        """
        self.output_dir.mkdir(parents=True, exist_ok=True)
        manifest_path = self.path(MANIFEST_NAME)
        config_hash = self.config.config_hash()
        previous = Manifest.load(manifest_path) if resume else None
        if previous is not None and previous.config_hash != config_hash:
            logger.warning("Config changed since the last run; rerunning every stage")
            previous = None
        manifest = Manifest(
            config_hash=config_hash,
            seed=self.config.seed,
            seeds=self.seeds,
            config=self.config.normalized_dict(),
            stages=list(previous.stages) if previous else [],
        )
        write_json(self.config.normalized_dict(), self.path("config.json"))

        upstream_rerun = False
        for name in STAGES:
            if name not in stages:
                continue
            cached = None if upstream_rerun else self._cached(previous, name)
            if cached is not None:
                manifest.set_stage(cached)
                logger.info(f"Stage {name}: cached", extra={"stage": name, "status": StageStatus.CACHED})
                continue
            upstream_rerun = True
            self._outputs[name] = []
            started = time.perf_counter()
            logger.info(f"Stage {name}: started", extra={"stage": name})
            try:
                details = self._stages[name]()
            except MixplanError as e:
                raise PipelineStageError(name, e) from e
            except Exception as e:
                logger.exception(f"Stage {name} failed")
                raise PipelineStageError(name, e) from e
            duration = time.perf_counter() - started
            record = StageRecord(
                name=name,
                status=StageStatus.COMPLETED,
                outputs={output: file_digest(self.path(output)) for output in self._outputs[name]},
                duration_seconds=round(duration, 3),
                details=details,
            )
            manifest.set_stage(record)
            write_json(manifest.to_dict(), manifest_path)
            logger.info(
                f"Stage {name}: completed in {duration:.1f}s",
                extra={"stage": name, "status": StageStatus.COMPLETED, "duration_seconds": duration},
            )
        write_json(manifest.to_dict(), manifest_path)
        return manifest

def run_pipeline(config: ExperimentConfig, resume: bool = False) -> Path:
    """Run every stage; returns the experiment directory."""
    ExperimentPipeline(config).run(resume=resume)
    return Path(config.output_dir)

def evaluate_generations(records: Sequence[GenerationRecord], references: Sequence[Sample]) -> MetricReport:
    """Metrics of generations against the lowercased targets of the samples with the same id."""
    by_id = {sample.id: sample for sample in references}
    missing = [record.id for record in records if record.id not in by_id]
    if missing:
        raise DataError(ErrorCode.INVALID_ARGUMENT, name="references", details=f"no reference for ids {missing[:5]}")
    hypotheses = [record.tokens for record in records]
    targets = [[token.lower() for token in by_id[record.id].target_tokens] for record in records]
    return evaluate_pairs(hypotheses, targets)

def analyze_generations(
    records: Sequence[GenerationRecord], classifier: Optional[ClaimClassifier] = None
) -> Dict[str, Any]:
    """Item coverage and, when a claim classifier is available, the claim realization rate."""
    alignments = [record.alignment() for record in records]
    analysis: Dict[str, Any] = {
        "num_outputs": len(records),
        "coverage": coverage_report(alignments),
        "claim_realization": None,
    }
    if classifier is not None:
        realization = claim_realization_rate([(r.tokens, a) for r, a in zip(records, alignments)], classifier)
        analysis["claim_realization"] = realization.to_dict()
    return analysis
