"""
Content-item augmentation: concept expansion and claim generation.

Both generators are single-item instances of the mixed language model trained on
(condition, target) token pairs. Concept expansion decodes greedily; claim generation
samples from the top-p nucleus.
"""
from enum import Enum
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Set, Tuple

import torch

from .config import ModelConfig, TrainingConfig
from .content_model import SEGMENTER, ContentItem, Sample, cap_concepts, serialize_item
from .error_codes import ErrorCode
from .error_handler import DataError, DistributionError, NotTrainedError
from .logging_config import augment_logger as logger
from .mixed_lm.checkpoint import load_checkpoint, load_checkpoint_metadata, save_checkpoint
from .mixed_lm.data import NO_LABEL, EncodedExample, collate, encode_item_tokens
from .mixed_lm.decoding import DecodeMode, decode
from .mixed_lm.model import MixedLMModel
from .mixed_lm.planning import sum_tolerance
from .mixed_lm.training import TrainResult, train_examples
from .mixed_lm.vocab import BOS_ID, EOS_ID, RESERVED_TOKENS, Vocabulary
from .seeding import derive_seed, torch_generator

DEFAULT_NUCLEUS_P = 0.9

Pair = Tuple[List[str], List[str]]

class AugmentMode(str, Enum):
    CONCEPTS = "concepts"
    CLAIMS = "claims"

def _check_nucleus_p(p: float) -> None:
    if not 0 < p <= 1:
        raise DataError(ErrorCode.INVALID_ARGUMENT, name="nucleus_p", details=f"{p} is not in (0, 1]")

def nucleus_filter(dist: torch.Tensor, p: float) -> torch.Tensor:
    """
    Keep the smallest prefix of tokens, by descending probability, whose mass reaches p,
    and renormalize. Ties are ordered by ascending token index.

    Raises:
        DistributionError: dist does not sum to 1 within tolerance
    """
    _check_nucleus_p(p)
    total = float(dist.sum(dtype=torch.float64))
    tolerance = sum_tolerance(dist)
    if abs(total - 1.0) > tolerance:
        raise DistributionError(ErrorCode.NOT_NORMALIZED, total=total, tolerance=tolerance)
    if p >= 1:
        return dist.clone()
    sorted_probs, order = torch.sort(dist, descending=True, stable=True)
    mass_before = torch.cat([sorted_probs.new_zeros(1), torch.cumsum(sorted_probs, dim=0)[:-1]])
    keep = (mass_before < p) & (sorted_probs > 0)
    filtered = torch.zeros_like(dist)
    filtered[order[keep]] = sorted_probs[keep]
    return filtered / filtered.sum()

class ConditionalGenerator:
    """A single-item mixed language model mapping a condition sequence to a target sequence."""

    def __init__(self, name: str, model: Optional[MixedLMModel] = None):
        self.name = name
        self.model = model

    @property
    def is_trained(self) -> bool:
        return self.model is not None

    def _require_model(self) -> MixedLMModel:
        if self.model is None:
            raise NotTrainedError(f"{self.name} generator")
        return self.model

    def _examples(self, pairs: Sequence[Pair]) -> List[EncodedExample]:
        model = self._require_model()
        config = model.config
        examples = []
        for index, (condition, target) in enumerate(pairs):
            target_ids = model.vocab.encode(target[:config.max_target_len]) + [EOS_ID]
            examples.append(EncodedExample(
                example_id=f"{self.name}-{index}",
                items=[model.vocab.encode(condition[:config.max_item_len])],
                target=target_ids,
                plan_labels=[NO_LABEL] * len(target_ids),
            ))
        return examples

    def fit(self, pairs: Sequence[Pair], model_config: ModelConfig, training: TrainingConfig) -> TrainResult:
        """Build a vocabulary from the pairs and train a fresh model on them."""
        if not pairs:
            raise DataError(ErrorCode.INVALID_ARGUMENT, name="pairs", details=f"no training pairs for {self.name}")
        vocab = Vocabulary.build([condition for condition, _ in pairs] + [target for _, target in pairs])
        self.model = MixedLMModel(model_config, vocab, seed=derive_seed(training.seed, f"{self.name}-init"))
        logger.info(f"Training {self.name} generator on {len(pairs)} pairs")
        return train_examples(self.model, self._examples(pairs), [], training)

    def generate(self, condition: Sequence[str], max_len: Optional[int] = None) -> List[str]:
        """Greedy decoding."""
        model = self._require_model()
        max_len = model.config.max_target_len if max_len is None else max_len
        return decode(model, [list(condition)], DecodeMode.WEIGHTED, max_len).tokens

    def sample(self, condition: Sequence[str], nucleus_p: float, seed: int, max_len: Optional[int] = None) -> List[str]:
        """Nucleus sampling with a caller-supplied seed."""
        _check_nucleus_p(nucleus_p)
        model = self._require_model()
        max_len = model.config.max_target_len if max_len is None else max_len
        ids = encode_item_tokens([list(condition)], model.vocab, model.config)
        batch = collate([EncodedExample(example_id=self.name, items=ids, target=[], plan_labels=[])])
        generator = torch_generator(seed)
        prefix = [BOS_ID]
        output: List[int] = []
        model.eval()
        with torch.no_grad():
            encoded = model.encode(batch.item_ids, batch.item_mask, batch.item_present)
            for _ in range(min(max_len, model.decoder_capacity)):
                states = model.decode_states(encoded, torch.tensor([prefix], dtype=torch.long))[0, :, -1]
                dist = model.item_log_probs(states)[0].exp()
                dist = dist / dist.sum()
                token = int(torch.multinomial(nucleus_filter(dist, nucleus_p), 1, generator=generator))
                if token == EOS_ID:
                    break
                prefix.append(token)
                output.append(token)
        return model.vocab.decode(output)

    def save(self, path: Path) -> None:
        save_checkpoint(self._require_model(), path, metadata={"generator": self.name})

    @classmethod
    def load(cls, path: Path) -> "ConditionalGenerator":
        name = load_checkpoint_metadata(path).get("generator", Path(path).stem)
        return cls(name, load_checkpoint(path))

def _content_tokens(tokens: Iterable[str]) -> List[str]:
    return [token for token in tokens if token not in RESERVED_TOKENS]

def concept_condition(title: Sequence[str], entities: Iterable[str], core: Iterable[str]) -> List[str]:
    item = ContentItem(entities=frozenset(entities), core_concepts=frozenset(core))
    return list(serialize_item(title, item).tokens)

def claim_condition(title: Sequence[str], entities: Iterable[str]) -> List[str]:
    return list(title) + [SEGMENTER] + sorted(entities)

def expand_concepts(
    title: Sequence[str], entities: Iterable[str], core: Iterable[str], g: ConditionalGenerator
) -> Set[str]:
    """Predicted expanded concepts: deduplicated, reserved tokens and core concepts removed."""
    core_set = {concept.lower() for concept in core}
    generated = g.generate(concept_condition(title, entities, core_set))
    return {token for token in _content_tokens(generated) if token not in core_set}

def generate_claim(
    title: Sequence[str],
    entities: Iterable[str],
    g: ConditionalGenerator,
    nucleus_p: float = DEFAULT_NUCLEUS_P,
    seed: int = 0,
) -> str:
    """Sample a claim sentence conditioned on the title and entities."""
    _check_nucleus_p(nucleus_p)
    tokens = g.sample(claim_condition(title, entities), nucleus_p, seed)
    return " ".join(_content_tokens(tokens))

def _plain_items(samples: Sequence[Sample]) -> Iterable[Tuple[Sample, ContentItem]]:
    for sample in samples:
        for item in sample.items:
            if not item.parts:
                yield sample, item

def concept_expansion_pairs(samples: Sequence[Sample]) -> List[Pair]:
    """(title <s> entities <s> core concepts, sorted expanded concepts) for items with expansions."""
    return [
        (concept_condition(sample.title_tokens, item.entities, item.core_concepts), sorted(item.expanded_concepts))
        for sample, item in _plain_items(samples)
        if item.expanded_concepts
    ]

def claim_generation_pairs(samples: Sequence[Sample], require_entity: bool = True) -> List[Pair]:
    """(title <s> entities, claim tokens) for items with a claim."""
    return [
        (claim_condition(sample.title_tokens, item.entities), item.claim.split())
        for sample, item in _plain_items(samples)
        if item.claim is not None and (item.entities or not require_entity)
    ]

def train_generator(
    mode: AugmentMode, samples: Sequence[Sample], model_config: ModelConfig, training: TrainingConfig
) -> ConditionalGenerator:
    mode = AugmentMode(mode)
    if mode is AugmentMode.CONCEPTS:
        pairs = concept_expansion_pairs(samples)
    else:
        pairs = claim_generation_pairs(samples)
    generator = ConditionalGenerator(mode.value)
    generator.fit(pairs, model_config, training)
    return generator

def augment_sample(
    sample: Sample,
    concept_generator: Optional[ConditionalGenerator] = None,
    claim_generator: Optional[ConditionalGenerator] = None,
    nucleus_p: float = DEFAULT_NUCLEUS_P,
    seed: int = 0,
) -> Sample:
    """Replace expanded concepts and existing claims of plain items with generated ones."""
    items = []
    for index, item in enumerate(sample.items):
        if item.parts:
            items.append(item)
            continue
        update = {}
        if concept_generator is not None:
            predicted = expand_concepts(sample.title_tokens, item.entities, item.core_concepts, concept_generator)
            core, expanded = cap_concepts(item.core_concepts, predicted)
            update["core_concepts"] = frozenset(core)
            update["expanded_concepts"] = frozenset(expanded)
        if claim_generator is not None and item.claim is not None:
            claim = generate_claim(
                sample.title_tokens, item.entities, claim_generator, nucleus_p, derive_seed(seed, f"{sample.id}:{index}")
            )
            update["claim"] = claim or None
        items.append(ContentItem.model_validate({**item.model_dump(), **update}))
    return sample.model_copy(update={"items": tuple(items)})

def augment_corpus(
    samples: Sequence[Sample],
    concept_generator: Optional[ConditionalGenerator] = None,
    claim_generator: Optional[ConditionalGenerator] = None,
    nucleus_p: float = DEFAULT_NUCLEUS_P,
    seed: int = 0,
) -> List[Sample]:
    augmented = [augment_sample(s, concept_generator, claim_generator, nucleus_p, seed) for s in samples]
    logger.info(
        f"Augmented {len(augmented)} samples",
        extra={"concepts": concept_generator is not None, "claims": claim_generator is not None},
    )
    return augmented
