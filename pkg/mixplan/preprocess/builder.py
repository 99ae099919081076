"""
Build Samples with content items and gold plan labels from (title, reference) pairs.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import FrozenSet, Iterable, List, Optional, Sequence
import json

from pydantic import BaseModel, ConfigDict, ValidationError

from ..content_model import MAX_ELEMENTS, ContentItem, Sample, cap_concepts, cap_items, corpus_statistics
from ..error_codes import ErrorCode
from ..error_handler import CorpusFormatError, CorpusValidationError, DataError, NoContentItemsError
from ..logging_config import preprocess_logger as logger
from .claims import ClaimClassifier, ClaimLabel
from .concepts import split_concepts, tag_concepts
from .linking import link_entities
from .resources import ConceptLexicon, ConcretenessLexicon, EntityDictionary, load_abbreviations
from .text import RuleLemmatizer, RuleTagger, Tagger, segment_sentences

MIN_SENTENCE_TOKENS = 5

@dataclass
class PreprocessResources:
    """Loaded lexical resources; a missing claim classifier means no item gets a claim."""
    entities: EntityDictionary
    concepts: ConceptLexicon
    concreteness: ConcretenessLexicon
    classifier: Optional[ClaimClassifier] = None
    abbreviations: FrozenSet[str] = field(default_factory=load_abbreviations)
    tagger: Tagger = field(default_factory=RuleTagger)
    lemmatizer: Optional[RuleLemmatizer] = None

    def __post_init__(self):
        if self.lemmatizer is None:
            self.lemmatizer = RuleLemmatizer(self.concepts.lemmas)

    @classmethod
    def from_paths(
        cls,
        entities: Path,
        concepts: Path,
        concreteness: Path,
        abbreviations: Optional[Path] = None,
        classifier: Optional[ClaimClassifier] = None,
    ) -> "PreprocessResources":
        return cls(
            entities=EntityDictionary.from_file(entities),
            concepts=ConceptLexicon.from_file(concepts),
            concreteness=ConcretenessLexicon.from_file(concreteness),
            classifier=classifier,
            abbreviations=load_abbreviations(abbreviations),
        )

def build_item(tokens: Sequence[str], resources: PreprocessResources) -> ContentItem:
    """Content item derived from one retained sentence."""
    entities = sorted(link_entities(tokens, resources.entities))[:MAX_ELEMENTS]
    tags = tag_concepts(tokens, resources.concepts, resources.tagger, resources.lemmatizer)
    core, expanded = split_concepts(set(tags), tags, resources.concreteness)
    core_kept, expanded_kept = cap_concepts(core, expanded)
    claim = None
    sentence = " ".join(tokens)
    if resources.classifier is not None and resources.classifier.classify(sentence) is ClaimLabel.CLAIM:
        claim = sentence
    return ContentItem(
        entities=frozenset(entities),
        core_concepts=frozenset(core_kept),
        expanded_concepts=frozenset(expanded_kept),
        claim=claim,
    )

def build_sample(title: str, reference: str, resources: PreprocessResources, sample_id: str = "0") -> Sample:
    """
    Build a Sample from a titled reference text.

    Every sentence with at least MIN_SENTENCE_TOKENS tokens becomes one content item and its
    target tokens are labeled with that item's index; tokens of shorter sentences are
    labeled None.

    Raises:
        NoContentItemsError: No sentence was retained
    """
    items: List[ContentItem] = []
    target: List[str] = []
    labels: List[Optional[int]] = []
    for sentence in segment_sentences(reference, resources.abbreviations):
        tokens = sentence.split()
        target.extend(tokens)
        if len(tokens) < MIN_SENTENCE_TOKENS:
            labels.extend([None] * len(tokens))
            continue
        labels.extend([len(items)] * len(tokens))
        items.append(build_item(tokens, resources))
    if not items:
        raise NoContentItemsError(sample_id, MIN_SENTENCE_TOKENS)
    items, labels = cap_items(items, labels)
    return Sample(
        id=sample_id,
        title=" ".join(title.split()),
        items=tuple(items),
        target=" ".join(target),
        plan_labels=tuple(labels),
    )

class RawRecord(BaseModel):
    """One line of a raw corpus: a titled reference text."""
    model_config = ConfigDict(extra="ignore")

    id: str
    title: str
    reference: str

def load_raw_corpus(path: Path) -> List[RawRecord]:
    path = Path(path)
    if not path.exists():
        raise DataError(ErrorCode.MISSING_RESOURCE, path=str(path))
    records: List[RawRecord] = []
    with path.open("r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                records.append(RawRecord.model_validate(json.loads(line)))
            except json.JSONDecodeError as e:
                raise CorpusFormatError(line_number, str(e)) from e
            except ValidationError as e:
                first = e.errors()[0]
                raise CorpusValidationError(
                    field=".".join(str(p) for p in first["loc"]) or "record",
                    details=first["msg"],
                    line_number=line_number,
                    missing=first["type"] == "missing",
                ) from e
    return records

def build_corpus(records: Iterable[RawRecord], resources: PreprocessResources) -> List[Sample]:
    """Build a Sample per raw record; records without any content item are skipped with a warning."""
    samples: List[Sample] = []
    skipped = 0
    for record in records:
        try:
            samples.append(build_sample(record.title, record.reference, resources, sample_id=record.id))
        except NoContentItemsError as e:
            skipped += 1
            logger.warning(str(e), extra={"sample_id": record.id})
    stats = corpus_statistics(samples)
    logger.info(
        f"Built {len(samples)} samples ({skipped} skipped): "
        f"{stats.avg_items:.2f} items per sample, {stats.claim_item_share:.1f}% with claims",
        extra=stats.to_dict(),
    )
    return samples
