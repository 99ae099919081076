"""
Content items, samples and corpus I/O.

A content item is one planning unit: a set of entities, core and expanded concepts and an
optional claim. Serialized, it reads

    title <s> entities <s> concepts [<s> claim]

with entities and concepts sorted so that equal items always yield equal token sequences.
"""
from dataclasses import dataclass, asdict
from enum import Enum
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple
import json

from pydantic import BaseModel, ConfigDict, Field, ValidationError, ValidationInfo, field_validator

from .error_codes import ErrorCode
from .error_handler import CorpusFormatError, CorpusValidationError, DataError, SerializationError
from .logging_config import preprocess_logger as logger

SEGMENTER = "<s>"
MAX_ITEMS = 10
MAX_ELEMENTS = 20

class ItemMask(str, Enum):
    """Item elements that can be removed before serialization."""
    CLAIMS = "claims"
    ENTITIES = "entities"
    CONCEPTS = "concepts"
    EXPANDED_CONCEPTS = "expanded_concepts"

class ContentItem(BaseModel):
    """One planning unit. A composite item holds its content in `parts` instead."""
    model_config = ConfigDict(frozen=True)

    entities: FrozenSet[str] = frozenset()
    core_concepts: FrozenSet[str] = frozenset()
    expanded_concepts: FrozenSet[str] = frozenset()
    claim: Optional[str] = None
    parts: Tuple["ContentItem", ...] = ()

    @field_validator("entities")
    @classmethod
    def _check_entities(cls, value: FrozenSet[str]) -> FrozenSet[str]:
        for entity in value:
            if not entity or any(ch.isspace() for ch in entity):
                raise ValueError(f"entity identifier {entity!r} must be nonempty without whitespace")
        if len(value) > MAX_ELEMENTS:
            raise ValueError(f"{len(value)} entities exceed the cap of {MAX_ELEMENTS}")
        return value

    @field_validator("core_concepts", "expanded_concepts")
    @classmethod
    def _check_lemmas(cls, value: FrozenSet[str]) -> FrozenSet[str]:
        for lemma in value:
            if not lemma or lemma != lemma.lower() or any(ch.isspace() for ch in lemma):
                raise ValueError(f"concept {lemma!r} must be a nonempty lowercase lemma")
        return value

    @field_validator("expanded_concepts")
    @classmethod
    def _check_disjoint(cls, value: FrozenSet[str], info: ValidationInfo) -> FrozenSet[str]:
        core = info.data.get("core_concepts", frozenset())
        overlap = core & value
        if overlap:
            raise ValueError(f"concepts {sorted(overlap)} are both core and expanded")
        if len(core) + len(value) > MAX_ELEMENTS:
            raise ValueError(f"{len(core) + len(value)} concepts exceed the cap of {MAX_ELEMENTS}")
        return value

    @field_validator("claim")
    @classmethod
    def _check_claim(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and not value.strip():
            raise ValueError("claim must be nonempty when present")
        return value

    @field_validator("parts")
    @classmethod
    def _check_parts(cls, value: Tuple["ContentItem", ...], info: ValidationInfo) -> Tuple["ContentItem", ...]:
        if value and (info.data.get("entities") or info.data.get("core_concepts")
                      or info.data.get("expanded_concepts") or info.data.get("claim")):
            raise ValueError("a composite item keeps its elements in its parts only")
        return value

    @property
    def concepts(self) -> FrozenSet[str]:
        return self.core_concepts | self.expanded_concepts

    @property
    def has_claim(self) -> bool:
        return self.claim is not None or any(part.has_claim for part in self.parts)

ContentItem.model_rebuild()

class Sample(BaseModel):
    """A titled example: content items, target text and gold token-to-item labels."""
    model_config = ConfigDict(frozen=True)

    id: str
    title: str
    items: Tuple[ContentItem, ...] = Field(..., min_length=1, max_length=MAX_ITEMS)
    target: str
    plan_labels: Tuple[Optional[int], ...]

    @field_validator("title")
    @classmethod
    def _check_title(cls, value: str) -> str:
        if not value.split():
            raise ValueError("title must contain at least one token")
        return value

    @field_validator("plan_labels")
    @classmethod
    def _check_labels(cls, value: Tuple[Optional[int], ...], info: ValidationInfo) -> Tuple[Optional[int], ...]:
        target = info.data.get("target")
        items = info.data.get("items")
        if target is not None and len(value) != len(target.split()):
            raise ValueError(f"{len(value)} labels for {len(target.split())} target tokens")
        if items is not None:
            for label in value:
                if label is not None and not 0 <= label < len(items):
                    raise ValueError(f"label {label} is not a valid index into {len(items)} items")
        return value

    @property
    def title_tokens(self) -> List[str]:
        return self.title.split()

    @property
    def target_tokens(self) -> List[str]:
        return self.target.split()

@dataclass(frozen=True)
class SerializedItem:
    tokens: Tuple[str, ...]

    @property
    def segmenter_count(self) -> int:
        return sum(1 for token in self.tokens if token == SEGMENTER)

    def __len__(self) -> int:
        return len(self.tokens)

def _check_element(element: str) -> None:
    if SEGMENTER in element:
        raise SerializationError(ErrorCode.SEGMENTER_IN_ELEMENT, element=element, segmenter=SEGMENTER)

def _item_segments(item: ContentItem) -> List[str]:
    tokens: List[str] = []
    if item.parts:
        for part in item.parts:
            tokens.extend(_item_segments(part))
        return tokens
    entities = sorted(item.entities)
    concepts = sorted(item.concepts)
    for element in entities + concepts:
        _check_element(element)
    tokens.append(SEGMENTER)
    tokens.extend(entities)
    tokens.append(SEGMENTER)
    tokens.extend(concepts)
    if item.claim is not None:
        _check_element(item.claim)
        tokens.append(SEGMENTER)
        tokens.extend(item.claim.split())
    return tokens

def serialize_item(title: Sequence[str], item: ContentItem) -> SerializedItem:
    """
    Serialize an item behind its title.

    Args:
        title: Title tokens; must be nonempty
        item: The content item; a composite item emits each part's segments in order

    Returns:
        SerializedItem whose tokens are deterministic for equal inputs
    """
    title = list(title)
    if not title:
        raise SerializationError(ErrorCode.EMPTY_TITLE)
    for token in title:
        _check_element(token)
    return SerializedItem(tokens=tuple(title + _item_segments(item)))

def mask_item(item: ContentItem, masks: Iterable[ItemMask]) -> ContentItem:
    """Return a copy of the item with the masked elements emptied."""
    masks = {ItemMask(mask) for mask in masks}
    if not masks:
        return item
    if item.parts:
        return item.model_copy(update={"parts": tuple(mask_item(part, masks) for part in item.parts)})
    update: Dict[str, Any] = {}
    if ItemMask.CLAIMS in masks:
        update["claim"] = None
    if ItemMask.ENTITIES in masks:
        update["entities"] = frozenset()
    if ItemMask.CONCEPTS in masks:
        update["core_concepts"] = frozenset()
        update["expanded_concepts"] = frozenset()
    if ItemMask.EXPANDED_CONCEPTS in masks:
        update["expanded_concepts"] = frozenset()
    return item.model_copy(update=update)

def cap_concepts(core: Iterable[str], expanded: Iterable[str]) -> Tuple[List[str], List[str]]:
    """Keep at most MAX_ELEMENTS concepts: sorted core first, then sorted expanded."""
    kept_core = sorted(set(core))[:MAX_ELEMENTS]
    kept_expanded = sorted(set(expanded))[:MAX_ELEMENTS - len(kept_core)]
    return kept_core, kept_expanded

def cap_items(items: Sequence[Any], labels: Sequence[Optional[int]]) -> Tuple[List[Any], List[Optional[int]]]:
    """Keep the first MAX_ITEMS items; labels of dropped items become None."""
    kept = list(items[:MAX_ITEMS])
    capped = [
        None if label is not None and MAX_ITEMS <= label < len(items) else label
        for label in labels
    ]
    return kept, capped

# Raw corpus records, validated before caps are applied

class ItemRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    entities: List[str]
    core_concepts: List[str]
    expanded_concepts: List[str]
    claim: Optional[str] = None
    parts: List["ItemRecord"] = Field(default_factory=list)

ItemRecord.model_rebuild()

class SampleRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    title: str
    items: List[ItemRecord]
    target: str
    plan_labels: List[Optional[int]]

def _item_from_record(record: ItemRecord) -> ContentItem:
    core, expanded = cap_concepts(record.core_concepts, record.expanded_concepts)
    return ContentItem(
        entities=frozenset(sorted(set(record.entities))[:MAX_ELEMENTS]),
        core_concepts=frozenset(core),
        expanded_concepts=frozenset(expanded),
        claim=record.claim,
        parts=tuple(_item_from_record(part) for part in record.parts),
    )

def item_to_record(item: ContentItem) -> Dict[str, Any]:
    record: Dict[str, Any] = {
        "entities": sorted(item.entities),
        "core_concepts": sorted(item.core_concepts),
        "expanded_concepts": sorted(item.expanded_concepts),
    }
    if item.claim is not None:
        record["claim"] = item.claim
    if item.parts:
        record["parts"] = [item_to_record(part) for part in item.parts]
    return record

def to_record(sample: Sample) -> Dict[str, Any]:
    """Convert a Sample to its corpus line record."""
    return {
        "id": sample.id,
        "title": sample.title,
        "items": [item_to_record(item) for item in sample.items],
        "target": sample.target,
        "plan_labels": list(sample.plan_labels),
    }

def _validation_error(error: ValidationError, line_number: Optional[int]) -> CorpusValidationError:
    first = error.errors()[0]
    field = ".".join(str(part) for part in first["loc"]) or "record"
    return CorpusValidationError(
        field=field,
        details=first["msg"],
        line_number=line_number,
        missing=first["type"] == "missing",
    )

def from_record(data: Dict[str, Any], line_number: Optional[int] = None) -> Sample:
    """Validate a corpus line record, apply the item and element caps and build a Sample."""
    try:
        record = SampleRecord.model_validate(data)
    except ValidationError as e:
        raise _validation_error(e, line_number) from e
    try:
        items, labels = cap_items([_item_from_record(item) for item in record.items], record.plan_labels)
        return Sample(
            id=record.id,
            title=record.title,
            items=tuple(items),
            target=record.target,
            plan_labels=tuple(labels),
        )
    except ValidationError as e:
        raise _validation_error(e, line_number) from e

def load_corpus(path: Path) -> List[Sample]:
    """
    Load a JSONL corpus, one Sample per nonblank line.

    Raises:
        CorpusFormatError: A line is not a JSON object
        CorpusValidationError: A record violates a Sample or ContentItem invariant
    """
    path = Path(path)
    if not path.exists():
        raise DataError(ErrorCode.MISSING_RESOURCE, path=str(path))
    samples: List[Sample] = []
    with path.open("r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusFormatError(line_number, str(e)) from e
            if not isinstance(data, dict):
                raise CorpusFormatError(line_number, "record is not a JSON object")
            samples.append(from_record(data, line_number))
    logger.debug(f"Loaded {len(samples)} samples from {path}")
    return samples

def save_corpus(samples: Sequence[Sample], path: Path) -> None:
    """Write samples as JSONL; load_corpus(path) returns them unchanged."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as handle:
            for sample in samples:
                handle.write(json.dumps(to_record(sample), ensure_ascii=False) + "\n")
    except OSError as e:
        raise SerializationError(ErrorCode.UNWRITABLE_PATH, path=str(path), details=str(e)) from e
    logger.debug(f"Saved {len(samples)} samples to {path}")

@dataclass
class CorpusStatistics:
    """Per-corpus averages of the kind reported in dataset statistics tables."""
    num_samples: int = 0
    avg_items: float = 0.0
    claim_item_share: float = 0.0
    avg_entities: float = 0.0
    avg_core_concepts: float = 0.0
    avg_expanded_concepts: float = 0.0
    avg_target_length: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

def corpus_statistics(samples: Sequence[Sample]) -> CorpusStatistics:
    if not samples:
        return CorpusStatistics()
    items = [item for sample in samples for item in sample.items]
    num_items = len(items)
    return CorpusStatistics(
        num_samples=len(samples),
        avg_items=num_items / len(samples),
        claim_item_share=100.0 * sum(item.has_claim for item in items) / num_items,
        avg_entities=sum(len(item.entities) for item in items) / num_items,
        avg_core_concepts=sum(len(item.core_concepts) for item in items) / num_items,
        avg_expanded_concepts=sum(len(item.expanded_concepts) for item in items) / num_items,
        avg_target_length=sum(len(sample.target_tokens) for sample in samples) / len(samples),
    )
