"""
Template-generated corpora for end-to-end runs and overfitting checks.

Every content item holds one entity, one verb, one abstract and one concrete noun. Its
sentence is fully determined by the item: the verb picks the template, and an item with
a claim is realized by the claim template with the same fillers. Items appear in verb
order and a sample with three items closes with a short sentence that derives no item.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple
import json
import random

from .content_model import ContentItem, Sample, save_corpus
from .error_codes import ErrorCode
from .error_handler import DataError, SerializationError
from .logging_config import get_logger

logger = get_logger("mixplan.synthetic")

ENTITIES: Tuple[Tuple[str, str], ...] = (
    ("Green Party", "Green_Party"),
    ("City Council", "City_Council"),
    ("Port Alder", "Port_Alder"),
    ("Maria Lopez", "Maria_Lopez"),
    ("North Bank", "North_Bank"),
    ("Union Rail", "Union_Rail"),
    ("Lake Verna", "Lake_Verna"),
    ("Tom Reyes", "Tom_Reyes"),
)

# lemma -> (past tense, fact template); fillers: entity, abstract, concrete
VERBS: Dict[str, Tuple[str, str]] = {
    "support": ("supported", "{entity} supported the {abstract} debate over the {concrete}."),
    "oppose": ("opposed", "{entity} opposed a {abstract} rule for every {concrete}."),
    "fund": ("funded", "{entity} funded new {abstract} work near the {concrete}."),
    "block": ("blocked", "{entity} blocked the {abstract} review of the {concrete}."),
    "expand": ("expanded", "{entity} expanded its {abstract} program around the {concrete}."),
    "reform": ("reformed", "{entity} reformed the {abstract} office beside the {concrete}."),
}
CLAIM_TEMPLATE = "{entity} should {verb} the {abstract} plan for the {concrete}."
CLOSING_SENTENCE = "Debate continues."

ABSTRACT_NOUNS: Dict[str, float] = {
    "justice": 1.5, "freedom": 1.6, "risk": 2.0, "policy": 2.2, "economy": 2.4, "safety": 2.5,
}
CONCRETE_NOUNS: Dict[str, float] = {
    "park": 4.5, "school": 4.6, "factory": 4.7, "bridge": 4.8, "road": 4.8, "river": 4.9,
}
TOPICS = ("City Budget", "Transit Plan", "School Reform", "River Cleanup", "Housing Policy")

@dataclass(frozen=True)
class ItemTemplate:
    entity: int
    verb: str
    abstract: str
    concrete: str
    claim: bool

    def sentence(self) -> str:
        mention = ENTITIES[self.entity][0]
        if self.claim:
            return CLAIM_TEMPLATE.format(entity=mention, verb=self.verb, abstract=self.abstract, concrete=self.concrete)
        template = VERBS[self.verb][1]
        return template.format(entity=mention, abstract=self.abstract, concrete=self.concrete)

    def content_item(self) -> ContentItem:
        return ContentItem(
            entities=frozenset([ENTITIES[self.entity][1]]),
            core_concepts=frozenset([self.verb, self.abstract]),
            expanded_concepts=frozenset([self.concrete]),
            claim=self.sentence() if self.claim else None,
        )

def _draw_items(rng: random.Random, min_items: int, max_items: int, claim_rate: float) -> List[ItemTemplate]:
    verb_order = list(VERBS)
    verbs = sorted(rng.sample(verb_order, rng.randint(min_items, max_items)), key=verb_order.index)
    return [
        ItemTemplate(
            entity=rng.randrange(len(ENTITIES)),
            verb=verb,
            abstract=rng.choice(sorted(ABSTRACT_NOUNS)),
            concrete=rng.choice(sorted(CONCRETE_NOUNS)),
            claim=rng.random() < claim_rate,
        )
        for verb in verbs
    ]

def sample_from_templates(sample_id: str, title: str, templates: Sequence[ItemTemplate]) -> Sample:
    target: List[str] = []
    labels: List[Optional[int]] = []
    for index, template in enumerate(templates):
        tokens = template.sentence().split()
        target.extend(tokens)
        labels.extend([index] * len(tokens))
    if len(templates) == 3:
        closing = CLOSING_SENTENCE.split()
        target.extend(closing)
        labels.extend([None] * len(closing))
    return Sample(
        id=sample_id,
        title=title,
        items=tuple(template.content_item() for template in templates),
        target=" ".join(target),
        plan_labels=tuple(labels),
    )

def synthetic_samples(
    num_samples: int = 50,
    seed: int = 0,
    min_items: int = 1,
    max_items: int = 3,
    claim_rate: float = 0.4,
) -> List[Sample]:
    """Gold samples whose item k deterministically generates the k-th sentence."""
    if not 1 <= min_items <= max_items <= len(VERBS):
        raise DataError(
            ErrorCode.INVALID_ARGUMENT, name="max_items", details=f"need 1 <= {min_items} <= {max_items} <= {len(VERBS)}"
        )
    rng = random.Random(seed)
    samples = []
    for index in range(num_samples):
        templates = _draw_items(rng, min_items, max_items, claim_rate)
        samples.append(sample_from_templates(f"syn-{index:04d}", TOPICS[index % len(TOPICS)], templates))
    return samples

def claim_and_fact_sentences() -> Tuple[List[str], List[str]]:
    """Every claim-template and fact-template sentence over a fixed filler grid."""
    claims: List[str] = []
    facts: List[str] = []
    for entity in range(len(ENTITIES)):
        for verb in VERBS:
            for abstract, concrete in zip(sorted(ABSTRACT_NOUNS), sorted(CONCRETE_NOUNS)):
                claims.append(ItemTemplate(entity, verb, abstract, concrete, claim=True).sentence())
                facts.append(ItemTemplate(entity, verb, abstract, concrete, claim=False).sentence())
    return claims, facts

@dataclass
class SyntheticDataset:
    raw_corpus: Path
    gold_corpus: Path
    entities: Path
    concepts: Path
    concreteness: Path
    claims_train: Path
    facts_train: Path
    config: Path

def _write_lines(path: Path, lines: Sequence[str]) -> None:
    try:
        path.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")
    except OSError as e:
        raise SerializationError(ErrorCode.UNWRITABLE_PATH, path=str(path), details=str(e)) from e

def write_synthetic_dataset(
    out_dir: Path, num_samples: int = 50, seed: int = 0, config_overrides: Optional[Dict[str, object]] = None
) -> SyntheticDataset:
    """
    Write a raw corpus, its gold corpus, the lexical resources, claim/fact lists and an
    experiment config pointing at all of them.
    """
    out_dir = Path(out_dir).resolve()
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise SerializationError(ErrorCode.UNWRITABLE_PATH, path=str(out_dir), details=str(e)) from e
    dataset = SyntheticDataset(
        raw_corpus=out_dir / "raw.jsonl",
        gold_corpus=out_dir / "gold.jsonl",
        entities=out_dir / "entities.tsv",
        concepts=out_dir / "concepts.tsv",
        concreteness=out_dir / "concreteness.tsv",
        claims_train=out_dir / "claims.txt",
        facts_train=out_dir / "facts.txt",
        config=out_dir / "config.json",
    )
    samples = synthetic_samples(num_samples, seed)
    save_corpus(samples, dataset.gold_corpus)
    _write_lines(
        dataset.raw_corpus,
        [json.dumps({"id": s.id, "title": s.title, "reference": s.target}) for s in samples],
    )
    _write_lines(dataset.entities, [f"{mention}\t{identifier}" for mention, identifier in ENTITIES])
    _write_lines(
        dataset.concepts,
        [f"{verb}\tVERB" for verb in VERBS] + [f"{noun}\tNOUN" for noun in sorted({**ABSTRACT_NOUNS, **CONCRETE_NOUNS})],
    )
    _write_lines(
        dataset.concreteness,
        [f"{word}\t{score}" for word, score in sorted({**ABSTRACT_NOUNS, **CONCRETE_NOUNS}.items())],
    )
    claims, facts = claim_and_fact_sentences()
    _write_lines(dataset.claims_train, claims)
    _write_lines(dataset.facts_train, facts)

    config = {
        "seed": seed,
        "raw_corpus": str(dataset.raw_corpus),
        "entities": str(dataset.entities),
        "concepts": str(dataset.concepts),
        "concreteness": str(dataset.concreteness),
        "claims_train": str(dataset.claims_train),
        "facts_train": str(dataset.facts_train),
        "output_dir": str(out_dir / "experiment"),
        "embedding_size": 32,
        "hidden_size": 32,
        "ffn_size": 64,
        "plan_hidden_size": 32,
        "max_item_len": 64,
        "max_target_len": 64,
        "learning_rate": 0.003,
        "max_epochs": 40,
        "augment_max_epochs": 20,
        "max_decode_len": 64,
    }
    config.update(config_overrides or {})
    _write_lines(dataset.config, [json.dumps(config, indent=2, sort_keys=True)])
    logger.info(f"Wrote synthetic dataset with {len(samples)} samples to {out_dir}")
    return dataset
