"""Content-item construction from titled reference texts."""
from .builder import (
    MIN_SENTENCE_TOKENS,
    PreprocessResources,
    RawRecord,
    build_corpus,
    build_item,
    build_sample,
    load_raw_corpus,
)
from .claims import ClaimClassifier, ClaimLabel, classify_claim, read_sentences, train_claim_classifier
from .concepts import extract_concepts, split_concepts, tag_concepts
from .linking import find_mentions, link_entities
from .resources import ConceptLexicon, ConcretenessLexicon, EntityDictionary, load_abbreviations
from .text import RuleLemmatizer, RuleTagger, Tagger, normalize_token, segment_sentences, stem_token

__all__ = [
    "MIN_SENTENCE_TOKENS",
    "PreprocessResources",
    "RawRecord",
    "build_corpus",
    "build_item",
    "build_sample",
    "load_raw_corpus",
    "ClaimClassifier",
    "ClaimLabel",
    "classify_claim",
    "read_sentences",
    "train_claim_classifier",
    "extract_concepts",
    "split_concepts",
    "tag_concepts",
    "find_mentions",
    "link_entities",
    "ConceptLexicon",
    "ConcretenessLexicon",
    "EntityDictionary",
    "load_abbreviations",
    "RuleLemmatizer",
    "RuleTagger",
    "Tagger",
    "normalize_token",
    "segment_sentences",
    "stem_token",
]
