"""
Concept extraction by (lemma, POS) lexicon lookup and the core/expanded split.
"""
from typing import Dict, FrozenSet, Mapping, Optional, Sequence, Set, Tuple

from .resources import ConceptLexicon, ConcretenessLexicon
from .text import RuleLemmatizer, Tagger

CORE_CONCRETENESS_THRESHOLD = 3.0

def tag_concepts(
    sentence: Sequence[str],
    lexicon: ConceptLexicon,
    tagger: Tagger,
    lemmatizer: Optional[RuleLemmatizer] = None,
) -> Dict[str, str]:
    """
    Matched concept lemmas with the POS tag they matched under.

    A lemma matched under several tags is reported as VERB if any match was a verb,
    otherwise with its first matching tag.
    """
    lemmatizer = lemmatizer or RuleLemmatizer(lexicon.lemmas)
    tags = tagger.tag(sentence)
    matched: Dict[str, str] = {}
    for token, tag in zip(sentence, tags):
        lemma = lemmatizer.lemmatize(token, tag)
        if not lemma or (lemma, tag) not in lexicon:
            continue
        if lemma not in matched or tag == "VERB":
            matched[lemma] = tag
    return matched

def extract_concepts(
    sentence: Sequence[str],
    lexicon: ConceptLexicon,
    tagger: Tagger,
    lemmatizer: Optional[RuleLemmatizer] = None,
) -> Set[str]:
    """Lemmas whose (lemma, tag) pair is a lexicon entry."""
    return set(tag_concepts(sentence, lexicon, tagger, lemmatizer))

def split_concepts(
    concepts: Set[str],
    tags: Mapping[str, str],
    lexicon: ConcretenessLexicon,
) -> Tuple[FrozenSet[str], FrozenSet[str]]:
    """Verbs and abstract concepts (score < 3.0) are core; everything else is expanded."""
    core = frozenset(
        concept for concept in concepts
        if tags.get(concept) == "VERB" or lexicon.score(concept) < CORE_CONCRETENESS_THRESHOLD
    )
    return core, frozenset(concepts) - core
