"""
Sentence segmentation, token normalization, lemmatization and POS tagging.

Everything here is rule-based and deterministic. The tagger emits Universal POS tags and
is pluggable through the Tagger protocol.
"""
from typing import Dict, FrozenSet, Iterable, List, Optional, Protocol, Sequence
import re

from nltk.stem.porter import PorterStemmer

_BOUNDARY = re.compile(r"(?<=[.?!])\s+(?=[\"'(\[]?[A-Z])")
_EDGE_PUNCTUATION = ".,;:!?\"'()[]{}`"

def normalize_token(token: str) -> str:
    """Lowercase and strip surrounding punctuation; inner characters are kept."""
    return token.strip(_EDGE_PUNCTUATION).lower()

_stemmer = PorterStemmer()

def stem_token(token: str) -> str:
    """Porter suffix stripping of the lowercased token."""
    return _stemmer.stem(token.lower())

def segment_sentences(text: str, abbreviations: Optional[FrozenSet[str]] = None) -> List[str]:
    """
    Split text on sentence-final punctuation followed by whitespace and an uppercase letter.

    A boundary is ignored when the word before it is a known abbreviation. Joining the
    returned sentences with single spaces reproduces the input modulo whitespace.
    """
    if abbreviations is None:
        from .resources import load_abbreviations
        abbreviations = load_abbreviations()
    sentences: List[str] = []
    start = 0
    for match in _BOUNDARY.finditer(text):
        candidate = text[start:match.start()]
        words = candidate.split()
        if words and words[-1].lower().lstrip("\"'([") in abbreviations:
            continue
        if candidate.strip():
            sentences.append(candidate.strip())
        start = match.end()
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences

IRREGULAR_VERBS: Dict[str, str] = {
    "am": "be", "is": "be", "are": "be", "was": "be", "were": "be", "been": "be", "being": "be",
    "has": "have", "had": "have", "does": "do", "did": "do", "done": "do",
    "made": "make", "went": "go", "gone": "go", "said": "say", "took": "take", "taken": "take",
    "gave": "give", "given": "give", "got": "get", "came": "come", "ran": "run", "left": "leave",
    "thought": "think", "brought": "bring", "bought": "buy", "paid": "pay", "held": "hold",
    "won": "win", "lost": "lose", "saw": "see", "seen": "see", "told": "tell", "found": "find",
    "knew": "know", "known": "know", "began": "begin", "led": "lead", "met": "meet", "kept": "keep",
    "felt": "feel", "became": "become", "built": "build", "sent": "send", "spent": "spend",
    "wrote": "write", "written": "write", "chose": "choose", "chosen": "choose", "fell": "fall",
}

IRREGULAR_NOUNS: Dict[str, str] = {
    "children": "child", "people": "person", "men": "man", "women": "woman", "mice": "mouse",
    "feet": "foot", "teeth": "tooth", "lives": "life", "wives": "wife", "crises": "crisis",
}

class RuleLemmatizer:
    """
    Lookup-table plus suffix-stripping lemmatizer.

    Candidate lemmas are generated from the suffix rules allowed for the tag; a candidate
    found among `known_lemmas` wins, otherwise the first candidate is used.
    """

    def __init__(self, known_lemmas: Iterable[str] = ()):
        self.known_lemmas = frozenset(known_lemmas)

    def _verb_candidates(self, word: str) -> List[str]:
        for suffix in ("ing", "ed"):
            if word.endswith(suffix) and len(word) - len(suffix) >= 2:
                stem = word[: -len(suffix)]
                candidates = []
                if suffix == "ed" and stem.endswith("i"):
                    candidates.append(stem[:-1] + "y")
                if len(stem) > 2 and stem[-1] == stem[-2] and stem[-1] not in "lsz":
                    candidates.append(stem[:-1])
                candidates.extend([stem, stem + "e"])
                if suffix == "ed":
                    candidates.append(word[:-1])
                return candidates
        return self._plural_candidates(word)

    @staticmethod
    def _plural_candidates(word: str) -> List[str]:
        if word.endswith("ies") and len(word) > 4:
            return [word[:-3] + "y", word[:-1]]
        if word.endswith("es") and len(word) > 3:
            return [word[:-1], word[:-2]]
        if word.endswith("s") and not word.endswith(("ss", "us", "is")) and len(word) > 3:
            return [word[:-1]]
        return []

    def lemmatize(self, token: str, tag: Optional[str] = None) -> str:
        word = normalize_token(token)
        if not word:
            return word
        if tag in (None, "VERB", "AUX") and word in IRREGULAR_VERBS:
            return IRREGULAR_VERBS[word]
        if tag in (None, "NOUN") and word in IRREGULAR_NOUNS:
            return IRREGULAR_NOUNS[word]
        if word in self.known_lemmas:
            return word
        if tag in ("VERB", "AUX"):
            candidates = self._verb_candidates(word)
        elif tag in (None, "NOUN"):
            candidates = self._plural_candidates(word)
        else:
            candidates = []
        if not candidates:
            return word
        for candidate in candidates:
            if candidate in self.known_lemmas:
                return candidate
        return candidates[0]

class Tagger(Protocol):
    def tag(self, tokens: Sequence[str]) -> List[str]:
        ...

DETERMINERS = frozenset("the a an this that these those every each some any no all another such".split())
ADPOSITIONS = frozenset(
    "of in on at by for with from into onto about over after before under between against "
    "during without through across toward towards upon within among".split()
)
PRONOUNS = frozenset(
    "i you he she it we they me him her us them his its their our my your who whom which what "
    "itself themselves himself herself".split()
)
COORDINATORS = frozenset("and or but nor yet so".split())
SUBORDINATORS = frozenset("because if while although though since unless whether than as".split())
MODALS = frozenset("will would should could can may might must shall".split())
AUXILIARIES = frozenset("am is are was were be been being has have had do does did".split()) | MODALS
PARTICLES = frozenset(["not", "to", "n't"])
ADJECTIVE_SUFFIXES = ("ous", "ful", "ive", "able", "ible", "less", "ical", "ic")

class RuleTagger:
    """Closed-class lexicon plus suffix rules; anything unrecognized is tagged NOUN."""

    fallback_tag = "NOUN"

    def __init__(self, verbs: Iterable[str] = ()):
        self.verbs = frozenset(verbs)

    def _tag_word(self, word: str, raw: str, index: int, previous: Optional[str]) -> str:
        if word in DETERMINERS:
            return "DET"
        if word in ADPOSITIONS:
            return "ADP"
        if word in PRONOUNS:
            return "PRON"
        if word in COORDINATORS:
            return "CCONJ"
        if word in SUBORDINATORS:
            return "SCONJ"
        if word in AUXILIARIES:
            return "AUX"
        if word in PARTICLES:
            return "PART"
        if word.replace(",", "").replace(".", "").isdigit():
            return "NUM"
        after_determiner = previous in DETERMINERS
        if previous in MODALS or previous == "to":
            return "VERB"
        if word in IRREGULAR_VERBS or word in self.verbs:
            return "VERB"
        if word.endswith(("ing", "ed")) and len(word) > 4:
            return "ADJ" if after_determiner else "VERB"
        if word.endswith("ly") and len(word) > 4:
            return "ADV"
        if word.endswith(ADJECTIVE_SUFFIXES) and len(word) > 4:
            return "ADJ"
        if index > 0 and raw[:1].isupper():
            return "PROPN"
        return self.fallback_tag

    def tag(self, tokens: Sequence[str]) -> List[str]:
        tags: List[str] = []
        previous: Optional[str] = None
        for index, token in enumerate(tokens):
            word = normalize_token(token)
            raw = token.strip(_EDGE_PUNCTUATION)
            tags.append(self._tag_word(word, raw, index, previous) if word else "PUNCT")
            previous = word
        return tags
