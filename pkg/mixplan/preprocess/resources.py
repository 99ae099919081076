"""
Lexical resources used to build content items.

All resource files are tab-separated text; blank lines and lines starting with '#' are
ignored. Resources are immutable once loaded.
"""
from dataclasses import dataclass, field
from importlib import resources as package_resources
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from ..error_codes import ErrorCode
from ..error_handler import ResourceError
from ..logging_config import preprocess_logger as logger
from .text import normalize_token

MIN_CONCRETENESS = 0.0
MAX_CONCRETENESS = 5.0

def _read_lines(path: Path) -> Iterable[Tuple[int, str]]:
    path = Path(path)
    if not path.exists():
        raise ResourceError(ErrorCode.MISSING_RESOURCE, path=str(path))
    with path.open("r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield line_number, line

def _split_columns(path: Path, line_number: int, line: str, columns: int) -> List[str]:
    parts = [part.strip() for part in line.split("\t")]
    if len(parts) != columns or not all(parts):
        raise ResourceError(
            ErrorCode.MALFORMED_RESOURCE_LINE,
            line_number=line_number,
            path=str(path),
            details=f"expected {columns} tab-separated columns",
        )
    return parts

def mention_key(tokens: Iterable[str]) -> str:
    """Case-insensitive lookup key for a mention given as tokens."""
    return " ".join(t for t in (normalize_token(token) for token in tokens) if t)

@dataclass(frozen=True)
class EntityDictionary:
    """Most-frequent-sense mention dictionary: lowercased mention -> entity identifier."""
    mapping: Dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[str, str]]) -> "EntityDictionary":
        mapping: Dict[str, str] = {}
        for mention, identifier in pairs:
            key = mention_key(mention.split())
            if not key:
                continue
            # First listed sense wins
            mapping.setdefault(key, "_".join(identifier.split()))
        return cls(mapping=mapping)

    @classmethod
    def from_file(cls, path: Path) -> "EntityDictionary":
        pairs = [
            tuple(_split_columns(path, number, line, 2))
            for number, line in _read_lines(path)
        ]
        dictionary = cls.from_pairs(pairs)
        logger.info(f"Loaded {len(dictionary.mapping)} entity mentions from {path}")
        return dictionary

    @property
    def max_mention_tokens(self) -> int:
        return max((len(key.split()) for key in self.mapping), default=0)

    def lookup(self, key: str) -> Optional[str]:
        return self.mapping.get(key)

@dataclass(frozen=True)
class ConceptLexicon:
    """Set of (lemma, POS tag) entries."""
    entries: FrozenSet[Tuple[str, str]] = frozenset()

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[str, str]]) -> "ConceptLexicon":
        return cls(entries=frozenset((lemma.lower(), tag.upper()) for lemma, tag in pairs))

    @classmethod
    def from_file(cls, path: Path) -> "ConceptLexicon":
        pairs = [
            tuple(_split_columns(path, number, line, 2))
            for number, line in _read_lines(path)
        ]
        lexicon = cls.from_pairs(pairs)
        logger.info(f"Loaded {len(lexicon.entries)} concept entries from {path}")
        return lexicon

    @property
    def lemmas(self) -> FrozenSet[str]:
        return frozenset(lemma for lemma, _ in self.entries)

    def __contains__(self, entry: Tuple[str, str]) -> bool:
        return entry in self.entries

@dataclass(frozen=True)
class ConcretenessLexicon:
    """Word -> concreteness score in [0, 5]; unknown words count as fully concrete."""
    scores: Dict[str, float] = field(default_factory=dict)
    default_score: float = MAX_CONCRETENESS

    @classmethod
    def from_file(cls, path: Path) -> "ConcretenessLexicon":
        scores: Dict[str, float] = {}
        for number, line in _read_lines(path):
            word, raw = _split_columns(path, number, line, 2)
            try:
                score = float(raw)
            except ValueError:
                raise ResourceError(
                    ErrorCode.MALFORMED_RESOURCE_LINE,
                    line_number=number,
                    path=str(path),
                    details=f"score {raw!r} is not a number",
                )
            if not MIN_CONCRETENESS <= score <= MAX_CONCRETENESS:
                raise ResourceError(
                    ErrorCode.SCORE_OUT_OF_RANGE, score=score, word=word, line_number=number, path=str(path)
                )
            scores[word.lower()] = score
        logger.info(f"Loaded {len(scores)} concreteness scores from {path}")
        return cls(scores=scores)

    def score(self, word: str) -> float:
        return self.scores.get(word.lower(), self.default_score)

def load_abbreviations(path: Optional[Path] = None) -> FrozenSet[str]:
    """Abbreviations that never end a sentence; the packaged list when no path is given."""
    if path is None:
        text = package_resources.files("mixplan").joinpath("resources/abbreviations.txt").read_text(encoding="utf-8")
        lines = text.splitlines()
    else:
        lines = [line for _, line in _read_lines(path)]
    return frozenset(line.strip().lower() for line in lines if line.strip() and not line.startswith("#"))
