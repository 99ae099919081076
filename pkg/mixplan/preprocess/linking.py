"""
Dictionary-based entity linking.
"""
from typing import FrozenSet, List, Sequence, Tuple

from .resources import EntityDictionary
from .text import normalize_token

def find_mentions(sentence: Sequence[str], dictionary: EntityDictionary) -> List[Tuple[int, int, str]]:
    """
    Longest-match, left-to-right mention spans.

    Returns:
        (start, end, identifier) triples with end exclusive, in sentence order
    """
    words = [normalize_token(token) for token in sentence]
    longest = dictionary.max_mention_tokens
    spans: List[Tuple[int, int, str]] = []
    position = 0
    while position < len(words):
        match = None
        for end in range(min(len(words), position + longest), position, -1):
            key = " ".join(word for word in words[position:end] if word)
            if not words[position] or not words[end - 1]:
                continue
            identifier = dictionary.lookup(key)
            if identifier is not None:
                match = (position, end, identifier)
                break
        if match is None:
            position += 1
        else:
            spans.append(match)
            position = match[1]
    return spans

def link_entities(sentence: Sequence[str], dictionary: EntityDictionary) -> FrozenSet[str]:
    """Set of entity identifiers whose mentions occur in the tokenized sentence."""
    return frozenset(identifier for _, _, identifier in find_mentions(sentence, dictionary))
