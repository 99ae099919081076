"""
Closed whitespace-token vocabulary with reserved tokens.
"""
from collections import Counter
from typing import Dict, Iterable, List, Sequence

from ..content_model import SEGMENTER

PAD_TOKEN = "<pad>"
BOS_TOKEN = "<bos>"
EOS_TOKEN = "<eos>"
UNK_TOKEN = "<unk>"
RESERVED_TOKENS = (PAD_TOKEN, BOS_TOKEN, EOS_TOKEN, UNK_TOKEN, SEGMENTER)

PAD_ID, BOS_ID, EOS_ID, UNK_ID, SEG_ID = range(len(RESERVED_TOKENS))

class Vocabulary:
    """Lowercased token <-> id mapping; ids 0-4 are the reserved tokens."""

    def __init__(self, tokens: Sequence[str]):
        if tuple(tokens[:len(RESERVED_TOKENS)]) != RESERVED_TOKENS:
            raise ValueError(f"vocabulary must start with the reserved tokens {RESERVED_TOKENS}")
        self.tokens: List[str] = list(tokens)
        self._index: Dict[str, int] = {token: i for i, token in enumerate(self.tokens)}
        if len(self._index) != len(self.tokens):
            raise ValueError("vocabulary tokens must be unique")

    @classmethod
    def build(cls, streams: Iterable[Iterable[str]], min_freq: int = 1) -> "Vocabulary":
        """Vocabulary ordered by descending frequency, ties broken alphabetically."""
        counts: Counter = Counter()
        for stream in streams:
            counts.update(token.lower() for token in stream)
        for token in RESERVED_TOKENS:
            counts.pop(token, None)
        ranked = sorted((item for item in counts.items() if item[1] >= min_freq), key=lambda kv: (-kv[1], kv[0]))
        return cls(list(RESERVED_TOKENS) + [token for token, _ in ranked])

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token.lower() in self._index

    def token_id(self, token: str) -> int:
        return self._index.get(token.lower(), UNK_ID)

    def encode(self, tokens: Iterable[str]) -> List[int]:
        return [self.token_id(token) for token in tokens]

    def decode(self, ids: Iterable[int]) -> List[str]:
        return [self.tokens[i] for i in ids]
