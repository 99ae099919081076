"""
Named sub-seeds derived from the single experiment seed.
"""
from typing import Dict, Iterable
import hashlib
import random

import numpy as np
import torch

STAGE_SEED_NAMES = ("preprocess", "augment", "train", "generate", "split")

def derive_seed(seed: int, name: str) -> int:
    """Deterministic 31-bit sub-seed for a named consumer of randomness."""
    digest = hashlib.sha256(f"{seed}:{name}".encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big") & 0x7FFFFFFF

def derive_seed_map(seed: int, names: Iterable[str] = STAGE_SEED_NAMES) -> Dict[str, int]:
    return {name: derive_seed(seed, name) for name in names}

def seed_everything(seed: int, deterministic: bool = True) -> None:
    """Seed python, numpy and torch; in deterministic mode also pin torch to one thread."""
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)
    if deterministic:
        torch.set_num_threads(1)
        torch.use_deterministic_algorithms(True, warn_only=True)

def torch_generator(seed: int) -> torch.Generator:
    generator = torch.Generator()
    generator.manual_seed(seed)
    return generator
