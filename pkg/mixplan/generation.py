"""
Generation records: decoded tokens with the plan distribution used at each step.
"""
from pathlib import Path
from typing import Iterable, List, Sequence
import json

from pydantic import BaseModel, ConfigDict, ValidationError

from .config import DecodeModeName
from .content_model import ItemMask, Sample
from .error_codes import ErrorCode
from .error_handler import CorpusFormatError, DataError, SerializationError
from .logging_config import decode_logger as logger
from .mixed_lm.alignment import AlignmentResult, align_output
from .mixed_lm.data import item_token_sequences
from .mixed_lm.decoding import DecodeMode, decode
from .mixed_lm.model import MixedLMModel
from .seeding import derive_seed

class GenerationRecord(BaseModel):
    """One generated output; plans[t] is the item distribution used for tokens[t]."""
    model_config = ConfigDict(frozen=True)

    id: str
    tokens: List[str]
    plans: List[List[float]]
    mode: DecodeModeName
    num_items: int
    item_has_claim: List[bool]

    @property
    def text(self) -> str:
        return " ".join(self.tokens)

    def alignment(self) -> AlignmentResult:
        result = align_output(self.tokens, self.plans, num_items=self.num_items)
        result.item_has_claim = list(self.item_has_claim)
        return result

def decode_sample(
    model: MixedLMModel,
    sample: Sample,
    mode: DecodeMode = DecodeMode.WEIGHTED,
    max_len: int = 200,
    seed: int = 0,
    masks: Iterable[ItemMask] = (),
) -> GenerationRecord:
    masks = list(masks)
    sequences = item_token_sequences(sample.title_tokens, sample.items, masks)
    result = decode(model, sequences, mode, max_len, seed)
    claims = [item.has_claim and ItemMask.CLAIMS not in masks for item in sample.items]
    return GenerationRecord(
        id=sample.id,
        tokens=result.tokens,
        plans=result.plan_rows(),
        mode=DecodeMode(mode).value,
        num_items=len(sample.items),
        item_has_claim=claims,
    )

def generate_corpus(
    model: MixedLMModel,
    samples: Sequence[Sample],
    mode: DecodeMode = DecodeMode.WEIGHTED,
    max_len: int = 200,
    seed: int = 0,
    masks: Iterable[ItemMask] = (),
) -> List[GenerationRecord]:
    """Decode every sample; random item draws use a per-sample sub-seed."""
    masks = list(masks)
    records = [
        decode_sample(model, sample, mode, max_len, derive_seed(seed, sample.id), masks) for sample in samples
    ]
    logger.info(
        f"Generated {len(records)} outputs in {DecodeMode(mode).value} mode",
        extra={"mean_length": sum(len(r.tokens) for r in records) / max(len(records), 1)},
    )
    return records

def save_generations(records: Sequence[GenerationRecord], path: Path) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as handle:
            for record in records:
                handle.write(json.dumps(record.model_dump(), ensure_ascii=False) + "\n")
    except OSError as e:
        raise SerializationError(ErrorCode.UNWRITABLE_PATH, path=str(path), details=str(e)) from e

def load_generations(path: Path) -> List[GenerationRecord]:
    path = Path(path)
    if not path.exists():
        raise DataError(ErrorCode.MISSING_RESOURCE, path=str(path))
    records: List[GenerationRecord] = []
    with path.open("r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                records.append(GenerationRecord.model_validate(json.loads(line)))
            except (json.JSONDecodeError, ValidationError) as e:
                raise CorpusFormatError(line_number, str(e)) from e
    return records
