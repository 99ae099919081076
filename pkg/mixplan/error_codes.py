"""
Error codes and message templates for mixplan errors.
"""
from enum import Enum
from typing import Dict, Any

class ErrorCode(Enum):
    """Error codes for mixplan errors."""
    # Configuration errors
    INVALID_CONFIG = "E001"
    MISSING_CONFIG_FILE = "E002"

    # Corpus errors
    MALFORMED_RECORD = "E101"
    MISSING_FIELD = "E102"
    INVALID_FIELD_VALUE = "E103"
    SEGMENTER_IN_ELEMENT = "E104"
    EMPTY_TITLE = "E105"
    UNWRITABLE_PATH = "E106"

    # Resource errors
    MALFORMED_RESOURCE_LINE = "E201"
    SCORE_OUT_OF_RANGE = "E202"
    MISSING_RESOURCE = "E203"

    # Preprocessing and model state errors
    NO_CONTENT_ITEMS = "E301"
    NOT_TRAINED = "E302"
    EMPTY_CLASS = "E303"
    EMPTY_ITEM_LIST = "E304"
    INVALID_ARGUMENT = "E305"
    CHECKPOINT_VERSION = "E306"

    # Numeric errors
    NON_FINITE_LOSS = "E401"
    NOT_NORMALIZED = "E402"
    DIMENSION_MISMATCH = "E403"

    # Pipeline errors
    STAGE_FAILED = "E901"

# Message templates for errors
ERROR_MESSAGES: Dict[str, str] = {
    ErrorCode.INVALID_CONFIG.value: "Invalid configuration: {details}",
    ErrorCode.MISSING_CONFIG_FILE.value: "Configuration file not found: {path}",

    ErrorCode.MALFORMED_RECORD.value: "Malformed corpus record at line {line_number}: {details}",
    ErrorCode.MISSING_FIELD.value: "Missing required field '{field}' at line {line_number}",
    ErrorCode.INVALID_FIELD_VALUE.value: "Invalid value for field '{field}' at line {line_number}: {details}",
    ErrorCode.SEGMENTER_IN_ELEMENT.value: "Element '{element}' contains the reserved segmenter token '{segmenter}'",
    ErrorCode.EMPTY_TITLE.value: "Cannot serialize a content item with an empty title",
    ErrorCode.UNWRITABLE_PATH.value: "Cannot write to '{path}': {details}",

    ErrorCode.MALFORMED_RESOURCE_LINE.value: "Malformed line {line_number} in resource '{path}': {details}",
    ErrorCode.SCORE_OUT_OF_RANGE.value: "Concreteness score {score} for '{word}' outside [0, 5] at line {line_number} of '{path}'",
    ErrorCode.MISSING_RESOURCE.value: "Resource file not found: {path}",

    ErrorCode.NO_CONTENT_ITEMS.value: "no content items: reference '{sample_id}' has no sentence with at least {min_tokens} tokens",
    ErrorCode.NOT_TRAINED.value: "{component} has not been trained",
    ErrorCode.EMPTY_CLASS.value: "Training data for class '{label}' is empty",
    ErrorCode.EMPTY_ITEM_LIST.value: "At least one content item is required",
    ErrorCode.INVALID_ARGUMENT.value: "Invalid value for '{name}': {details}",
    ErrorCode.CHECKPOINT_VERSION.value: "Unsupported checkpoint version {found} in '{path}' (expected {expected})",

    ErrorCode.NON_FINITE_LOSS.value: "Non-finite loss {loss} at step {step} (samples: {sample_ids})",
    ErrorCode.NOT_NORMALIZED.value: "Distribution sums to {total}, expected 1 within {tolerance}",
    ErrorCode.DIMENSION_MISMATCH.value: "Dimension mismatch: {details}",

    ErrorCode.STAGE_FAILED.value: "Stage '{stage}' failed: {cause}",
}

def format_error_message(code: str, **kwargs: Any) -> str:
    """Format an error message using the template and provided arguments."""
    template = ERROR_MESSAGES.get(code, "Unknown error: {details}")
    return template.format(**kwargs)
