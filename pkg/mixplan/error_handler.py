"""
Error hierarchy and error reporting for mixplan.

Every failure the package raises on purpose derives from MixplanError, which carries a
stable error code, a category and the process exit code the CLI should use.
"""

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Any, Dict, List, Optional, Sequence
import logging

from .error_codes import ErrorCode, format_error_message

logger = logging.getLogger(__name__)

class ErrorCategory(Enum):
    """Categories of errors, one per exit code."""
    USAGE = "usage"
    DATA = "data"
    NUMERIC = "numeric"
    SYSTEM = "system"

class ExitCode(IntEnum):
    """Process exit codes of the mixplan CLI."""
    SUCCESS = 0
    USAGE = 1
    DATA = 2
    NUMERIC = 3

_CATEGORY_EXIT_CODES = {
    ErrorCategory.USAGE: ExitCode.USAGE,
    ErrorCategory.DATA: ExitCode.DATA,
    ErrorCategory.NUMERIC: ExitCode.NUMERIC,
    ErrorCategory.SYSTEM: ExitCode.DATA,
}

class MixplanError(Exception):
    """Base class for all errors raised by mixplan."""

    category: ErrorCategory = ErrorCategory.SYSTEM

    def __init__(self, code: ErrorCode, **context: Any):
        self.code = code
        self.context: Dict[str, Any] = dict(context)
        super().__init__(format_error_message(code.value, **context))

    @property
    def exit_code(self) -> ExitCode:
        return _CATEGORY_EXIT_CODES[self.category]

class ConfigError(MixplanError):
    category = ErrorCategory.USAGE

class DataError(MixplanError):
    category = ErrorCategory.DATA

class CorpusFormatError(DataError):
    """A corpus line could not be parsed as a record."""

    def __init__(self, line_number: int, details: str):
        self.line_number = line_number
        super().__init__(ErrorCode.MALFORMED_RECORD, line_number=line_number, details=details)

class CorpusValidationError(DataError):
    """A corpus record violates a Sample or ContentItem invariant."""

    def __init__(self, field: str, details: str, line_number: Optional[int] = None, missing: bool = False):
        self.field = field
        self.line_number = line_number
        where = line_number if line_number is not None else "?"
        if missing:
            super().__init__(ErrorCode.MISSING_FIELD, field=field, line_number=where)
        else:
            super().__init__(ErrorCode.INVALID_FIELD_VALUE, field=field, line_number=where, details=details)

class SerializationError(DataError):
    pass

class ResourceError(DataError):
    pass

class NoContentItemsError(DataError):
    def __init__(self, sample_id: str, min_tokens: int):
        super().__init__(ErrorCode.NO_CONTENT_ITEMS, sample_id=sample_id, min_tokens=min_tokens)

class NotTrainedError(DataError):
    def __init__(self, component: str):
        super().__init__(ErrorCode.NOT_TRAINED, component=component)

class NumericError(MixplanError):
    category = ErrorCategory.NUMERIC

class NonFiniteLossError(NumericError):
    """Training produced NaN or infinite loss."""

    def __init__(self, step: int, sample_ids: Sequence[str], loss: float):
        self.step = step
        self.sample_ids = list(sample_ids)
        super().__init__(ErrorCode.NON_FINITE_LOSS, step=step, sample_ids=", ".join(self.sample_ids), loss=loss)

class DistributionError(NumericError):
    pass

class PipelineStageError(MixplanError):
    """A pipeline stage failed; the exit code follows the underlying cause."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(ErrorCode.STAGE_FAILED, stage=stage, cause=str(cause))

    @property
    def exit_code(self) -> ExitCode:
        if isinstance(self.cause, MixplanError):
            return self.cause.exit_code
        return ExitCode.DATA

@dataclass
class ErrorDetail:
    """User-facing description of an error."""
    title: str
    message: str
    exit_code: ExitCode
    code: Optional[str] = None
    fix_suggestions: List[str] = field(default_factory=list)
    context: Dict[str, Any] = field(default_factory=dict)

_SUGGESTIONS = {
    ErrorCode.MISSING_FIELD: ["Every corpus line needs id, title, items, target and plan_labels"],
    ErrorCode.MALFORMED_RECORD: ["Each corpus line must be one JSON object"],
    ErrorCode.NOT_TRAINED: ["Train the component first or pass a trained checkpoint"],
    ErrorCode.NON_FINITE_LOSS: ["Lower the learning rate or set max_grad_norm in the config"],
    ErrorCode.INVALID_CONFIG: ["Check the config file against config.json in the repository root"],
}

def describe_error(error: BaseException) -> ErrorDetail:
    """Turn an exception into an ErrorDetail for CLI reporting."""
    if isinstance(error, PipelineStageError) and isinstance(error.cause, MixplanError):
        inner = describe_error(error.cause)
        inner.title = f"Stage '{error.stage}' failed"
        return inner
    if isinstance(error, MixplanError):
        return ErrorDetail(
            title=type(error).__name__,
            message=str(error),
            exit_code=error.exit_code,
            code=error.code.value,
            fix_suggestions=list(_SUGGESTIONS.get(error.code, [])),
            context=error.context,
        )
    logger.debug(f"Unexpected error type {type(error).__name__}", exc_info=error)
    return ErrorDetail(title="Unexpected error", message=str(error), exit_code=ExitCode.DATA)
