"""
Centralized logging configuration for mixplan.
Controls log levels and output based on environment variables.
"""

import os
import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

# Environment variable names
ENV_LOG_LEVEL = "MIXPLAN_LOG_LEVEL"
ENV_LOG_FILE_SIZE = "MIXPLAN_LOG_FILE_SIZE"
ENV_LOG_BACKUP_COUNT = "MIXPLAN_LOG_BACKUP_COUNT"
ENV_LOG_DIR = "MIXPLAN_LOG_DIR"

# Default values
DEFAULT_LOG_LEVEL = "INFO"
DEFAULT_LOG_FILE_SIZE = 10 * 1024 * 1024  # 10MB
DEFAULT_LOG_BACKUP_COUNT = 5

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
ROOT_LOGGER = "mixplan"

# Log level mapping
LOG_LEVELS = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
    "CRITICAL": logging.CRITICAL
}

def get_log_level() -> int:
    """Get log level from environment variable or default."""
    level = os.getenv(ENV_LOG_LEVEL, DEFAULT_LOG_LEVEL).upper()
    return LOG_LEVELS.get(level, logging.INFO)

def get_log_file_size() -> int:
    """Get maximum log file size from environment variable or default."""
    try:
        return int(os.getenv(ENV_LOG_FILE_SIZE, DEFAULT_LOG_FILE_SIZE))
    except ValueError:
        return DEFAULT_LOG_FILE_SIZE

def get_log_backup_count() -> int:
    """Get number of backup log files from environment variable or default."""
    try:
        return int(os.getenv(ENV_LOG_BACKUP_COUNT, DEFAULT_LOG_BACKUP_COUNT))
    except ValueError:
        return DEFAULT_LOG_BACKUP_COUNT

def get_log_dir() -> Optional[Path]:
    """Get log directory from environment variable; None disables file logging."""
    log_dir = os.getenv(ENV_LOG_DIR)
    if not log_dir:
        return None
    path = Path(log_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path

def _rotating_handler(path: Path, level: int) -> RotatingFileHandler:
    handler = RotatingFileHandler(
        path,
        maxBytes=get_log_file_size(),
        backupCount=get_log_backup_count()
    )
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    return handler

def configure_logging(level: Optional[str] = None, log_dir: Optional[Path] = None) -> logging.Logger:
    """
    Configure the package root logger once.

    Args:
        level: Level name overriding MIXPLAN_LOG_LEVEL
        log_dir: Directory for mixplan.log and errors.log, overriding MIXPLAN_LOG_DIR

    Returns:
        The configured 'mixplan' logger
    """
    logger = logging.getLogger(ROOT_LOGGER)
    logger.setLevel(LOG_LEVELS.get(level.upper(), logging.INFO) if level else get_log_level())

    # Don't add handlers if they already exist
    if logger.handlers:
        return logger

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(console_handler)

    directory = Path(log_dir) if log_dir else get_log_dir()
    if directory is not None:
        directory.mkdir(parents=True, exist_ok=True)
        logger.addHandler(_rotating_handler(directory / "mixplan.log", logging.DEBUG))
        logger.addHandler(_rotating_handler(directory / "errors.log", logging.ERROR))
    return logger

def get_logger(name: str) -> logging.Logger:
    """
    Get a logger under the mixplan hierarchy.

    Args:
        name: Logger name (e.g., 'mixplan.training')

    Returns:
        Logger instance; handlers live on the package root logger
    """
    return logging.getLogger(name)

# Component loggers
preprocess_logger = get_logger('mixplan.preprocess')
augment_logger = get_logger('mixplan.augment')
training_logger = get_logger('mixplan.training')
decode_logger = get_logger('mixplan.decode')
eval_logger = get_logger('mixplan.eval')
pipeline_logger = get_logger('mixplan.pipeline')
