# /root/pkg/src/utils/logger.py

"""
Logger Configuration Module

Purpose:
Initializes and configures the centralized logger shared by every numerical
module, the experiment harness and the command-line front end. Provides a
consistent format on stdout plus an optional per-run log file.

Dependencies:
- logging (standard Python library)

Expected Input: None
Expected Output: A configured logging.Logger instance.
"""

import logging
import sys
from pathlib import Path
from typing import Union

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_LEVEL = logging.INFO  # Default level, overridden by --log-level
LOGGER_NAME = 'transverse_lab'


def setup_logger(name: str = LOGGER_NAME, level: int = LOG_LEVEL) -> logging.Logger:
    """
    Configures and returns a logger instance.

    Args:
        name (str): The name of the logger.
        level (int): The logging level (e.g., logging.INFO, logging.DEBUG).

    Returns:
        logging.Logger: The configured logger instance.
    """
    logger = logging.getLogger(name)

    # Prevent adding multiple handlers if called multiple times
    if not logger.handlers:
        logger.setLevel(level)

        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setLevel(level)
        console_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(console_handler)

    return logger


def set_level(level: Union[int, str], logger: logging.Logger = None) -> None:
    """Sets the level on the logger and on all of its handlers."""
    target = logger or logging.getLogger(LOGGER_NAME)
    if isinstance(level, str):
        level = getattr(logging, level.upper(), logging.INFO)
    target.setLevel(level)
    for handler in target.handlers:
        handler.setLevel(level)


def add_file_handler(path: Union[str, Path], logger: logging.Logger = None) -> logging.Handler:
    """
    Attaches a file handler writing to `path` (e.g. <run dir>/run.log).
    Calling twice with the same path returns the existing handler.
    """
    target = logger or logging.getLogger(LOGGER_NAME)
    resolved = str(Path(path).resolve())
    for handler in target.handlers:
        if isinstance(handler, logging.FileHandler) and handler.baseFilename == resolved:
            return handler

    Path(resolved).parent.mkdir(parents=True, exist_ok=True)
    file_handler = logging.FileHandler(resolved, encoding='utf-8')
    file_handler.setLevel(target.level)
    file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    target.addHandler(file_handler)
    return file_handler


def remove_file_handlers(logger: logging.Logger = None) -> None:
    """Detaches and closes every file handler (end of a run)."""
    target = logger or logging.getLogger(LOGGER_NAME)
    for handler in list(target.handlers):
        if isinstance(handler, logging.FileHandler):
            target.removeHandler(handler)
            handler.close()


# Initialize a default logger instance for easy import
log = setup_logger()
