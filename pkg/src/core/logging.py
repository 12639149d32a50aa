import logging
import sys
from typing import Optional

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def get_logger(name: str = __name__, level: Optional[str] = None) -> logging.Logger:
    """
    Get a configured logger for an mrckit module.

    Records go to stderr; stdout is reserved for the score report the
    CLI prints.

    Args:
        name: Logger name, defaults to the calling module's name
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL);
            falls back to settings.LOG_LEVEL

    Returns:
        Configured logger instance
    """
    if level is None:
        from src.core.config import settings

        level = settings.LOG_LEVEL

    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, level.upper()))
    if logger.handlers:
        return logger

    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(logging.DEBUG)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt="%Y-%m-%d %H:%M:%S"))
    logger.addHandler(handler)
    logger.propagate = False

    return logger
