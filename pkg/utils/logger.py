"""Centralized logging configuration

Sets up loguru sinks for the CLI: a compact console sink and an optional
rotating file sink. Modules get a bound logger through get_logger().
"""
import sys
from pathlib import Path
from typing import Optional, Union

from loguru import logger


CONSOLE_FORMAT = "<level>[{level}]</level> {message}"
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | {extra[name]}:{function}:{line} - {message}"

logger.configure(extra={"name": "naija_asr"})


def setup_logging(
    log_level: str = "INFO",
    log_dir: Optional[Union[str, Path]] = None,
    rotation: str = "10 MB",
    retention: str = "7 days",
):
    """Configure logging sinks

    Args:
        log_level: Console log level (DEBUG, INFO, WARNING, ERROR)
        log_dir: Optional directory for a rotating toolkit.log file
        rotation: Rotation policy for the file sink
        retention: Retention policy for rotated files
    """
    level = log_level.upper()

    # Remove default logger
    logger.remove()

    # Console output goes to stderr so stdout stays machine-readable
    logger.add(sys.stderr, format=CONSOLE_FORMAT, level=level, colorize=False)

    if log_dir:
        log_path = Path(log_dir)
        log_path.mkdir(parents=True, exist_ok=True)
        logger.add(
            log_path / "toolkit.log",
            format=FILE_FORMAT,
            level="DEBUG" if level == "DEBUG" else "INFO",
            rotation=rotation,
            retention=retention,
            compression="zip",
            enqueue=True,
            catch=True,
        )

    logger.debug(f"Logging initialised at level {level}")


def get_logger(name: str, **extra):
    """Get a logger instance for a specific module

    Args:
        name: Module name (typically __name__)
        **extra: Additional context bound to every record

    Returns:
        Logger instance
    """
    return logger.bind(name=name, **extra)
