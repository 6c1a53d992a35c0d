"""Logging configuration for crosscam-sim."""

import logging
import time
from pathlib import Path
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

ROOT_LOGGER = "crosscam"


def setup_logging(
    level: str = "INFO",
    log_file: Optional[Path] = None,
    enable_debug: bool = False,
) -> None:
    """Set up logging configuration for the application.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Path to a detailed log file (optional)
        enable_debug: Whether to enable debug mode
    """
    numeric_level = getattr(logging, level.upper(), logging.INFO)
    if enable_debug:
        numeric_level = logging.DEBUG

    logger = logging.getLogger(ROOT_LOGGER)
    logger.setLevel(logging.DEBUG if log_file else numeric_level)
    logger.propagate = False

    for handler in logger.handlers[:]:
        handler.close()
        logger.removeHandler(handler)

    # Reports go to stdout; diagnostics stay on stderr
    console = Console(stderr=True)
    console_handler = RichHandler(
        console=console,
        show_path=enable_debug,
        show_time=enable_debug,
        rich_tracebacks=True,
        tracebacks_show_locals=enable_debug,
    )
    console_handler.setLevel(numeric_level)
    console_format = "%(name)s: %(message)s" if enable_debug else "%(message)s"
    console_handler.setFormatter(logging.Formatter(console_format))
    logger.addHandler(console_handler)

    if log_file is not None:
        try:
            log_file.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(log_file)
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(
                logging.Formatter(
                    "%(asctime)s - %(name)s - %(levelname)s - "
                    "%(funcName)s:%(lineno)d - %(message)s"
                )
            )
            logger.addHandler(file_handler)
            logger.debug(f"File logging enabled: {log_file}")
        except OSError as e:
            logger.warning(f"Could not set up file logging: {e}")

    logger.debug(f"Logging initialized at level: {level}")


def get_logger(name: str) -> logging.Logger:
    """Get a logger under the crosscam namespace."""
    if name == ROOT_LOGGER or name.startswith(f"{ROOT_LOGGER}."):
        return logging.getLogger(name)
    return logging.getLogger(f"{ROOT_LOGGER}.{name}")


def log_performance_metrics(operation: str, duration: float, **kwargs) -> None:
    """Log performance metrics for operations."""
    logger = get_logger("performance")

    metrics = [f"{operation} completed in {duration:.2f}s"]
    for key, value in kwargs.items():
        metrics.append(f"{key}={value}")

    logger.info(" | ".join(metrics))


class PerformanceTimer:
    """Context manager for timing operations."""

    def __init__(self, operation: str, **kwargs):
        self.operation = operation
        self.kwargs = kwargs
        self.start_time: Optional[float] = None
        self.duration: Optional[float] = None
        self.logger = get_logger("performance")

    def __enter__(self):
        self.start_time = time.perf_counter()
        self.logger.debug(f"Starting {self.operation}")
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if self.start_time is None:
            return
        self.duration = time.perf_counter() - self.start_time
        if exc_type:
            self.logger.error(
                f"{self.operation} failed after {self.duration:.2f}s: {exc_val}"
            )
        else:
            log_performance_metrics(self.operation, self.duration, **self.kwargs)


def setup_run_logger(run_id: str, log_dir: Path) -> Optional[str]:
    """Attach a dedicated log file to one CLI invocation.

    Args:
        run_id: Identifier used for the logger and the file name
        log_dir: Directory for the log file

    Returns:
        Path to the run log file (as string), or None if it could not be created
    """
    try:
        log_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        get_logger("run_logger").warning(f"Could not create log directory: {e}")
        return None

    log_file = log_dir / f"{run_id}.log"
    run_logger = get_run_logger(run_id)
    run_logger.setLevel(logging.DEBUG)

    try:
        file_handler = logging.FileHandler(log_file, mode="w")
    except OSError as e:
        get_logger("run_logger").warning(f"Could not set up run logger: {e}")
        return None

    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(
        logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s"
        )
    )
    # Attached to the package root so module loggers land in the run file too
    root_logger = logging.getLogger(ROOT_LOGGER)
    root_logger.addHandler(file_handler)
    if root_logger.level == logging.NOTSET or root_logger.level > logging.DEBUG:
        root_logger.setLevel(logging.DEBUG)
    run_logger.info(f"=== Run {run_id} started ===")
    return str(log_file)


def close_run_logger(run_id: str, log_file: Optional[str]) -> None:
    """Detach and close the file handler opened by setup_run_logger."""
    if log_file is None:
        return
    run_logger = get_run_logger(run_id)
    run_logger.info(f"=== Run {run_id} finished ===")

    root_logger = logging.getLogger(ROOT_LOGGER)
    target = str(Path(log_file).resolve())
    for handler in root_logger.handlers[:]:
        if (
            isinstance(handler, logging.FileHandler)
            and str(Path(handler.baseFilename).resolve()) == target
        ):
            handler.close()
            root_logger.removeHandler(handler)


def get_run_logger(run_id: str) -> logging.Logger:
    """Get the logger for a specific run session."""
    return logging.getLogger(f"{ROOT_LOGGER}.run.{run_id}")
