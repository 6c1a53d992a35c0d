"""Unit tests for logging configuration."""

import logging

import pytest
from rich.logging import RichHandler

from crosscam.logging_config import (
    ROOT_LOGGER,
    PerformanceTimer,
    close_run_logger,
    get_logger,
    get_run_logger,
    setup_logging,
    setup_run_logger,
)


class TestSetupLogging:
    """Test logger setup."""

    def test_console_handler(self):
        setup_logging("WARNING")
        logger = logging.getLogger(ROOT_LOGGER)
        assert logger.level == logging.WARNING
        assert len(logger.handlers) == 1
        assert isinstance(logger.handlers[0], RichHandler)

    def test_debug_flag_wins(self):
        setup_logging("ERROR", enable_debug=True)
        assert logging.getLogger(ROOT_LOGGER).level == logging.DEBUG

    def test_repeated_setup_does_not_stack_handlers(self):
        setup_logging("INFO")
        setup_logging("INFO")
        assert len(logging.getLogger(ROOT_LOGGER).handlers) == 1

    def test_log_file(self, temp_dir):
        """Test that the file gets debug records while the console stays quiet."""
        log_file = temp_dir / "logs" / "crosscam.log"
        setup_logging("WARNING", log_file=log_file)
        get_logger("crosscam.fusion").debug("fusing frame 3")
        for handler in logging.getLogger(ROOT_LOGGER).handlers:
            handler.flush()
        assert "fusing frame 3" in log_file.read_text()

    def test_get_logger_namespacing(self):
        assert get_logger("fusion").name == "crosscam.fusion"
        assert get_logger("crosscam.fusion").name == "crosscam.fusion"
        assert get_logger(ROOT_LOGGER).name == ROOT_LOGGER


class TestRunLogger:
    """Test per-invocation log files."""

    def test_open_and_close(self, temp_dir):
        setup_logging("WARNING")
        log_file = setup_run_logger("sweep", temp_dir)
        assert log_file == str(temp_dir / "sweep.log")
        get_logger("server").info("seed 4 done")
        close_run_logger("sweep", log_file)

        text = (temp_dir / "sweep.log").read_text()
        assert "=== Run sweep started ===" in text
        assert "seed 4 done" in text
        assert "=== Run sweep finished ===" in text
        assert not any(
            isinstance(h, logging.FileHandler) for h in logging.getLogger(ROOT_LOGGER).handlers
        )

    def test_close_without_file(self):
        close_run_logger("noop", None)

    def test_run_logger_name(self):
        assert get_run_logger("run").name == "crosscam.run.run"


class TestPerformanceTimer:
    """Test timing context manager."""

    def test_records_duration(self, caplog):
        with caplog.at_level(logging.INFO, logger="crosscam.performance"):
            with PerformanceTimer("fuse", frames=3) as timer:
                pass
        assert timer.duration is not None and timer.duration >= 0
        assert "fuse completed in" in caplog.text
        assert "frames=3" in caplog.text

    def test_logs_failure(self, caplog):
        with caplog.at_level(logging.ERROR, logger="crosscam.performance"):
            with pytest.raises(RuntimeError):
                with PerformanceTimer("sweep"):
                    raise RuntimeError("seed failed")
        assert "sweep failed after" in caplog.text
