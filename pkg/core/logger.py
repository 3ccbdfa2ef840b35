"""
Loguru setup shared by every WashAccess stage.

One console sink and, when a log directory is configured, one rotating file
per subcommand run. Pipeline code logs model diagnostics (zero-demand
facilities, empty blocks, dropped footpath segments) at DIAGNOSTIC and
stage boundaries at STAGE.
"""

import sys
from datetime import datetime
from pathlib import Path
from typing import Optional

from loguru import logger as _logger

# Remove default handler
_logger.remove()

# Custom log levels for WashAccess, passed to logger.log() by name
DIAGNOSTIC = "DIAGNOSTIC"
STAGE = "STAGE"

LOG_LEVEL_NUMBERS = {
    DIAGNOSTIC: 25,  # Between INFO(20) and WARNING(30)
    STAGE: 22,  # Pipeline stage boundaries
}


class WashAccessLogger:
    """
    Global logger manager for WashAccess using loguru.

    Attributes:
        log_dir: Directory to store log files, or None for console-only logging
        session_start_time: Timestamp of the current session start
        log_file_path: Full path to the current session's log file
        console_level: Logging level for console output
        file_level: Logging level for file output

    Example:
        >>> from core.logger import get_logger
        >>> logger = get_logger(__name__)
        >>> logger.info("Loaded 40 facilities")
        >>> logger.log("DIAGNOSTIC", "3 facilities have no demand in reach")
    """

    def __init__(
        self,
        log_dir: Optional[str] = "log",
        console_level: str = "WARNING",
        file_level: str = "INFO",
    ):
        """
        Initialize the global logger manager.

        Args:
            log_dir: Directory to store log files (default: "log"); None disables the file sink
            console_level: Logging level for console output (default: "WARNING")
            file_level: Logging level for file output (default: "INFO")
        """
        self.log_dir = Path(log_dir) if log_dir else None
        self.session_start_time = datetime.now()
        self.log_file_path: Optional[Path] = None
        self.console_level = console_level
        self.file_level = file_level
        self._initialized = False
        self._handler_ids: list[int] = []

        self._register_custom_levels()

    def _register_custom_levels(self) -> None:
        """Register DIAGNOSTIC and STAGE once per process."""
        for name, number in LOG_LEVEL_NUMBERS.items():
            try:
                _logger.level(name)
            except ValueError:
                color = "<fg #FFA726>" if name == DIAGNOSTIC else "<fg #00CFFF>"
                _logger.level(name, no=number, color=color)

    def _generate_log_filename(self, name: str) -> str:
        return f"washaccess_{name}.log"

    def _get_log_format(self, *, with_color: bool = False) -> str:
        """
        Get log format string.

        Args:
            with_color: Whether to include color codes (for console output)
        """
        if with_color:
            return (
                "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
                "<level>{level: <11}</level> | "
                "<cyan>{extra[name]}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> | "
                "<level>{message}</level>"
            )
        return (
            "{time:YYYY-MM-DD HH:mm:ss} | "
            "{level: <11} | "
            "{extra[name]}:{function}:{line} | "
            "{message}"
        )

    def initialize(self, name: str = "main") -> None:
        """
        Initialize the global logging system.

        Console output goes to stderr so CLI results on stdout stay clean.
        """
        if self._initialized:
            return

        _logger.configure(extra={"name": "washaccess"})

        self._handler_ids.append(
            _logger.add(
                sink=lambda msg: print(msg, end="", file=sys.stderr),
                level=self.console_level,
                format=self._get_log_format(with_color=True),
                colorize=True,
                backtrace=False,
                diagnose=False,
            )
        )

        if self.log_dir is not None:
            self.log_dir.mkdir(parents=True, exist_ok=True)
            self.log_file_path = self.log_dir / self._generate_log_filename(name)
            self._handler_ids.append(
                _logger.add(
                    sink=str(self.log_file_path),
                    level=self.file_level,
                    format=self._get_log_format(with_color=False),
                    rotation="10 MB",
                    retention="10 days",
                    compression="zip",
                    backtrace=True,
                    diagnose=False,
                    encoding="utf-8",
                )
            )

        self._initialized = True

    def shutdown(self) -> None:
        """Remove the handlers this manager installed."""
        for handler_id in self._handler_ids:
            try:
                _logger.remove(handler_id)
            except ValueError:
                pass
        self._handler_ids = []
        self._initialized = False

    def get_logger(self, name: str):
        """
        Get a logger instance bound to a module name.

        Args:
            name: Logger name, typically __name__ of the calling module
        """
        if not self._initialized:
            self.initialize()
        return _logger.bind(name=name)


# Global logger manager instance
_logger_manager: Optional[WashAccessLogger] = None


def setup_logging(
    log_dir: Optional[str] = "log",
    console_level: str = "WARNING",
    file_level: str = "INFO",
    name: str = "main",
) -> WashAccessLogger:
    """
    Setup the global logging system.

    Calling it again replaces the previous handlers, so the CLI can re-configure
    levels after reading the config file.

    Args:
        log_dir: Directory to store log files (default: "log"); None for console only
        console_level: Logging level for console output (default: "WARNING")
        file_level: Logging level for file output (default: "INFO")
        name: Suffix of the log file name

    Returns:
        The initialized WashAccessLogger instance
    """
    global _logger_manager

    if _logger_manager is not None:
        _logger_manager.shutdown()

    _logger_manager = WashAccessLogger(
        log_dir=log_dir, console_level=console_level, file_level=file_level
    )
    _logger_manager.initialize(name=name)
    return _logger_manager


def get_logger(name: str):
    """
    Get a logger instance with the specified name.

    If the logging system hasn't been initialized yet, it is initialized with
    console-only defaults; file logging starts once `setup_logging` is called.

    Example:
        >>> from core.logger import get_logger
        >>> logger = get_logger(__name__)
        >>> logger.debug("Snapped 1,200 points")
    """
    global _logger_manager

    if _logger_manager is None:
        setup_logging(log_dir=None)

    return _logger_manager.get_logger(name)


def get_log_file_path() -> Optional[Path]:
    """Path to the current session's log file, or None if there is no file sink."""
    if _logger_manager is None:
        return None
    return _logger_manager.log_file_path


def get_session_start_time() -> Optional[datetime]:
    """Timestamp of the current logging session start."""
    if _logger_manager is None:
        return None
    return _logger_manager.session_start_time


__all__ = [
    "WashAccessLogger",
    "setup_logging",
    "get_logger",
    "get_log_file_path",
    "get_session_start_time",
    "DIAGNOSTIC",
    "STAGE",
]
