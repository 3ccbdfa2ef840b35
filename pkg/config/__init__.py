"""Run configuration loading."""

from config.config_loader import Config, ConfigError

__all__ = ["Config", "ConfigError"]
