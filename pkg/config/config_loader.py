"""Configuration Loader Module.

This module loads WashAccess run settings from a YAML file, applies
environment variable overrides and turns the result into a validated
RunConfig.

Precedence, highest first: CLI flag, environment variable
(WASHACCESS_<SECTION>_<KEY>), YAML file, model default.

Classes:
    Config: Configuration manager for one run
"""

import os
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import yaml
from pydantic import ValidationError

from core.errors import WashAccessError
from core.schema import RunConfig

# (yaml key path, RunConfig field, nested model field)
_RUN_KEYS: Tuple[Tuple[str, str, Optional[str]], ...] = (
    ("grid.cell_size", "cell_size", None),
    ("access.d0", "d0", None),
    ("access.sigma", "sigma", None),
    ("access.distance_mode", "distance_mode", None),
    ("access.kinds", "kinds", None),
    ("access.d0_by_kind", "d0_by_kind", None),
    ("scenario.gender_stream", "scenario", "gender_stream"),
    ("scenario.allgender_factor", "scenario", "allgender_factor"),
    ("network.snap_tolerance", "snap_tolerance", None),
    ("network.workers", "workers", None),
    ("network.batch_size", "batch_size", None),
    ("run.strict", "strict", None),
    ("masks.translation_range", "masks", "translation_range"),
    ("masks.rotation_range", "masks", "rotation_range"),
    ("masks.rotation_step", "masks", "rotation_step"),
    ("masks.connectivity", "masks", "connectivity"),
    ("paths.aoi", "aoi_path", None),
    ("paths.camps", "camps_path", None),
    ("paths.population_csv", "population_csv_path", None),
    ("paths.facilities", "facilities_path", None),
    ("paths.footpaths", "footpaths_path", None),
    ("paths.shelters", "shelters_path", None),
    ("paths.blocks", "blocks_path", None),
    ("paths.output_dir", "output_dir", None),
)


class ConfigError(WashAccessError, ValueError):
    """The configuration file or its values are invalid."""


class Config:
    """
    Configuration manager for WashAccess.

    A missing file is not an error: every key then falls back to its
    environment variable or model default.

    Example:
        >>> from config.config_loader import Config
        >>> config = Config(config_file_path="config/config.yaml")
        >>> config.load_config()
        >>> cfg = config.to_run_config({"d0": 1609.0})
    """

    def __init__(self, config_file_path: Optional[str] = None, env_prefix: str = "WASHACCESS"):
        """
        Initialize the Config instance.

        Args:
            config_file_path: Path to the YAML configuration file.
                            If not provided, uses default: config/config.yaml
            env_prefix: Prefix of overriding environment variables
        """
        self.config_file_path = config_file_path or self._get_default_config_path()
        self.env_prefix = env_prefix
        self._config: Optional[Dict[str, Any]] = None

    @staticmethod
    def _get_default_config_path() -> str:
        return str(Path(__file__).parent / "config.yaml")

    def load_config(self, required: bool = False) -> None:
        """
        Load configuration from the YAML file.

        Args:
            required: Raise instead of starting empty when the file is missing

        Raises:
            FileNotFoundError: If required and the file does not exist
            ConfigError: If the file is not a YAML mapping
        """
        config_path = Path(self.config_file_path)

        if not config_path.exists():
            if required:
                raise FileNotFoundError(f"Config file not found: {config_path}")
            self._config = {}
            return

        try:
            with open(config_path, "r", encoding="utf-8") as f:
                loaded = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"Failed to parse config file {config_path}: {e}") from e

        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"Config file {config_path} must contain a mapping at the top level")
        self._config = loaded

    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Get configuration value through dot-separated path.

        Example:
            >>> config.get("access.d0")
            1609.0
            >>> config.get("network.workers", 4)
            4
        """
        if self._config is None:
            raise RuntimeError("Config not loaded. Call load_config() first.")

        value: Any = self._config
        for key in key_path.split("."):
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default
        return value

    def env_var_name(self, key_path: str) -> str:
        """'access.d0' -> 'WASHACCESS_ACCESS_D0'."""
        name = "_".join(key_path.split(".")).upper()
        return f"{self.env_prefix}_{name}" if self.env_prefix else name

    def get_with_env(self, key_path: str, default: Any = None) -> Any:
        """
        Get configuration value with environment variable override support.

        Environment values are parsed as YAML scalars or flow lists, so
        WASHACCESS_ACCESS_D0=800 gives 800 and
        WASHACCESS_ACCESS_KINDS="[latrine, water_pump]" gives a list.

        Example:
            >>> # With env var WASHACCESS_ACCESS_SIGMA=300
            >>> config.get_with_env("access.sigma")
            300
        """
        env_name = self.env_var_name(key_path)
        if env_name in os.environ:
            raw = os.environ[env_name]
            try:
                return yaml.safe_load(raw) if raw.strip() else default
            except yaml.YAMLError:
                return raw
        return self.get(key_path, default)

    @property
    def data(self) -> Dict[str, Any]:
        """The raw configuration dictionary."""
        if self._config is None:
            raise RuntimeError("Config not loaded. Call load_config() first.")
        return self._config

    def reload(self) -> None:
        self.load_config()

    def to_run_config(self, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
        """
        Build the validated RunConfig for one run.

        Args:
            overrides: RunConfig field values from the command line; None values
                are ignored. Nested settings use "scenario.<field>" or
                "masks.<field>" keys.

        Raises:
            ConfigError: If the merged values fail validation
        """
        if self._config is None:
            self.load_config()

        values: Dict[str, Any] = {}
        nested: Dict[str, Dict[str, Any]] = {"scenario": {}, "masks": {}}
        for key_path, field_name, sub_field in _RUN_KEYS:
            value = self.get_with_env(key_path)
            if value is None:
                continue
            if sub_field:
                nested[field_name][sub_field] = value
            else:
                values[field_name] = value

        for key, value in (overrides or {}).items():
            if value is None:
                continue
            if "." in key:
                group, sub_field = key.split(".", 1)
                nested.setdefault(group, {})[sub_field] = value
            else:
                values[key] = value

        for group, fields in nested.items():
            if fields:
                values[group] = fields

        try:
            return RunConfig(**values)
        except ValidationError as e:
            raise ConfigError(f"Invalid run configuration: {e}") from e

    def logging_settings(self) -> Dict[str, Any]:
        """Log directory and levels for setup_logging()."""
        return {
            "log_dir": self.get_with_env("logging.dir", "log"),
            "console_level": self.get_with_env("logging.console_level", "WARNING"),
            "file_level": self.get_with_env("logging.file_level", "INFO"),
        }
