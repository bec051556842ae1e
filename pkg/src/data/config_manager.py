import os
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)

DEFAULT_FREE_BIT_LIMIT = 30
FREE_BIT_LIMIT_ENV = "PERSYM_FREE_BIT_LIMIT"
CONFIG_DIR_ENV = "PERSYM_CONFIG_DIR"

ENGINES = ("naive", "prefix")
OUTPUT_FORMATS = ("table", "json", "csv")


def resolve_free_bit_limit(explicit: Optional[int] = None, configured: Optional[int] = None) -> int:
    """
    Pick the free-bit limit: explicit value, then the PERSYM_FREE_BIT_LIMIT
    environment variable, then the configured value, then 30.
    """
    if explicit is not None:
        return int(explicit)
    env_value = os.environ.get(FREE_BIT_LIMIT_ENV)
    if env_value:
        try:
            return int(env_value)
        except ValueError:
            logger.warning(f"Ignoring non-integer {FREE_BIT_LIMIT_ENV}={env_value!r}")
    if configured is not None:
        return int(configured)
    return DEFAULT_FREE_BIT_LIMIT


class ConfigManager:
    """
    Persistent defaults for census runs: free-bit limit, engine, workers,
    shards, output format and log level.

    Args:
        config_dir: Directory holding the config file. Defaults to
            $PERSYM_CONFIG_DIR, then ~/.persym_census.
        config_filename: Name of the JSON file inside ``config_dir``.
    """
    DEFAULT_CONFIG = {
        "free_bit_limit": DEFAULT_FREE_BIT_LIMIT,
        "default_engine": "prefix",
        "default_workers": 1,
        "default_shards": 1,
        "output_format": "table",
        "log_level": "INFO",
    }

    def __init__(self, config_dir: Optional[str] = None, config_filename: str = "config.json"):
        if config_dir is None:
            config_dir = os.environ.get(CONFIG_DIR_ENV) or os.path.join(Path.home(), ".persym_census")
        self.config_dir = str(config_dir)
        self.config_path = os.path.join(self.config_dir, config_filename)
        os.makedirs(self.config_dir, exist_ok=True)
        self.config: Dict[str, Any] = self._read()

    def _read(self) -> Dict[str, Any]:
        """
        Read the config file, writing the defaults when there is none.

        Keys missing from an older file take their default; unknown keys are
        kept. An unreadable file falls back to defaults without overwriting it.
        """
        if not os.path.exists(self.config_path):
            logger.info(f"No config at {self.config_path}; writing defaults")
            config = dict(self.DEFAULT_CONFIG)
            self._write(config)
            return config
        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                stored = json.load(f)
        except (OSError, ValueError) as e:
            logger.error(f"Cannot read config {self.config_path}: {e}; using defaults")
            return dict(self.DEFAULT_CONFIG)
        if not isinstance(stored, dict):
            logger.error(f"Config {self.config_path} is not a JSON object; using defaults")
            return dict(self.DEFAULT_CONFIG)
        logger.debug(f"Loaded configuration from {self.config_path}")
        return {**self.DEFAULT_CONFIG, **stored}

    def _write(self, config: Dict[str, Any]) -> bool:
        tmp_path = self.config_path + ".tmp"
        try:
            with open(tmp_path, "w", encoding="utf-8") as f:
                json.dump(config, f, indent=4)
            os.replace(tmp_path, self.config_path)
            logger.debug(f"Configuration saved to {self.config_path}")
            return True
        except OSError as e:
            logger.error(f"Cannot save config {self.config_path}: {e}")
            return False

    def save(self) -> bool:
        return self._write(self.config)

    # Typed accessors

    @property
    def free_bit_limit(self) -> int:
        """Free-bit limit after applying the environment override."""
        return resolve_free_bit_limit(configured=self.config.get("free_bit_limit"))

    @free_bit_limit.setter
    def free_bit_limit(self, limit: int):
        if int(limit) < 1:
            raise ValueError(f"Free-bit limit must be positive, got {limit}")
        self.set_value("free_bit_limit", int(limit))

    @property
    def default_engine(self) -> str:
        engine = self.config.get("default_engine", "prefix")
        return engine if engine in ENGINES else "prefix"

    @default_engine.setter
    def default_engine(self, engine: str):
        if engine not in ENGINES:
            raise ValueError(f"Unknown engine {engine!r}; expected one of {ENGINES}")
        self.set_value("default_engine", engine)

    @property
    def default_workers(self) -> int:
        return max(1, int(self.config.get("default_workers", 1)))

    @property
    def default_shards(self) -> int:
        return max(1, int(self.config.get("default_shards", 1)))

    @property
    def output_format(self) -> str:
        fmt = self.config.get("output_format", "table")
        return fmt if fmt in OUTPUT_FORMATS else "table"

    @property
    def log_level(self) -> str:
        return str(self.config.get("log_level", "INFO")).upper()

    def reset_to_defaults(self) -> None:
        self.config = dict(self.DEFAULT_CONFIG)
        self.save()

    def get_value(self, key: str, default: Any = None) -> Any:
        return self.config.get(key, default)

    def set_value(self, key: str, value: Any) -> None:
        self.config[key] = value
        self.save()
