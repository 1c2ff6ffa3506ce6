import configparser
import logging
from pathlib import Path
from typing import Optional, Union

from pydantic import ValidationError

from core.errors import ConfigError
from core.models.config_data import RunConfig, config_error

logger = logging.getLogger(__name__)

SECTIONS = tuple(RunConfig.model_fields)


class ConfigLoader:
    """Loads run configurations from INI files and keeps the last one loaded."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(ConfigLoader, cls).__new__(cls)
            cls._instance._config = None
            cls._instance._path = None
        return cls._instance

    @staticmethod
    def parse(text: str, source: str = "<string>") -> dict[str, dict[str, str]]:
        """Sections of an INI document as nested dicts; unknown sections are rejected."""
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str  # keys are case-sensitive (theta_modes vs J)
        try:
            parser.read_string(text, source=source)
        except configparser.Error as e:
            raise ConfigError(f"cannot parse {source}: {e}") from e
        data: dict[str, dict[str, str]] = {}
        for section in parser.sections():
            if section not in SECTIONS:
                raise ConfigError(f"unknown section (expected one of {', '.join(SECTIONS)})", key=section)
            data[section] = dict(parser.items(section))
        return data

    def load_text(self, text: str, source: str = "<string>") -> RunConfig:
        try:
            config = RunConfig(**self.parse(text, source))
        except ValidationError as e:
            raise config_error(e) from e
        self._config = config
        return config

    def load_config(self, path: Union[str, Path]) -> RunConfig:
        """Read and validate a run configuration.

        Raises:
            ConfigError: if the file is missing or a key is unknown, mistyped or out of range.
        """
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"configuration file not found: {path}")
        config = self.load_text(path.read_text(), str(path))
        self._path = path
        logger.info(f"Configuration loaded from {path}")
        return config

    @staticmethod
    def dump_config(config: RunConfig) -> str:
        """INI text that :meth:`load_text` turns back into an equal configuration."""
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        for section, values in config.model_dump(mode="json").items():
            parser[section] = {key: _format(value) for key, value in values.items() if value is not None}
        lines = []
        for section in parser.sections():
            lines.append(f"[{section}]")
            lines.extend(f"{key} = {value}" for key, value in parser[section].items())
            lines.append("")
        return "\n".join(lines)

    @property
    def current(self) -> Optional[RunConfig]:
        return self._config

    def reload_config(self) -> RunConfig:
        if self._path is None:
            raise ConfigError("no configuration file has been loaded")
        config = self.load_config(self._path)
        logger.info("Configuration reloaded")
        return config


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


# Global singleton instance
config_loader = ConfigLoader()


def load_config(path: Union[str, Path]) -> RunConfig:
    return config_loader.load_config(path)


def dump_config(config: RunConfig) -> str:
    return config_loader.dump_config(config)
