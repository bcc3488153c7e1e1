"""Configuration management."""

import configparser
import os
from dataclasses import dataclass, replace
from pathlib import Path

from privslice.dataset import DEFAULT_DATASET_PATH
from privslice.errors import ConfigError

DEFAULT_CONFIG_PATH = Path.home() / ".config" / "privslice" / "config.ini"
SECTION = "privslice"


def _workers(value: str, origin: str) -> int:
    try:
        workers = int(value)
    except ValueError:
        workers = 0
    if workers < 1:
        msg = f"{origin}: workers must be a positive integer, got {value!r}"
        raise ConfigError(msg)
    return workers


@dataclass
class Config:
    """Analysis defaults, overridable from the command line."""

    dataset: Path | None = None
    include_control_deps: bool = False
    workers: int = 1

    @classmethod
    def from_env(cls) -> "Config | None":
        """Load configuration from environment variables."""
        dataset = os.environ.get("PRIVSLICE_DATASET")
        workers = os.environ.get("PRIVSLICE_WORKERS")
        if not dataset and not workers:
            return None
        return cls(
            dataset=Path(dataset) if dataset else None,
            workers=_workers(workers, "PRIVSLICE_WORKERS") if workers else 0,
        )

    @classmethod
    def load(cls, path: Path = DEFAULT_CONFIG_PATH) -> "Config | None":
        """Load configuration from file."""
        if not path.is_file():
            return None

        config = configparser.ConfigParser(interpolation=None)
        try:
            config.read(path)
            section = config[SECTION] if config.has_section(SECTION) else None
            if section is None:
                return cls()
            dataset = section.get("dataset")
            include = section.getboolean("include_control_deps", fallback=False)
        except (configparser.Error, ValueError) as err:
            msg = f"{path}: {err}"
            raise ConfigError(msg) from err
        return cls(
            dataset=Path(dataset).expanduser() if dataset else None,
            include_control_deps=include,
            workers=_workers(section.get("workers", "1"), str(path)),
        )

    @classmethod
    def resolve(cls, path: Path = DEFAULT_CONFIG_PATH) -> "Config":
        """The file's settings with environment variables taking precedence."""
        config = cls.load(path) or cls()
        env = cls.from_env()
        if env is None:
            return config
        return replace(
            config,
            dataset=env.dataset or config.dataset,
            workers=env.workers or config.workers,
        )

    def dataset_path(self, flag: Path | None = None) -> Path:
        """The dataset to load: the flag, then the configured one, then the bundled default."""
        return flag or self.dataset or DEFAULT_DATASET_PATH
