import os
import logging
from typing import Any, Dict, Optional

import yaml


class ConfigError(Exception):
    def __init__(self, file: Optional[str], message: str):
        super().__init__(f"error in configuration file {file}: {message}")
        self.file = file


class SingletonMeta(type):
    """
    One instance per class.  Later calls return the first instance whatever
    their arguments; reset() forgets it so the next call reads the
    configuration again.
    """

    _instances = {}

    def __call__(cls, *args, **kwargs):
        if cls not in cls._instances:
            instance = super().__call__(*args, **kwargs)
            cls._instances[cls] = instance
        return cls._instances[cls]

    def reset(cls) -> None:
        cls._instances.pop(cls, None)


DEFAULTS = {
    "log": {"level": "info", "file": None},
    "limits": {"node_limit": 20000, "depth": 3, "max_flips": 500},
    "rng": {"seed": 0},
}

LOGGING_LEVELS = {
    "debug": logging.DEBUG,
    "info": logging.INFO,
    "warning": logging.WARNING,
}


class ClusterLabConfig(metaclass=SingletonMeta):
    CONFIG_FILE_NAME = "config.yaml"
    ENVIRONMENT_VARIABLE = "CLUSTERLAB_CONFIG"

    def __init__(self, file: Optional[str] = None):
        self.file = file or self.locate()
        config: Dict[str, Any] = {}
        if self.file is not None:
            try:
                with open(self.file, "r") as config_file:
                    config = yaml.safe_load(config_file) or {}
            except FileNotFoundError:
                raise ConfigError(self.file, "file not found") from None
            except yaml.YAMLError as exception:
                raise ConfigError(self.file, f"invalid YAML: {exception}") from exception
        if not isinstance(config, dict):
            raise ConfigError(self.file, "top level must be a mapping")
        self.logging_level = self._get(config, "log", "level", str)
        if self.logging_level not in LOGGING_LEVELS:
            raise ConfigError(self.file, f"unknown log level {self.logging_level}")
        self.log_file = self._get(config, "log", "file", str)
        self.node_limit = self._get(config, "limits", "node_limit", int)
        self.depth = self._get(config, "limits", "depth", int)
        self.max_flips = self._get(config, "limits", "max_flips", int)
        self.rng_seed = self._get(config, "rng", "seed", int)

    @classmethod
    def locate(cls) -> Optional[str]:
        """environment variable, then the working directory, then next to this module"""
        if os.environ.get(cls.ENVIRONMENT_VARIABLE):
            return os.environ[cls.ENVIRONMENT_VARIABLE]
        for directory in (os.getcwd(), os.path.dirname(os.path.abspath(__file__))):
            candidate = os.path.join(directory, cls.CONFIG_FILE_NAME)
            if os.path.isfile(candidate):
                return candidate
        return None

    def _get(self, config: Dict[str, Any], section: str, key: str, kind: type):
        values = config.get(section) or {}
        if not isinstance(values, dict):
            raise ConfigError(self.file, f"section {section} must be a mapping")
        value = values.get(key, DEFAULTS[section][key])
        if value is None:
            return None
        # bool is a subclass of int
        if not isinstance(value, kind) or isinstance(value, bool):
            raise ConfigError(self.file, f"{section}.{key} must be of type {kind.__name__}")
        return value

    @property
    def level(self) -> int:
        return LOGGING_LEVELS[self.logging_level]
