import logging
from pathlib import Path
from typing import Any, Dict, NamedTuple, Optional

import yaml

from .core import ConfigError

logger = logging.getLogger(__name__)


class RunConfig(NamedTuple):
    tolerance: float = 1e-9
    cycle_length_cap: int = 12
    link_radius: Optional[int] = None    # None: the label m of each pair vertex
    exponent_bound: int = 1
    chain_cap: int = 10_000
    trials: int = 1000
    seed: int = 0
    lipschitz_samples: int = 2000
    float_digits: int = 17

    def to_record(self) -> Dict[str, Any]:
        return self._asdict()


_TYPES = {
    "tolerance": float,
    "cycle_length_cap": int,
    "link_radius": int,
    "exponent_bound": int,
    "chain_cap": int,
    "trials": int,
    "seed": int,
    "lipschitz_samples": int,
    "float_digits": int,
}


def _coerce(key: str, value: Any) -> Any:
    if value is None and key == "link_radius":
        return None
    kind = _TYPES[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{key}' must be a number, got {value!r}")
    if kind is int and value != int(value):
        raise ConfigError(f"'{key}' must be an integer, got {value!r}")
    if value <= 0 and key != "seed":
        raise ConfigError(f"'{key}' must be positive, got {value!r}")
    return kind(value)


def config_from_mapping(data: Optional[Dict[str, Any]]) -> RunConfig:
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError(f"configuration must be a mapping, got {type(data).__name__}")
    unknown = sorted(set(data) - set(_TYPES))
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    return RunConfig(**{key: _coerce(key, value) for key, value in data.items()})


def load_config(path: Optional[Path] = None) -> RunConfig:
    """
    Loads run defaults from a YAML file; missing keys keep their defaults.

    Raises:
        ConfigError: unknown keys or values of the wrong type.
    """
    if path is None:
        return RunConfig()
    with open(path, "r") as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"{path} is not valid YAML: {e}") from None
    config = config_from_mapping(data)
    logger.debug(f"Loaded configuration from {path}: {config}")
    return config
