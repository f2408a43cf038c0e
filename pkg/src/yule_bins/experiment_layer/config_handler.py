"""Loading and validation of flat JSON experiment configurations.

A configuration file is one JSON object. Four keys are reserved (experiment_id, master_seed,
output_dir, threads); every other key is an experiment parameter. Command-line overrides of the
form key=value are applied on top of the file.
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple

from yule_bins.model_layer.rng import MAX_SEED
from yule_bins.utils import resolve_threads

logger = logging.getLogger(__name__)

RESERVED_KEYS = ("experiment_id", "master_seed", "output_dir", "threads")
DEFAULT_MASTER_SEED = 20090117
DEFAULT_OUTPUT_DIR = "yule-bins-results"


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    experiment_id: str
    """One of the catalog ids, e.g. "first-empty"."""
    parameters: Dict[str, Any] = field(default_factory=dict)
    """Experiment defaults updated by the file and then by the overrides."""
    master_seed: int = DEFAULT_MASTER_SEED
    """64-bit seed from which every replication stream is derived."""
    output_dir: str = DEFAULT_OUTPUT_DIR
    """Directory receiving results.csv, summary.json and plotdata/."""
    threads: int = 1
    """Worker threads for replication fan-out."""

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def parse_override(item: str) -> Tuple[str, Any]:
    """Split "key=value"; the value is read as JSON when it parses, as a string otherwise."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form key=value")
    key, raw = item.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError(f"override {item!r} has an empty key")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def _coerce(name: str, value: Any, default: Any) -> Any:
    """Bring `value` to the type of the experiment default `default`."""
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"parameter {name} must be true or false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool):
            raise ConfigError(f"parameter {name} must be an integer, got {value!r}")
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            raise ConfigError(f"parameter {name} must be an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"parameter {name} must be a number, got {value!r}")
        return float(value)
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"parameter {name} must be a list, got {value!r}")
        if default:
            return [_coerce(f"{name}[{pos}]", v, default[0]) for pos, v in enumerate(value)]
        return list(value)
    if isinstance(default, str) and not isinstance(value, str):
        raise ConfigError(f"parameter {name} must be a string, got {value!r}")
    return value


class ConfigHandler:
    """Builds validated ExperimentConfig records against a catalog of experiments.

    `catalog` maps experiment ids to objects exposing `defaults` and `check_parameters`.
    """

    def __init__(self, catalog: Mapping[str, Any]):
        self._catalog = catalog

    def read_file(self, filepath: str) -> Dict[str, Any]:
        """Read one flat JSON object from `filepath`."""
        assert isinstance(filepath, str), "Filepath must be a string."
        assert len(filepath) > 0, "Filepath cannot be empty."

        if not os.path.exists(filepath):
            raise FileNotFoundError(f"The file {filepath} does not exist.")
        extension = os.path.splitext(filepath)[1].lower()
        if extension != ".json":
            raise ConfigError(f"unsupported config file type {extension!r}; use .json")

        logger.info("loading config %s", filepath)
        with open(filepath, "r", encoding="utf-8") as handle:
            try:
                raw = json.load(handle)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{filepath} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{filepath} must hold one JSON object")
        for key, value in raw.items():
            if isinstance(value, dict):
                raise ConfigError(f"key {key!r}: nested objects are not allowed")
        return raw

    def load_config(
        self, filepath: Optional[str] = None, overrides: Iterable[str] = ()
    ) -> ExperimentConfig:
        """File contents (if any) updated by --set overrides, validated into a config.

        Raises:
            FileNotFoundError: If `filepath` does not exist.
            ConfigError: On any invalid key or value.
        """
        raw: Dict[str, Any] = self.read_file(filepath) if filepath else {}
        for item in overrides:
            key, value = parse_override(item)
            raw[key] = value
        return self.build(raw)

    def build(self, raw: Mapping[str, Any]) -> ExperimentConfig:
        experiment_id = raw.get("experiment_id")
        if experiment_id is None:
            raise ConfigError("experiment_id is required")
        if experiment_id not in self._catalog:
            raise ConfigError(
                f"unknown experiment_id {experiment_id!r}; choose one of {sorted(self._catalog)}"
            )
        experiment = self._catalog[experiment_id]

        master_seed = raw.get("master_seed", DEFAULT_MASTER_SEED)
        if isinstance(master_seed, float) and master_seed.is_integer():
            master_seed = int(master_seed)
        if isinstance(master_seed, bool) or not isinstance(master_seed, int):
            raise ConfigError(f"master_seed must be an integer, got {master_seed!r}")
        if not 0 <= master_seed <= MAX_SEED:
            raise ConfigError(f"master_seed must be a 64-bit unsigned integer, got {master_seed}")

        output_dir = raw.get("output_dir", DEFAULT_OUTPUT_DIR)
        if not isinstance(output_dir, str) or not output_dir:
            raise ConfigError(f"output_dir must be a non-empty path, got {output_dir!r}")

        try:
            threads = resolve_threads(raw.get("threads", 1))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

        defaults = experiment.defaults
        unknown = sorted(k for k in raw if k not in RESERVED_KEYS and k not in defaults)
        if unknown:
            raise ConfigError(f"unknown parameters for {experiment_id}: {unknown}")
        parameters = {k: _copy(v) for k, v in defaults.items()}
        for key, value in raw.items():
            if key in RESERVED_KEYS:
                continue
            parameters[key] = _coerce(key, value, defaults[key])
        for key, value in parameters.items():
            if isinstance(value, float) and not math.isfinite(value):
                raise ConfigError(f"parameter {key} must be finite, got {value}")
        try:
            experiment.check_parameters(parameters)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

        config = ExperimentConfig(experiment_id, parameters, master_seed, output_dir, threads)
        logger.debug("resolved config %s", config.to_dict())
        return config


def _copy(value: Any) -> Any:
    return list(value) if isinstance(value, list) else value
