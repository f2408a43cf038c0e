import json

import pytest

from yule_bins.experiment_layer.config_handler import (
    DEFAULT_MASTER_SEED,
    DEFAULT_OUTPUT_DIR,
    ConfigError,
    ConfigHandler,
    parse_override,
)
from yule_bins.utils import THREADS_ENV


class _FakeExperiment:
    defaults = {"n": 1000.0, "replications": 10, "flag": False, "grid": [1.0, 2.0], "mode": "exact"}

    def check_parameters(self, parameters) -> None:
        if parameters["n"] <= 0:
            raise ValueError("n must be positive")


@pytest.fixture
def handler(monkeypatch) -> ConfigHandler:
    monkeypatch.delenv(THREADS_ENV, raising=False)
    return ConfigHandler({"fake": _FakeExperiment()})


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "fake.json"
    path.write_text(json.dumps({"experiment_id": "fake", "n": 50, "master_seed": 7, "threads": 2}))
    return str(path)


def test_defaults_fill_missing_parameters(handler: ConfigHandler) -> None:
    # Act
    config = handler.build({"experiment_id": "fake"})

    # Assert
    assert config.parameters == _FakeExperiment.defaults
    assert config.parameters["grid"] is not _FakeExperiment.defaults["grid"]
    assert config.master_seed == DEFAULT_MASTER_SEED
    assert config.output_dir == DEFAULT_OUTPUT_DIR
    assert config.threads == 1


def test_file_then_overrides(handler: ConfigHandler, config_file: str) -> None:
    # Act
    config = handler.load_config(config_file, ["replications=20", "grid=[3, 4]", "mode=poissonized"])

    # Assert
    assert config.parameters["n"] == 50.0
    assert isinstance(config.parameters["n"], float)
    assert config.parameters["replications"] == 20
    assert config.parameters["grid"] == [3.0, 4.0]
    assert config.parameters["mode"] == "poissonized"
    assert config.master_seed == 7
    assert config.threads == 2


def test_overrides_alone(handler: ConfigHandler) -> None:
    config = handler.load_config(None, ["experiment_id=fake", "flag=true"])

    assert config.parameters["flag"] is True


@pytest.mark.parametrize(
    "item, expected",
    [("a=1", ("a", 1)), ("a=1.5", ("a", 1.5)), ("a=[1,2]", ("a", [1, 2])), ("a=x=y", ("a", "x=y"))],
)
def test_parse_override(item: str, expected) -> None:
    assert parse_override(item) == expected


@pytest.mark.parametrize("item", ["novalue", "=3"])
def test_parse_override_rejects(item: str) -> None:
    with pytest.raises(ConfigError):
        parse_override(item)


@pytest.mark.parametrize(
    "raw, message",
    [
        ({}, "experiment_id is required"),
        ({"experiment_id": "other"}, "unknown experiment_id"),
        ({"experiment_id": "fake", "bogus": 1}, "unknown parameters"),
        ({"experiment_id": "fake", "replications": 1.5}, "integer"),
        ({"experiment_id": "fake", "replications": True}, "integer"),
        ({"experiment_id": "fake", "n": "big"}, "number"),
        ({"experiment_id": "fake", "flag": 1}, "true or false"),
        ({"experiment_id": "fake", "grid": 1.0}, "list"),
        ({"experiment_id": "fake", "mode": 3}, "string"),
        ({"experiment_id": "fake", "n": float("inf")}, "finite"),
        ({"experiment_id": "fake", "n": -1.0}, "positive"),
        ({"experiment_id": "fake", "master_seed": -1}, "64-bit"),
        ({"experiment_id": "fake", "master_seed": "seven"}, "master_seed"),
        ({"experiment_id": "fake", "output_dir": ""}, "output_dir"),
        ({"experiment_id": "fake", "threads": 0}, "threads"),
    ],
)
def test_build_rejects(handler: ConfigHandler, raw, message: str) -> None:
    with pytest.raises(ConfigError, match=message):
        handler.build(raw)


def test_threads_env_wins(monkeypatch) -> None:
    monkeypatch.setenv(THREADS_ENV, "3")
    handler = ConfigHandler({"fake": _FakeExperiment()})

    assert handler.build({"experiment_id": "fake", "threads": 1}).threads == 3


def test_read_file_errors(handler: ConfigHandler, tmp_path) -> None:
    # Arrange
    yaml_file = tmp_path / "config.yaml"
    yaml_file.write_text("experiment_id: fake\n")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    nested = tmp_path / "nested.json"
    nested.write_text(json.dumps({"experiment_id": "fake", "inner": {"a": 1}}))
    listed = tmp_path / "listed.json"
    listed.write_text("[1, 2]")

    # Act / Assert
    with pytest.raises(FileNotFoundError, match="does not exist"):
        handler.read_file(str(tmp_path / "missing.json"))
    with pytest.raises(ConfigError, match="unsupported"):
        handler.read_file(str(yaml_file))
    with pytest.raises(ConfigError, match="not valid JSON"):
        handler.read_file(str(broken))
    with pytest.raises(ConfigError, match="nested"):
        handler.read_file(str(nested))
    with pytest.raises(ConfigError, match="one JSON object"):
        handler.read_file(str(listed))


def test_config_to_dict(handler: ConfigHandler) -> None:
    record = handler.build({"experiment_id": "fake"}).to_dict()

    assert set(record) == {"experiment_id", "parameters", "master_seed", "output_dir", "threads"}
