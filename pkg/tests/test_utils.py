import logging
import os

import pytest

from yule_bins.utils import THREADS_ENV, configure_logging, resolve_threads, smoke_check


def test_configure_logging_installs_one_handler() -> None:
    # Act
    first = configure_logging(logging.INFO)
    second = configure_logging(logging.DEBUG)

    # Assert
    assert first is second
    assert sum(getattr(h, "_yule_bins", False) for h in first.handlers) == 1
    assert first.level == logging.DEBUG


@pytest.mark.parametrize(
    "value, env, expected",
    [
        (None, {}, 1),
        (4, {}, 4),
        ("2", {}, 2),
        (1, {THREADS_ENV: "6"}, 6),
        ("auto", {}, os.cpu_count() or 1),
    ],
)
def test_resolve_threads(value, env, expected: int) -> None:
    assert resolve_threads(value, env) == expected


@pytest.mark.parametrize("value", [0, -2, "many", True, 1.5])
def test_resolve_threads_rejects(value) -> None:
    with pytest.raises(ValueError, match="threads"):
        resolve_threads(value, {})


def test_smoke_check() -> None:
    assert smoke_check()
