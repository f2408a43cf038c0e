"""Global helpers for the yule_bins package: logging setup, thread resolution, smoke check."""

from __future__ import annotations

import logging
import os
from typing import Mapping, Optional

LOG_FORMAT = "%(asctime)s %(levelname)s [%(name)s] %(message)s"
THREADS_ENV = "YULE_BINS_THREADS"


def configure_logging(level: int | str = logging.INFO) -> logging.Logger:
    """Install one stream handler on the package logger.

    Calling it again only changes the level, so repeated CLI invocations inside one process
    (as in the tests) do not stack handlers.
    """
    logger = logging.getLogger("yule_bins")
    if not any(getattr(h, "_yule_bins", False) for h in logger.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._yule_bins = True  # type: ignore[attr-defined]
        logger.addHandler(handler)
    logger.setLevel(level)
    return logger


def resolve_threads(value: int | str | None, env: Optional[Mapping[str, str]] = None) -> int:
    """Worker-thread count from a config value, with YULE_BINS_THREADS taking precedence.

    Args:
        value: Positive integer, "auto" or None (one thread).
        env: Environment mapping; defaults to os.environ.

    Returns:
        int: A positive thread count.

    Raises:
        ValueError: If the value is neither a positive integer nor "auto".
    """
    env = os.environ if env is None else env
    override = env.get(THREADS_ENV)
    if override:
        value = override
    if value is None:
        return 1
    if isinstance(value, str):
        if value.strip().lower() == "auto":
            return os.cpu_count() or 1
        try:
            value = int(value)
        except ValueError as exc:
            raise ValueError(f"threads must be a positive integer or 'auto', got {value!r}") from exc
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ValueError(f"threads must be a positive integer or 'auto', got {value!r}")
    return value


def smoke_check() -> bool:
    """Import every layer and evaluate one closed form; True when the install is usable."""
    from yule_bins.analytic_layer import gumbel_cdf
    from yule_bins.experiment_layer import ExperimentHandler
    from yule_bins.rare_layer import regime_exponents_symbolic
    from yule_bins.stats_layer import mean_estimate

    ok = abs(gumbel_cdf(0.0) - 0.36787944117144233) < 1e-15
    ok = ok and len(ExperimentHandler().catalog()) == 10
    ok = ok and all(v == 0 for v in regime_exponents_symbolic().values())
    ok = ok and mean_estimate([1.0, 1.0]).value == 1.0
    logging.getLogger(__name__).debug("smoke check %s", "passed" if ok else "failed")
    return ok
