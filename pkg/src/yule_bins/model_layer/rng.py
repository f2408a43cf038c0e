"""Reproducible random streams and replication fan-out.

Every replication owns one `RngStream`. A stream is a pair (master_seed, stream_index) and maps
to a numpy `Generator` through `SeedSequence(master_seed, spawn_key=(stream_index,))`, so the
draws of a replication depend only on that pair and never on the thread that runs it.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, TypeVar

import numpy as np

from yule_bins.model_layer.constants import STREAM_BLOCK_BITS

logger = logging.getLogger(__name__)

T = TypeVar("T")

MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class RngStream:
    """Identifies one independent random stream."""

    master_seed: int
    """Experiment-wide 64-bit seed."""
    stream_index: int = 0
    """Index of the stream below the master seed; replication r uses stream_index r."""

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed <= MAX_SEED:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.stream_index < 0:
            raise ValueError(f"stream_index must be non-negative, got {self.stream_index}")

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index,))
        return np.random.default_rng(seq)

    def child(self, offset: int) -> "RngStream":
        """Stream `offset` inside this stream's block."""
        if offset < 0:
            raise ValueError(f"offset must be non-negative, got {offset}")
        return RngStream(self.master_seed, self.stream_index + offset)

    @classmethod
    def block(cls, master_seed: int, block_index: int) -> "RngStream":
        """First stream of block `block_index`; blocks never overlap for < 2**32 replications."""
        return cls(master_seed, block_index << STREAM_BLOCK_BITS)


def as_generator(rng: RngStream | np.random.Generator) -> np.random.Generator:
    """Accept either a stream descriptor or an already-positioned generator."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def run_replications(
    task: Callable[[RngStream], T],
    n_replications: int,
    base: RngStream,
    threads: int = 1,
) -> List[T]:
    """Run `task` once per replication and return the results in replication order.

    Replication r receives `base.child(r)`. The task must not touch shared mutable state.

    Args:
        task: Callable run once per replication.
        n_replications: Number of replications, at least 1.
        base: First stream of the block reserved for this batch.
        threads: Worker threads; 1 runs inline.

    Returns:
        List[T]: Task results indexed by replication.
    """
    if n_replications < 1:
        raise ValueError(f"n_replications must be >= 1, got {n_replications}")
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")

    streams = [base.child(r) for r in range(n_replications)]
    logger.debug(
        "running %d replications on %d thread(s) from stream %d",
        n_replications,
        threads,
        base.stream_index,
    )
    if threads == 1:
        return [task(stream) for stream in streams]

    with ThreadPoolExecutor(max_workers=threads) as executor:
        # map preserves input order, so the reduction is thread-count independent
        return list(executor.map(task, streams))
