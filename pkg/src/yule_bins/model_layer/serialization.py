"""Columnar CSV dumps of split sequences and occupancy counts, for debugging."""

from __future__ import annotations

import logging
import os

import numpy as np
import pandas as pd

from yule_bins.model_layer.occupancy import OccupancyCounts, ThrowMode
from yule_bins.model_layer.splits import SplitSequence, splits_from_increments

logger = logging.getLogger(__name__)

SPLIT_COLUMNS = ["index", "increment", "time", "martingale"]
OCCUPANCY_COLUMNS = ["index", "count"]
TAIL_INDEX = 0  # bins are 1-based, row 0 carries the tail count


def splits_to_frame(splits: SplitSequence) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "index": np.arange(1, splits.n_bins + 1),
            "increment": splits.increments,
            "time": splits.times,
            "martingale": splits.martingale,
        },
        columns=SPLIT_COLUMNS,
    )


def write_splits_csv(splits: SplitSequence, filepath: str) -> None:
    splits_to_frame(splits).to_csv(filepath, index=False, float_format="%.17g")
    logger.debug("wrote %d splits to %s", splits.n_bins, filepath)


def read_splits_csv(filepath: str) -> SplitSequence:
    """Rebuild a split sequence from its increments column."""
    if not os.path.exists(filepath):
        raise FileNotFoundError(f"The file {filepath} does not exist.")
    frame = pd.read_csv(filepath)
    missing = set(SPLIT_COLUMNS) - set(frame.columns)
    if missing:
        raise ValueError(f"split CSV lacks columns {sorted(missing)}")
    return splits_from_increments(frame.sort_values("index")["increment"].to_numpy(dtype=float))


def occupancy_to_frame(occ: OccupancyCounts) -> pd.DataFrame:
    index = np.concatenate((np.arange(1, occ.n_bins + 1), [TAIL_INDEX]))
    count = np.concatenate((occ.counts, [occ.tail_count]))
    return pd.DataFrame({"index": index, "count": count}, columns=OCCUPANCY_COLUMNS)


def write_occupancy_csv(occ: OccupancyCounts, filepath: str) -> None:
    occupancy_to_frame(occ).to_csv(filepath, index=False)


def read_occupancy_csv(
    filepath: str, mode: ThrowMode | str, n_balls_requested: int
) -> OccupancyCounts:
    if not os.path.exists(filepath):
        raise FileNotFoundError(f"The file {filepath} does not exist.")
    frame = pd.read_csv(filepath)
    if list(frame.columns) != OCCUPANCY_COLUMNS:
        raise ValueError(f"occupancy CSV must have columns {OCCUPANCY_COLUMNS}")
    bins = frame[frame["index"] != TAIL_INDEX].sort_values("index")
    tail_rows = frame.loc[frame["index"] == TAIL_INDEX, "count"]
    tail = int(tail_rows.iloc[0]) if len(tail_rows) else 0
    counts = bins["count"].to_numpy(dtype=np.int64)
    return OccupancyCounts(
        counts, tail, n_balls_requested, ThrowMode(mode), int(counts.sum()) + tail
    )
