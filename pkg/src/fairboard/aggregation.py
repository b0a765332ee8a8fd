"""Series alignment and bounded-memory downsampling on the step axis."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import InvalidK, InvalidWindow
from .runs import Catalog, ScalarSeries


class AlignmentMode(str, Enum):
    INTERSECT = "intersect"
    CARRY_FORWARD = "carry_forward"


class WindowStat(str, Enum):
    MEAN = "mean"
    MIN = "min"
    MAX = "max"
    LAST = "last"


@dataclass(frozen=True)
class AlignedTable:
    steps: list[int]
    columns: dict[tuple[str, str], list[float | None]]


def reservoir_downsample(series: ScalarSeries, k: int, seed: int) -> ScalarSeries:
    """Cap a series at k points, always keeping the first and most recent
    point; interior points are a uniform random subset, deterministic for
    a fixed (series, k, seed). Identity when the series already fits."""
    if k < 2:
        raise InvalidK(f"reservoir size must be >= 2, got {k}")
    n = len(series)
    if n <= k:
        return series
    rng = np.random.default_rng(seed)
    interior = rng.choice(n - 2, size=k - 2, replace=False) + 1
    idx = np.concatenate(([0], np.sort(interior), [n - 1]))
    return ScalarSeries(series.tag, series.steps[idx], series.wall_times[idx], series.values[idx])


def align_series(
    columns: Sequence[tuple[str, str]], catalog: Catalog, mode: AlignmentMode = AlignmentMode.INTERSECT
) -> AlignedTable:
    """Tabulate the requested (run, tag) columns on a shared step axis.

    INTERSECT keeps only steps present in every column; CARRY_FORWARD uses
    the union of steps, repeating each column's last value at or before a
    step and leaving entries before its first step missing.
    """
    mode = AlignmentMode(mode)
    picked = [(key, catalog.series(*key)) for key in columns]
    step_sets = [set(s.steps.tolist()) for _, s in picked]
    if not step_sets:
        return AlignedTable(steps=[], columns={})
    if mode is AlignmentMode.INTERSECT:
        steps = sorted(set.intersection(*step_sets))
    else:
        steps = sorted(set.union(*step_sets))
    steps_arr = np.array(steps, dtype=np.int64)
    out: dict[tuple[str, str], list[float | None]] = {}
    for key, series in picked:
        if mode is AlignmentMode.INTERSECT:
            pos = np.searchsorted(series.steps, steps_arr)
            out[key] = series.values[pos].tolist()
        else:
            pos = np.searchsorted(series.steps, steps_arr, side="right") - 1
            column: list[float | None] = [
                float(series.values[p]) if p >= 0 else None for p in pos.tolist()
            ]
            out[key] = column
    return AlignedTable(steps=steps, columns=out)


def window_aggregate(series: ScalarSeries, window: int, stat: WindowStat = WindowStat.MEAN) -> ScalarSeries:
    """Collapse a series into one point per non-empty window
    [n*window, (n+1)*window), stamped at the window start."""
    if window <= 0:
        raise InvalidWindow(f"window width must be positive, got {window}")
    stat = WindowStat(stat)
    n = len(series)
    if n == 0:
        return series
    bins = series.steps // window
    boundaries = np.flatnonzero(np.append(True, bins[1:] != bins[:-1]))
    out_steps, out_walls, out_values = [], [], []
    for i, start in enumerate(boundaries):
        stop = boundaries[i + 1] if i + 1 < len(boundaries) else n
        chunk = series.values[start:stop]
        if stat is WindowStat.MEAN:
            value = float(chunk.mean())
        elif stat is WindowStat.MIN:
            value = float(chunk.min())
        elif stat is WindowStat.MAX:
            value = float(chunk.max())
        else:
            value = float(chunk[-1])
        out_steps.append(int(bins[start]) * window)
        out_walls.append(float(series.wall_times[stop - 1]))
        out_values.append(value)
    return ScalarSeries(
        series.tag,
        np.array(out_steps, dtype=np.int64),
        np.array(out_walls, dtype=np.float64),
        np.array(out_values, dtype=np.float64),
    )
