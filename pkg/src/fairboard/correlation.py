"""Pairwise correlation over intersect-aligned metric series.

Pairs are aligned on their common steps only; carrying values forward
would fabricate correlation, so imputation is deliberately absent. Cells
are None (serialized null) when a pair shares fewer than 2 steps or when
either column is constant on the shared steps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import LengthMismatch
from .runs import Catalog


@dataclass(frozen=True)
class CorrelationMatrix:
    labels: list[tuple[str, str]]
    values: list[list[float | None]]
    support: list[list[int]]

    def to_payload(self) -> dict:
        return {
            "labels": [f"{run}/{tag}" for run, tag in self.labels],
            "values": self.values,
            "support": self.support,
        }


def pearson(x: Sequence[float], y: Sequence[float]) -> float | None:
    """Pearson product-moment coefficient; None for n < 2 or a constant
    input. Raises LENGTH_MISMATCH when the sequences differ in length."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if len(xa) != len(ya):
        raise LengthMismatch(f"sequences differ in length: {len(xa)} vs {len(ya)}")
    if len(xa) < 2:
        return None
    if np.all(xa == xa[0]) or np.all(ya == ya[0]):
        return None
    sxy, sxx, syy = kernels.pearson_moments(xa, ya)
    if sxx <= 0.0 or syy <= 0.0:
        return None  # variance lost to rounding: numerically constant
    # divide sequentially; sxx * syy can underflow for tiny-variance inputs
    r = (sxy / np.sqrt(sxx)) / np.sqrt(syy)
    return float(min(1.0, max(-1.0, r)))


def correlation_matrix(columns: Sequence[tuple[str, str]], catalog: Catalog) -> CorrelationMatrix:
    """Symmetric Pearson matrix over (run, tag) columns, each pair aligned
    on the intersection of its step sets; support records pairwise n."""
    series = [catalog.series(run, tag) for run, tag in columns]
    k = len(series)
    values: list[list[float | None]] = [[None] * k for _ in range(k)]
    support = [[0] * k for _ in range(k)]
    for i in range(k):
        support[i][i] = len(series[i])
        if len(series[i]) >= 2 and not np.all(series[i].values == series[i].values[0]):
            values[i][i] = 1.0
    for i in range(k):
        for j in range(i + 1, k):
            a, b = series[i], series[j]
            common, ia, ib = np.intersect1d(a.steps, b.steps, assume_unique=True, return_indices=True)
            support[i][j] = support[j][i] = len(common)
            if len(common) < 2:
                continue
            r = pearson(a.values[ia], b.values[ib])
            values[i][j] = values[j][i] = r
    return CorrelationMatrix(labels=[tuple(c) for c in columns], values=values, support=support)
