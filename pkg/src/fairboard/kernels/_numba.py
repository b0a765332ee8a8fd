"""Numba backend: tight loops compiled with @njit, disk-cached."""

from __future__ import annotations

import numpy as np
from numba import njit

from ._numpy import BYTE_TABLE_U32

NAME = "numba"


@njit(cache=True, nogil=True)
def _crc32c_loop(buf: np.ndarray, table: np.ndarray) -> np.uint32:
    crc = np.uint32(0xFFFFFFFF)
    for i in range(buf.size):
        crc = table[(crc ^ buf[i]) & np.uint32(0xFF)] ^ (crc >> np.uint32(8))
    return crc ^ np.uint32(0xFFFFFFFF)


def crc32c(data) -> int:
    buf = np.frombuffer(bytes(data), dtype=np.uint8)
    return int(_crc32c_loop(buf, BYTE_TABLE_U32))


@njit(cache=True, nogil=True)
def _group_confusion_loop(scores, labels, group_ids, thresholds):
    out = np.zeros((thresholds.size, 4), dtype=np.int64)
    for i in range(scores.size):
        g = group_ids[i]
        cat = 2 * np.int64(scores[i] >= thresholds[g]) + labels[i]
        out[g, cat] += 1
    return out


def group_confusion(scores, labels, group_ids, thresholds) -> np.ndarray:
    return _group_confusion_loop(
        np.ascontiguousarray(scores, dtype=np.float64),
        np.ascontiguousarray(labels, dtype=np.int64),
        np.ascontiguousarray(group_ids, dtype=np.int64),
        np.ascontiguousarray(thresholds, dtype=np.float64),
    )


@njit(cache=True, nogil=True)
def _pearson_moments_loop(x, y):
    # Single pass, Welford-style co-moment updates.
    mx = 0.0
    my = 0.0
    sxx = 0.0
    syy = 0.0
    sxy = 0.0
    for i in range(x.size):
        dx = x[i] - mx
        dy = y[i] - my
        k = i + 1
        mx += dx / k
        my += dy / k
        sxx += dx * (x[i] - mx)
        syy += dy * (y[i] - my)
        sxy += dx * (y[i] - my)
    return sxy, sxx, syy


def pearson_moments(x, y) -> tuple[float, float, float]:
    sxy, sxx, syy = _pearson_moments_loop(
        np.ascontiguousarray(x, dtype=np.float64), np.ascontiguousarray(y, dtype=np.float64)
    )
    return float(sxy), float(sxx), float(syy)
