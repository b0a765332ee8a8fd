"""Fallback kernel backend: vectorized numpy where possible, stdlib otherwise.

CRC32C has a strict sequential dependency, so the fallback uses the
slicing-by-8 table method on plain ints; the other kernels vectorize.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"

_CASTAGNOLI_REFLECTED = 0x82F63B78


def _byte_table() -> list[int]:
    table = []
    for i in range(256):
        crc = i
        for _ in range(8):
            crc = (crc >> 1) ^ _CASTAGNOLI_REFLECTED if crc & 1 else crc >> 1
        table.append(crc)
    return table


def _slice8_tables() -> list[list[int]]:
    tables = [_byte_table()]
    for _ in range(7):
        prev = tables[-1]
        tables.append([(prev[i] >> 8) ^ tables[0][prev[i] & 0xFF] for i in range(256)])
    return tables


_T = _slice8_tables()
_T0, _T1, _T2, _T3, _T4, _T5, _T6, _T7 = _T

BYTE_TABLE_U32 = np.array(_T0, dtype=np.uint32)  # shared with the numba backend


def crc32c(data) -> int:
    """CRC32C (Castagnoli) of a byte buffer, init/xorout 0xFFFFFFFF."""
    buf = bytes(data)
    crc = 0xFFFFFFFF
    n = len(buf)
    i = 0
    while n - i >= 8:
        lo = int.from_bytes(buf[i : i + 4], "little") ^ crc
        hi = int.from_bytes(buf[i + 4 : i + 8], "little")
        crc = (
            _T7[lo & 0xFF]
            ^ _T6[(lo >> 8) & 0xFF]
            ^ _T5[(lo >> 16) & 0xFF]
            ^ _T4[lo >> 24]
            ^ _T3[hi & 0xFF]
            ^ _T2[(hi >> 8) & 0xFF]
            ^ _T1[(hi >> 16) & 0xFF]
            ^ _T0[hi >> 24]
        )
        i += 8
    while i < n:
        crc = _T0[(crc ^ buf[i]) & 0xFF] ^ (crc >> 8)
        i += 1
    return crc ^ 0xFFFFFFFF


def group_confusion(
    scores: np.ndarray, labels: np.ndarray, group_ids: np.ndarray, thresholds: np.ndarray
) -> np.ndarray:
    """Per-group confusion counts under per-group decision thresholds.

    Returns an int64 array of shape (n_groups, 4) with columns
    (tn, fn, fp, tp); a score >= its group's threshold predicts positive.
    """
    n_groups = len(thresholds)
    if len(scores) == 0:
        return np.zeros((n_groups, 4), dtype=np.int64)
    yhat = scores >= thresholds[group_ids]
    cat = 2 * yhat.astype(np.int64) + labels
    counts = np.bincount(group_ids * 4 + cat, minlength=4 * n_groups)
    return counts.reshape(n_groups, 4).astype(np.int64)


def pearson_moments(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Mean-centered co-moments (sxy, sxx, syy) of two equal-length arrays."""
    dx = x - x.mean()
    dy = y - y.mean()
    return float(dx @ dy), float(dx @ dx), float(dy @ dy)
