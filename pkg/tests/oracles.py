"""Independent reference implementations used as test oracles.

Everything here is deliberately written from first principles (bitwise
CRC, direct pairwise AUC, definition-scan AP, two-pass Pearson) and must
stay decoupled from the package's own implementations.
"""

from __future__ import annotations

import itertools
import math
import struct

import numpy as np

# --- CRC32C, bit by bit ------------------------------------------------------

_POLY_REFLECTED = 0x82F63B78


def crc32c_bitwise(data: bytes) -> int:
    crc = 0xFFFFFFFF
    for byte in data:
        crc ^= byte
        for _ in range(8):
            if crc & 1:
                crc = (crc >> 1) ^ _POLY_REFLECTED
            else:
                crc >>= 1
    return crc ^ 0xFFFFFFFF


def masked_crc32c_ref(data: bytes) -> int:
    crc = crc32c_bitwise(data)
    return (((crc >> 15) | (crc << 17)) + 0xA282EAD8) & 0xFFFFFFFF


def frame_ref(payload: bytes) -> bytes:
    length = struct.pack("<Q", len(payload))
    return (
        length
        + struct.pack("<I", masked_crc32c_ref(length))
        + payload
        + struct.pack("<I", masked_crc32c_ref(payload))
    )


# --- reference protobuf event encoder ----------------------------------------


def _varint_ref(value: int) -> bytes:
    if value < 0:
        value += 1 << 64
    chunks = []
    while value > 0x7F:
        chunks.append((value & 0x7F) | 0x80)
        value >>= 7
    chunks.append(value)
    return bytes(chunks)


def _field_ref(number: int, wire_type: int, body: bytes) -> bytes:
    return _varint_ref((number << 3) | wire_type) + body


def encode_event_ref(wall_time: float, step: int, tag: str, value: float) -> bytes:
    tag_bytes = tag.encode("utf-8")
    value_msg = (
        _field_ref(1, 2, _varint_ref(len(tag_bytes)) + tag_bytes)
        + _field_ref(2, 5, struct.pack("<f", value))
    )
    summary = _field_ref(1, 2, _varint_ref(len(value_msg)) + value_msg)
    return (
        _field_ref(1, 1, struct.pack("<d", wall_time))
        + _field_ref(2, 0, _varint_ref(step))
        + _field_ref(5, 2, _varint_ref(len(summary)) + summary)
    )


# --- brute-force classification metrics --------------------------------------


def confusion_oracle(scores, labels, threshold: float) -> dict[str, int]:
    counts = {"tp": 0, "fp": 0, "tn": 0, "fn": 0}
    for score, label in zip(scores, labels):
        predicted = 1 if score >= threshold else 0
        if predicted and label:
            counts["tp"] += 1
        elif predicted and not label:
            counts["fp"] += 1
        elif not predicted and label:
            counts["fn"] += 1
        else:
            counts["tn"] += 1
    return counts


def rates_oracle(scores, labels, threshold: float) -> dict[str, float | None]:
    c = confusion_oracle(scores, labels, threshold)
    n = len(scores)
    pos = c["tp"] + c["fn"]
    neg = c["fp"] + c["tn"]
    pred_pos = c["tp"] + c["fp"]
    return {
        "n": n,
        "positive_rate": pred_pos / n if n else None,
        "accuracy": (c["tp"] + c["tn"]) / n if n else None,
        "precision": c["tp"] / pred_pos if pred_pos else None,
        "recall": c["tp"] / pos if pos else None,
        "tpr": c["tp"] / pos if pos else None,
        "fpr": c["fp"] / neg if neg else None,
        "auc": auc_oracle(scores, labels),
    }


def auc_oracle(scores, labels) -> float | None:
    """Direct definition: mean over all (positive, negative) pairs of
    1[pos > neg] + 0.5 * 1[pos == neg]."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    if len(pos) == 0 or len(neg) == 0:
        return None
    diff = pos[:, None] - neg[None, :]
    return float((np.count_nonzero(diff > 0) + 0.5 * np.count_nonzero(diff == 0)) / diff.size)


def dp_gap_oracle(positive_rates: list[float]) -> float:
    best = 0.0
    for a, b in itertools.combinations(positive_rates, 2):
        best = max(best, abs(a - b))
    return best


def max_pairwise_oracle(values: list[float]) -> float | None:
    defined = [v for v in values if v is not None]
    if len(defined) < 2:
        return None
    best = 0.0
    for a, b in itertools.combinations(defined, 2):
        best = max(best, abs(a - b))
    return best


# --- two-pass Pearson ---------------------------------------------------------


def pearson_twopass(x, y) -> float | None:
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    n = len(x)
    if n < 2 or len(set(x)) == 1 or len(set(y)) == 1:
        return None
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


# --- detection: independent matcher and definition-scan AP --------------------


def overlap_ratio(a, b) -> float:
    ix1, iy1 = max(a[0], b[0]), max(a[1], b[1])
    ix2, iy2 = min(a[2], b[2]), min(a[3], b[3])
    if ix2 <= ix1 or iy2 <= iy1:
        return 0.0
    inter = (ix2 - ix1) * (iy2 - iy1)
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    return inter / (area_a + area_b - inter)


def greedy_match_oracle(preds, gts, thr):
    """preds: (x1,y1,x2,y2,score,cls); gts: (x1,y1,x2,y2,cls).
    Returns per-pred (score, is_tp) in descending score order, stable."""
    order = sorted(range(len(preds)), key=lambda i: (-preds[i][4], i))
    taken = set()
    out = []
    for i in order:
        p = preds[i]
        best, best_j = 0.0, None
        for j, g in enumerate(gts):
            if j in taken or g[4] != p[5]:
                continue
            r = overlap_ratio(p, g)
            if r >= thr and r > best:
                best, best_j = r, j
        if best_j is not None:
            taken.add(best_j)
        out.append((p[4], best_j is not None))
    return out


def max_assignment_tp(preds, gts, thr) -> int:
    """Maximum possible TP count over all one-to-one assignments (brute
    force over permutations; only for tiny instances)."""
    cands = [
        [j for j, g in enumerate(gts) if g[4] == p[5] and overlap_ratio(p, g) >= thr] for p in preds
    ]
    best = 0
    indices = range(len(preds))
    for subset_size in range(min(len(preds), len(gts)), best, -1):
        for chosen in itertools.combinations(indices, subset_size):
            for assignment in itertools.permutations(range(len(gts)), subset_size):
                if all(assignment[k] in cands[chosen[k]] for k in range(subset_size)):
                    return subset_size
    return 0


def ap_oracle(pairs, gt_count: int) -> float:
    """101-point AP by direct definition: for each sampled recall r, take
    the max precision among curve points with recall >= r (0 if none)."""
    tp = 0
    fp = 0
    curve = []
    for _, is_tp in sorted(pairs, key=lambda p: -p[0]):
        if is_tp:
            tp += 1
        else:
            fp += 1
        curve.append((tp / gt_count, tp / (tp + fp)))
    total = 0.0
    for i in range(101):
        r = i / 100.0
        feasible = [p for rec, p in curve if rec >= r]
        total += max(feasible) if feasible else 0.0
    return total / 101.0
