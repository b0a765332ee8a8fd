"""IoU-matched detection scoring and 101-point interpolated AP.

Matching follows the usual convention: within each record, predictions
are taken in descending score order (ties by input order) and greedily
claim the unmatched same-class ground-truth box with the highest IoU at
or above the threshold; every ground-truth box is consumed at most once.
AP samples the right-running precision envelope at the 101 recall points
0.00, 0.01, ..., 1.00, and mAP averages classes that have ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateBox, NoGroundTruth, WrongTask
from .predlog import GtBox, PredBox, PredictionRecord, Task
from .slicing import ALL_GROUP, LOW_SUPPORT_FLOOR, GroupKey, GroupMetrics

RECALL_SAMPLES = np.arange(101) / 100.0  # exact i/100 floats, so recall ties resolve predictably


def iou(box_a: Sequence[float], box_b: Sequence[float]) -> float:
    """Intersection-over-union of two (x1, y1, x2, y2) boxes."""
    ax1, ay1, ax2, ay2 = box_a[:4]
    bx1, by1, bx2, by2 = box_b[:4]
    if ax1 >= ax2 or ay1 >= ay2 or bx1 >= bx2 or by1 >= by2:
        raise DegenerateBox("boxes must satisfy x1 < x2 and y1 < y2")
    ix = min(ax2, bx2) - max(ax1, bx1)
    iy = min(ay2, by2) - max(ay1, by1)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    union = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter
    return inter / union


@dataclass
class DetectionMatchResult:
    # per class: (score, is_true_positive) in descending score order
    matches: dict[int | str, list[tuple[float, bool]]] = field(default_factory=dict)
    gt_count: dict[int | str, int] = field(default_factory=dict)

    def classes(self) -> list:
        keys = set(self.matches) | set(self.gt_count)
        return sorted(keys, key=lambda c: (str(type(c).__name__), str(c)))


def _match_record(
    preds: Sequence[PredBox], gts: Sequence[GtBox], iou_threshold: float, result: DetectionMatchResult
) -> None:
    for gt in gts:
        result.gt_count[gt.cls] = result.gt_count.get(gt.cls, 0) + 1
    order = sorted(range(len(preds)), key=lambda i: (-preds[i].score, i))
    consumed = [False] * len(gts)
    for i in order:
        pred = preds[i]
        best_iou = 0.0
        best_j = -1
        for j, gt in enumerate(gts):
            if consumed[j] or gt.cls != pred.cls:
                continue
            overlap = iou((pred.x1, pred.y1, pred.x2, pred.y2), (gt.x1, gt.y1, gt.x2, gt.y2))
            if overlap >= iou_threshold and overlap > best_iou:
                best_iou = overlap
                best_j = j
        hit = best_j >= 0
        if hit:
            consumed[best_j] = True
        result.matches.setdefault(pred.cls, []).append((pred.score, hit))


def match_detections(records: Sequence[PredictionRecord], iou_threshold: float) -> DetectionMatchResult:
    """Score-ordered TP/FP decisions pooled across records, per class."""
    if not 0.0 < iou_threshold < 1.0:
        raise DegenerateBox(f"iou threshold must be in (0, 1), got {iou_threshold}")
    result = DetectionMatchResult()
    for record in records:
        if record.task is not Task.DETECTION:
            raise WrongTask(f"record {record.example_id!r} is not a detection record")
        _match_record(record.pred_boxes, record.gt_boxes, iou_threshold, result)
    for cls, pairs in result.matches.items():
        pairs.sort(key=lambda p: -p[0])  # stable: input order preserved among ties
    return result


def class_average_precision(pairs: Sequence[tuple[float, bool]], gt_count: int) -> float:
    """101-point interpolated AP for one class from (score, is_tp) pairs."""
    if gt_count < 1:
        raise NoGroundTruth("AP undefined for a class with no ground-truth boxes")
    if not pairs:
        return 0.0
    pairs = sorted(pairs, key=lambda p: -p[0])  # stable: ties keep input order
    flags = np.array([tp for _, tp in pairs], dtype=np.float64)
    tp_cum = np.cumsum(flags)
    fp_cum = np.cumsum(1.0 - flags)
    recall = tp_cum / gt_count
    precision = tp_cum / (tp_cum + fp_cum)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    idx = np.searchsorted(recall, RECALL_SAMPLES, side="left")
    sampled = np.where(idx < len(recall), envelope[np.minimum(idx, len(recall) - 1)], 0.0)
    return float(sampled.mean())


def ap_per_class(result: DetectionMatchResult) -> dict[int | str, float]:
    out = {}
    for cls in result.classes():
        count = result.gt_count.get(cls, 0)
        if count < 1:
            continue  # AP undefined without ground truth
        out[cls] = class_average_precision(result.matches.get(cls, []), count)
    return out


def average_precision(result: DetectionMatchResult) -> float:
    """mAP: unweighted mean of per-class AP over classes with ground truth."""
    per_class = ap_per_class(result)
    if not per_class:
        raise NoGroundTruth("no class has any ground-truth boxes")
    return float(np.mean(list(per_class.values())))


def detection_metrics(
    records: Sequence[PredictionRecord], iou_threshold: float, group: GroupKey = ALL_GROUP
) -> GroupMetrics:
    """GroupMetrics carrying mAP (plus box-level TP/FP counts) for a record
    subset; ap is None when the subset has no ground truth."""
    result = match_detections(records, iou_threshold)
    tp = sum(1 for pairs in result.matches.values() for _, hit in pairs if hit)
    fp = sum(1 for pairs in result.matches.values() for _, hit in pairs if not hit)
    total_gt = sum(result.gt_count.values())
    try:
        ap = average_precision(result)
    except NoGroundTruth:
        ap = None
    return GroupMetrics(
        group=group,
        n=len(records),
        tp=tp,
        fp=fp,
        fn=total_gt - tp,
        ap=ap,
        recall=tp / total_gt if total_gt else None,
        tpr=tp / total_gt if total_gt else None,
        precision=tp / (tp + fp) if tp + fp else None,
        low_support=len(records) < LOW_SUPPORT_FLOOR,
    )
