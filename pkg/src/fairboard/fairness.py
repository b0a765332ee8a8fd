"""Group-fairness indicators and report assembly.

Disparity summaries generalize the two-group definitions to many groups
as the worst case over pairs: the DP gap is the max pairwise absolute
difference of positive-prediction rates, the EO gaps are the max pairwise
TPR and FPR differences, and eo_diff is the larger of the two. Undefined
components stay None. Reports are pure functions of an immutable record
snapshot; what-if thresholding never mutates stored logs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .detection import detection_metrics
from .errors import InsufficientGroups, NoEpochData, UnknownAttribute, UnknownGroup, WrongTask
from .predlog import ENV_NAMES, PredictionRecord, Task
from .runs import PredictionTable
from .slicing import (
    ALL_GROUP,
    GroupKey,
    GroupMetrics,
    auc_score,
    metrics_from_scores,
    _metrics_from_counts,
    require_groups,
)

IN_ENV_CODES = tuple(i for i, name in enumerate(ENV_NAMES) if name != "out")
CLASSIFICATION_METRICS = ("positive_rate", "accuracy", "precision", "recall", "tpr", "fpr", "auc")
DETECTION_METRICS = ("ap", "precision", "recall", "tpr")


@dataclass(frozen=True)
class EoGaps:
    tpr_gap: float | None
    fpr_gap: float | None
    eo_diff: float | None


@dataclass(frozen=True)
class DisparitySummary:
    metric: str
    metric_gap: float | None
    dp_gap: float | None
    tpr_gap: float | None
    fpr_gap: float | None
    eo_diff: float | None
    worst_group: str | None
    best_group: str | None
    low_support_groups: tuple[str, ...]

    def to_payload(self) -> dict:
        return {
            "metric": self.metric,
            "metric_gap": self.metric_gap,
            "dp_gap": self.dp_gap,
            "tpr_gap": self.tpr_gap,
            "fpr_gap": self.fpr_gap,
            "eo_diff": self.eo_diff,
            "worst_group": self.worst_group,
            "best_group": self.best_group,
            "low_support_groups": list(self.low_support_groups),
        }


@dataclass(frozen=True)
class FairnessReport:
    axes: tuple[str, ...]
    task: Task
    metric: str
    epoch: int | None
    env_scope: str
    thresholds: dict[str, float]
    groups: tuple[GroupMetrics, ...]
    overall: GroupMetrics
    disparity: DisparitySummary | None
    note: str | None = None

    def group_map(self) -> dict[GroupKey, GroupMetrics]:
        return {g.group: g for g in self.groups}

    def to_payload(self) -> dict:
        return {
            "axes": list(self.axes),
            "task": self.task.value,
            "metric": self.metric,
            "epoch": self.epoch,
            "env_scope": self.env_scope,
            "thresholds": self.thresholds,
            "groups": [g.to_payload() for g in self.groups],
            "overall": self.overall.to_payload(),
            "disparity": self.disparity.to_payload() if self.disparity else None,
            "note": self.note,
        }


@dataclass(frozen=True)
class TimelinePoint:
    epoch: int
    gap: float | None
    values: dict[str, float | None]
    note: str | None = None


@dataclass(frozen=True)
class DisparityTimeline:
    metric: str
    axes: tuple[str, ...]
    points: tuple[TimelinePoint, ...]

    def first_epoch_above(self, level: float) -> int | None:
        for point in self.points:
            if point.gap is not None and point.gap > level:
                return point.epoch
        return None

    def to_payload(self) -> dict:
        return {
            "metric": self.metric,
            "axes": list(self.axes),
            "points": [
                {"epoch": p.epoch, "gap": p.gap, "values": p.values, "note": p.note} for p in self.points
            ],
        }


@dataclass(frozen=True)
class StabilityReport:
    axes: tuple[str, ...]
    metric: str
    group_order: tuple[str, ...]
    envs: dict[str, dict]

    def to_payload(self) -> dict:
        return {
            "axes": list(self.axes),
            "metric": self.metric,
            "group_order": list(self.group_order),
            "envs": self.envs,
        }


def dp_gap(groups: Mapping[GroupKey, GroupMetrics]) -> float:
    """Demographic-parity gap: max pairwise absolute difference of
    positive-prediction rates over non-empty groups."""
    require_groups(groups, 2)
    rates = [g.positive_rate for g in groups.values() if g.n >= 1]
    return max(rates) - min(rates)


def eo_gaps(groups: Mapping[GroupKey, GroupMetrics]) -> EoGaps:
    """Equalized-odds gaps: max pairwise TPR and FPR differences; each
    component None when fewer than 2 groups define the underlying rate."""
    require_groups(groups, 2)
    tprs = [g.tpr for g in groups.values() if g.tpr is not None]
    fprs = [g.fpr for g in groups.values() if g.fpr is not None]
    tpr_gap = max(tprs) - min(tprs) if len(tprs) >= 2 else None
    fpr_gap = max(fprs) - min(fprs) if len(fprs) >= 2 else None
    defined = [g for g in (tpr_gap, fpr_gap) if g is not None]
    return EoGaps(tpr_gap, fpr_gap, max(defined) if defined else None)


def _metric_value(metrics: GroupMetrics, name: str) -> float | None:
    return getattr(metrics, name)


def metric_gap(groups: Mapping[GroupKey, GroupMetrics], metric: str) -> float | None:
    values = [v for g in groups.values() if (v := _metric_value(g, metric)) is not None]
    if len(values) < 2:
        return None
    return max(values) - min(values)


def disparity_summary(groups: Mapping[GroupKey, GroupMetrics], metric: str, task: Task) -> DisparitySummary:
    ordered = sorted(groups.values(), key=lambda g: g.group)
    scored = [(g.group.label, _metric_value(g, metric)) for g in ordered]
    defined = [(label, v) for label, v in scored if v is not None]
    worst = min(defined, key=lambda p: p[1])[0] if defined else None
    best = max(defined, key=lambda p: p[1])[0] if defined else None
    if task is Task.CLASSIFICATION:
        dp = dp_gap(groups)
        eo = eo_gaps(groups)
    else:
        dp, eo = None, EoGaps(None, None, None)
    return DisparitySummary(
        metric=metric,
        metric_gap=metric_gap(groups, metric),
        dp_gap=dp,
        tpr_gap=eo.tpr_gap,
        fpr_gap=eo.fpr_gap,
        eo_diff=eo.eo_diff,
        worst_group=worst,
        best_group=best,
        low_support_groups=tuple(g.group.label for g in ordered if g.low_support),
    )


def _as_table(records: Sequence[PredictionRecord] | PredictionTable) -> PredictionTable:
    if isinstance(records, PredictionTable):
        return records
    return PredictionTable(list(records))


def _env_mask(table: PredictionTable, env_scope: str) -> np.ndarray:
    if env_scope == "all":
        return np.ones(table.n, dtype=bool)
    if env_scope == "in":
        return np.isin(table.env, IN_ENV_CODES)
    if env_scope in ENV_NAMES:
        return table.env == ENV_NAMES.index(env_scope)
    raise UnknownAttribute(f"env scope {env_scope!r}")


def _validate_axes(table: PredictionTable, axes: Sequence[str]) -> tuple[str, ...]:
    if not axes:
        raise UnknownAttribute("(empty axis list)")
    for axis in axes:
        if axis not in table.vocab:
            raise UnknownAttribute(axis)
    return tuple(sorted(dict.fromkeys(axes)))


def _resolve_task(table: PredictionTable, mask: np.ndarray) -> Task:
    cls = table.is_classification[mask]
    if len(cls) == 0 or cls.all():
        return Task.CLASSIFICATION
    if not cls.any():
        return Task.DETECTION
    raise WrongTask("record subset mixes classification and detection tasks")


def _groups_for_mask(
    table: PredictionTable,
    axes: tuple[str, ...],
    mask: np.ndarray,
    task: Task,
    thresholds: Mapping[GroupKey, float],
    default_threshold: float,
    iou_threshold: float,
) -> dict[GroupKey, GroupMetrics]:
    combos, gid = table.group_codes(axes)
    keys = [GroupKey(tuple(sorted(zip(axes, combo)))) for combo in combos]
    rows = np.flatnonzero(mask)
    sub_gid = gid[rows]
    present = np.unique(sub_gid)
    out: dict[GroupKey, GroupMetrics] = {}
    if task is Task.CLASSIFICATION:
        compact = np.searchsorted(present, sub_gid)
        thr = np.array(
            [thresholds.get(keys[g], default_threshold) for g in present.tolist()], dtype=np.float64
        )
        scores = table.score[rows]
        labels = table.label[rows]
        counts = kernels.group_confusion(scores, labels, compact, thr)
        for slot, g in enumerate(present.tolist()):
            tn, fn, fp, tp = (int(c) for c in counts[slot])
            sel = compact == slot
            auc = auc_score(scores[sel], labels[sel])
            out[keys[g]] = _metrics_from_counts(keys[g], tp, fp, tn, fn, auc)
    else:
        for g in present.tolist():
            sel = rows[sub_gid == g]
            subset = [table.records[i] for i in sel.tolist()]
            out[keys[g]] = detection_metrics(subset, iou_threshold, keys[g])
    return dict(sorted(out.items()))


def _overall_for_mask(
    table: PredictionTable,
    axes: tuple[str, ...],
    mask: np.ndarray,
    task: Task,
    thresholds: Mapping[GroupKey, float],
    default_threshold: float,
    iou_threshold: float,
) -> GroupMetrics:
    rows = np.flatnonzero(mask)
    if task is Task.DETECTION:
        return detection_metrics([table.records[i] for i in rows.tolist()], iou_threshold, ALL_GROUP)
    scores = table.score[rows]
    labels = table.label[rows]
    if not thresholds:
        return metrics_from_scores(scores, labels, default_threshold, ALL_GROUP)
    # mixed per-group thresholds: each record is decided by its own group's cut
    combos, gid = table.group_codes(axes)
    keys = [GroupKey(tuple(sorted(zip(axes, combo)))) for combo in combos]
    thr = np.array([thresholds.get(k, default_threshold) for k in keys], dtype=np.float64)
    counts = kernels.group_confusion(scores, labels, gid[rows], thr).sum(axis=0)
    tn, fn, fp, tp = (int(c) for c in counts)
    return _metrics_from_counts(ALL_GROUP, tp, fp, tn, fn, auc_score(scores, labels))


def _resolve_epoch(table: PredictionTable, mask: np.ndarray, epoch: int | None) -> tuple[int, np.ndarray]:
    epochs = table.epoch[mask]
    if len(epochs) == 0:
        raise NoEpochData("no records in the selected environment scope")
    if epoch is None:
        epoch = int(epochs.max())  # serve the training frontier by default
    epoch_mask = mask & (table.epoch == epoch)
    if not epoch_mask.any():
        raise NoEpochData(f"no records at epoch {epoch}")
    return epoch, epoch_mask


def fairness_report(
    records: Sequence[PredictionRecord] | PredictionTable,
    axes: Sequence[str],
    *,
    threshold: float = 0.5,
    group_thresholds: Mapping[GroupKey | str, float] | None = None,
    metric: str | None = None,
    epoch: int | None = None,
    env_scope: str = "in",
    iou_threshold: float = 0.5,
) -> FairnessReport:
    """Disaggregated metrics plus disparity summary for one epoch's records.

    ``epoch=None`` selects the latest epoch in scope. OUT-environment
    records are excluded unless the scope says otherwise; they are served
    by the stability report instead.
    """
    table = _as_table(records)
    axes_t = _validate_axes(table, axes)
    mask = _env_mask(table, env_scope)
    epoch_used, mask = _resolve_epoch(table, mask, epoch)
    task = _resolve_task(table, mask)

    thresholds = _normalize_thresholds(table, axes_t, mask, group_thresholds, threshold)
    metric_name = _validate_metric(metric, task)
    groups = _groups_for_mask(table, axes_t, mask, task, thresholds, threshold, iou_threshold)
    overall = _overall_for_mask(table, axes_t, mask, task, thresholds, threshold, iou_threshold)
    note = None
    disparity = None
    try:
        disparity = disparity_summary(groups, metric_name, task)
    except InsufficientGroups:
        note = "INSUFFICIENT_GROUPS"
    threshold_payload = {"default": threshold}
    for key in sorted(thresholds):
        threshold_payload[key.label] = thresholds[key]
    return FairnessReport(
        axes=axes_t,
        task=task,
        metric=metric_name,
        epoch=epoch_used,
        env_scope=env_scope,
        thresholds=threshold_payload,
        groups=tuple(groups.values()),
        overall=overall,
        disparity=disparity,
        note=note,
    )


def _validate_metric(metric: str | None, task: Task) -> str:
    allowed = CLASSIFICATION_METRICS if task is Task.CLASSIFICATION else DETECTION_METRICS
    if metric is None:
        return "accuracy" if task is Task.CLASSIFICATION else "ap"
    if metric not in allowed:
        raise UnknownAttribute(f"metric {metric!r}; expected one of {allowed}")
    return metric


def _normalize_thresholds(
    table: PredictionTable,
    axes: tuple[str, ...],
    mask: np.ndarray,
    group_thresholds: Mapping[GroupKey | str, float] | None,
    default_threshold: float,
) -> dict[GroupKey, float]:
    if not group_thresholds:
        return {}
    combos, gid = table.group_codes(axes)
    present_ids = np.unique(gid[mask]).tolist()
    present = {GroupKey(tuple(sorted(zip(axes, combos[g])))) for g in present_ids}
    normalized: dict[GroupKey, float] = {}
    for raw_key, value in group_thresholds.items():
        if isinstance(raw_key, str):
            try:
                key = GroupKey.from_label(raw_key)
            except ValueError:
                raise UnknownGroup(raw_key) from None
        else:
            key = raw_key
        if key not in present:
            raise UnknownGroup(key.label)
        if not 0.0 <= float(value) <= 1.0:
            raise UnknownGroup(f"threshold for {key.label} outside [0, 1]")
        normalized[key] = float(value)
    # thresholds equal to the default are no-ops; dropping them makes a
    # reset what-if byte-identical to the plain fairness report
    return {k: v for k, v in normalized.items() if v != default_threshold}


def what_if_reconfigure(
    records: Sequence[PredictionRecord] | PredictionTable,
    group_thresholds: Mapping[GroupKey | str, float],
    axes: Sequence[str],
    *,
    default_threshold: float = 0.5,
    metric: str | None = None,
    epoch: int | None = None,
    env_scope: str = "in",
) -> FairnessReport:
    """Re-threshold stored scores per group and recompute the full report;
    a pure function of the log."""
    return fairness_report(
        records,
        axes,
        threshold=default_threshold,
        group_thresholds=group_thresholds,
        metric=metric,
        epoch=epoch,
        env_scope=env_scope,
    )


def disparity_timeline(
    records: Sequence[PredictionRecord] | PredictionTable,
    axes: Sequence[str],
    metric: str | None = None,
    *,
    threshold: float = 0.5,
    env_scope: str = "in",
    iou_threshold: float = 0.5,
) -> DisparityTimeline:
    """Per-epoch per-group metric values and the max pairwise gap.

    Epochs where any group (from the cross-epoch canonical set) is empty
    or has the metric undefined carry an explicit None gap.
    """
    table = _as_table(records)
    axes_t = _validate_axes(table, axes)
    mask = _env_mask(table, env_scope)
    epochs = sorted(set(table.epoch[mask].tolist()))
    if len(epochs) < 2:
        raise NoEpochData(f"need at least 2 distinct epochs, have {len(epochs)}")
    task = _resolve_task(table, mask)
    metric_name = _validate_metric(metric, task)

    per_epoch: list[tuple[int, dict[GroupKey, GroupMetrics]]] = []
    canonical: set[GroupKey] = set()
    for epoch in epochs:
        groups = _groups_for_mask(
            table, axes_t, mask & (table.epoch == epoch), task, {}, threshold, iou_threshold
        )
        canonical.update(groups)
        per_epoch.append((epoch, groups))
    order = sorted(canonical)

    points = []
    for epoch, groups in per_epoch:
        values = {key.label: None for key in order}
        note = None
        for key in order:
            g = groups.get(key)
            values[key.label] = None if g is None else _metric_value(g, metric_name)
        if len(order) < 2:
            note = "INSUFFICIENT_GROUPS"
            gap = None
        elif any(key not in groups for key in order):
            note = "EMPTY_GROUP"
            gap = None
        elif any(v is None for v in values.values()):
            note = "UNDEFINED_METRIC"
            gap = None
        else:
            defined = [v for v in values.values() if v is not None]
            gap = max(defined) - min(defined)
        points.append(TimelinePoint(epoch=epoch, gap=gap, values=values, note=note))
    return DisparityTimeline(metric=metric_name, axes=axes_t, points=tuple(points))


def stability_report(
    records: Sequence[PredictionRecord] | PredictionTable,
    axes: Sequence[str],
    metric: str | None = None,
    *,
    threshold: float = 0.5,
    iou_threshold: float = 0.5,
) -> StabilityReport:
    """Per-environment group metrics at each environment's latest epoch,
    on one canonical group order shared across environments."""
    table = _as_table(records)
    axes_t = _validate_axes(table, axes)
    env_groups: dict[str, tuple[int, dict[GroupKey, GroupMetrics]]] = {}
    task = None
    for code, env_name in enumerate(ENV_NAMES):
        mask = table.env == code
        if not mask.any():
            continue  # environment absent, flagged below
        epoch = int(table.epoch[mask].max())
        epoch_mask = mask & (table.epoch == epoch)
        env_task = _resolve_task(table, epoch_mask)
        task = task or env_task
        groups = _groups_for_mask(table, axes_t, epoch_mask, env_task, {}, threshold, iou_threshold)
        env_groups[env_name] = (epoch, groups)
    if not env_groups:
        raise NoEpochData("prediction log has no records")
    metric_name = _validate_metric(metric, task)

    canonical: list[GroupKey] = sorted({key for _, groups in env_groups.values() for key in groups})
    order = tuple(key.label for key in canonical)
    envs_payload: dict[str, dict] = {}
    for env_name in ENV_NAMES:
        if env_name not in env_groups:
            envs_payload[env_name] = {"present": False}
            continue
        epoch, groups = env_groups[env_name]
        radar = [
            (_metric_value(groups[key], metric_name) if key in groups else None) for key in canonical
        ]
        envs_payload[env_name] = {
            "present": True,
            "epoch": epoch,
            "groups": [groups[key].to_payload() for key in canonical if key in groups],
            "missing_groups": [key.label for key in canonical if key not in groups],
            "radar": radar,
        }
    return StabilityReport(axes=axes_t, metric=metric_name, group_order=order, envs=envs_payload)
