"""Subgroup partitioning and disaggregated classification metrics.

A slice is a conjunction of attribute=value terms. Metrics on degenerate
confusion matrices are first-class ``None`` (serialized as null), never
silently zero, because tiny subgroups make them common.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .errors import InsufficientGroups, UnknownAttribute, WrongTask
from .predlog import PredictionRecord, Task
from .runs import MISSING_ATTR

LOW_SUPPORT_FLOOR = 5  # groups below this n are flagged, still computed


@dataclass(frozen=True, order=True)
class GroupKey:
    """Sorted (attribute, value) pairs; the empty key is the ALL slice."""

    items: tuple[tuple[str, str], ...] = ()

    @classmethod
    def from_dict(cls, terms: Mapping[str, str]) -> "GroupKey":
        return cls(tuple(sorted(terms.items())))

    @classmethod
    def from_label(cls, label: str) -> "GroupKey":
        if label == "ALL":
            return cls()
        terms = []
        for part in label.split(","):
            name, sep, value = part.partition("=")
            if not sep or not name:
                raise ValueError(f"malformed group label {label!r}")
            terms.append((name, value))
        return cls(tuple(sorted(terms)))

    @property
    def label(self) -> str:
        if not self.items:
            return "ALL"
        return ",".join(f"{k}={v}" for k, v in self.items)

    def as_dict(self) -> dict[str, str]:
        return dict(self.items)

    def __str__(self) -> str:
        return self.label


ALL_GROUP = GroupKey()


@dataclass(frozen=True)
class SlicePredicate:
    terms: Mapping[str, str] = field(default_factory=dict)

    def matches(self, record: PredictionRecord) -> bool:
        return all(record.attributes.get(k) == v for k, v in self.terms.items())

    @property
    def key(self) -> GroupKey:
        return GroupKey.from_dict(self.terms)


@dataclass(frozen=True)
class GroupMetrics:
    group: GroupKey
    n: int
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0
    positive_rate: float | None = None
    accuracy: float | None = None
    precision: float | None = None
    recall: float | None = None
    tpr: float | None = None
    fpr: float | None = None
    auc: float | None = None
    ap: float | None = None
    low_support: bool = False

    def to_payload(self) -> dict:
        return {
            "group": self.group.label,
            "n": self.n,
            "counts": {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn},
            "positive_rate": self.positive_rate,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "tpr": self.tpr,
            "fpr": self.fpr,
            "auc": self.auc,
            "ap": self.ap,
            "low_support": self.low_support,
        }


def attribute_vocabulary(records: Iterable[PredictionRecord]) -> dict[str, set[str]]:
    vocab: dict[str, set[str]] = {}
    for record in records:
        for key, value in record.attributes.items():
            vocab.setdefault(key, set()).add(value)
    return vocab


def partition(
    records: Sequence[PredictionRecord], axes: Sequence[str]
) -> dict[GroupKey, list[PredictionRecord]]:
    """Split records into disjoint groups over the given attribute axes.

    Records missing an axis attribute land in an explicit MISSING_ATTR
    bucket for that axis; nothing is dropped.
    """
    if not axes:
        raise UnknownAttribute("(empty axis list)")
    vocab = attribute_vocabulary(records)
    for axis in axes:
        if axis not in vocab:
            raise UnknownAttribute(axis)
    groups: dict[GroupKey, list[PredictionRecord]] = {}
    for record in records:
        key = GroupKey(tuple(sorted((a, record.attributes.get(a, MISSING_ATTR)) for a in axes)))
        groups.setdefault(key, []).append(record)
    return dict(sorted(groups.items()))


def auc_score(scores: np.ndarray, labels: np.ndarray) -> float | None:
    """Probability that a random positive outscores a random negative,
    ties counted 1/2; None unless both classes are present."""
    n = len(labels)
    n_pos = int((labels == 1).sum())
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    order = np.argsort(scores, kind="mergesort")
    sorted_scores = scores[order]
    # tie-averaged ranks, fully vectorized: one rank value per tie block
    first = np.flatnonzero(np.append(True, sorted_scores[1:] != sorted_scores[:-1]))
    counts = np.diff(np.append(first, n))
    block_rank = first + 0.5 * (counts - 1) + 1.0
    ranks = np.empty(n, dtype=np.float64)
    ranks[order] = np.repeat(block_rank, counts)
    rank_sum = float(ranks[labels == 1].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def metrics_from_scores(
    scores: np.ndarray, labels: np.ndarray, threshold: float, group: GroupKey = ALL_GROUP
) -> GroupMetrics:
    n = len(scores)
    if n == 0:
        return GroupMetrics(group=group, n=0, low_support=True)
    counts = kernels.group_confusion(
        np.asarray(scores, dtype=np.float64),
        np.asarray(labels, dtype=np.int64),
        np.zeros(n, dtype=np.int64),
        np.array([threshold], dtype=np.float64),
    )[0]
    tn, fn, fp, tp = (int(c) for c in counts)
    return _metrics_from_counts(group, tp, fp, tn, fn, auc_score(scores, labels))


def _metrics_from_counts(
    group: GroupKey, tp: int, fp: int, tn: int, fn: int, auc: float | None
) -> GroupMetrics:
    n = tp + fp + tn + fn
    pred_pos = tp + fp
    actual_pos = tp + fn
    actual_neg = fp + tn
    tpr = tp / actual_pos if actual_pos else None
    fpr = fp / actual_neg if actual_neg else None
    return GroupMetrics(
        group=group,
        n=n,
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        positive_rate=pred_pos / n,
        accuracy=(tp + tn) / n,
        precision=tp / pred_pos if pred_pos else None,
        recall=tpr,
        tpr=tpr,
        fpr=fpr,
        auc=auc,
        low_support=n < LOW_SUPPORT_FLOOR,
    )


def _classification_arrays(records: Sequence[PredictionRecord]) -> tuple[np.ndarray, np.ndarray]:
    for record in records:
        if record.task is not Task.CLASSIFICATION:
            raise WrongTask(f"record {record.example_id!r} is not a classification record")
    scores = np.array([r.score for r in records], dtype=np.float64)
    labels = np.array([r.label for r in records], dtype=np.int64)
    return scores, labels


def classification_metrics(
    records: Sequence[PredictionRecord], threshold: float, group: GroupKey = ALL_GROUP
) -> GroupMetrics:
    """Confusion-based rates and AUC for one record subset at a decision
    threshold (prediction positive when score >= threshold)."""
    scores, labels = _classification_arrays(records)
    return metrics_from_scores(scores, labels, threshold, group)


def group_classification_metrics(
    records: Sequence[PredictionRecord], axes: Sequence[str], threshold: float
) -> dict[GroupKey, GroupMetrics]:
    return {
        key: classification_metrics(subset, threshold, key) for key, subset in partition(records, axes).items()
    }


def rename_group(metrics: GroupMetrics, group: GroupKey) -> GroupMetrics:
    return replace(metrics, group=group)


def require_groups(groups: Mapping[GroupKey, GroupMetrics], minimum: int = 2) -> None:
    populated = [g for g in groups.values() if g.n >= 1]
    if len(populated) < minimum:
        raise InsufficientGroups(f"need at least {minimum} non-empty groups, have {len(populated)}")
