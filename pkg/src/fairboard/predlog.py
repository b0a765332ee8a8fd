"""Per-example prediction log: one JSON object per line.

Required keys: ``id``, ``epoch``, ``env`` (in_train / in_val / in_test /
out), ``attrs`` (string map), then either ``score`` + ``label``
(classification) or ``pred_boxes`` + ``gt_boxes`` (detection) with boxes
as ``[x1, y1, x2, y2, score, class]`` / ``[x1, y1, x2, y2, class]``.

Invalid lines are skipped and reported with their line number; they never
abort the file.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Iterable

ENV_NAMES = ("in_train", "in_val", "in_test", "out")


class Env(str, Enum):
    IN_TRAIN = "in_train"
    IN_VAL = "in_val"
    IN_TEST = "in_test"
    OUT = "out"

    @property
    def is_in_distribution(self) -> bool:
        return self is not Env.OUT


class Task(str, Enum):
    CLASSIFICATION = "classification"
    DETECTION = "detection"


@dataclass(frozen=True)
class PredBox:
    x1: float
    y1: float
    x2: float
    y2: float
    score: float
    cls: int | str


@dataclass(frozen=True)
class GtBox:
    x1: float
    y1: float
    x2: float
    y2: float
    cls: int | str


@dataclass(frozen=True)
class PredictionRecord:
    example_id: str
    epoch: int
    env: Env
    attributes: dict[str, str]
    task: Task
    score: float | None = None
    label: int | None = None
    pred_boxes: tuple[PredBox, ...] = ()
    gt_boxes: tuple[GtBox, ...] = ()


@dataclass
class ParsedLog:
    records: list[PredictionRecord] = field(default_factory=list)
    skipped: list[tuple[int, str]] = field(default_factory=list)

    @property
    def skip_count(self) -> int:
        return len(self.skipped)


class _LineError(ValueError):
    pass


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise _LineError(message)


def _as_float(value, name: str) -> float:
    _require(isinstance(value, (int, float)) and not isinstance(value, bool), f"{name} must be a number")
    return float(value)


def _as_cls(value):
    _require(isinstance(value, (int, str)) and not isinstance(value, bool), "class must be int or string")
    return value


def _parse_box_common(raw, n_fields: int, kind: str) -> tuple[float, float, float, float]:
    _require(isinstance(raw, (list, tuple)), f"{kind} box must be an array")
    _require(len(raw) == n_fields, f"{kind} box must have {n_fields} fields")
    x1, y1, x2, y2 = (_as_float(raw[i], f"{kind} box coord") for i in range(4))
    _require(x1 < x2 and y1 < y2, f"{kind} box requires x1 < x2 and y1 < y2")
    return x1, y1, x2, y2


def parse_record(obj: dict) -> PredictionRecord:
    """Validate one decoded JSON object; raises ValueError on violations."""
    _require(isinstance(obj, dict), "line is not a JSON object")
    _require(isinstance(obj.get("id"), str) and obj["id"], "missing or empty id")
    epoch = obj.get("epoch")
    _require(isinstance(epoch, int) and not isinstance(epoch, bool) and epoch >= 0, "epoch must be a non-negative int")
    _require(obj.get("env") in ENV_NAMES, f"env must be one of {ENV_NAMES}")
    attrs_raw = obj.get("attrs", {})
    _require(isinstance(attrs_raw, dict), "attrs must be an object")
    attrs: dict[str, str] = {}
    for key, value in attrs_raw.items():
        _require(isinstance(key, str) and key, "attribute keys must be non-empty strings")
        _require(isinstance(value, str), f"attribute {key!r} must have a string value")
        attrs[key] = value

    has_cls = "score" in obj or "label" in obj
    has_det = "pred_boxes" in obj or "gt_boxes" in obj
    _require(has_cls != has_det, "exactly one of score/label or pred_boxes/gt_boxes must be present")

    if has_cls:
        score = _as_float(obj.get("score"), "score")
        _require(0.0 <= score <= 1.0, "score must be in [0, 1]")
        label = obj.get("label")
        _require(label in (0, 1), "label must be 0 or 1")
        return PredictionRecord(
            example_id=obj["id"],
            epoch=epoch,
            env=Env(obj["env"]),
            attributes=attrs,
            task=Task.CLASSIFICATION,
            score=score,
            label=int(label),
        )

    pred_raw = obj.get("pred_boxes")
    gt_raw = obj.get("gt_boxes")
    _require(isinstance(pred_raw, list) and isinstance(gt_raw, list), "pred_boxes and gt_boxes must both be arrays")
    pred_boxes = []
    for raw in pred_raw:
        x1, y1, x2, y2 = _parse_box_common(raw, 6, "prediction")
        score = _as_float(raw[4], "box score")
        _require(0.0 <= score <= 1.0, "box score must be in [0, 1]")
        pred_boxes.append(PredBox(x1, y1, x2, y2, score, _as_cls(raw[5])))
    gt_boxes = []
    for raw in gt_raw:
        x1, y1, x2, y2 = _parse_box_common(raw, 5, "ground-truth")
        gt_boxes.append(GtBox(x1, y1, x2, y2, _as_cls(raw[4])))
    return PredictionRecord(
        example_id=obj["id"],
        epoch=epoch,
        env=Env(obj["env"]),
        attributes=attrs,
        task=Task.DETECTION,
        pred_boxes=tuple(pred_boxes),
        gt_boxes=tuple(gt_boxes),
    )


def parse_prediction_log(
    source: str | os.PathLike | IO[str] | Iterable[str], first_line_no: int = 1
) -> ParsedLog:
    """Parse a JSON-lines prediction log, skipping invalid lines.

    Order-preserving and idempotent; ``first_line_no`` supports resumed
    parsing of a growing file.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8") as fh:
            return _parse_lines(fh, first_line_no)
    return _parse_lines(source, first_line_no)


def _parse_lines(lines: Iterable[str], first_line_no: int) -> ParsedLog:
    result = ParsedLog()
    for line_no, line in enumerate(lines, start=first_line_no):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            obj = json.loads(stripped)
            result.records.append(parse_record(obj))
        except (_LineError, ValueError) as exc:
            result.skipped.append((line_no, str(exc)))
    return result
