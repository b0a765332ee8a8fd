"""Run discovery and incremental log ingestion.

A run is any direct subdirectory of the log root containing at least one
event file (name contains ``tfevents``) or a ``predictions.jsonl``.
Scanning is incremental: per-file offsets persist between scans so a
growing file is re-read only from its last good frame / complete line.
Each scan produces an immutable Catalog snapshot; readers never observe a
half-applied append.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import CrcMismatch, FairboardError, NotADirectory, UnknownColumn, UnknownRun
from .predlog import ENV_NAMES, PredictionRecord, Task, parse_prediction_log
from .records import read_record_stream
from .wire import decode_scalar_event

MISSING_ATTR = "__missing__"
PREDICTIONS_FILENAME = "predictions.jsonl"
CONFIG_FILENAME = "config.json"


@dataclass(frozen=True)
class ScalarSeries:
    tag: str
    steps: np.ndarray
    wall_times: np.ndarray
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.steps)

    def points(self) -> list[list[float]]:
        return [
            [int(s), float(w), float(v)]
            for s, w, v in zip(self.steps.tolist(), self.wall_times.tolist(), self.values.tolist())
        ]


def make_series(tag: str, points: list[tuple[int, float, float]]) -> ScalarSeries:
    """Build a normalized series: sorted by step, duplicates last-write-wins
    in the given (file, frame) order."""
    if not points:
        empty = np.array([], dtype=np.int64)
        return ScalarSeries(tag, empty, np.array([]), np.array([]))
    steps = np.array([p[0] for p in points], dtype=np.int64)
    walls = np.array([p[1] for p in points], dtype=np.float64)
    values = np.array([p[2] for p in points], dtype=np.float64)
    order = np.argsort(steps, kind="stable")
    steps, walls, values = steps[order], walls[order], values[order]
    keep = np.append(steps[1:] != steps[:-1], True)
    return ScalarSeries(tag, steps[keep], walls[keep], values[keep])


class PredictionTable:
    """Columnar view over a run's prediction records (hot-path friendly)."""

    def __init__(self, records: list[PredictionRecord]):
        self.records: tuple[PredictionRecord, ...] = tuple(records)
        n = len(records)
        self.n = n
        self.epoch = np.fromiter((r.epoch for r in records), dtype=np.int64, count=n)
        self.env = np.fromiter((ENV_NAMES.index(r.env.value) for r in records), dtype=np.int8, count=n)
        self.is_classification = np.fromiter(
            (r.task is Task.CLASSIFICATION for r in records), dtype=bool, count=n
        )
        self.score = np.fromiter(
            (r.score if r.score is not None else math.nan for r in records), dtype=np.float64, count=n
        )
        self.label = np.fromiter(
            (r.label if r.label is not None else -1 for r in records), dtype=np.int64, count=n
        )
        attr_names = sorted({k for r in records for k in r.attributes})
        self.attr_columns: dict[str, np.ndarray] = {}
        self.vocab: dict[str, list[str]] = {}
        for name in attr_names:
            col = np.array([r.attributes.get(name, MISSING_ATTR) for r in records], dtype=object)
            self.attr_columns[name] = col
            self.vocab[name] = sorted({v for v in col if v != MISSING_ATTR})
        self.epochs: list[int] = sorted(set(self.epoch.tolist()))
        self._factor_cache: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        self._group_cache: dict[tuple[str, ...], tuple[list, np.ndarray]] = {}

    def _attr_factor(self, axis: str) -> tuple[np.ndarray, np.ndarray]:
        cached = self._factor_cache.get(axis)
        if cached is None:
            # object-array unique is the expensive step; do it once per attribute
            cached = self._factor_cache[axis] = np.unique(self.attr_columns[axis], return_inverse=True)
        return cached

    def group_codes(self, axes: tuple[str, ...]) -> tuple[list, np.ndarray]:
        """(per-group attribute value tuples, per-row group index) for a
        conjunction of axes; missing attributes map to MISSING_ATTR."""
        cached = self._group_cache.get(axes)
        if cached is not None:
            return cached
        code = np.zeros(self.n, dtype=np.int64)
        level_values: list[np.ndarray] = []
        for axis in axes:
            values, inverse = self._attr_factor(axis)
            level_values.append(values)
            code = code * len(values) + inverse
        present, gid = np.unique(code, return_inverse=True)
        combos = []
        for flat in present.tolist():
            combo = []
            for values in reversed(level_values):
                flat, idx = divmod(flat, len(values))
                combo.append(values[idx])
            combos.append(tuple(reversed(combo)))
        result = (combos, gid.astype(np.int64))
        self._group_cache[axes] = result
        return result


def _empty_table() -> PredictionTable:
    return PredictionTable([])


@dataclass(frozen=True)
class RunHealth:
    frames_read: int = 0
    events_decoded: int = 0
    scalar_points: int = 0
    nan_dropped: int = 0
    invalid_step_dropped: int = 0
    prediction_records: int = 0
    prediction_lines_skipped: int = 0
    file_errors: tuple[tuple[str, str, str], ...] = ()

    def to_payload(self) -> dict:
        return {
            "frames_read": self.frames_read,
            "events_decoded": self.events_decoded,
            "scalar_points": self.scalar_points,
            "nan_dropped": self.nan_dropped,
            "invalid_step_dropped": self.invalid_step_dropped,
            "prediction_records": self.prediction_records,
            "prediction_lines_skipped": self.prediction_lines_skipped,
            "file_errors": [list(e) for e in self.file_errors],
        }


@dataclass(frozen=True)
class Run:
    run_id: str
    series: Mapping[str, ScalarSeries]
    table: PredictionTable
    config: Mapping[str, str]
    health: RunHealth

    @property
    def scalar_tags(self) -> list[str]:
        return sorted(self.series)


@dataclass(frozen=True)
class Catalog:
    version: int
    runs: Mapping[str, Run]
    warnings: tuple[str, ...] = ()
    generated_at: float = field(default_factory=time.time)

    def run(self, run_id: str) -> Run:
        try:
            return self.runs[run_id]
        except KeyError:
            raise UnknownRun(run_id) from None

    def series(self, run_id: str, tag: str) -> ScalarSeries:
        run = self.run(run_id)
        try:
            return run.series[tag]
        except KeyError:
            raise UnknownColumn(run_id, tag) from None


class _EventFileState:
    __slots__ = ("offset", "failed", "error", "frames", "events", "tag_points", "nan_dropped", "bad_step")

    def __init__(self):
        self.offset = 0
        self.failed = False
        self.error: tuple[str, str] | None = None  # (code, message)
        self.frames = 0
        self.events = 0
        self.tag_points: dict[str, list[tuple[int, float, float]]] = {}
        self.nan_dropped = 0
        self.bad_step = 0

    def reset(self):
        self.__init__()


class _PredictionState:
    __slots__ = ("offset", "line_no", "records", "skipped")

    def __init__(self):
        self.offset = 0
        self.line_no = 1
        self.records: list[PredictionRecord] = []
        self.skipped: list[tuple[int, str]] = []

    def reset(self):
        self.__init__()


class _RunAccum:
    def __init__(self, run_id: str):
        self.run_id = run_id
        self.event_files: dict[str, _EventFileState] = {}
        self.predictions = _PredictionState()
        self.config: dict[str, str] = {}
        self.config_sig: tuple | None = None
        self.io_errors: list[tuple[str, str, str]] = []
        self.dirty = True
        self.snapshot: Run | None = None


class LogdirScanner:
    """Stateful incremental scanner over one log root."""

    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)
        self._accums: dict[str, _RunAccum] = {}
        self._version = 0
        self._catalog: Catalog | None = None

    def scan(self) -> Catalog:
        if not self.root.is_dir():
            raise NotADirectory(f"log root {self.root} is not a directory")
        warnings: list[str] = []
        run_dirs: dict[str, Path] = {}
        try:
            entries = sorted(self.root.iterdir())
        except OSError as exc:
            raise NotADirectory(f"log root {self.root} is unreadable: {exc}") from exc
        for entry in entries:
            try:
                if not entry.is_dir():
                    continue
                names = {p.name for p in entry.iterdir()}
            except OSError as exc:
                warnings.append(f"skipping unreadable directory {entry.name}: {exc}")
                continue
            if PREDICTIONS_FILENAME in names or any("tfevents" in n for n in names):
                run_dirs[entry.name] = entry

        changed = set(self._accums) != set(run_dirs)
        for run_id in list(self._accums):
            if run_id not in run_dirs:
                del self._accums[run_id]
        for run_id, run_dir in run_dirs.items():
            accum = self._accums.setdefault(run_id, _RunAccum(run_id))
            self._scan_run(accum, run_dir)
            if accum.dirty:
                changed = True

        if changed or self._catalog is None:
            self._version += 1
            runs = {}
            for run_id in sorted(run_dirs):
                accum = self._accums[run_id]
                if accum.dirty or accum.snapshot is None:
                    accum.snapshot = self._build_snapshot(accum)
                    accum.dirty = False
                runs[run_id] = accum.snapshot
            self._catalog = Catalog(version=self._version, runs=runs, warnings=tuple(warnings))
        return self._catalog

    def _scan_run(self, accum: _RunAccum, run_dir: Path) -> None:
        previous_io_errors = list(accum.io_errors)
        accum.io_errors = []
        event_paths = sorted(p for p in run_dir.iterdir() if "tfevents" in p.name and p.is_file())
        seen = {p.name for p in event_paths}
        for name in list(accum.event_files):
            if name not in seen:
                del accum.event_files[name]
                accum.dirty = True
        for path in event_paths:
            state = accum.event_files.get(path.name)
            if state is None:
                state = accum.event_files[path.name] = _EventFileState()
                accum.dirty = True
            self._scan_event_file(accum, state, path)

        pred_path = run_dir / PREDICTIONS_FILENAME
        if pred_path.is_file():
            self._scan_predictions(accum, pred_path)
        elif accum.predictions.records:
            accum.predictions.reset()
            accum.dirty = True

        self._load_config(accum, run_dir / CONFIG_FILENAME)
        if accum.io_errors != previous_io_errors:
            accum.dirty = True

    def _scan_event_file(self, accum: _RunAccum, state: _EventFileState, path: Path) -> None:
        if state.failed:
            return
        try:
            size = path.stat().st_size
        except OSError as exc:
            accum.io_errors.append((path.name, "IO", str(exc)))
            return
        if size < state.offset:
            state.reset()  # file was replaced; re-read from scratch
            accum.dirty = True
        if size == state.offset:
            return
        changed = False
        stream = read_record_stream(path, state.offset)
        while True:
            try:
                frame = next(stream)
            except StopIteration:
                break
            except CrcMismatch as exc:
                # frames before the corruption stay served; the file is dead
                state.failed = True
                state.error = (exc.code, exc.message)
                accum.dirty = True
                return
            except OSError as exc:
                accum.io_errors.append((path.name, "IO", str(exc)))
                return
            state.frames += 1
            try:
                events = decode_scalar_event(frame.payload)
            except FairboardError as exc:
                state.failed = True
                state.error = (exc.code, f"{exc.message} (frame at offset {frame.offset})")
                accum.dirty = True
                return
            for ev in events:
                state.events += 1
                if not math.isfinite(ev.value) or not math.isfinite(ev.wall_time):
                    state.nan_dropped += 1
                    continue
                if ev.step < 0:
                    state.bad_step += 1
                    continue
                state.tag_points.setdefault(ev.tag, []).append((ev.step, ev.wall_time, ev.value))
            state.offset = frame.end_offset
            changed = True
        if changed:
            accum.dirty = True

    def _scan_predictions(self, accum: _RunAccum, path: Path) -> None:
        state = accum.predictions
        try:
            size = path.stat().st_size
        except OSError as exc:
            accum.io_errors.append((path.name, "IO", str(exc)))
            return
        if size < state.offset:
            state.reset()
            accum.dirty = True
        if size == state.offset:
            return
        try:
            with open(path, "rb") as fh:
                fh.seek(state.offset)
                chunk = fh.read()
        except OSError as exc:
            accum.io_errors.append((path.name, "IO", str(exc)))
            return
        cut = chunk.rfind(b"\n")
        if cut < 0:
            return  # last line still being written
        complete = chunk[: cut + 1]
        parsed = parse_prediction_log(complete.decode("utf-8").splitlines(), first_line_no=state.line_no)
        state.records.extend(parsed.records)
        state.skipped.extend(parsed.skipped)
        state.line_no += complete.count(b"\n")
        state.offset += len(complete)
        accum.dirty = True

    def _load_config(self, accum: _RunAccum, path: Path) -> None:
        try:
            stat = path.stat()
            sig = (stat.st_mtime_ns, stat.st_size)
        except OSError:
            if accum.config:
                accum.config = {}
                accum.config_sig = None
                accum.dirty = True
            return
        if sig == accum.config_sig:
            return
        accum.config_sig = sig
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
            if not isinstance(raw, dict):
                raise ValueError("config.json must be a JSON object")
            accum.config = {
                str(k): (v if isinstance(v, str) else json.dumps(v)) for k, v in sorted(raw.items())
            }
        except (OSError, ValueError) as exc:
            accum.io_errors.append((path.name, "BAD_CONFIG", str(exc)))
            accum.config = {}
        accum.dirty = True

    def _build_snapshot(self, accum: _RunAccum) -> Run:
        merged: dict[str, list[tuple[int, float, float]]] = {}
        frames = events = nan_dropped = bad_step = 0
        file_errors: list[tuple[str, str, str]] = list(accum.io_errors)
        for name in sorted(accum.event_files):
            state = accum.event_files[name]
            frames += state.frames
            events += state.events
            nan_dropped += state.nan_dropped
            bad_step += state.bad_step
            if state.error is not None:
                file_errors.append((name, state.error[0], state.error[1]))
            for tag, points in state.tag_points.items():
                merged.setdefault(tag, []).extend(points)
        series = {tag: make_series(tag, points) for tag, points in merged.items()}
        table = PredictionTable(accum.predictions.records) if accum.predictions.records else _empty_table()
        health = RunHealth(
            frames_read=frames,
            events_decoded=events,
            scalar_points=sum(len(s) for s in series.values()),
            nan_dropped=nan_dropped,
            invalid_step_dropped=bad_step,
            prediction_records=len(accum.predictions.records),
            prediction_lines_skipped=len(accum.predictions.skipped),
            file_errors=tuple(file_errors),
        )
        return Run(run_id=accum.run_id, series=series, table=table, config=dict(accum.config), health=health)


def discover_runs(root: str | os.PathLike) -> Catalog:
    """One-shot scan of a log root. For live re-scanning keep a
    LogdirScanner and call ``scan()`` repeatedly."""
    return LogdirScanner(root).scan()
