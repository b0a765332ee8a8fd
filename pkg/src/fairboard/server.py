"""HTTP serving layer: REST API over one log root.

Design: a background thread rescans the logdir on a fixed cadence and
swaps in an immutable catalog snapshot; request handlers only ever read
the current snapshot, so readers never block on ingest and identical
requests against an unchanged snapshot return identical bodies. Fairness
and what-if responses are cached keyed by (snapshot version, request),
invalidated implicitly when ingest bumps the version. Every response
carries ``X-Server-Ms`` with the measured server-side handler time.
"""

from __future__ import annotations

import json
import threading
import time
import zlib
from collections import OrderedDict
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import Body, FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import kernels
from .aggregation import WindowStat, reservoir_downsample, window_aggregate
from .correlation import correlation_matrix
from .errors import FairboardError, InvalidRequest
from .fairness import disparity_timeline, fairness_report, stability_report, what_if_reconfigure
from .runs import Catalog, LogdirScanner, ScalarSeries

DEFAULT_MAX_POINTS = 1000
SCALAR_MODES = ("reservoir", "raw", "window_mean", "window_min", "window_max", "window_last")


class _Cache:
    def __init__(self, capacity: int = 512):
        self._data: OrderedDict = OrderedDict()
        self._lock = threading.Lock()
        self.capacity = capacity

    def get(self, key):
        with self._lock:
            return self._data.get(key)

    def put(self, key, value):
        with self._lock:
            self._data[key] = value
            while len(self._data) > self.capacity:
                self._data.popitem(last=False)


class Board:
    """Shared server state: scanner, current snapshot, ingest counters."""

    def __init__(self, logdir: str, rescan_secs: float = 5.0, seed: int = 0):
        self.logdir = str(logdir)
        self.rescan_secs = float(rescan_secs)
        self.seed = int(seed)
        self._scanner = LogdirScanner(logdir)
        self._lock = threading.Lock()
        self.cache = _Cache()
        self.scans = 0
        self.last_scan_seconds = 0.0
        self.started = time.time()
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        self.catalog: Catalog = self.rescan()

    def rescan(self) -> Catalog:
        t0 = time.perf_counter()
        with self._lock:
            catalog = self._scanner.scan()
        self.catalog = catalog
        self.scans += 1
        self.last_scan_seconds = time.perf_counter() - t0
        return catalog

    def start(self) -> None:
        if self._thread is not None:
            return
        self._stop.clear()
        self._thread = threading.Thread(target=self._loop, name="fairboard-ingest", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
            self._thread = None

    def _loop(self) -> None:
        while not self._stop.wait(self.rescan_secs):
            try:
                self.rescan()
            except FairboardError:
                continue  # transient logdir problem; retry on next tick


def _series_seed(seed: int, run: str, tag: str, k: int, n: int) -> int:
    key = f"{seed}:{run}:{tag}:{k}:{n}".encode()
    return zlib.crc32(key)


def _parse_axes(raw) -> list[str]:
    if isinstance(raw, str):
        axes = [a.strip() for a in raw.split(",") if a.strip()]
    elif isinstance(raw, list) and all(isinstance(a, str) for a in raw):
        axes = raw
    else:
        raise InvalidRequest("axes must be a list of attribute names or a comma-joined string")
    if not axes:
        raise InvalidRequest("axes must not be empty")
    return axes


def _parse_columns(raw: str) -> list[tuple[str, str]]:
    columns = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        run, sep, tag = part.partition("/")
        if not sep or not run or not tag:
            raise InvalidRequest(f"column {part!r} must look like run/tag")
        columns.append((run, tag))
    if len(columns) < 2:
        raise InvalidRequest("correlation requires at least 2 columns")
    return columns


def _config_deltas(catalog: Catalog) -> dict[str, dict[str, str | None]]:
    keys = sorted({k for run in catalog.runs.values() for k in run.config})
    deltas: dict[str, dict[str, str | None]] = {run_id: {} for run_id in catalog.runs}
    for key in keys:
        values = {run_id: run.config.get(key) for run_id, run in catalog.runs.items()}
        if len(set(values.values())) > 1:
            for run_id, value in values.items():
                deltas[run_id][key] = value
    return deltas


def create_app(
    logdir: str,
    rescan_secs: float = 5.0,
    seed: int = 0,
    frontend_dir: str | None = None,
) -> FastAPI:
    board = Board(logdir, rescan_secs=rescan_secs, seed=seed)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        board.start()
        try:
            yield
        finally:
            board.stop()

    app = FastAPI(title="fairboard", lifespan=lifespan)
    app.state.board = board
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.middleware("http")
    async def timing(request: Request, call_next):
        t0 = time.perf_counter()
        response = await call_next(request)
        response.headers["X-Server-Ms"] = f"{(time.perf_counter() - t0) * 1000.0:.3f}"
        return response

    @app.exception_handler(FairboardError)
    async def fairboard_error(request: Request, exc: FairboardError):
        return JSONResponse(status_code=exc.http_status, content=exc.to_payload())

    @app.get("/api/health")
    def health():
        catalog = board.catalog
        return {
            "status": "ok",
            "logdir": board.logdir,
            "catalog_version": catalog.version,
            "runs": len(catalog.runs),
            "scans": board.scans,
            "last_scan_seconds": board.last_scan_seconds,
            "rescan_secs": board.rescan_secs,
            "kernel_backend": kernels.BACKEND,
            "warnings": list(catalog.warnings),
        }

    @app.get("/api/runs")
    def runs():
        catalog = board.catalog
        deltas = _config_deltas(catalog)
        out = []
        for run_id, run in catalog.runs.items():
            table = run.table
            out.append(
                {
                    "run_id": run_id,
                    "tags": run.scalar_tags,
                    "config": dict(run.config),
                    "config_delta": deltas[run_id],
                    "health": run.health.to_payload(),
                    "n_predictions": table.n,
                    "epochs": table.epochs,
                    "attributes": table.vocab,
                }
            )
        return JSONResponse({"catalog_version": catalog.version, "runs": out})

    @app.get("/api/scalars")
    def scalars(run: str, tag: str, max_points: int = DEFAULT_MAX_POINTS, mode: str = "reservoir"):
        catalog = board.catalog
        series = catalog.series(run, tag)
        if mode not in SCALAR_MODES:
            raise InvalidRequest(f"mode must be one of {SCALAR_MODES}")
        original = len(series)
        served: ScalarSeries = series
        if mode == "reservoir" and original > max_points:
            served = reservoir_downsample(
                series, max_points, _series_seed(board.seed, run, tag, max_points, original)
            )
        elif mode.startswith("window_") and original:
            span = int(series.steps[-1]) - int(series.steps[0]) + 1
            width = max(1, -(-span // max(1, max_points)))
            served = window_aggregate(series, width, WindowStat(mode.removeprefix("window_")))
        return JSONResponse(
            {
                "run": run,
                "tag": tag,
                "original_length": original,
                "mode": mode,
                "points": served.points(),
            }
        )

    def _report_payload(kind: str, body: dict) -> dict:
        catalog = board.catalog
        run_id = body.get("run")
        if not isinstance(run_id, str):
            raise InvalidRequest("body must name a run")
        run = catalog.run(run_id)
        axes = _parse_axes(body.get("axes"))
        metric = body.get("metric")
        threshold = float(body.get("threshold", 0.5))
        epoch = body.get("epoch")
        env_scope = body.get("env", "in")
        cache_key = (catalog.version, kind, json.dumps(body, sort_keys=True))
        cached = board.cache.get(cache_key)
        if cached is not None:
            return cached
        if kind == "whatif":
            thresholds = body.get("thresholds")
            if not isinstance(thresholds, dict):
                raise InvalidRequest("whatif body must carry a thresholds map of group label -> value")
            report = what_if_reconfigure(
                run.table,
                {str(k): float(v) for k, v in thresholds.items()},
                axes,
                default_threshold=threshold,
                metric=metric,
                epoch=epoch,
                env_scope=env_scope,
            ).to_payload()
        else:
            report = fairness_report(
                run.table,
                axes,
                threshold=threshold,
                metric=metric,
                epoch=epoch,
                env_scope=env_scope,
                iou_threshold=float(body.get("iou_threshold", 0.5)),
            ).to_payload()
        report["run"] = run_id
        board.cache.put(cache_key, report)
        return report

    @app.post("/api/fairness")
    def fairness(body: dict = Body(...)):
        return JSONResponse(_report_payload("fairness", body))

    @app.post("/api/whatif")
    def whatif(body: dict = Body(...)):
        return JSONResponse(_report_payload("whatif", body))

    @app.get("/api/correlation")
    def correlation(columns: str):
        catalog = board.catalog
        parsed = _parse_columns(columns)
        cache_key = (catalog.version, "correlation", columns)
        cached = board.cache.get(cache_key)
        if cached is not None:
            return JSONResponse(cached)
        payload = correlation_matrix(parsed, catalog).to_payload()
        board.cache.put(cache_key, payload)
        return JSONResponse(payload)

    @app.get("/api/timeline")
    def timeline(run: str, axes: str, metric: str | None = None, threshold: float = 0.5, env: str = "in"):
        catalog = board.catalog
        table = catalog.run(run).table
        cache_key = (catalog.version, "timeline", run, axes, metric, threshold, env)
        cached = board.cache.get(cache_key)
        if cached is not None:
            return JSONResponse(cached)
        payload = disparity_timeline(
            table, _parse_axes(axes), metric, threshold=threshold, env_scope=env
        ).to_payload()
        payload["run"] = run
        board.cache.put(cache_key, payload)
        return JSONResponse(payload)

    @app.get("/api/inout")
    def inout(run: str, axes: str, metric: str | None = None, threshold: float = 0.5):
        catalog = board.catalog
        table = catalog.run(run).table
        cache_key = (catalog.version, "inout", run, axes, metric, threshold)
        cached = board.cache.get(cache_key)
        if cached is not None:
            return JSONResponse(cached)
        payload = stability_report(table, _parse_axes(axes), metric, threshold=threshold).to_payload()
        payload["run"] = run
        board.cache.put(cache_key, payload)
        return JSONResponse(payload)

    static_dir = Path(frontend_dir) if frontend_dir else Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if static_dir.is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="dashboard")

    return app
