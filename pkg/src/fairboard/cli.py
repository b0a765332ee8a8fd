"""Command-line entry points: serve, audit, generate, verify."""

from __future__ import annotations

import json
import sys

import click

from .errors import FairboardError
from .fairness import fairness_report
from .runs import discover_runs
from .synthgen import DEFAULT_SEED, SCENARIO_NAMES, generate as generate_runs, verify as verify_runs


@click.group()
def main():
    """Training-run fairness and metrics dashboard."""


@main.command()
@click.option("--logdir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--port", default=6120, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--rescan-secs", default=5.0, show_default=True, type=float)
@click.option("--seed", default=0, show_default=True, type=int, help="Downsampling seed for reproducible responses.")
@click.option("--frontend-dir", default=None, type=click.Path(file_okay=False), help="Static dashboard assets.")
def serve(logdir, port, host, rescan_secs, seed, frontend_dir):
    """Serve the REST API (and the dashboard, when built) over a log root."""
    import uvicorn

    from .server import create_app

    app = create_app(logdir, rescan_secs=rescan_secs, seed=seed, frontend_dir=frontend_dir)
    click.echo(f"fairboard serving {logdir} on http://{host}:{port} (rescan every {rescan_secs}s)")
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.option("--logdir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--run", "run_id", required=True)
@click.option("--axes", required=True, help="Comma-separated attribute names, e.g. gender,lighting.")
@click.option("--metric", default=None)
@click.option("--threshold", default=0.5, show_default=True, type=float)
@click.option("--epoch", default=None, type=int)
@click.option("--json", "as_json", is_flag=True, help="Emit the raw report JSON.")
def audit(logdir, run_id, axes, metric, threshold, epoch, as_json):
    """One-shot fairness report for a run, printed to stdout."""
    try:
        catalog = discover_runs(logdir)
        run = catalog.run(run_id)
        report = fairness_report(
            run.table,
            [a.strip() for a in axes.split(",") if a.strip()],
            threshold=threshold,
            metric=metric,
            epoch=epoch,
        )
    except FairboardError as exc:
        click.echo(f"error [{exc.code}]: {exc.message}", err=True)
        sys.exit(2)
    payload = report.to_payload()
    payload["run"] = run_id
    if as_json:
        click.echo(json.dumps(payload, indent=2))
        return
    click.echo(f"run {run_id} | epoch {report.epoch} | metric {report.metric} | threshold {threshold}")
    click.echo(f"{'group':<44} {'n':>7} {'metric':>8} {'pos_rate':>9} {'prec':>7} {'tpr':>7} {'fpr':>7}")
    rows = list(report.groups) + [report.overall]
    for g in rows:
        value = getattr(g, report.metric)
        click.echo(
            f"{g.group.label:<44} {g.n:>7} "
            f"{_fmt(value):>8} {_fmt(g.positive_rate):>9} {_fmt(g.precision):>7} "
            f"{_fmt(g.tpr):>7} {_fmt(g.fpr):>7}"
            + ("  LOW_SUPPORT" if g.low_support else "")
        )
    if report.disparity:
        d = report.disparity
        click.echo(
            f"gaps: {report.metric}={_fmt(d.metric_gap)} dp={_fmt(d.dp_gap)} "
            f"tpr={_fmt(d.tpr_gap)} fpr={_fmt(d.fpr_gap)} eo={_fmt(d.eo_diff)} "
            f"worst={d.worst_group} best={d.best_group}"
        )
    elif report.note:
        click.echo(f"disparity: unavailable ({report.note})")


def _fmt(value) -> str:
    return "n/a" if value is None else f"{value:.4f}"


@main.command()
@click.option("--scenario", required=True, type=click.Choice(SCENARIO_NAMES))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--seed", default=DEFAULT_SEED, show_default=True, type=int)
@click.option("--spec", "spec_path", default=None, type=click.Path(exists=True, dir_okay=False))
def generate(scenario, out_dir, seed, spec_path):
    """Generate a synthetic scenario logdir with a truth.json manifest."""
    try:
        written = generate_runs(scenario, out_dir, seed=seed, spec_path=spec_path)
    except FairboardError as exc:
        click.echo(f"error [{exc.code}]: {exc.message}", err=True)
        sys.exit(2)
    for path in written:
        click.echo(f"wrote {path}")


@main.command()
@click.argument("out_dir", type=click.Path(exists=True, file_okay=False))
def verify(out_dir):
    """Re-ingest a generated logdir and check it against its truth manifests."""
    result = verify_runs(out_dir)
    status = "PASS" if result.passed else "FAIL"
    click.echo(f"{status}: {result.checks} checks, {len(result.failures)} failures")
    for failure in result.failures:
        click.echo(f"  MISMATCH {failure}")
    if not result.passed:
        sys.exit(1)


if __name__ == "__main__":
    main()
