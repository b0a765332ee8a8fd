"""Deterministic synthetic training runs with analytically known metrics.

Scores come from per-(group, label, epoch) uniform distributions whose
exceedance probability at any threshold is closed-form, so the planted
TPR/FPR/accuracy of every slice is exact and every generated run ships a
``truth.json`` manifest that ``verify`` re-checks by re-ingesting the
files. Generation is a pure function of (scenario, seed): same inputs,
byte-identical outputs.

Built-in scenarios:
  baseline    four gender x lighting groups; the subgroup accuracy gap
              climbs through 0.30 at epoch 20 and ends at 0.355 with the
              top group at 0.948, the worst at 0.593, overall 0.852
  mitigated   same groups, final gap 0.18, overall 0.831
  lr_compare  two scalar-only runs differing in learning_rate config
  table2      one epoch, 10,344 records; skin counts 6614/2883/847 and
              age counts 6293/3051 with 1,000 records missing age
  detection   two-group box fixtures with hand-computed AP
  custom      classification scenario loaded from a JSON spec file
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import InvalidSpec, TruthMismatch
from .records import frame_bytes
from .runs import Catalog, LogdirScanner, MISSING_ATTR
from .wire import encode_file_version, encode_scalar_event

WALL_BASE = 1_700_000_000.0  # synthetic clock; real time would break byte determinism
EVENT_FILE = "events.out.tfevents.1700000000.fairboard"
TRUTH_FILE = "truth.json"
DEFAULT_SEED = 0

SCENARIO_NAMES = ("baseline", "mitigated", "lr_compare", "table2", "detection", "custom")


# --- score model -----------------------------------------------------------
#
# label=1 scores ~ U(p/2, 0.5 + p/2)  ->  P(score >= 0.5) = p   (planted TPR)
# label=0 scores ~ U(q/2, 0.5 + q/2)  ->  P(score >= 0.5) = q   (planted FPR)
#
# Both supports sit inside [0, 1] for any p, q in [0, 1], and with
# q = 1 - p the accuracy at threshold 0.5 equals p for any base rate.


def uniform_bounds(exceedance: float) -> tuple[float, float]:
    return exceedance / 2.0, 0.5 + exceedance / 2.0


def exceedance_at(threshold: float, exceedance_at_half: float) -> float:
    lo, hi = uniform_bounds(exceedance_at_half)
    if threshold <= lo:
        return 1.0
    if threshold >= hi:
        return 0.0
    return (hi - threshold) / (hi - lo)


@dataclass(frozen=True)
class GroupPlan:
    attrs: dict[str, str]
    weight: float
    pos_rate: float
    final_accuracy: float
    out_delta: float = 0.0

    @property
    def label(self) -> str:
        return ",".join(f"{k}={v}" for k, v in sorted(self.attrs.items()))


@dataclass(frozen=True)
class GapCurve:
    floor: float
    final: float
    midpoint: float
    steepness: float

    def at(self, epoch: int) -> float:
        z = (epoch - self.midpoint) / self.steepness
        return self.floor + (self.final - self.floor) / (1.0 + math.exp(-z))


@dataclass(frozen=True)
class ClassificationScenario:
    run_id: str
    epochs: int
    n_per_epoch: int
    n_final: int
    n_out: int
    groups: tuple[GroupPlan, ...]
    gap: GapCurve
    top_lift: float = 0.17
    top_tau: float = 10.0
    steps_per_epoch: int = 100
    config: dict[str, str] = field(default_factory=dict)

    def validate(self) -> None:
        if self.epochs < 1 or self.n_per_epoch < 1:
            raise InvalidSpec("epochs and n_per_epoch must be positive")
        if not self.groups:
            raise InvalidSpec("at least one group required")
        total = sum(g.weight for g in self.groups)
        if any(g.weight <= 0 for g in self.groups) or abs(total - 1.0) > 1e-9:
            raise InvalidSpec(f"group weights must be positive and sum to 1, got {total}")
        for g in self.groups:
            if not 0.0 < g.pos_rate < 1.0 or not 0.0 < g.final_accuracy < 1.0:
                raise InvalidSpec(f"group {g.label}: rates must be inside (0, 1)")

    @property
    def top_final(self) -> float:
        return max(g.final_accuracy for g in self.groups)

    def top_accuracy(self, epoch: int) -> float:
        return self.top_final - self.top_lift * math.exp(-epoch / self.top_tau)

    def group_accuracy(self, group: GroupPlan, epoch: int) -> float:
        gap_final = self.gap.final
        frac = (self.top_final - group.final_accuracy) / gap_final if gap_final > 0 else 0.0
        acc = self.top_accuracy(epoch) - frac * self.gap.at(epoch)
        return min(0.99, max(0.01, acc))

    def overall_accuracy(self, epoch: int) -> float:
        return sum(g.weight * self.group_accuracy(g, epoch) for g in self.groups)


def _largest_remainder_counts(weights: list[float], total: int) -> list[int]:
    raw = [w * total for w in weights]
    counts = [int(math.floor(r)) for r in raw]
    short = total - sum(counts)
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[:short]:
        counts[i] += 1
    return counts


BASELINE = ClassificationScenario(
    run_id="baseline",
    epochs=100,
    n_per_epoch=1500,
    n_final=64800,
    n_out=6000,
    groups=(
        GroupPlan({"gender": "male", "lighting": "daytime"}, 0.40, 0.55, 0.948, out_delta=-0.03),
        GroupPlan({"gender": "male", "lighting": "nighttime"}, 0.25, 0.50, 0.905, out_delta=-0.05),
        GroupPlan({"gender": "female", "lighting": "daytime"}, 0.20, 0.50, 0.788, out_delta=-0.10),
        GroupPlan({"gender": "female", "lighting": "nighttime"}, 0.15, 0.45, 0.593, out_delta=-0.15),
    ),
    gap=GapCurve(floor=0.05, final=0.355, midpoint=18.0, steepness=1.3),
    config={"learning_rate": "0.01", "optimizer": "sgd", "batch_size": "64", "fairness_weight": "0.0"},
)

MITIGATED = ClassificationScenario(
    run_id="mitigated",
    epochs=100,
    n_per_epoch=1500,
    n_final=64800,
    n_out=6000,
    groups=(
        GroupPlan({"gender": "male", "lighting": "daytime"}, 0.40, 0.55, 0.8905, out_delta=-0.02),
        GroupPlan({"gender": "male", "lighting": "nighttime"}, 0.25, 0.50, 0.8405, out_delta=-0.02),
        GroupPlan({"gender": "female", "lighting": "daytime"}, 0.20, 0.50, 0.7905, out_delta=-0.03),
        GroupPlan({"gender": "female", "lighting": "nighttime"}, 0.15, 0.45, 0.7105, out_delta=-0.04),
    ),
    gap=GapCurve(floor=0.04, final=0.18, midpoint=18.0, steepness=4.0),
    config={"learning_rate": "0.01", "optimizer": "sgd", "batch_size": "64", "fairness_weight": "0.8"},
)


# --- event file and prediction log writers ---------------------------------


def write_event_file(path: Path, events: Iterable[tuple[float, int, str, float]]) -> None:
    payloads = [encode_file_version(WALL_BASE)]
    payloads.extend(encode_scalar_event(w, s, tag, v) for w, s, tag, v in events)
    with open(path, "wb") as fh:
        for p in payloads:
            fh.write(frame_bytes(p))


def _dump_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _classification_line(
    example_id: str, epoch: int, env: str, attrs: dict[str, str], score: float, label: int
) -> str:
    return json.dumps(
        {"id": example_id, "epoch": epoch, "env": env, "attrs": attrs, "score": score, "label": label},
        separators=(",", ":"),
    )


def _generate_classification_run(scenario: ClassificationScenario, out_dir: Path, seed: int) -> Path:
    scenario.validate()
    rng = np.random.default_rng(seed)
    run_dir = out_dir / scenario.run_id
    run_dir.mkdir(parents=True, exist_ok=True)

    weights = [g.weight for g in scenario.groups]
    truth_epochs = []
    with open(run_dir / "predictions.jsonl", "w", encoding="utf-8") as fh:
        for epoch in range(scenario.epochs):
            final = epoch == scenario.epochs - 1
            n_epoch = scenario.n_final if final else scenario.n_per_epoch
            counts = _largest_remainder_counts(weights, n_epoch)
            epoch_truth: dict = {"epoch": epoch, "n": {}, "accuracy": {}, "tpr": {}, "fpr": {}, "positive_rate": {}}
            counter = 0
            for group, n_group in zip(scenario.groups, counts):
                acc = scenario.group_accuracy(group, epoch)
                tpr, fpr = acc, 1.0 - acc
                n_pos = round(group.pos_rate * n_group)
                n_neg = n_group - n_pos
                pos_scores = rng.uniform(*uniform_bounds(tpr), size=n_pos)
                neg_scores = rng.uniform(*uniform_bounds(fpr), size=n_neg)
                for i, (score, label) in enumerate(
                    [(s, 1) for s in pos_scores.tolist()] + [(s, 0) for s in neg_scores.tolist()]
                ):
                    env = ("in_test" if (counter + i) % 3 == 2 else "in_val") if final else "in_val"
                    fh.write(
                        _classification_line(
                            f"{scenario.run_id}-{epoch:03d}-{counter + i:06d}", epoch, env, group.attrs, score, label
                        )
                    )
                    fh.write("\n")
                counter += n_group
                label_key = group.label
                epoch_truth["n"][label_key] = n_group
                epoch_truth["accuracy"][label_key] = acc
                epoch_truth["tpr"][label_key] = tpr
                epoch_truth["fpr"][label_key] = fpr
                epoch_truth["positive_rate"][label_key] = group.pos_rate * tpr + (1 - group.pos_rate) * fpr
            epoch_truth["overall_accuracy"] = scenario.overall_accuracy(epoch)
            epoch_truth["gap"] = scenario.gap.at(epoch)
            truth_epochs.append(epoch_truth)
            if final and scenario.n_out:
                out_counts = _largest_remainder_counts(weights, scenario.n_out)
                out_truth = {"n": {}, "accuracy": {}}
                counter = 0
                for group, n_group in zip(scenario.groups, out_counts):
                    acc = min(0.98, max(0.02, scenario.group_accuracy(group, epoch) + group.out_delta))
                    n_pos = round(group.pos_rate * n_group)
                    n_neg = n_group - n_pos
                    pos_scores = rng.uniform(*uniform_bounds(acc), size=n_pos)
                    neg_scores = rng.uniform(*uniform_bounds(1.0 - acc), size=n_neg)
                    for i, (score, label) in enumerate(
                        [(s, 1) for s in pos_scores.tolist()] + [(s, 0) for s in neg_scores.tolist()]
                    ):
                        fh.write(
                            _classification_line(
                                f"{scenario.run_id}-out-{counter + i:06d}", epoch, "out", group.attrs, score, label
                            )
                        )
                        fh.write("\n")
                    counter += n_group
                    out_truth["n"][group.label] = n_group
                    out_truth["accuracy"][group.label] = acc
                out_truth["epoch"] = epoch
            else:
                out_truth = None

    events: list[tuple[float, int, str, float]] = []
    spe = scenario.steps_per_epoch
    total_steps = scenario.epochs * spe
    loss_noise = rng.normal(0.0, 0.02, size=total_steps)
    grad_noise = rng.normal(0.0, 0.08, size=scenario.epochs)
    for step in range(total_steps):
        loss = 0.25 + 1.9 * math.exp(-step / 2000.0) + float(loss_noise[step])
        events.append((WALL_BASE + step * 0.5, step, "train/loss", loss))
    for epoch in range(scenario.epochs):
        step = epoch * spe
        wall = WALL_BASE + step * 0.5
        pr = [
            g.pos_rate * scenario.group_accuracy(g, epoch) + (1 - g.pos_rate) * (1 - scenario.group_accuracy(g, epoch))
            for g in scenario.groups
        ]
        events.append((wall, step, "val/accuracy", scenario.overall_accuracy(epoch)))
        events.append((wall, step, "fairness/accuracy_gap", scenario.gap.at(epoch)))
        events.append((wall, step, "fairness/dp_gap", max(pr) - min(pr)))
        events.append((wall, step, "train/learning_rate", float(scenario.config.get("learning_rate", "0.01"))))
        events.append((wall, step, "train/grad_norm", 1.0 + 2.2 * math.exp(-epoch / 12.0) + float(grad_noise[epoch])))
    write_event_file(run_dir / EVENT_FILE, events)

    if scenario.config:
        _dump_json(run_dir / "config.json", scenario.config)

    axes = sorted({k for g in scenario.groups for k in g.attrs})
    truth = {
        "kind": "classification",
        "scenario": scenario.run_id,
        "seed": seed,
        "threshold": 0.5,
        "axes": axes,
        "groups": [
            {"attrs": g.attrs, "weight": g.weight, "pos_rate": g.pos_rate, "final_accuracy": g.final_accuracy}
            for g in scenario.groups
        ],
        "per_epoch": truth_epochs,
        "final": {
            "epoch": scenario.epochs - 1,
            "overall_accuracy": scenario.overall_accuracy(scenario.epochs - 1),
            "accuracy": {g.label: scenario.group_accuracy(g, scenario.epochs - 1) for g in scenario.groups},
            "gap": scenario.gap.at(scenario.epochs - 1),
        },
        "planted_crossing": _planted_crossing(scenario),
        "out_env": out_truth,
    }
    _dump_json(run_dir / TRUTH_FILE, truth)
    return run_dir


def _planted_crossing(scenario: ClassificationScenario, level: float = 0.30) -> dict | None:
    for epoch in range(scenario.epochs):
        if scenario.gap.at(epoch) > level:
            return {"level": level, "epoch": epoch}
    return None


# --- lr_compare ------------------------------------------------------------


def _generate_lr_compare(out_dir: Path, seed: int) -> list[Path]:
    rng = np.random.default_rng(seed)
    plans = [
        ("lr_0.01", 0.01, 0.78, 5.0, True),
        ("lr_0.001", 0.001, 0.85, 18.0, False),
    ]
    written = []
    for run_id, lr, final_acc, tau, unstable in plans:
        run_dir = out_dir / run_id
        run_dir.mkdir(parents=True, exist_ok=True)
        epochs, spe = 100, 20
        events: list[tuple[float, int, str, float]] = []
        for step in range(epochs * spe):
            wall = WALL_BASE + step
            base = 0.3 + 2.0 * math.exp(-step / (tau * spe))
            spike = float(rng.lognormal(0.0, 1.2)) if unstable and step % 37 == 0 else 0.0
            events.append((wall, step, "train/loss", base + 0.05 * float(rng.normal()) + 0.3 * spike))
            grad = 1.0 + 8.0 * math.exp(-step / (tau * spe)) + (3.0 * spike if unstable else 0.0)
            events.append((wall, step, "train/grad_norm", grad + 0.1 * float(rng.normal())))
        for epoch in range(epochs):
            step = epoch * spe
            acc = final_acc - 0.5 * math.exp(-epoch / tau)
            events.append((WALL_BASE + step, step, "val/accuracy", acc))
            events.append((WALL_BASE + step, step, "train/learning_rate", lr))
        write_event_file(run_dir / EVENT_FILE, events)
        _dump_json(
            run_dir / "config.json",
            {"learning_rate": str(lr), "optimizer": "sgd", "batch_size": "64", "schedule": "cosine"},
        )
        written.append(run_dir)
    return written


# --- table2 ----------------------------------------------------------------

TABLE2_SKIN_COUNTS = {"skin_0": 6614, "skin_1": 2883, "skin_2": 847}
TABLE2_AGE_COUNTS = {"age_0": 6293, "age_1": 3051}
TABLE2_SKIN_ACCURACY = {"skin_0": 0.90, "skin_1": 0.86, "skin_2": 0.74}


def _generate_table2(out_dir: Path, seed: int) -> Path:
    rng = np.random.default_rng(seed)
    run_dir = out_dir / "table2"
    run_dir.mkdir(parents=True, exist_ok=True)
    total = sum(TABLE2_SKIN_COUNTS.values())
    missing_age = total - sum(TABLE2_AGE_COUNTS.values())

    skins = [s for s, c in TABLE2_SKIN_COUNTS.items() for _ in range(c)]
    skin_weights = [c / total for c in TABLE2_SKIN_COUNTS.values()]
    missing_per_skin = _largest_remainder_counts(skin_weights, missing_age)
    age_quota = dict(TABLE2_AGE_COUNTS)

    with open(run_dir / "predictions.jsonl", "w", encoding="utf-8") as fh:
        idx = 0
        for skin_i, (skin, count) in enumerate(TABLE2_SKIN_COUNTS.items()):
            acc = TABLE2_SKIN_ACCURACY[skin]
            n_pos = round(0.5 * count)
            scores = np.concatenate(
                [
                    rng.uniform(*uniform_bounds(acc), size=n_pos),
                    rng.uniform(*uniform_bounds(1.0 - acc), size=count - n_pos),
                ]
            )
            labels = [1] * n_pos + [0] * (count - n_pos)
            for j in range(count):
                attrs = {"skin": skin}
                if j >= missing_per_skin[skin_i]:
                    if age_quota["age_0"] > 0:
                        attrs["age"] = "age_0"
                        age_quota["age_0"] -= 1
                    else:
                        attrs["age"] = "age_1"
                        age_quota["age_1"] -= 1
                fh.write(
                    _classification_line(f"table2-{idx:05d}", 0, "in_val", attrs, float(scores[j]), labels[j])
                )
                fh.write("\n")
                idx += 1
    events = [
        (WALL_BASE + s, s, "train/loss", 1.5 * math.exp(-s / 60.0) + 0.2 + 0.02 * float(rng.normal()))
        for s in range(200)
    ]
    write_event_file(run_dir / EVENT_FILE, events)
    truth = {
        "kind": "table2",
        "seed": seed,
        "skin_counts": TABLE2_SKIN_COUNTS,
        "age_counts": TABLE2_AGE_COUNTS,
        "missing_age": missing_age,
        "accuracy_by_skin": TABLE2_SKIN_ACCURACY,
        "total": total,
    }
    _dump_json(run_dir / TRUTH_FILE, truth)
    return run_dir


# --- detection -------------------------------------------------------------
#
# Hand-built boxes, one record per group. AP values are hand-computed over
# the 101-point envelope and frozen here as exact fractions.

DETECTION_IOU = 0.5

DETECTION_FIXTURE = {
    "gender=male": {
        "gt": [[0.0, 0.0, 10.0, 10.0, 0], [20.0, 0.0, 30.0, 10.0, 0]],
        "pred": [
            [0.0, 0.0, 10.0, 10.0, 0.9, 0],
            [20.0, 0.0, 30.0, 10.0, 0.8, 0],
        ],
        # both matched: precision 1 at every sampled recall
        "ap": 1.0,
    },
    "gender=female": {
        "gt": [[0.0, 0.0, 10.0, 10.0, 0], [20.0, 0.0, 30.0, 10.0, 0]],
        "pred": [
            [0.0, 0.0, 10.0, 10.0, 0.9, 0],
            [40.0, 0.0, 50.0, 10.0, 0.8, 0],
        ],
        # TP then FP, one GT unmatched: envelope 1.0 up to recall 0.5, then 0
        "ap": 51.0 / 101.0,
    },
}


def detection_fixture_records() -> list[dict]:
    lines = []
    for label, spec in DETECTION_FIXTURE.items():
        axis, value = label.split("=")
        lines.append(
            {
                "id": f"det-{value}",
                "epoch": 0,
                "env": "in_val",
                "attrs": {axis: value},
                "pred_boxes": spec["pred"],
                "gt_boxes": spec["gt"],
            }
        )
    return lines


def _generate_detection(out_dir: Path, seed: int) -> Path:
    run_dir = out_dir / "detection_demo"
    run_dir.mkdir(parents=True, exist_ok=True)
    with open(run_dir / "predictions.jsonl", "w", encoding="utf-8") as fh:
        for obj in detection_fixture_records():
            fh.write(json.dumps(obj, separators=(",", ":")))
            fh.write("\n")
    write_event_file(run_dir / EVENT_FILE, [(WALL_BASE, 0, "train/loss", 1.0)])
    truth = {
        "kind": "detection",
        "seed": seed,
        "iou_threshold": DETECTION_IOU,
        "ap": {label: spec["ap"] for label, spec in DETECTION_FIXTURE.items()},
    }
    _dump_json(run_dir / TRUTH_FILE, truth)
    return run_dir


# --- public entry points ----------------------------------------------------


def load_custom_spec(path: str | os.PathLike) -> ClassificationScenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, ValueError) as exc:
        raise InvalidSpec(f"cannot read scenario spec: {exc}") from exc
    try:
        groups = tuple(
            GroupPlan(
                attrs={str(k): str(v) for k, v in g["attrs"].items()},
                weight=float(g["weight"]),
                pos_rate=float(g["pos_rate"]),
                final_accuracy=float(g["final_accuracy"]),
                out_delta=float(g.get("out_delta", 0.0)),
            )
            for g in raw["groups"]
        )
        gap = raw.get("gap", {})
        scenario = ClassificationScenario(
            run_id=str(raw.get("run_id", "custom")),
            epochs=int(raw.get("epochs", 50)),
            n_per_epoch=int(raw.get("n_per_epoch", 1000)),
            n_final=int(raw.get("n_final", raw.get("n_per_epoch", 1000))),
            n_out=int(raw.get("n_out", 0)),
            groups=groups,
            gap=GapCurve(
                floor=float(gap.get("floor", 0.02)),
                final=float(gap.get("final", 0.1)),
                midpoint=float(gap.get("midpoint", raw.get("epochs", 50) / 2)),
                steepness=float(gap.get("steepness", 3.0)),
            ),
            config={str(k): str(v) for k, v in raw.get("config", {}).items()},
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidSpec(f"malformed scenario spec: {exc}") from exc
    scenario.validate()
    return scenario


def generate(
    scenario: str, out_dir: str | os.PathLike, seed: int = DEFAULT_SEED, spec_path: str | os.PathLike | None = None
) -> list[Path]:
    """Write the scenario's run directories under ``out_dir``; returns them."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if scenario == "baseline":
        return [_generate_classification_run(BASELINE, out, seed)]
    if scenario == "mitigated":
        return [_generate_classification_run(MITIGATED, out, seed)]
    if scenario == "lr_compare":
        return _generate_lr_compare(out, seed)
    if scenario == "table2":
        return [_generate_table2(out, seed)]
    if scenario == "detection":
        return [_generate_detection(out, seed)]
    if scenario == "custom":
        if spec_path is None:
            raise InvalidSpec("custom scenario requires a spec file")
        return [_generate_classification_run(load_custom_spec(spec_path), out, seed)]
    raise InvalidSpec(f"unknown scenario {scenario!r}; expected one of {SCENARIO_NAMES}")


# --- verification ------------------------------------------------------------


@dataclass
class VerifyResult:
    checks: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def check(self, ok: bool, message: str) -> None:
        self.checks += 1
        if not ok:
            self.failures.append(message)


def _within(measured: float, planted: float, sigma: float, n_sigmas: float = 4.0) -> bool:
    return abs(measured - planted) <= n_sigmas * sigma + 1e-12


def verify(out_dir: str | os.PathLike, raise_on_mismatch: bool = False) -> VerifyResult:
    """Re-ingest generated runs and compare measured statistics against each
    run's truth manifest (4 binomial standard errors for sampled rates)."""
    catalog: Catalog = LogdirScanner(out_dir).scan()
    result = VerifyResult()
    for run_id in catalog.runs:
        run = catalog.runs[run_id]
        truth_path = Path(out_dir) / run_id / TRUTH_FILE
        if not truth_path.exists():
            continue
        with open(truth_path, "r", encoding="utf-8") as fh:
            truth = json.load(fh)
        result.check(
            not run.health.file_errors, f"{run_id}: ingest reported file errors {run.health.file_errors}"
        )
        if truth["kind"] == "classification":
            _verify_classification(run_id, run, truth, result)
        elif truth["kind"] == "table2":
            _verify_table2(run_id, run, truth, result)
        elif truth["kind"] == "detection":
            _verify_detection(run_id, run, truth, result)
    if raise_on_mismatch and not result.passed:
        raise TruthMismatch("; ".join(result.failures[:10]), failures=result.failures)
    return result


def _verify_classification(run_id: str, run, truth: dict, result: VerifyResult) -> None:
    from .fairness import disparity_timeline, fairness_report

    axes = truth["axes"]
    threshold = truth["threshold"]
    timeline = disparity_timeline(run.table, axes, "accuracy", threshold=threshold)
    by_epoch = {p.epoch: p for p in timeline.points}
    for epoch_truth in truth["per_epoch"]:
        epoch = epoch_truth["epoch"]
        point = by_epoch.get(epoch)
        if point is None:
            result.check(False, f"{run_id}: epoch {epoch} missing from timeline")
            continue
        for label, planted in epoch_truth["accuracy"].items():
            n = epoch_truth["n"][label]
            measured = point.values.get(label)
            if measured is None:
                result.check(False, f"{run_id} e{epoch} {label}: no measured accuracy")
                continue
            sigma = math.sqrt(planted * (1 - planted) / n)
            result.check(
                _within(measured, planted, sigma),
                f"{run_id} e{epoch} {label}: accuracy {measured:.4f} vs planted {planted:.4f} (4se={4 * sigma:.4f})",
            )
    final = truth["final"]
    report = fairness_report(run.table, axes, threshold=threshold, epoch=final["epoch"])
    n_final = sum(truth["per_epoch"][-1]["n"].values())
    sigma = math.sqrt(final["overall_accuracy"] * (1 - final["overall_accuracy"]) / n_final)
    result.check(
        _within(report.overall.accuracy, final["overall_accuracy"], sigma),
        f"{run_id}: overall accuracy {report.overall.accuracy:.4f} vs planted {final['overall_accuracy']:.4f}",
    )
    crossing = truth.get("planted_crossing")
    if crossing:
        measured_cross = timeline.first_epoch_above(crossing["level"])
        result.check(
            measured_cross is not None and abs(measured_cross - crossing["epoch"]) <= 2,
            f"{run_id}: gap first exceeds {crossing['level']} at {measured_cross}, planted {crossing['epoch']}",
        )


def _verify_table2(run_id: str, run, truth: dict, result: VerifyResult) -> None:
    from .slicing import partition

    by_skin = partition(list(run.table.records), ["skin"])
    sizes = {key.label.split("=", 1)[1]: len(v) for key, v in by_skin.items()}
    result.check(sizes == truth["skin_counts"], f"{run_id}: skin counts {sizes} != {truth['skin_counts']}")
    by_age = partition(list(run.table.records), ["age"])
    age_sizes = {key.label.split("=", 1)[1]: len(v) for key, v in by_age.items()}
    expected = dict(truth["age_counts"])
    expected[MISSING_ATTR] = truth["missing_age"]
    result.check(age_sizes == expected, f"{run_id}: age counts {age_sizes} != {expected}")


def _verify_detection(run_id: str, run, truth: dict, result: VerifyResult) -> None:
    from .fairness import fairness_report

    report = fairness_report(run.table, ["gender"], iou_threshold=truth["iou_threshold"])
    for metrics in report.groups:
        planted = truth["ap"][metrics.group.label]
        result.check(
            metrics.ap is not None and abs(metrics.ap - planted) < 1e-9,
            f"{run_id} {metrics.group.label}: ap {metrics.ap} != planted {planted}",
        )
