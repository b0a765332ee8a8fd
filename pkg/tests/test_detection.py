"""IoU, greedy matching vs an independent matcher, and hand-computed AP."""

import numpy as np
import pytest

from fairboard.detection import (
    average_precision,
    ap_per_class,
    class_average_precision,
    detection_metrics,
    iou,
    match_detections,
)
from fairboard.errors import DegenerateBox, NoGroundTruth, WrongTask
from fairboard.predlog import Env, GtBox, PredBox, PredictionRecord, Task
from oracles import ap_oracle, greedy_match_oracle, max_assignment_tp, overlap_ratio


def _detection(preds, gts, attrs=None, example_id="d"):
    return PredictionRecord(
        example_id=example_id,
        epoch=0,
        env=Env.IN_VAL,
        attributes=attrs or {},
        task=Task.DETECTION,
        pred_boxes=tuple(PredBox(*p) for p in preds),
        gt_boxes=tuple(GtBox(*g) for g in gts),
    )


class TestIou:
    def test_identical_boxes(self):
        assert iou((0, 0, 2, 2), (0, 0, 2, 2)) == 1.0

    def test_disjoint_boxes(self):
        assert iou((0, 0, 1, 1), (5, 5, 6, 6)) == 0.0

    def test_hand_computed_third(self):
        # intersection 2, union 6
        assert iou((0, 0, 2, 2), (1, 0, 3, 2)) == pytest.approx(1 / 3, abs=1e-12)

    def test_symmetry_randomized(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            a = sorted(rng.random(2)) + sorted(rng.random(2))
            b = sorted(rng.random(2)) + sorted(rng.random(2))
            box_a = (a[0], a[2], a[1] + 1e-3, a[3] + 1e-3)
            box_b = (b[0], b[2], b[1] + 1e-3, b[3] + 1e-3)
            assert iou(box_a, box_b) == pytest.approx(iou(box_b, box_a), abs=1e-15)
            assert iou(box_a, box_b) == pytest.approx(overlap_ratio(box_a, box_b), abs=1e-12)

    def test_one_iff_identical(self):
        assert iou((0, 0, 1, 1), (0, 0, 1, 1.0001)) < 1.0

    def test_degenerate_box_rejected(self):
        with pytest.raises(DegenerateBox):
            iou((1, 0, 0, 2), (0, 0, 1, 1))


class TestMatching:
    def test_perfect_predictions_all_tp(self):
        gts = [(0, 0, 10, 10, 0), (20, 0, 30, 10, 0)]
        preds = [(0, 0, 10, 10, 0.9, 0), (20, 0, 30, 10, 0.8, 0)]
        result = match_detections([_detection(preds, gts)], 0.5)
        assert [hit for _, hit in result.matches[0]] == [True, True]

    def test_single_gt_consumed_once(self):
        gts = [(0, 0, 10, 10, 0)]
        preds = [(0, 0, 10, 10, 0.7, 0), (0, 0, 10, 9, 0.9, 0)]
        result = match_detections([_detection(preds, gts)], 0.5)
        # higher-scored prediction wins the only GT
        assert result.matches[0] == [(0.9, True), (0.7, False)]

    def test_wrong_task_rejected(self):
        clf = PredictionRecord(
            example_id="c", epoch=0, env=Env.IN_VAL, attributes={}, task=Task.CLASSIFICATION, score=0.5, label=1
        )
        with pytest.raises(WrongTask):
            match_detections([clf], 0.5)

    def test_iou_threshold_bounds(self):
        with pytest.raises(DegenerateBox):
            match_detections([], 0.0)

    def test_matches_independent_matcher_on_random_instances(self):
        rng = np.random.default_rng(17)
        for _ in range(120):
            n_pred = int(rng.integers(0, 6))
            n_gt = int(rng.integers(0, 6))
            preds = []
            for _ in range(n_pred):
                x, y = rng.random(2) * 8
                preds.append((x, y, x + rng.random() * 4 + 0.5, y + rng.random() * 4 + 0.5,
                              round(float(rng.random()), 2), int(rng.integers(0, 2))))
            gts = []
            for _ in range(n_gt):
                x, y = rng.random(2) * 8
                gts.append((x, y, x + rng.random() * 4 + 0.5, y + rng.random() * 4 + 0.5, int(rng.integers(0, 2))))
            result = match_detections([_detection(preds, gts)], 0.5)
            got = sorted(
                ((score, hit) for pairs in result.matches.values() for score, hit in pairs),
                key=lambda p: (-p[0], not p[1]),
            )
            want = sorted(greedy_match_oracle(preds, gts, 0.5), key=lambda p: (-p[0], not p[1]))
            assert got == want
            # greedy TPs never exceed the best possible assignment
            tp = sum(1 for _, hit in want if hit)
            assert tp <= max_assignment_tp(preds, gts, 0.5)

    def test_tp_bounded_by_gt_count(self):
        gts = [(0, 0, 10, 10, 0)]
        preds = [(0, 0, 10, 10, s, 0) for s in (0.9, 0.8, 0.7)]
        result = match_detections([_detection(preds, gts)], 0.5)
        assert sum(hit for _, hit in result.matches[0]) == 1


class TestAveragePrecision:
    def test_perfect_detector(self):
        pairs = [(0.9, True), (0.8, True)]
        assert class_average_precision(pairs, 2) == 1.0

    def test_zero_tp(self):
        assert class_average_precision([(0.9, False)], 3) == 0.0

    def test_no_predictions_zero_ap(self):
        assert class_average_precision([], 2) == 0.0

    def test_spec_pair_tp_then_fp(self):
        # TP at 0.9 then FP at 0.8 with 1 GT: precision envelope 1.0 through recall 1.0
        assert class_average_precision([(0.9, True), (0.8, False)], 1) == 1.0

    def test_spec_pair_fp_then_tp(self):
        # order swapped: precision at full recall is 0.5, envelope gives 0.5
        assert class_average_precision([(0.9, False), (0.8, True)], 1) == 0.5

    def test_frozen_hand_computed_values(self):
        # one TP out of two GTs plus one FP: 1.0 for the 51 samples <= 0.5, else 0
        assert class_average_precision([(0.9, True), (0.8, False)], 2) == pytest.approx(51 / 101, abs=1e-12)
        # interleaved: flags (1,0,1,1,0) over 3 GTs -> 34 samples at 1.0, 67 at 0.75
        pairs = [(0.95, True), (0.90, False), (0.85, True), (0.80, True), (0.75, False)]
        assert class_average_precision(pairs, 3) == pytest.approx(84.25 / 101, abs=1e-12)

    def test_requires_ground_truth(self):
        with pytest.raises(NoGroundTruth):
            class_average_precision([(0.9, True)], 0)

    def test_matches_definition_scan_oracle_randomized(self):
        rng = np.random.default_rng(23)
        for _ in range(200):
            n = int(rng.integers(1, 10))
            gt_count = int(rng.integers(1, 6))
            pairs = [(round(float(rng.random()), 2), bool(rng.random() < 0.5)) for _ in range(n)]
            tps = sum(p[1] for p in pairs)
            if tps > gt_count:
                continue
            assert class_average_precision(pairs, gt_count) == pytest.approx(
                ap_oracle(pairs, gt_count), abs=1e-12
            )

    def test_score_scaling_invariance(self):
        pairs = [(0.9, True), (0.5, False), (0.3, True)]
        scaled = [(s * 0.5, hit) for s, hit in pairs]
        assert class_average_precision(pairs, 3) == class_average_precision(scaled, 3)

    def test_adding_top_tp_is_monotone(self):
        pairs = [(0.5, True), (0.4, False)]
        better = [(0.9, True)] + pairs
        assert class_average_precision(better, 3) >= class_average_precision(pairs, 3)

    def test_map_unweighted_over_classes(self):
        gts = [(0, 0, 10, 10, "car"), (0, 20, 10, 30, "person"), (20, 20, 30, 30, "person")]
        preds = [
            (0, 0, 10, 10, 0.6, "car"),          # car TP -> AP 1.0
            (0, 20, 10, 30, 0.9, "person"),      # person TP
            (40, 0, 50, 10, 0.8, "person"),      # person FP -> AP 51/101
        ]
        result = match_detections([_detection(preds, gts)], 0.5)
        per_class = ap_per_class(result)
        assert per_class["car"] == 1.0
        assert per_class["person"] == pytest.approx(51 / 101, abs=1e-12)
        assert average_precision(result) == pytest.approx((1.0 + 51 / 101) / 2, abs=1e-12)

    def test_map_without_any_gt(self):
        result = match_detections([_detection([(0, 0, 1, 1, 0.5, 0)], [])], 0.5)
        with pytest.raises(NoGroundTruth):
            average_precision(result)


def test_detection_metrics_carries_ap_and_counts():
    gts = [(0, 0, 10, 10, 0), (20, 0, 30, 10, 0)]
    preds = [(0, 0, 10, 10, 0.9, 0), (40, 0, 50, 10, 0.8, 0)]
    metrics = detection_metrics([_detection(preds, gts)], 0.5)
    assert metrics.ap == pytest.approx(51 / 101, abs=1e-12)
    assert (metrics.tp, metrics.fp, metrics.fn) == (1, 1, 1)
    assert metrics.recall == 0.5
