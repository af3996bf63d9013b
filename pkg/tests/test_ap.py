"""Interpolated AP: matching, PR curves, invariances, oracle agreement."""

from __future__ import annotations

import json

import numpy as np
import pytest

from nmsap.ap import (
    EvalConfig,
    default_iou_thresholds,
    evaluate,
    interpolated_ap,
    match,
    pr_curve,
    recall_grid,
)
from nmsap.dataset import dump_ground_truth, dump_predictions, load_ground_truth, load_predictions
from nmsap.errors import ConfigError
from nmsap.simulate import oracle_ap


def relabel(gt, preds, mapping):
    """Rebuild both sets with category ids permuted by `mapping`."""
    wire = dump_ground_truth(gt)
    for cat in wire["categories"]:
        cat["id"] = mapping[cat["id"]]
    for ann in wire["annotations"]:
        ann["category_id"] = mapping[ann["category_id"]]
    rows = dump_predictions(preds)
    for row in rows:
        row["category_id"] = mapping[row["category_id"]]
    gt2 = load_ground_truth(json.dumps(wire).encode())
    return gt2, load_predictions(json.dumps(rows).encode(), gt2)


def transform_boxes(gt, preds, fn):
    """Rebuild both sets with every bbox run through `fn(x, y, w, h)`."""
    wire = dump_ground_truth(gt)
    for ann in wire["annotations"]:
        ann["bbox"] = list(fn(*ann["bbox"]))
    rows = dump_predictions(preds)
    for row in rows:
        row["bbox"] = list(fn(*row["bbox"]))
    gt2 = load_ground_truth(json.dumps(wire).encode())
    return gt2, load_predictions(json.dumps(rows).encode(), gt2)


class TestDefaults:
    def test_threshold_ladder(self):
        ladder = default_iou_thresholds()
        assert ladder == tuple(np.linspace(0.5, 0.95, 10))
        assert len(ladder) == 10
        assert ladder[0] == 0.5 and ladder[-1] == 0.95

    def test_recall_grid_is_exact(self):
        grid = recall_grid(101)
        assert grid.shape == (101,)
        for j in (0, 1, 37, 50, 99, 100):
            assert grid[j] == j / 100

    def test_config_round_trip(self):
        cfg = EvalConfig(iou_thresholds=(0.5, 0.75), recall_points=11, max_dets=5)
        assert EvalConfig.from_dict(cfg.to_dict()) == cfg

    @pytest.mark.parametrize("kwargs", [
        dict(recall_points=1),
        dict(max_dets=0),
        dict(score_floor=1.5),
        dict(score_floor=-0.1),
        dict(iou_thresholds=()),
        dict(iou_thresholds=(0.0,)),
        dict(iou_thresholds=(1.2,)),
        dict(iou_thresholds=(0.5, 0.5)),
        dict(iou_thresholds=(0.7, 0.5)),
        dict(tie_break="rank"),
    ])
    def test_config_rejections(self, kwargs):
        with pytest.raises(ConfigError):
            EvalConfig(**kwargs)


class TestTwocarFixture:
    def test_wrong_labels_give_half_map(self, twocar_gt, twocar_pred_wrong):
        result = evaluate(twocar_gt, twocar_pred_wrong)
        assert result.mean_ap == pytest.approx(0.5, abs=1e-12)
        for cid in (1, 2):
            ce = result.per_category[cid]
            assert ce.ap == pytest.approx(0.5, abs=1e-12)
            assert ce.gt_count == 1
            assert ce.tp[0.5] == 1 and ce.fp[0.5] == 1

    def test_correct_labels_give_full_map(self, twocar_gt, twocar_pred_correct):
        result = evaluate(twocar_gt, twocar_pred_correct)
        assert result.mean_ap == pytest.approx(1.0, abs=1e-12)

    def test_pr_curve_endpoint(self, twocar_gt, twocar_pred_wrong):
        result = evaluate(twocar_gt, twocar_pred_wrong)
        curve = result.curve(1, 0.5)
        assert curve.recall[-1] == 1.0
        assert curve.precision[-1] == 0.5
        assert curve.gt_count == 1

    def test_to_dict_shape(self, twocar_gt, twocar_pred_wrong):
        payload = evaluate(twocar_gt, twocar_pred_wrong).to_dict()
        assert payload["mAP"] == pytest.approx(0.5, abs=1e-12)
        assert set(payload["per_category"]) == {"1", "2"}
        assert payload["per_category"]["1"]["per_threshold"]["0.95"] == pytest.approx(0.5)
        assert payload["excluded_categories"] == []


class TestMatching:
    def test_greedy_takes_highest_iou(self, make_gt, make_preds):
        gt = make_gt([(1, 100, 100)], [(1, "a")], [
            (1, 1, 1, 0, 0, 20, 20),
            (2, 1, 1, 10, 0, 20, 20),
        ])
        # det overlaps ann 2 much more than ann 1
        preds = make_preds(gt, [(1, 1, 12, 0, 20, 20, 0.9)])
        entry = match(gt, preds, 0.3).entries[0]
        assert entry.det_matched == (2,)
        assert entry.unmatched_gt == (1,)

    def test_equal_iou_tie_goes_to_lowest_ann_id(self, make_gt, make_preds):
        gt = make_gt([(1, 100, 100)], [(1, "a")], [
            (5, 1, 1, 10, 10, 20, 20),
            (9, 1, 1, 10, 10, 20, 20),
        ])
        preds = make_preds(gt, [(1, 1, 10, 10, 20, 20, 0.9)])
        entry = match(gt, preds, 0.5).entries[0]
        assert entry.det_matched == (5,)
        assert entry.unmatched_gt == (9,)

    def test_each_gt_claimed_once(self, random_instance):
        for seed in range(40):
            gt, preds = random_instance(seed)
            table = match(gt, preds, 0.5)
            for entry in table.entries:
                claimed = [g for g in entry.det_matched if g != -1]
                assert len(claimed) == len(set(claimed))
                assert not set(claimed) & set(entry.unmatched_gt)

    def test_score_rank_beats_iou(self, make_gt, make_preds):
        gt = make_gt([(1, 100, 100)], [(1, "a")], [(1, 1, 1, 0, 0, 20, 20)])
        # lower-IoU det ranks first by score and claims the only gt
        preds = make_preds(gt, [
            (1, 1, 5, 0, 20, 20, 0.9),
            (1, 1, 0, 0, 20, 20, 0.8),
        ])
        entry = match(gt, preds, 0.5).entries[0]
        assert entry.det_matched == (1, -1)

    def test_score_tie_broken_by_source_index(self, make_gt, make_preds):
        gt = make_gt([(1, 100, 100)], [(1, "a")], [(1, 1, 1, 0, 0, 20, 20)])
        preds = make_preds(gt, [
            (1, 1, 0, 0, 20, 20, 0.7),
            (1, 1, 0, 0, 20, 20, 0.7),
        ])
        entry = match(gt, preds, 0.5).entries[0]
        assert entry.det_indices == (0, 1)
        assert entry.det_matched == (1, -1)

    def test_threshold_gates_match(self, make_gt, make_preds):
        gt = make_gt([(1, 100, 100)], [(1, "a")], [(1, 1, 1, 0, 0, 10, 10)])
        preds = make_preds(gt, [(1, 1, 0, 0, 5, 10, 0.9)])  # IoU exactly 0.5
        assert match(gt, preds, 0.5).entries[0].det_matched == (1,)
        assert match(gt, preds, 0.51).entries[0].det_matched == (-1,)


class TestEvaluate:
    def test_empty_predictions(self, twocar_gt, make_preds):
        result = evaluate(twocar_gt, make_preds(twocar_gt, []))
        assert result.mean_ap == 0.0
        assert all(ce.ap == 0.0 for ce in result.per_category.values())
        assert result.curve(1, 0.5).is_empty

    def test_zero_gt_category_excluded(self, make_gt, make_preds):
        gt = make_gt([(1, 100, 100)], [(1, "a"), (2, "b")],
                     [(1, 1, 1, 10, 10, 20, 20)])
        preds = make_preds(gt, [(1, 1, 10, 10, 20, 20, 0.9)])
        result = evaluate(gt, preds)
        assert result.excluded_categories == (2,)
        assert 2 not in result.per_category
        assert result.mean_ap == 1.0

    def test_all_categories_empty(self, make_gt, make_preds):
        gt = make_gt([(1, 100, 100)], [(1, "a")], [])
        result = evaluate(gt, make_preds(gt, []))
        assert result.excluded_categories == (1,)
        assert result.mean_ap == 0.0

    def test_perfect_predictions(self, make_gt, make_preds):
        gt = make_gt([(1, 100, 100), (2, 100, 100)], [(1, "a"), (2, "b")], [
            (1, 1, 1, 0, 0, 10, 10),
            (2, 1, 2, 30, 30, 10, 10),
            (3, 2, 1, 50, 50, 20, 20),
        ])
        preds = make_preds(gt, [
            (1, 1, 0, 0, 10, 10, 1.0),
            (1, 2, 30, 30, 10, 10, 1.0),
            (2, 1, 50, 50, 20, 20, 1.0),
        ])
        result = evaluate(gt, preds)
        assert result.mean_ap == 1.0

    def test_max_dets_truncates_low_scores(self, make_gt, make_preds):
        gt = make_gt([(1, 100, 100)], [(1, "a")], [(1, 1, 1, 0, 0, 10, 10)])
        preds = make_preds(gt, [
            (1, 1, 50, 50, 10, 10, 0.9),
            (1, 1, 70, 70, 10, 10, 0.8),
            (1, 1, 0, 0, 10, 10, 0.7),  # the only true positive
        ])
        loose = evaluate(gt, preds, EvalConfig(iou_thresholds=(0.5,), max_dets=3))
        tight = evaluate(gt, preds, EvalConfig(iou_thresholds=(0.5,), max_dets=2))
        assert loose.mean_ap > 0.0
        assert tight.mean_ap == 0.0

    def test_score_floor_drops_detections(self, make_gt, make_preds):
        gt = make_gt([(1, 100, 100)], [(1, "a")], [(1, 1, 1, 0, 0, 10, 10)])
        preds = make_preds(gt, [(1, 1, 0, 0, 10, 10, 0.3)])
        kept = evaluate(gt, preds, EvalConfig(iou_thresholds=(0.5,)))
        dropped = evaluate(gt, preds, EvalConfig(iou_thresholds=(0.5,), score_floor=0.4))
        assert kept.mean_ap == 1.0
        assert dropped.mean_ap == 0.0

    def test_interpolated_ap_rejects_zero_gt(self, make_gt, make_preds):
        gt = make_gt([(1, 100, 100)], [(1, "a"), (2, "b")],
                     [(1, 1, 1, 0, 0, 10, 10)])
        table = match(gt, make_preds(gt, []), 0.5)
        with pytest.raises(ConfigError):
            interpolated_ap(pr_curve(table, 2))

    def test_pr_curve_from_match_table(self, twocar_gt, twocar_pred_wrong):
        table = match(twocar_gt, twocar_pred_wrong, 0.5)
        curve = pr_curve(table, 1)
        assert curve.gt_count == 1
        assert curve.recall[-1] == 1.0
        assert curve.precision[-1] == 0.5
        assert interpolated_ap(curve) == pytest.approx(0.5, abs=1e-12)


class TestInvariances:
    def test_fp_append_never_raises_ap(self, random_instance):
        for seed in range(30):
            gt, preds = random_instance(seed)
            before = evaluate(gt, preds)
            rows = dump_predictions(preds)
            for img_id in gt.image_ids:
                for cid in gt.category_ids:
                    rows.append({"image_id": img_id, "category_id": cid,
                                 "bbox": [900.0, 900.0, 5.0, 5.0], "score": 0.001})
            widened = load_predictions(json.dumps(rows).encode(), gt)
            after = evaluate(gt, widened)
            for cid, ce in before.per_category.items():
                assert after.per_category[cid].ap <= ce.ap + 1e-12

    def test_threshold_monotonicity(self, random_instance):
        for seed in range(40):
            gt, preds = random_instance(seed)
            result = evaluate(gt, preds)
            for ce in result.per_category.values():
                values = [ce.per_threshold[t] for t in sorted(ce.per_threshold)]
                assert all(a >= b for a, b in zip(values, values[1:]))

    def test_category_relabel_invariance(self, random_instance):
        for seed in range(20):
            gt, preds = random_instance(seed)
            mapping = {cid: 100 - cid for cid in gt.category_ids}
            gt2, preds2 = relabel(gt, preds, mapping)
            a, b = evaluate(gt, preds), evaluate(gt2, preds2)
            assert a.mean_ap == b.mean_ap
            for cid in a.per_category:
                assert a.per_category[cid].ap == b.per_category[mapping[cid]].ap

    def test_power_of_two_scaling_invariance(self, random_instance):
        gt, preds = random_instance(3)
        scaled = transform_boxes(gt, preds, lambda x, y, w, h: (4 * x, 4 * y, 4 * w, 4 * h))
        assert evaluate(*scaled).mean_ap == evaluate(gt, preds).mean_ap

    def test_integer_translation_invariance(self, random_instance):
        gt, preds = random_instance(3)
        moved = transform_boxes(gt, preds, lambda x, y, w, h: (x + 37, y + 11, w, h))
        assert evaluate(*moved).mean_ap == evaluate(gt, preds).mean_ap

    def test_serial_equals_parallel(self, medium_gt, medium_pred):
        serial = evaluate(medium_gt, medium_pred, threads=1)
        parallel = evaluate(medium_gt, medium_pred, threads=4)
        assert serial.mean_ap == parallel.mean_ap
        assert serial.to_dict() == parallel.to_dict()
        for key, curve in serial.curves.items():
            other = parallel.curves[key]
            assert np.array_equal(curve.recall, other.recall)
            assert np.array_equal(curve.precision, other.precision)


class TestOracleAgreement:
    def test_engine_matches_bruteforce_oracle(self, random_instance):
        for seed in range(25):
            gt, preds = random_instance(seed)
            engine = evaluate(gt, preds)
            oracle = oracle_ap(gt, preds)
            assert set(engine.per_category) == set(oracle.per_category)
            for cid, ce in engine.per_category.items():
                assert ce.ap == pytest.approx(oracle.per_category[cid].ap, abs=1e-12)
            assert engine.mean_ap == pytest.approx(oracle.mean_ap, abs=1e-12)
