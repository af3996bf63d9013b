"""Interpolated average precision over an IoU-threshold sweep.

Matching is greedy per (image, category): predictions in descending score
order claim the unclaimed ground-truth box of highest IoU at or above the
threshold. Precision is sampled on an evenly spaced recall grid, taking the
maximum precision at any recall >= the grid point, and AP is the mean over
the grid. mAP averages categories that have at least one ground-truth box.

Results are bit-identical for any thread count and for any permutation of
the input arrays: ordering is fixed by (score desc, original index asc) for
predictions and ascending id for ground truth, and cross-category means use
exact summation.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .dataset import GroundTruthSet, PredictionSet
from .errors import ConfigError
from .geometry import boxes_to_array, iou_matrix


def default_iou_thresholds() -> tuple[float, ...]:
    """The standard 0.50:0.95 sweep in steps of 0.05 (ten thresholds)."""
    return tuple(float(t) for t in np.linspace(0.5, 0.95, 10))


def recall_grid(points: int) -> np.ndarray:
    """Evenly spaced recall grid over [0, 1]; point j is exactly j/(points-1)."""
    return np.arange(points, dtype=np.float64) / (points - 1)


def threshold_key(t: float) -> str:
    """Stable display key for a threshold (six significant digits)."""
    return f"{t:.6g}"


_TIE_BREAKS = ("index",)


@dataclass(frozen=True)
class EvalConfig:
    """Knobs of the AP computation.

    Attributes:
        iou_thresholds: strictly increasing values in (0, 1].
        recall_points: size of the recall grid (>= 2).
        max_dets: per image and category, keep only this many top-scoring
            predictions.
        score_floor: predictions scoring below this are dropped up front.
        tie_break: how equal scores are ordered; only "index" (ascending
            position in the input array) is defined.
    """

    iou_thresholds: tuple[float, ...] = field(default_factory=default_iou_thresholds)
    recall_points: int = 101
    max_dets: int = 100
    score_floor: float = 0.0
    tie_break: str = "index"

    def __post_init__(self) -> None:
        ts = tuple(float(t) for t in self.iou_thresholds)
        object.__setattr__(self, "iou_thresholds", ts)
        if not ts:
            raise ConfigError("iou_thresholds must not be empty")
        for t in ts:
            if not 0.0 < t <= 1.0:
                raise ConfigError(f"iou threshold {t} outside (0, 1]")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ConfigError("iou_thresholds must be strictly increasing")
        if len({threshold_key(t) for t in ts}) != len(ts):
            raise ConfigError("iou_thresholds too close to address separately")
        if not isinstance(self.recall_points, int) or self.recall_points < 2:
            raise ConfigError("recall_points must be an integer >= 2")
        if not isinstance(self.max_dets, int) or self.max_dets < 1:
            raise ConfigError("max_dets must be an integer >= 1")
        if not 0.0 <= float(self.score_floor) <= 1.0:
            raise ConfigError("score_floor must be within [0, 1]")
        object.__setattr__(self, "score_floor", float(self.score_floor))
        if self.tie_break not in _TIE_BREAKS:
            raise ConfigError(f"unknown tie_break {self.tie_break!r}")

    def to_dict(self) -> dict:
        return {
            "iou_thresholds": list(self.iou_thresholds),
            "recall_points": self.recall_points,
            "max_dets": self.max_dets,
            "score_floor": self.score_floor,
            "tie_break": self.tie_break,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "EvalConfig":
        extra = set(data) - set(cls.__dataclass_fields__)
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        kwargs = dict(data)
        if "iou_thresholds" in kwargs:
            kwargs["iou_thresholds"] = tuple(kwargs["iou_thresholds"])
        return cls(**kwargs)


@dataclass(frozen=True)
class MatchEntry:
    """Match outcome for one (image, category) cell at one threshold.

    det_* tuples are in rank order (score desc, index asc), already floored
    and truncated to max_dets. det_matched holds the claimed annotation id,
    or -1 for unmatched (false positive) predictions.
    """

    image_id: int
    category_id: int
    det_indices: tuple[int, ...]
    det_scores: tuple[float, ...]
    det_matched: tuple[int, ...]
    unmatched_gt: tuple[int, ...]


@dataclass(frozen=True)
class MatchTable:
    threshold: float
    entries: tuple[MatchEntry, ...]

    def for_category(self, category_id: int) -> tuple[MatchEntry, ...]:
        return tuple(e for e in self.entries if e.category_id == category_id)


class _Unit:
    """Prepared (image, category) cell: ranked detections and their IoUs."""

    __slots__ = ("image_id", "category_id", "gt_ids", "scores", "indices", "ious")

    def __init__(self, image_id, category_id, gt_ids, scores, indices, ious):
        self.image_id = image_id
        self.category_id = category_id
        self.gt_ids = gt_ids      # annotation ids, ascending
        self.scores = scores      # rank order
        self.indices = indices    # original prediction indices, rank order
        self.ious = ious          # per-detection IoU rows against gt_ids

    def match_at(self, threshold: float) -> list[int]:
        return _greedy_match(self.ious, len(self.gt_ids), threshold)


def _prepare_units(gt: GroundTruthSet, preds: PredictionSet, config: EvalConfig) -> list[_Unit]:
    keys = sorted(set(gt.by_image_category) | set(preds.by_image_category))
    units: list[_Unit] = []
    for key in keys:
        image_id, category_id = key
        anns = gt.by_image_category.get(key, ())
        dets = preds.by_image_category.get(key, ())
        if config.score_floor > 0.0:
            dets = [d for d in dets if d.score >= config.score_floor]
        dets = sorted(dets, key=lambda d: (-d.score, d.index))[: config.max_dets]
        if not dets and not anns:
            continue
        gt_ids = [a.id for a in anns]
        scores = [d.score for d in dets]
        indices = [d.index for d in dets]
        if dets and anns:
            mat = iou_matrix(
                boxes_to_array([d.bbox for d in dets]),
                boxes_to_array([a.bbox for a in anns]),
            )
            ious = mat.tolist()
        else:
            ious = [[] for _ in dets]
        units.append(_Unit(image_id, category_id, gt_ids, scores, indices, ious))
    return units


def _greedy_match(ious: list[list[float]], n_gt: int, threshold: float) -> list[int]:
    """Greedy assignment in rank order; returns per-detection gt position or -1.

    A detection claims the unclaimed gt of highest IoU >= threshold; exact
    IoU ties go to the earlier position, i.e. the lowest annotation id.
    """
    taken = [False] * n_gt
    out = []
    for row in ious:
        best = -1
        best_iou = -1.0
        for g in range(n_gt):
            if taken[g]:
                continue
            v = row[g]
            if v < threshold or v <= best_iou:
                continue
            best = g
            best_iou = v
        if best >= 0:
            taken[best] = True
        out.append(best)
    return out


def match(
    gt: GroundTruthSet,
    preds: PredictionSet,
    threshold: float,
    config: EvalConfig | None = None,
) -> MatchTable:
    """Run greedy matching at a single IoU threshold.

    Entries come out sorted by (image_id, category_id). Cells with neither
    detections nor ground truth are omitted; cells holding only ground truth
    appear with empty det tuples so recall denominators stay visible.
    """
    config = config or EvalConfig()
    entries = []
    for unit in _prepare_units(gt, preds, config):
        assigned = unit.match_at(float(threshold))
        matched_ids = tuple(unit.gt_ids[g] if g >= 0 else -1 for g in assigned)
        claimed = {m for m in matched_ids if m >= 0}
        entries.append(
            MatchEntry(
                image_id=unit.image_id,
                category_id=unit.category_id,
                det_indices=tuple(unit.indices),
                det_scores=tuple(unit.scores),
                det_matched=matched_ids,
                unmatched_gt=tuple(i for i in unit.gt_ids if i not in claimed),
            )
        )
    return MatchTable(threshold=float(threshold), entries=tuple(entries))


@dataclass(frozen=True)
class PRCurve:
    """Cumulative precision/recall in rank order for one category+threshold.

    Arrays have one point per ranked detection. A curve with gt_count == 0
    is empty by definition and cannot be turned into an AP.
    """

    category_id: int
    threshold: float
    recall: np.ndarray
    precision: np.ndarray
    gt_count: int

    @property
    def is_empty(self) -> bool:
        return self.gt_count == 0 or self.recall.size == 0


def _rank_order(scores: np.ndarray, indices: np.ndarray) -> np.ndarray:
    # np.lexsort sorts by the last key first
    return np.lexsort((indices, -scores))


def _cumulative_pr(flags_ranked: np.ndarray, gt_count: int):
    tp = np.cumsum(flags_ranked, dtype=np.int64)
    seen = np.arange(1, flags_ranked.size + 1, dtype=np.int64)
    return tp / gt_count, tp / seen


def pr_curve(table: MatchTable, category_id: int) -> PRCurve:
    """Pool a category's matches across images into one ranked PR curve.

    The recall denominator is recovered from the table itself (matched plus
    unmatched ground truth), so a curve can be built from a table alone.
    """
    scores: list[float] = []
    indices: list[int] = []
    flags: list[bool] = []
    gt_count = 0
    for e in table.entries:
        if e.category_id != category_id:
            continue
        scores.extend(e.det_scores)
        indices.extend(e.det_indices)
        flags.extend(m >= 0 for m in e.det_matched)
        gt_count += len(e.unmatched_gt) + sum(1 for m in e.det_matched if m >= 0)
    if gt_count == 0:
        return PRCurve(category_id, table.threshold, np.empty(0), np.empty(0), 0)
    order = _rank_order(np.asarray(scores, dtype=np.float64), np.asarray(indices, dtype=np.int64))
    ranked_flags = np.asarray(flags, dtype=bool)[order]
    recall, precision = _cumulative_pr(ranked_flags, gt_count)
    return PRCurve(category_id, table.threshold, recall, precision, gt_count)


def _grid_max_precision(precision: np.ndarray, recall: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Max precision at recall >= each grid point; 0 where unattained."""
    q = np.zeros(grid.size, dtype=np.float64)
    if precision.size == 0:
        return q
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    pos = np.searchsorted(recall, grid, side="left")
    hit = pos < recall.size
    q[hit] = envelope[pos[hit]]
    return q


def interpolated_ap(curve: PRCurve, recall_points: int = 101) -> float:
    """AP of one curve: mean of grid-sampled interpolated precision.

    Raises:
        ConfigError: the category has no ground truth, so AP is undefined.
    """
    if curve.gt_count == 0:
        raise ConfigError(
            f"category {curve.category_id} has no ground truth; AP is undefined"
        )
    q = _grid_max_precision(curve.precision, curve.recall, recall_grid(recall_points))
    return float(q.mean())


@dataclass(frozen=True)
class CategoryEval:
    """Everything computed for one category: AP per threshold and its mean,
    plus final-rank TP/FP tallies per threshold."""

    category_id: int
    ap: float
    per_threshold: dict[float, float]
    gt_count: int
    tp: dict[float, int]
    fp: dict[float, int]


@dataclass(frozen=True)
class NmsInfo:
    mode: str
    suppressed: int


@dataclass(frozen=True)
class EvalResult:
    mean_ap: float
    per_category: dict[int, CategoryEval]
    excluded_categories: tuple[int, ...]
    config: EvalConfig
    curves: dict[tuple[int, float], PRCurve] = field(default_factory=dict, repr=False)
    nms: NmsInfo | None = None

    def curve(self, category_id: int, threshold: float) -> PRCurve:
        return self.curves[(category_id, threshold)]

    def to_dict(self) -> dict:
        """Canonical JSON payload; excludes raw curves, fully deterministic."""
        out = {
            "mAP": self.mean_ap,
            "per_category": {
                str(cid): {
                    "ap": ce.ap,
                    "per_threshold": {threshold_key(t): v for t, v in ce.per_threshold.items()},
                    "gt_count": ce.gt_count,
                    "tp": {threshold_key(t): v for t, v in ce.tp.items()},
                    "fp": {threshold_key(t): v for t, v in ce.fp.items()},
                }
                for cid, ce in sorted(self.per_category.items())
            },
            "excluded_categories": list(self.excluded_categories),
            "config": self.config.to_dict(),
        }
        if self.nms is not None:
            out["nms_ap"] = True
            out["mode"] = self.nms.mode
            out["suppressed"] = self.nms.suppressed
        return out


def _resolve_threads(threads: int | None) -> int:
    if threads is None or threads <= 0:
        return os.cpu_count() or 1
    return threads


def evaluate(
    gt: GroundTruthSet,
    preds: PredictionSet,
    config: EvalConfig | None = None,
    *,
    threads: int = 1,
) -> EvalResult:
    """Full sweep: match at every threshold, AP per category, mAP across them.

    Categories without ground truth are excluded from the average (their
    predictions are ignored) and listed in excluded_categories. Thread count
    never changes the numbers: units are independent and the reduction order
    is fixed.
    """
    config = config or EvalConfig()
    threads = _resolve_threads(threads)
    thresholds = config.iou_thresholds
    grid = recall_grid(config.recall_points)

    units = _prepare_units(gt, preds, config)
    if threads > 1 and len(units) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            assignments = list(
                pool.map(lambda u: [u.match_at(t) for t in thresholds], units)
            )
    else:
        assignments = [[u.match_at(t) for t in thresholds] for u in units]

    gt_counts: dict[int, int] = {cid: 0 for cid in gt.categories}
    for a in gt.annotations:
        gt_counts[a.category_id] += 1

    # Pool per category in unit order, i.e. ascending image id.
    unit_ids_by_cat: dict[int, list[int]] = {}
    for i, u in enumerate(units):
        unit_ids_by_cat.setdefault(u.category_id, []).append(i)

    per_category: dict[int, CategoryEval] = {}
    curves: dict[tuple[int, float], PRCurve] = {}
    excluded: list[int] = []
    included_aps: list[float] = []
    for cid in sorted(gt.categories):
        n_gt = gt_counts[cid]
        if n_gt == 0:
            excluded.append(cid)
            continue
        idxs = unit_ids_by_cat.get(cid, [])
        scores = np.asarray([s for i in idxs for s in units[i].scores], dtype=np.float64)
        indices = np.asarray([d for i in idxs for d in units[i].indices], dtype=np.int64)
        order = _rank_order(scores, indices)
        per_threshold: dict[float, float] = {}
        tp_totals: dict[float, int] = {}
        fp_totals: dict[float, int] = {}
        for k, t in enumerate(thresholds):
            flags = np.asarray(
                [g >= 0 for i in idxs for g in assignments[i][k]], dtype=bool
            )
            if flags.size:
                recall, precision = _cumulative_pr(flags[order], n_gt)
            else:
                recall = precision = np.empty(0, dtype=np.float64)
            q = _grid_max_precision(precision, recall, grid)
            per_threshold[t] = float(q.mean())
            tp_totals[t] = int(flags.sum())
            fp_totals[t] = int(flags.size - tp_totals[t])
            curves[(cid, t)] = PRCurve(cid, t, recall, precision, n_gt)
        cat_ap = math.fsum(per_threshold.values()) / len(thresholds)
        per_category[cid] = CategoryEval(cid, cat_ap, per_threshold, n_gt, tp_totals, fp_totals)
        included_aps.append(cat_ap)

    mean_ap = math.fsum(included_aps) / len(included_aps) if included_aps else 0.0
    return EvalResult(
        mean_ap=mean_ap,
        per_category=per_category,
        excluded_categories=tuple(excluded),
        config=config,
        curves=curves,
    )
