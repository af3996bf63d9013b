"""Suppression-aware AP: cross-class NMS around ground truth, then the sweep.

Inflated scores from near-duplicate boxes with different labels survive
ordinary per-class evaluation. Here every prediction is first assigned,
ignoring labels, to the ground-truth box it overlaps most (strictly above
the overlap threshold); each group is then thinned by class-ignored NMS and
only the survivors, plus predictions that overlapped nothing, are scored.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from .ap import EvalConfig, EvalResult, NmsInfo, evaluate
from .dataset import GroundTruthSet, Prediction, PredictionSet
from .errors import ConfigError
from .geometry import boxes_to_array, iou, iou_matrix

_MODES = ("greedy-nms", "keep-top-1")


@dataclass(frozen=True)
class NmsConfig:
    """Suppression knobs.

    Attributes:
        gt_overlap_threshold: a prediction joins a ground-truth group only
            when its best IoU is strictly greater than this.
        mode: "greedy-nms" keeps every local score maximum within a group;
            "keep-top-1" keeps only the single highest-scoring member.
        nms_iou: in greedy-nms mode, group members with IoU strictly greater
            than this against a kept box are suppressed.
    """

    gt_overlap_threshold: float = 0.5
    mode: str = "greedy-nms"
    nms_iou: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 < float(self.gt_overlap_threshold) <= 1.0:
            raise ConfigError("gt_overlap_threshold must be within (0, 1]")
        if self.mode not in _MODES:
            raise ConfigError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if not 0.0 < float(self.nms_iou) <= 1.0:
            raise ConfigError("nms_iou must be within (0, 1]")
        object.__setattr__(self, "gt_overlap_threshold", float(self.gt_overlap_threshold))
        object.__setattr__(self, "nms_iou", float(self.nms_iou))

    def to_dict(self) -> dict:
        return {
            "gt_overlap_threshold": self.gt_overlap_threshold,
            "mode": self.mode,
            "nms_iou": self.nms_iou,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "NmsConfig":
        extra = set(data) - set(cls.__dataclass_fields__)
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        return cls(**data)


@dataclass(frozen=True)
class GtAssignment:
    """Label-ignored grouping of predictions around ground-truth boxes.

    groups maps annotation id to its overlapping predictions (input order);
    residual holds predictions whose best overlap did not clear the
    threshold. Every input prediction appears exactly once.
    """

    groups: dict[int, tuple[Prediction, ...]]
    residual: tuple[Prediction, ...]


def assign_to_gt(
    gt: GroundTruthSet,
    preds: PredictionSet,
    config: NmsConfig | None = None,
) -> GtAssignment:
    """Assign each prediction to its max-IoU ground-truth box, labels ignored.

    Exact IoU ties go to the lowest annotation id. Predictions on images
    without ground truth, or with best IoU <= gt_overlap_threshold, land in
    the residual.
    """
    config = config or NmsConfig()
    groups: dict[int, list[Prediction]] = {}
    residual: list[Prediction] = []
    for image_id in sorted(preds.by_image):
        dets = preds.by_image[image_id]
        anns = gt.by_image.get(image_id, ())
        if not anns:
            residual.extend(dets)
            continue
        mat = iou_matrix(
            boxes_to_array([d.bbox for d in dets]),
            boxes_to_array([a.bbox for a in anns]),
        )
        best = mat.argmax(axis=1)  # first maximum, i.e. lowest annotation id
        for row, det in enumerate(dets):
            g = int(best[row])
            if mat[row, g] > config.gt_overlap_threshold:
                groups.setdefault(anns[g].id, []).append(det)
            else:
                residual.append(det)
    return GtAssignment(
        groups={k: tuple(v) for k, v in sorted(groups.items())},
        residual=tuple(residual),
    )


def class_ignored_nms(
    group: Sequence[Prediction],
    config: NmsConfig | None = None,
) -> tuple[Prediction, ...]:
    """Thin one group regardless of labels; returns survivors in score order.

    greedy-nms: repeatedly keep the highest-scoring remaining box and drop
    every remaining box whose IoU with it is strictly greater than nms_iou.
    keep-top-1: keep only the single highest-scoring box. Score ties break
    on ascending original index in both modes.
    """
    config = config or NmsConfig()
    if not group:
        return ()
    ranked = sorted(group, key=lambda p: (-p.score, p.index))
    if config.mode == "keep-top-1":
        return (ranked[0],)
    kept: list[Prediction] = []
    remaining = ranked
    while remaining:
        top = remaining[0]
        kept.append(top)
        remaining = [p for p in remaining[1:] if iou(p.bbox, top.bbox) <= config.nms_iou]
    return tuple(kept)


def suppress(
    gt: GroundTruthSet,
    preds: PredictionSet,
    config: NmsConfig | None = None,
) -> PredictionSet:
    """Assignment plus per-group NMS; returns residual and survivors.

    Surviving predictions keep their original records (index included), so
    running suppress on its own output changes nothing: a group that has
    been thinned contains no pair above nms_iou, and the residual is
    untouched by construction.
    """
    config = config or NmsConfig()
    assignment = assign_to_gt(gt, preds, config)
    kept: list[Prediction] = list(assignment.residual)
    for ann_id in sorted(assignment.groups):
        kept.extend(class_ignored_nms(assignment.groups[ann_id], config))
    return PredictionSet.build(kept)


def nms_ap_evaluate(
    gt: GroundTruthSet,
    preds: PredictionSet,
    nms_config: NmsConfig | None = None,
    eval_config: EvalConfig | None = None,
    *,
    threads: int = 1,
) -> EvalResult:
    """Score only what survives ground-truth-anchored suppression.

    The returned result carries the suppression mode and the number of
    predictions removed.
    """
    nms_config = nms_config or NmsConfig()
    kept = suppress(gt, preds, nms_config)
    result = evaluate(gt, kept, eval_config, threads=threads)
    info = NmsInfo(mode=nms_config.mode, suppressed=len(preds) - len(kept))
    return replace(result, nms=info)
