"""Synthetic detectors for stressing the metrics, plus a brute-force oracle.

The detectors replay known ways of gaming or degrading detection scores:
"perfect" echoes the ground truth, "deceptive" copies every ground-truth box
several times and sprays candidate labels over the copies, "noisy" jitters,
drops, and hallucinates. Output is a pure function of (gt, spec): per-image
RNG streams are derived from (seed, image_id), so image order, thread count,
and unrelated images never change a prediction.

oracle_ap is a deliberately naive AP implementation (quadratic matching,
explicit cumulative table, direct grid scan, no numpy) used to verify the
engine. It shares configuration types with the engine but no metric code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .ap import CategoryEval, EvalConfig, EvalResult
from .dataset import GroundTruthSet, Prediction, PredictionSet
from .errors import ConfigError
from .geometry import BBox

_KINDS = ("perfect", "deceptive", "noisy")
_LABEL_POLICIES = ("correct", "all-candidates", "random")
_CONFIDENCE_KINDS = ("fixed-list", "uniform", "label-advantage")


@dataclass(frozen=True)
class ConfidenceModel:
    """How scores are produced.

    fixed-list: cycle through values in emission order, restarting per image.
    uniform: draw from [low, high].
    label-advantage: base everywhere, base + delta when the emitted label is
    the annotation's true category (delta may be negative, handing the
    advantage to wrong labels).
    """

    kind: str = "fixed-list"
    values: tuple[float, ...] = (1.0,)
    low: float = 0.0
    high: float = 1.0
    base: float = 0.5
    delta: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in _CONFIDENCE_KINDS:
            raise ConfigError(f"confidence kind must be one of {_CONFIDENCE_KINDS}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.kind == "fixed-list":
            if not self.values:
                raise ConfigError("fixed-list confidence needs at least one value")
            if any(not 0.0 <= v <= 1.0 for v in self.values):
                raise ConfigError("fixed-list confidence values must lie in [0, 1]")
        if self.kind == "uniform" and not 0.0 <= self.low <= self.high <= 1.0:
            raise ConfigError("uniform confidence needs 0 <= low <= high <= 1")
        if self.kind == "label-advantage":
            for v in (self.base, self.base + self.delta):
                if not 0.0 <= v <= 1.0:
                    raise ConfigError("label-advantage scores must stay in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "values": list(self.values),
            "low": self.low,
            "high": self.high,
            "base": self.base,
            "delta": self.delta,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ConfidenceModel":
        extra = set(data) - set(cls.__dataclass_fields__)
        if extra:
            raise ConfigError(f"unknown confidence fields: {sorted(extra)}")
        kwargs = dict(data)
        if "values" in kwargs:
            kwargs["values"] = tuple(kwargs["values"])
        return cls(**kwargs)


@dataclass(frozen=True)
class DetectorSpec:
    """Recipe for a synthetic detector.

    Attributes:
        kind: perfect | deceptive | noisy.
        boxes_per_gt: box copies emitted per annotation (deceptive/noisy).
        label_policy: correct | all-candidates | random. all-candidates
            labels each box copy with every category present in the image
            (or the whole vocabulary when full_vocabulary is set).
        confidence: score model; see ConfidenceModel.
        jitter: per-coordinate uniform wobble in pixels, clamped to bounds.
        fp_rate: expected spurious boxes per image (fraction drawn per image).
        drop_rate: probability of skipping an annotation (noisy only).
        seed: together with the input, fully determines the output.
        full_vocabulary: widen all-candidates/random labels to every
            category in the ground-truth set.
    """

    kind: str
    boxes_per_gt: int = 1
    label_policy: str = "correct"
    confidence: ConfidenceModel = field(default_factory=ConfidenceModel)
    jitter: float = 0.0
    fp_rate: float = 0.0
    drop_rate: float = 0.0
    seed: int = 0
    full_vocabulary: bool = False

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ConfigError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if self.label_policy not in _LABEL_POLICIES:
            raise ConfigError(f"label_policy must be one of {_LABEL_POLICIES}")
        if not isinstance(self.boxes_per_gt, int) or self.boxes_per_gt < 1:
            raise ConfigError("boxes_per_gt must be an integer >= 1")
        if self.jitter < 0:
            raise ConfigError("jitter must be >= 0")
        if self.fp_rate < 0:
            raise ConfigError("fp_rate must be >= 0")
        if not 0.0 <= self.drop_rate < 1.0:
            raise ConfigError("drop_rate must be within [0, 1)")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if self.kind == "perfect" and (
            self.jitter or self.fp_rate or self.drop_rate
            or self.boxes_per_gt != 1 or self.label_policy != "correct"
        ):
            raise ConfigError("perfect detector takes no noise or label knobs")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "boxes_per_gt": self.boxes_per_gt,
            "label_policy": self.label_policy,
            "confidence": self.confidence.to_dict(),
            "jitter": self.jitter,
            "fp_rate": self.fp_rate,
            "drop_rate": self.drop_rate,
            "seed": self.seed,
            "full_vocabulary": self.full_vocabulary,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "DetectorSpec":
        extra = set(data) - set(cls.__dataclass_fields__)
        if extra:
            raise ConfigError(f"unknown detector fields: {sorted(extra)}")
        kwargs = dict(data)
        if "confidence" in kwargs and isinstance(kwargs["confidence"], Mapping):
            kwargs["confidence"] = ConfidenceModel.from_dict(kwargs["confidence"])
        return cls(**kwargs)


class _ImageEmitter:
    """Emission state for one image: RNG stream and fixed-list cursor."""

    def __init__(self, spec: DetectorSpec, image_id: int):
        self.spec = spec
        self.rng = np.random.default_rng([spec.seed, image_id % 2**63])
        self.cursor = 0

    def score(self, label: int, true_label: int | None) -> float:
        model = self.spec.confidence
        if model.kind == "fixed-list":
            v = model.values[self.cursor % len(model.values)]
            self.cursor += 1
            return v
        if model.kind == "uniform":
            return float(self.rng.uniform(model.low, model.high))
        if true_label is not None and label == true_label:
            return model.base + model.delta
        return model.base

    def jittered(self, box: BBox, width: float, height: float) -> BBox:
        j = self.spec.jitter
        if j == 0.0:
            return box
        dx1, dy1, dx2, dy2 = self.rng.uniform(-j, j, size=4)
        return BBox(
            min(max(box.x_min + dx1, 0.0), width),
            min(max(box.y_min + dy1, 0.0), height),
            min(max(box.x_max + dx2, 0.0), width),
            min(max(box.y_max + dy2, 0.0), height),
        ).canonical()


def _candidate_labels(spec: DetectorSpec, gt: GroundTruthSet, image_id: int) -> list[int]:
    if spec.full_vocabulary:
        return sorted(gt.categories)
    anns = gt.by_image.get(image_id, ())
    return sorted({a.category_id for a in anns})


def simulate(gt: GroundTruthSet, spec: DetectorSpec) -> PredictionSet:
    """Generate predictions for every image of gt according to spec.

    Emission order (and therefore prediction indices and any fixed-list
    scores) is: images ascending, annotations ascending, box copies, then
    candidate labels ascending; spurious boxes come after a image's
    annotation-driven output.
    """
    out: list[Prediction] = []

    def emit(image_id: int, category_id: int, box: BBox, score: float) -> None:
        out.append(Prediction(image_id, category_id, box, score, len(out)))

    for image_id in sorted(gt.images):
        image = gt.images[image_id]
        anns = gt.by_image.get(image_id, ())
        if spec.kind == "perfect":
            for a in anns:
                emit(image_id, a.category_id, a.bbox, 1.0)
            continue
        em = _ImageEmitter(spec, image_id)
        vocab = _candidate_labels(spec, gt, image_id)
        for a in anns:
            if spec.kind == "noisy" and spec.drop_rate > 0.0:
                if em.rng.random() < spec.drop_rate:
                    continue
            for _ in range(spec.boxes_per_gt):
                box = em.jittered(a.bbox, image.width, image.height)
                if spec.label_policy == "correct":
                    labels = [a.category_id]
                elif spec.label_policy == "all-candidates":
                    labels = vocab
                else:
                    labels = [int(em.rng.choice(vocab))] if vocab else []
                for label in labels:
                    emit(image_id, label, box, em.score(label, a.category_id))
        if spec.fp_rate > 0.0 and vocab:
            n = int(spec.fp_rate) + (1 if em.rng.random() < spec.fp_rate % 1.0 else 0)
            for _ in range(n):
                xs = sorted(em.rng.uniform(0.0, image.width, size=2))
                ys = sorted(em.rng.uniform(0.0, image.height, size=2))
                label = int(em.rng.choice(vocab))
                emit(image_id, label, BBox(xs[0], ys[0], xs[1], ys[1]), em.score(label, None))
    return PredictionSet.build(out)


def _naive_iou(a: BBox, b: BBox) -> float:
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    inter = ix * iy if (ix > 0.0 and iy > 0.0) else 0.0
    ua = (a.x_max - a.x_min) * (a.y_max - a.y_min)
    ub = (b.x_max - b.x_min) * (b.y_max - b.y_min)
    union = ua + ub - inter
    return inter / union if union > 0.0 else 0.0


def _naive_category_ap(
    gt: GroundTruthSet,
    preds: PredictionSet,
    category_id: int,
    threshold: float,
    config: EvalConfig,
) -> tuple[float, int, int]:
    """One category at one threshold, everything spelled out.

    Returns (ap, tp_total, fp_total).
    """
    gtnum = sum(1 for a in gt.annotations if a.category_id == category_id)
    records: list[tuple[float, int, bool]] = []
    for image_id in sorted(gt.images):
        anns = [
            a
            for a in sorted(gt.annotations, key=lambda a: a.id)
            if a.image_id == image_id and a.category_id == category_id
        ]
        dets = [
            p
            for p in preds.predictions
            if p.image_id == image_id
            and p.category_id == category_id
            and p.score >= config.score_floor
        ]
        dets.sort(key=lambda p: (-p.score, p.index))
        dets = dets[: config.max_dets]
        used: set[int] = set()
        for p in dets:
            best = -1
            best_iou = -1.0
            for k, a in enumerate(anns):
                if k in used:
                    continue
                v = _naive_iou(p.bbox, a.bbox)
                if v >= threshold and v > best_iou:
                    best = k
                    best_iou = v
            if best >= 0:
                used.add(best)
                records.append((p.score, p.index, True))
            else:
                records.append((p.score, p.index, False))
    records.sort(key=lambda r: (-r[0], r[1]))
    precisions: list[float] = []
    recalls: list[float] = []
    tp = 0
    fp = 0
    for _, _, hit in records:
        if hit:
            tp += 1
        else:
            fp += 1
        precisions.append(tp / (tp + fp))
        recalls.append(tp / gtnum)
    points = config.recall_points
    total = 0.0
    for j in range(points):
        r = j / (points - 1)
        best_p = 0.0
        for p_val, r_val in zip(precisions, recalls):
            if r_val >= r and p_val > best_p:
                best_p = p_val
        total += best_p
    return total / points, tp, fp


def oracle_ap(
    gt: GroundTruthSet,
    preds: PredictionSet,
    config: EvalConfig | None = None,
) -> EvalResult:
    """Brute-force reference evaluation for small instances.

    Quadratic in everything and happily so; exists only to check the engine.
    """
    config = config or EvalConfig()
    per_category: dict[int, CategoryEval] = {}
    excluded: list[int] = []
    included: list[float] = []
    for cid in sorted(gt.categories):
        if not any(a.category_id == cid for a in gt.annotations):
            excluded.append(cid)
            continue
        per_threshold: dict[float, float] = {}
        tp_totals: dict[float, int] = {}
        fp_totals: dict[float, int] = {}
        for t in config.iou_thresholds:
            ap, tp, fp = _naive_category_ap(gt, preds, cid, t, config)
            per_threshold[t] = ap
            tp_totals[t] = tp
            fp_totals[t] = fp
        cat_ap = math.fsum(per_threshold.values()) / len(config.iou_thresholds)
        gtnum = sum(1 for a in gt.annotations if a.category_id == cid)
        per_category[cid] = CategoryEval(cid, cat_ap, per_threshold, gtnum, tp_totals, fp_totals)
        included.append(cat_ap)
    mean_ap = math.fsum(included) / len(included) if included else 0.0
    return EvalResult(
        mean_ap=mean_ap,
        per_category=per_category,
        excluded_categories=tuple(excluded),
        config=config,
    )
