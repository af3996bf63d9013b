"""Cross-metric reporting and score-distribution tallies.

aspect_report lines up suppression-aware and traditional AP per subtask,
averages within aspects and overall, and exposes a radar-ready vector.
confidence_distribution splits high-overlap predictions into correct-label
and wrong-label score histograms, which is where label-blind scoring shows
up visually.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .ap import EvalResult
from .dataset import Annotation, GroundTruthSet, Prediction, PredictionSet
from .errors import ConfigError
from .geometry import boxes_to_array, iou_matrix


@dataclass(frozen=True)
class SubtaskMetrics:
    """One subdataset's paired metrics; gap is ap - nms_ap."""

    name: str
    aspect: str
    nms_ap: float
    ap: float
    gap: float

    @classmethod
    def from_values(cls, name: str, aspect: str, nms_ap: float, ap: float) -> "SubtaskMetrics":
        return cls(name=name, aspect=aspect, nms_ap=nms_ap, ap=ap, gap=ap - nms_ap)


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


@dataclass(frozen=True)
class AspectReport:
    """Per-subtask metrics plus per-aspect and total averages.

    Aspect order is alphabetical so the report (and the radar vector) is
    independent of subtask input order.
    """

    subtasks: tuple[SubtaskMetrics, ...]
    per_aspect: dict[str, dict[str, float]]
    total: dict[str, float]

    @classmethod
    def from_rows(cls, rows: Iterable[SubtaskMetrics]) -> "AspectReport":
        subtasks = tuple(rows)
        if not subtasks:
            raise ConfigError("report needs at least one subtask")
        names = [s.name for s in subtasks]
        if len(set(names)) != len(names):
            raise ConfigError("subtask names must be unique")
        per_aspect: dict[str, dict[str, float]] = {}
        for aspect in sorted({s.aspect for s in subtasks}):
            group = [s for s in subtasks if s.aspect == aspect]
            per_aspect[aspect] = {
                "nms_ap": _mean([s.nms_ap for s in group]),
                "ap": _mean([s.ap for s in group]),
                "gap": _mean([s.gap for s in group]),
            }
        total = {
            "nms_ap": _mean([s.nms_ap for s in subtasks]),
            "ap": _mean([s.ap for s in subtasks]),
            "gap": _mean([s.gap for s in subtasks]),
        }
        return cls(subtasks=subtasks, per_aspect=per_aspect, total=total)

    def radar_vector(self, metric: str = "nms_ap") -> tuple[tuple[str, ...], tuple[float, ...]]:
        """(aspect names, per-aspect averages) for the chosen metric."""
        if metric not in ("nms_ap", "ap", "gap"):
            raise ConfigError(f"unknown metric {metric!r}")
        aspects = tuple(self.per_aspect)
        return aspects, tuple(self.per_aspect[a][metric] for a in aspects)

    def to_dict(self) -> dict:
        return {
            "subtasks": [
                {
                    "name": s.name,
                    "aspect": s.aspect,
                    "nms_ap": s.nms_ap,
                    "ap": s.ap,
                    "gap": s.gap,
                }
                for s in self.subtasks
            ],
            "per_aspect": {a: dict(v) for a, v in self.per_aspect.items()},
            "total": dict(self.total),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "AspectReport":
        return cls.from_rows(
            SubtaskMetrics(
                name=row["name"],
                aspect=row["aspect"],
                nms_ap=row["nms_ap"],
                ap=row["ap"],
                gap=row["gap"],
            )
            for row in data["subtasks"]
        )

    def to_csv(self) -> str:
        lines = ["kind,name,aspect,nms_ap,ap,gap"]
        for s in self.subtasks:
            lines.append(f"subtask,{s.name},{s.aspect},{s.nms_ap:.6f},{s.ap:.6f},{s.gap:.6f}")
        for aspect, v in self.per_aspect.items():
            lines.append(f"aspect,,{aspect},{v['nms_ap']:.6f},{v['ap']:.6f},{v['gap']:.6f}")
        t = self.total
        lines.append(f"total,,,{t['nms_ap']:.6f},{t['ap']:.6f},{t['gap']:.6f}")
        return "\n".join(lines) + "\n"


def aspect_report(
    results: Iterable[tuple[str, str, EvalResult, EvalResult]],
) -> AspectReport:
    """Build a report from (name, aspect, suppression result, plain result).

    Raises:
        ConfigError: a pair was evaluated under different configs, or the
            metrics are swapped (first result of each pair must carry
            suppression info, second must not).
    """
    rows = []
    for name, aspect, nms_result, ap_result in results:
        if nms_result.config != ap_result.config:
            raise ConfigError(f"subtask {name!r}: paired results use different configs")
        if nms_result.nms is None or ap_result.nms is not None:
            raise ConfigError(
                f"subtask {name!r}: expected (suppression result, plain result) order"
            )
        rows.append(
            SubtaskMetrics.from_values(name, aspect, nms_result.mean_ap, ap_result.mean_ap)
        )
    return AspectReport.from_rows(rows)


def radar_svg(report: AspectReport, metrics: Sequence[str] = ("nms_ap", "ap"), size: int = 420) -> str:
    """Static radar rendering of per-aspect averages; returns SVG text."""
    aspects, _ = report.radar_vector(metrics[0])
    n = len(aspects)
    cx = cy = size / 2
    radius = size * 0.36
    colors = ("#d62728", "#1f77b4", "#2ca02c")

    def point(i: int, value: float) -> tuple[float, float]:
        angle = -math.pi / 2 + 2 * math.pi * i / n
        return (cx + radius * value * math.cos(angle), cy + radius * value * math.sin(angle))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for ring in (0.25, 0.5, 0.75, 1.0):
        ring_pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in (point(i, ring) for i in range(n)))
        parts.append(
            f'<polygon points="{ring_pts}" fill="none" stroke="#cccccc" stroke-width="1"/>'
        )
    for i, aspect in enumerate(aspects):
        x, y = point(i, 1.0)
        lx, ly = point(i, 1.18)
        parts.append(f'<line x1="{cx}" y1="{cy}" x2="{x:.2f}" y2="{y:.2f}" stroke="#cccccc"/>')
        parts.append(
            f'<text x="{lx:.2f}" y="{ly:.2f}" font-size="{size * 0.03:.1f}" '
            f'text-anchor="middle" font-family="sans-serif">{aspect}</text>'
        )
    for m, color in zip(metrics, colors):
        _, values = report.radar_vector(m)
        pts = " ".join(
            f"{x:.2f},{y:.2f}" for x, y in (point(i, v) for i, v in enumerate(values))
        )
        parts.append(
            f'<polygon points="{pts}" fill="{color}" fill-opacity="0.25" '
            f'stroke="{color}" stroke-width="2"/>'
        )
    for j, m in enumerate(metrics):
        parts.append(
            f'<text x="12" y="{18 + 16 * j}" font-size="12" font-family="sans-serif" '
            f'fill="{colors[j % len(colors)]}">{m}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


@dataclass(frozen=True)
class ConfidenceDistribution:
    """Score histograms of high-overlap predictions, split by label match.

    bin_edges partition [0, 1]; scores equal to 1.0 fall in the last bin.
    Raw gated scores are retained so statistical tests need no re-run.
    """

    bin_edges: tuple[float, ...]
    positive_counts: tuple[int, ...]
    negative_counts: tuple[int, ...]
    iou_min: float
    positive_scores: tuple[float, ...]
    negative_scores: tuple[float, ...]

    @property
    def gated_total(self) -> int:
        return sum(self.positive_counts) + sum(self.negative_counts)

    def to_dict(self) -> dict:
        return {
            "bin_edges": list(self.bin_edges),
            "positive_counts": list(self.positive_counts),
            "negative_counts": list(self.negative_counts),
            "iou_min": self.iou_min,
            "positive_scores": list(self.positive_scores),
            "negative_scores": list(self.negative_scores),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ConfidenceDistribution":
        return cls(
            bin_edges=tuple(data["bin_edges"]),
            positive_counts=tuple(data["positive_counts"]),
            negative_counts=tuple(data["negative_counts"]),
            iou_min=data["iou_min"],
            positive_scores=tuple(data["positive_scores"]),
            negative_scores=tuple(data["negative_scores"]),
        )

    def to_csv(self) -> str:
        lines = ["bin_low,bin_high,positive,negative"]
        for i in range(len(self.positive_counts)):
            lines.append(
                f"{self.bin_edges[i]:.6f},{self.bin_edges[i + 1]:.6f},"
                f"{self.positive_counts[i]},{self.negative_counts[i]}"
            )
        return "\n".join(lines) + "\n"


def confidence_distribution(
    gt: GroundTruthSet,
    preds: PredictionSet,
    iou_min: float = 0.9,
    positive: Callable[[Prediction, Annotation], bool] | None = None,
    bins: int = 20,
) -> ConfidenceDistribution:
    """Tally scores of predictions overlapping some ground truth above iou_min.

    Each gated prediction is paired with its max-IoU annotation (ties to the
    lowest annotation id) and counted once, with no deduplication across
    predictions sharing an annotation. positive defaults to label equality.
    """
    if not 0.0 <= iou_min < 1.0:
        raise ConfigError("iou_min must be within [0, 1)")
    if bins < 1:
        raise ConfigError("bins must be >= 1")
    if positive is None:
        positive = lambda p, a: p.category_id == a.category_id
    pos_scores: list[float] = []
    neg_scores: list[float] = []
    for image_id in sorted(preds.by_image):
        anns = gt.by_image.get(image_id, ())
        if not anns:
            continue
        dets = preds.by_image[image_id]
        mat = iou_matrix(
            boxes_to_array([d.bbox for d in dets]),
            boxes_to_array([a.bbox for a in anns]),
        )
        best = mat.argmax(axis=1)
        for row, det in enumerate(dets):
            g = int(best[row])
            if mat[row, g] > iou_min:
                (pos_scores if positive(det, anns[g]) else neg_scores).append(det.score)
    edges = np.linspace(0.0, 1.0, bins + 1)
    pos_counts, _ = np.histogram(pos_scores, bins=edges)
    neg_counts, _ = np.histogram(neg_scores, bins=edges)
    return ConfidenceDistribution(
        bin_edges=tuple(float(e) for e in edges),
        positive_counts=tuple(int(c) for c in pos_counts),
        negative_counts=tuple(int(c) for c in neg_counts),
        iou_min=float(iou_min),
        positive_scores=tuple(pos_scores),
        negative_scores=tuple(neg_scores),
    )
