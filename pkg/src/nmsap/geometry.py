"""Axis-aligned box arithmetic: areas, IoU, and batched IoU matrices.

Boxes live in pixel coordinates, corner form (x_min, y_min, x_max, y_max).
Degenerate boxes (zero width or height) are legal everywhere and have IoU 0
against every box, including themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class BBox:
    """Axis-aligned rectangle, corner form, with x_min <= x_max and y_min <= y_max."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    @classmethod
    def from_xywh(cls, x: float, y: float, w: float, h: float) -> "BBox":
        """Build from top-left corner plus extents, the COCO wire layout."""
        x = float(x)
        y = float(y)
        return cls(x, y, x + float(w), y + float(h))

    def to_xywh(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max - self.x_min, self.y_max - self.y_min)

    def canonical(self) -> "BBox":
        """Equivalent box with ordered corners; identity when already ordered."""
        x1, x2 = (self.x_min, self.x_max) if self.x_min <= self.x_max else (self.x_max, self.x_min)
        y1, y2 = (self.y_min, self.y_max) if self.y_min <= self.y_max else (self.y_max, self.y_min)
        return BBox(x1, y1, x2, y2)

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return area(self)

    def translate(self, dx: float, dy: float) -> "BBox":
        return BBox(self.x_min + dx, self.y_min + dy, self.x_max + dx, self.y_max + dy)

    def scale(self, factor: float) -> "BBox":
        return BBox(self.x_min * factor, self.y_min * factor, self.x_max * factor, self.y_max * factor)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)


def area(box: BBox) -> float:
    """Box area; 0.0 for degenerate boxes."""
    return (box.x_max - box.x_min) * (box.y_max - box.y_min)


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes.

    Defined as 0.0 whenever the union has zero area, so degenerate boxes
    never divide by zero. Mirrors iou_matrix operation-for-operation so the
    scalar and batched paths agree bitwise.
    """
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if iw <= 0.0 or ih <= 0.0:
        inter = 0.0
    else:
        inter = iw * ih
    union = area(a) + area(b) - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def boxes_to_array(boxes: Iterable[BBox]) -> np.ndarray:
    """Stack boxes into an (N, 4) float64 corner array."""
    seq: Sequence[BBox] = boxes if isinstance(boxes, Sequence) else tuple(boxes)
    out = np.empty((len(seq), 4), dtype=np.float64)
    for i, b in enumerate(seq):
        out[i, 0] = b.x_min
        out[i, 1] = b.y_min
        out[i, 2] = b.x_max
        out[i, 3] = b.y_max
    return out


def iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise IoU between corner arrays of shapes (N, 4) and (M, 4).

    Returns an (N, M) float64 matrix. Rows or columns for degenerate boxes
    are all zero; a cell is 0.0 whenever the union area is not positive.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or a.shape[1] != 4 or b.ndim != 2 or b.shape[1] != 4:
        raise ValueError("expected corner arrays of shape (N, 4)")
    iw = np.minimum(a[:, None, 2], b[None, :, 2]) - np.maximum(a[:, None, 0], b[None, :, 0])
    ih = np.minimum(a[:, None, 3], b[None, :, 3]) - np.maximum(a[:, None, 1], b[None, :, 1])
    np.clip(iw, 0.0, None, out=iw)
    np.clip(ih, 0.0, None, out=ih)
    inter = iw * ih
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    out = np.zeros_like(inter)
    np.divide(inter, union, out=out, where=union > 0.0)
    return out
