"""Ground-truth and prediction sets: COCO-style JSON loading, indexing, diagnostics.

Wire format uses [x, y, w, h] boxes; everything downstream works in corner
form, so conversion happens exactly once, at load time. Loaded sets are
frozen: mutation means building a new set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .errors import IntegrityError, ParseError, SchemaError
from .geometry import BBox


@dataclass(frozen=True)
class Category:
    id: int
    name: str


@dataclass(frozen=True)
class ImageRecord:
    id: int
    width: float
    height: float


@dataclass(frozen=True)
class Annotation:
    """One ground-truth box. ids are unique across the whole set."""

    id: int
    image_id: int
    category_id: int
    bbox: BBox


@dataclass(frozen=True)
class Prediction:
    """One detector output. index is the position in the source array and
    serves as the global tie-break key for equal scores."""

    image_id: int
    category_id: int
    bbox: BBox
    score: float
    index: int


def _index_pairs(items, image_of, category_of):
    by_image: dict[int, list] = {}
    by_image_category: dict[tuple[int, int], list] = {}
    for it in items:
        by_image.setdefault(image_of(it), []).append(it)
        by_image_category.setdefault((image_of(it), category_of(it)), []).append(it)
    return (
        {k: tuple(v) for k, v in by_image.items()},
        {k: tuple(v) for k, v in by_image_category.items()},
    )


@dataclass(frozen=True)
class GroundTruthSet:
    images: dict[int, ImageRecord]
    categories: dict[int, Category]
    annotations: tuple[Annotation, ...]
    by_image: dict[int, tuple[Annotation, ...]]
    by_image_category: dict[tuple[int, int], tuple[Annotation, ...]]

    @classmethod
    def build(
        cls,
        images: Iterable[ImageRecord],
        categories: Iterable[Category],
        annotations: Iterable[Annotation],
    ) -> "GroundTruthSet":
        """Validate cross-references and build per-image indexes.

        Raises:
            IntegrityError: on duplicate ids or dangling image/category refs.
        """
        image_map: dict[int, ImageRecord] = {}
        for im in images:
            if im.id in image_map:
                raise IntegrityError(f"duplicate image id {im.id}")
            image_map[im.id] = im
        cat_map: dict[int, Category] = {}
        names: dict[str, int] = {}
        for c in categories:
            if c.id in cat_map:
                raise IntegrityError(f"duplicate category id {c.id}")
            if c.name in names:
                raise IntegrityError(f"duplicate category name {c.name!r}")
            cat_map[c.id] = c
            names[c.name] = c.id
        anns = tuple(sorted(annotations, key=lambda a: a.id))
        seen: set[int] = set()
        for a in anns:
            if a.id in seen:
                raise IntegrityError(f"duplicate annotation id {a.id}")
            seen.add(a.id)
            if a.image_id not in image_map:
                raise IntegrityError(f"annotation {a.id} references unknown image {a.image_id}")
            if a.category_id not in cat_map:
                raise IntegrityError(f"annotation {a.id} references unknown category {a.category_id}")
        by_image, by_image_category = _index_pairs(anns, lambda a: a.image_id, lambda a: a.category_id)
        return cls(image_map, cat_map, anns, by_image, by_image_category)

    @property
    def category_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self.categories))

    @property
    def image_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self.images))

    def gt_count(self, category_id: int) -> int:
        return sum(1 for a in self.annotations if a.category_id == category_id)

    def category_id_for(self, name: str) -> int:
        for c in self.categories.values():
            if c.name == name:
                return c.id
        raise KeyError(name)


@dataclass(frozen=True)
class PredictionSet:
    predictions: tuple[Prediction, ...]
    by_image: dict[int, tuple[Prediction, ...]]
    by_image_category: dict[tuple[int, int], tuple[Prediction, ...]]

    @classmethod
    def build(cls, predictions: Iterable[Prediction]) -> "PredictionSet":
        """Index predictions, preserving each record's original index."""
        preds = tuple(sorted(predictions, key=lambda p: p.index))
        seen: set[int] = set()
        for p in preds:
            if p.index in seen:
                raise IntegrityError(f"duplicate prediction index {p.index}")
            seen.add(p.index)
        by_image, by_image_category = _index_pairs(preds, lambda p: p.image_id, lambda p: p.category_id)
        return cls(preds, by_image, by_image_category)

    def __len__(self) -> int:
        return len(self.predictions)


def _read_json(source: Any) -> Any:
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            raw = fh.read()
    elif isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    elif hasattr(source, "read"):
        raw = source.read()
    else:
        raise TypeError(f"unsupported source type {type(source).__name__}")
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc


def _require(obj: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    return obj[key]


def _as_int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{where}: expected an integer, got {value!r}")
    return value


def _as_number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _wire_bbox(value: Any, where: str) -> BBox:
    if not isinstance(value, Sequence) or isinstance(value, (str, bytes)) or len(value) != 4:
        raise SchemaError(f"{where}: bbox must be [x, y, w, h]")
    x, y, w, h = (_as_number(v, where + ".bbox") for v in value)
    if w < 0 or h < 0:
        raise SchemaError(f"{where}: bbox extents must be non-negative, got w={w}, h={h}")
    return BBox.from_xywh(x, y, w, h)


def load_ground_truth(source: Any) -> GroundTruthSet:
    """Load a COCO-style ground-truth file (path, bytes, or file object).

    Crowd regions are out of scope: any annotation with truthy iscrowd is
    rejected rather than silently treated as a plain box.

    Raises:
        ParseError: the payload is not JSON or not an object with the three
            expected top-level arrays.
        SchemaError: a record is malformed (bad types, negative extents,
            iscrowd set).
        IntegrityError: duplicate ids or dangling references.
    """
    doc = _read_json(source)
    if not isinstance(doc, Mapping):
        raise ParseError("ground truth must be a JSON object")
    for key in ("images", "annotations", "categories"):
        if not isinstance(doc.get(key), list):
            raise ParseError(f"ground truth: top-level {key!r} must be an array")

    images = []
    for i, rec in enumerate(doc["images"]):
        where = f"images[{i}]"
        if not isinstance(rec, Mapping):
            raise SchemaError(f"{where}: expected an object")
        width = _as_number(_require(rec, "width", where), where + ".width")
        height = _as_number(_require(rec, "height", where), where + ".height")
        if width <= 0 or height <= 0:
            raise SchemaError(f"{where}: image extents must be positive")
        images.append(ImageRecord(_as_int(_require(rec, "id", where), where + ".id"), width, height))

    categories = []
    for i, rec in enumerate(doc["categories"]):
        where = f"categories[{i}]"
        if not isinstance(rec, Mapping):
            raise SchemaError(f"{where}: expected an object")
        name = _require(rec, "name", where)
        if not isinstance(name, str) or not name.strip():
            raise SchemaError(f"{where}: name must be a non-empty string")
        categories.append(Category(_as_int(_require(rec, "id", where), where + ".id"), name))

    annotations = []
    for i, rec in enumerate(doc["annotations"]):
        where = f"annotations[{i}]"
        if not isinstance(rec, Mapping):
            raise SchemaError(f"{where}: expected an object")
        if rec.get("iscrowd"):
            raise SchemaError(
                f"{where}: crowd regions (iscrowd=1) are not supported; "
                "filter them out before evaluation"
            )
        annotations.append(
            Annotation(
                id=_as_int(_require(rec, "id", where), where + ".id"),
                image_id=_as_int(_require(rec, "image_id", where), where + ".image_id"),
                category_id=_as_int(_require(rec, "category_id", where), where + ".category_id"),
                bbox=_wire_bbox(_require(rec, "bbox", where), where),
            )
        )

    return GroundTruthSet.build(images, categories, annotations)


def load_predictions(source: Any, gt: GroundTruthSet) -> PredictionSet:
    """Load a COCO-style results array and bind it to a ground-truth set.

    Raises:
        ParseError: payload is not a JSON array.
        SchemaError: malformed record, or score outside [0, 1].
        IntegrityError: unknown image or category id.
    """
    doc = _read_json(source)
    if not isinstance(doc, list):
        raise ParseError("predictions must be a JSON array")
    preds = []
    for i, rec in enumerate(doc):
        where = f"predictions[{i}]"
        if not isinstance(rec, Mapping):
            raise SchemaError(f"{where}: expected an object")
        image_id = _as_int(_require(rec, "image_id", where), where + ".image_id")
        category_id = _as_int(_require(rec, "category_id", where), where + ".category_id")
        if image_id not in gt.images:
            raise IntegrityError(f"{where}: unknown image id {image_id}")
        if category_id not in gt.categories:
            raise IntegrityError(f"{where}: unknown category id {category_id}")
        score = _as_number(_require(rec, "score", where), where + ".score")
        if not 0.0 <= score <= 1.0:
            raise SchemaError(f"{where}: score must be within [0, 1], got {score}")
        preds.append(
            Prediction(
                image_id=image_id,
                category_id=category_id,
                bbox=_wire_bbox(_require(rec, "bbox", where), where),
                score=score,
                index=i,
            )
        )
    return PredictionSet.build(preds)


def dump_ground_truth(gt: GroundTruthSet) -> dict:
    """Serialize back to the COCO wire shape (inverse of load_ground_truth)."""
    return {
        "images": [
            {"id": im.id, "width": im.width, "height": im.height}
            for im in sorted(gt.images.values(), key=lambda im: im.id)
        ],
        "categories": [
            {"id": c.id, "name": c.name}
            for c in sorted(gt.categories.values(), key=lambda c: c.id)
        ],
        "annotations": [
            {
                "id": a.id,
                "image_id": a.image_id,
                "category_id": a.category_id,
                "bbox": list(a.bbox.to_xywh()),
                "iscrowd": 0,
                "area": a.bbox.area,
            }
            for a in gt.annotations
        ],
    }


def dump_predictions(preds: PredictionSet | Iterable[Prediction]) -> list[dict]:
    """Serialize predictions to the COCO results array shape, index order."""
    items = preds.predictions if isinstance(preds, PredictionSet) else sorted(preds, key=lambda p: p.index)
    return [
        {
            "image_id": p.image_id,
            "category_id": p.category_id,
            "bbox": list(p.bbox.to_xywh()),
            "score": p.score,
        }
        for p in items
    ]


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str
    image_id: int | None = None
    category_id: int | None = None
    ref: int | None = None


@dataclass(frozen=True)
class DiagnosticsReport:
    diagnostics: tuple[Diagnostic, ...]

    @property
    def is_clean(self) -> bool:
        return not self.diagnostics

    def of_kind(self, kind: str) -> tuple[Diagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.kind == kind)

    def to_dict(self) -> dict:
        return {
            "clean": self.is_clean,
            "diagnostics": [
                {
                    "kind": d.kind,
                    "message": d.message,
                    "image_id": d.image_id,
                    "category_id": d.category_id,
                    "ref": d.ref,
                }
                for d in self.diagnostics
            ],
        }


def validate(
    gt: GroundTruthSet,
    preds: PredictionSet | None = None,
    bounds_slack: float = 1.0,
) -> DiagnosticsReport:
    """Non-fatal data quality checks.

    Flags degenerate boxes, boxes escaping their image by more than
    bounds_slack pixels, and categories with zero annotations. None of these
    block evaluation; they exist so suspicious inputs are visible.
    """
    out: list[Diagnostic] = []

    def check_box(box: BBox, image_id: int, category_id: int, ref: int, what: str) -> None:
        if box.area == 0.0:
            out.append(
                Diagnostic("degenerate-box", f"{what} {ref} has zero area", image_id, category_id, ref)
            )
        im = gt.images[image_id]
        if (
            box.x_min < -bounds_slack
            or box.y_min < -bounds_slack
            or box.x_max > im.width + bounds_slack
            or box.y_max > im.height + bounds_slack
        ):
            out.append(
                Diagnostic(
                    "out-of-bounds",
                    f"{what} {ref} escapes image {image_id} by more than {bounds_slack}px",
                    image_id,
                    category_id,
                    ref,
                )
            )

    for a in gt.annotations:
        check_box(a.bbox, a.image_id, a.category_id, a.id, "annotation")
    populated = {a.category_id for a in gt.annotations}
    for cid in sorted(gt.categories):
        if cid not in populated:
            out.append(
                Diagnostic("empty-category", f"category {cid} has no annotations", None, cid, None)
            )
    if preds is not None:
        for p in preds.predictions:
            check_box(p.bbox, p.image_id, p.category_id, p.index, "prediction")
    return DiagnosticsReport(tuple(out))
