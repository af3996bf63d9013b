"""Generate the committed test fixtures.

Everything here is seeded; rerunning reproduces the committed files byte for
byte. Fixtures:

  tests/data/twocar_gt.json            two objects, two categories, one image
  tests/data/twocar_pred_wrong.json    label-swapped confidence ranking
  tests/data/twocar_pred_correct.json  correct-label confidence ranking
  tests/data/medium_gt.json          100 images, 10 categories
  tests/data/medium_pred.json        ~2,000 mixed-quality predictions
  tests/data/coco_val_meta.json.gz   5,000-image/80-category metadata set

Per-category ground-truth totals in the medium fixture are prime so no
recall value tp/total can coincide with an interior point of the 101-point
grid (100*tp = j*total has no solution with 0 < j < 100); evaluators that
build the grid with different rounding therefore agree exactly.

Prediction scores are raw 53-bit uniforms, so equal scores across a category
cannot occur and rank order is unambiguous for every tie-break convention.
"""

from __future__ import annotations

import gzip
import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from nmsap import (
    Annotation,
    BBox,
    Category,
    ConfidenceModel,
    DetectorSpec,
    GroundTruthSet,
    ImageRecord,
    dump_ground_truth,
    dump_predictions,
    simulate,
)

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"


def write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    print(f"wrote {path}")


def twocar_fixture() -> None:
    """One image, two far-apart objects; the four-prediction label swap."""
    gt = GroundTruthSet.build(
        images=[ImageRecord(1, 640, 480)],
        categories=[Category(1, "red car"), Category(2, "blue car")],
        annotations=[
            Annotation(1, 1, 1, BBox.from_xywh(50, 50, 100, 80)),
            Annotation(2, 1, 2, BBox.from_xywh(400, 200, 120, 90)),
        ],
    )
    write_json(DATA / "twocar_gt.json", dump_ground_truth(gt))
    # Explicit score lists, no RNG: emission order is annotation 1 with
    # labels (1, 2), then annotation 2 with labels (1, 2).
    wrong = DetectorSpec(
        kind="deceptive",
        label_policy="all-candidates",
        confidence=ConfidenceModel("fixed-list", values=(0.6, 0.7, 0.7, 0.6)),
    )
    correct = DetectorSpec(
        kind="deceptive",
        label_policy="all-candidates",
        confidence=ConfidenceModel("fixed-list", values=(0.7, 0.6, 0.6, 0.7)),
    )
    write_json(DATA / "twocar_pred_wrong.json", dump_predictions(simulate(gt, wrong)))
    write_json(DATA / "twocar_pred_correct.json", dump_predictions(simulate(gt, correct)))


MEDIUM_CATEGORIES = (
    "car", "dog", "chair", "bottle", "person",
    "bicycle", "laptop", "pigeon", "lamp", "backpack",
)
# Primes; see module docstring.
MEDIUM_TOTALS = (53, 59, 61, 67, 71, 73, 79, 83, 89, 97)


def medium_fixture() -> None:
    rng = np.random.default_rng(20240817)
    n_images = 100
    width, height = 640.0, 480.0
    images = [ImageRecord(i + 1, width, height) for i in range(n_images)]
    categories = [Category(i + 1, name) for i, name in enumerate(MEDIUM_CATEGORIES)]

    annotations = []
    ann_id = 0
    for cat, total in zip(categories, MEDIUM_TOTALS):
        homes = rng.integers(1, n_images + 1, size=total)
        for image_id in homes:
            w = float(np.round(rng.uniform(20, 150), 2))
            h = float(np.round(rng.uniform(20, 150), 2))
            x = float(np.round(rng.uniform(0, width - w), 2))
            y = float(np.round(rng.uniform(0, height - h), 2))
            ann_id += 1
            annotations.append(Annotation(ann_id, int(image_id), cat.id, BBox.from_xywh(x, y, w, h)))
    gt = GroundTruthSet.build(images, categories, annotations)
    write_json(DATA / "medium_gt.json", dump_ground_truth(gt))

    cat_ids = [c.id for c in categories]
    preds = []
    for a in gt.annotations:
        copies = int(rng.choice([1, 2, 3], p=[0.5, 0.3, 0.2]))
        for _ in range(copies):
            dx1, dy1, dx2, dy2 = rng.uniform(-12, 12, size=4)
            box = BBox(
                min(max(a.bbox.x_min + dx1, 0.0), width),
                min(max(a.bbox.y_min + dy1, 0.0), height),
                min(max(a.bbox.x_max + dx2, 0.0), width),
                min(max(a.bbox.y_max + dy2, 0.0), height),
            ).canonical()
            if rng.random() < 0.7:
                label = a.category_id
            else:
                label = int(rng.choice([c for c in cat_ids if c != a.category_id]))
            preds.append(
                {
                    "image_id": a.image_id,
                    "category_id": label,
                    "bbox": [round(v, 2) for v in box.to_xywh()],
                    "score": float(rng.uniform(0.05, 0.999)),
                }
            )
    for image in images:
        for _ in range(int(rng.integers(4, 10))):
            xs = np.round(np.sort(rng.uniform(0, width, size=2)), 2)
            ys = np.round(np.sort(rng.uniform(0, height, size=2)), 2)
            if xs[1] - xs[0] < 5 or ys[1] - ys[0] < 5:
                continue
            preds.append(
                {
                    "image_id": image.id,
                    "category_id": int(rng.choice(cat_ids)),
                    "bbox": [float(xs[0]), float(ys[0]), float(xs[1] - xs[0]), float(ys[1] - ys[0])],
                    "score": float(rng.uniform(0.05, 0.999)),
                }
            )
    write_json(DATA / "medium_pred.json", preds)
    print(f"medium fixture: {len(annotations)} gt boxes, {len(preds)} predictions")


# An 80-name vocabulary averaging exactly 88/80 = 1.10 whitespace words:
# 72 single-word names plus these 8 two-word names.
COCO_STYLE_NAMES = (
    "person", "bicycle", "car", "motorcycle", "airplane", "bus", "train",
    "truck", "boat", "trafficlight", "firehydrant", "stopsign",
    "parkingmeter", "bench", "bird", "cat", "dog", "horse", "sheep", "cow",
    "elephant", "bear", "zebra", "giraffe", "backpack", "umbrella",
    "handbag", "tie", "suitcase", "frisbee", "skis", "snowboard",
    "sports ball", "kite", "baseball bat", "baseball glove", "skateboard",
    "surfboard", "tennis racket", "bottle", "wineglass", "cup", "fork",
    "knife", "spoon", "bowl", "banana", "apple", "sandwich", "orange",
    "broccoli", "carrot", "hot dog", "pizza", "donut", "cake", "chair",
    "couch", "potted plant", "bed", "dining table", "toilet", "tv",
    "laptop", "mouse", "remote", "keyboard", "cellphone", "microwave",
    "oven", "toaster", "sink", "refrigerator", "book", "clock", "vase",
    "scissors", "teddy bear", "hairdrier", "toothbrush",
)


def coco_meta_fixture() -> None:
    """5,000 images, 80 categories, 36,781 boxes; box geometry is filler."""
    assert len(COCO_STYLE_NAMES) == 80
    words = sum(len(n.split()) for n in COCO_STYLE_NAMES)
    assert words == 88, words

    n_images = 5000
    n_boxes = 36781
    images = [{"id": i + 1, "width": 640, "height": 480} for i in range(n_images)]
    categories = [{"id": i + 1, "name": n} for i, n in enumerate(COCO_STYLE_NAMES)]
    annotations = []
    for k in range(n_boxes):
        annotations.append(
            {
                "id": k + 1,
                "image_id": (k % n_images) + 1,
                "category_id": (k % 80) + 1,
                "bbox": [float(10 + (k % 37)), float(10 + (k % 23)), 50.0, 40.0],
                "iscrowd": 0,
            }
        )
    doc = {"images": images, "annotations": annotations, "categories": categories}
    path = DATA / "coco_val_meta.json.gz"
    with gzip.open(path, "wt", compresslevel=9) as fh:
        json.dump(doc, fh, sort_keys=True)
    print(f"wrote {path}")


if __name__ == "__main__":
    DATA.mkdir(parents=True, exist_ok=True)
    twocar_fixture()
    medium_fixture()
    coco_meta_fixture()
