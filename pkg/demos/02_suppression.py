"""
Class-ignored suppression, one step at a time
=============================================

The suppression pass has three stages: assign every prediction to the
ground-truth object it overlaps most, run NMS inside each group with
category labels ignored, then re-score the survivors.  This script
walks a small scene through each stage and prints what happens.
"""

from nmsap import (
    Annotation,
    BBox,
    Category,
    GroundTruthSet,
    ImageRecord,
    NmsConfig,
    assign_to_gt,
    class_ignored_nms,
    load_predictions,
    suppress,
)

gt = GroundTruthSet.build(
    images=[ImageRecord(1, 640, 480)],
    categories=[Category(1, "cat"), Category(2, "dog"), Category(3, "fox")],
    annotations=[
        Annotation(1, 1, 1, BBox.from_xywh(100, 100, 120, 100)),
        Annotation(2, 1, 2, BBox.from_xywh(400, 250, 100, 120)),
    ],
)

# Six predictions: three labels stacked on the first object with small
# offsets, two on the second object, and one stray box in a corner that
# overlaps nothing.
rows = [
    {"image_id": 1, "category_id": 1, "bbox": [102, 100, 120, 100], "score": 0.85},
    {"image_id": 1, "category_id": 2, "bbox": [100, 104, 120, 100], "score": 0.90},
    {"image_id": 1, "category_id": 3, "bbox": [98, 100, 122, 100], "score": 0.40},
    {"image_id": 1, "category_id": 2, "bbox": [400, 250, 100, 120], "score": 0.75},
    {"image_id": 1, "category_id": 1, "bbox": [404, 252, 100, 118], "score": 0.60},
    {"image_id": 1, "category_id": 3, "bbox": [10, 10, 40, 40], "score": 0.95},
]
import json
preds = load_predictions(json.dumps(rows).encode(), gt)

# Stage 1: every prediction whose IoU with some annotation exceeds 0.5
# joins that annotation's group; the stray box stays in the residual.
config = NmsConfig(gt_overlap_threshold=0.5, mode="greedy-nms", nms_iou=0.5)
assignment = assign_to_gt(gt, preds, config)
for ann_id, group in assignment.groups.items():
    labels = [gt.categories[p.category_id].name for p in group]
    print(f"object {ann_id}: {len(group)} competing boxes {labels}")
print(f"residual (matched nothing): {len(assignment.residual)} box(es)")

# Stage 2: inside each group the labels compete regardless of category.
# Greedy NMS keeps the top score and removes any box overlapping it by
# more than nms_iou, then repeats with what is left.
for ann_id, group in assignment.groups.items():
    survivors = class_ignored_nms(group, config)
    kept = [(gt.categories[p.category_id].name, p.score) for p in survivors]
    print(f"object {ann_id} after class-ignored NMS: {kept}")

# Stage 3: suppress() splices survivors and residual back into a
# prediction set, preserving the original emission indices.
kept = suppress(gt, preds, config)
print(f"\n{len(preds.predictions)} predictions in, "
      f"{len(kept.predictions)} out, "
      f"{len(preds.predictions) - len(kept.predictions)} suppressed")

# keep-top-1 is the blunter mode: exactly one box survives per object,
# which is the cleanest way to ask "was your best guess right?".
single = suppress(gt, preds, NmsConfig(mode="keep-top-1"))
names = [gt.categories[p.category_id].name for p in single.predictions]
print(f"keep-top-1 survivors: {names}")

# Suppression is idempotent: running it on its own output changes
# nothing, so a pipeline can apply it defensively.
again = suppress(gt, kept, config)
assert [p.index for p in again.predictions] == [p.index for p in kept.predictions]
print("suppress(suppress(x)) == suppress(x) verified")
