"""
Why interpolated AP can reward a detector that ignores labels
=============================================================

A detector that localizes every object and then emits one box per
candidate label can score high traditional AP without telling the
labels apart.  This script builds the smallest scene where that
happens: one image, two objects, two categories, and a detector that
puts both labels on both objects with the wrong label scored higher.
"""

from nmsap import (
    Annotation,
    BBox,
    Category,
    ConfidenceModel,
    DetectorSpec,
    GroundTruthSet,
    ImageRecord,
    evaluate,
    nms_ap_evaluate,
    simulate,
)

# One 640x480 image with a red car on the left and a blue car on the
# right.  The boxes are far apart, so the two objects never overlap.
gt = GroundTruthSet.build(
    images=[ImageRecord(1, 640, 480)],
    categories=[Category(1, "red car"), Category(2, "blue car")],
    annotations=[
        Annotation(1, 1, 1, BBox.from_xywh(50, 50, 100, 80)),
        Annotation(2, 1, 2, BBox.from_xywh(400, 200, 120, 90)),
    ],
)

# The deceptive detector copies each ground-truth box once per candidate
# label.  The fixed score list gives the WRONG label 0.7 and the correct
# label 0.6 on both objects.
deceptive = DetectorSpec(
    kind="deceptive",
    label_policy="all-candidates",
    confidence=ConfidenceModel("fixed-list", values=(0.6, 0.7, 0.7, 0.6)),
)
preds = simulate(gt, deceptive)

for p in preds.predictions:
    name = gt.categories[p.category_id].name
    print(f"  box at {p.bbox.to_xywh()} labelled {name!r} score {p.score}")

# Traditional evaluation matches per category.  In each category the
# correct box ranks second behind a far-away wrong-label box, so the
# curve reaches recall 1.0 at precision 0.5 and AP lands at exactly 0.5
# for every IoU threshold.
plain = evaluate(gt, preds)
print(f"\ntraditional mAP: {plain.mean_ap:.6f}")
curve = plain.curve(1, 0.5)
print(f"PR endpoint for category 1 at IoU 0.5: "
      f"precision {curve.precision[-1]:.2f}, recall {curve.recall[-1]:.2f}")

# Suppression-aware evaluation groups the four boxes by the object they
# sit on and lets the labels compete.  On each object the wrong label
# wins (0.7 beats 0.6), the correct box is suppressed, and AP collapses
# to zero: the detector never actually knew which car was which.
after = nms_ap_evaluate(gt, preds)
print(f"\nNMS-AP ({after.nms.mode}): {after.mean_ap:.6f}, "
      f"{after.nms.suppressed} boxes suppressed")

# Flip the score pattern so the CORRECT label wins on both objects and
# the same metric goes to 1.0.  The gap between the two runs is exactly
# what traditional AP failed to see.
confident = DetectorSpec(
    kind="deceptive",
    label_policy="all-candidates",
    confidence=ConfidenceModel("fixed-list", values=(0.7, 0.6, 0.6, 0.7)),
)
fixed = nms_ap_evaluate(gt, simulate(gt, confident))
print(f"NMS-AP with the correct label on top: {fixed.mean_ap:.6f}")
print(f"\nmetric gap exposed: {plain.mean_ap - after.mean_ap:.2f}")
