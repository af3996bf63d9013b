"""Standalone transcription of the standard COCO bbox evaluation algorithm.

Used exactly once, by make_golden.py, to freeze golden AP values for the
medium fixture. It mirrors the reference implementation's semantics in
every observable detail for plain bbox evaluation with no crowd regions,
no area-range filtering, and a single maxDets value:

  - per-(image, category) detections sorted by descending score with a
    stable mergesort, truncated to maxDets;
  - match loop seeded with min(threshold, 1 - 1e-10), ties overwritten by
    later ground truth (>= comparison);
  - scores pooled per category with argsort(-scores, kind="mergesort");
  - precision computed as tp / (fp + tp + spacing(1));
  - right-to-left precision envelope, then searchsorted(side="left") into
    the recall grid, IndexError cutting the fill short;
  - categories without ground truth excluded from the mean.

Intentionally independent of the nmsap package: this file never imports it.
"""

from __future__ import annotations

import json
import sys

import numpy as np

IOU_THRS = np.linspace(0.5, 0.95, int(np.round((0.95 - 0.5) / 0.05)) + 1)
REC_THRS = np.linspace(0.0, 1.00, int(np.round((1.00 - 0.0) / 0.01)) + 1)
MAX_DETS = 100


def box_iou(dts: np.ndarray, gts: np.ndarray) -> np.ndarray:
    """IoU between [x, y, w, h] arrays, detections x ground truths."""
    out = np.zeros((len(dts), len(gts)), dtype=np.float64)
    for j, g in enumerate(gts):
        gx1, gy1, gw, gh = g
        garea = gw * gh
        for i, d in enumerate(dts):
            dx1, dy1, dw, dh = d
            iw = min(dx1 + dw, gx1 + gw) - max(dx1, gx1)
            if iw <= 0:
                continue
            ih = min(dy1 + dh, gy1 + gh) - max(dy1, gy1)
            if ih <= 0:
                continue
            inter = iw * ih
            union = dw * dh + garea - inter
            out[i, j] = inter / union
    return out


def evaluate_cell(gt_boxes, dt_boxes, dt_scores):
    """One (image, category) cell: per-threshold detection match matrix."""
    order = np.argsort([-s for s in dt_scores], kind="mergesort")[:MAX_DETS]
    dt_boxes = [dt_boxes[i] for i in order]
    dt_scores = [dt_scores[i] for i in order]
    T, D, G = len(IOU_THRS), len(dt_boxes), len(gt_boxes)
    dtm = np.zeros((T, D))
    gtm = np.zeros((T, G))
    if D and G:
        ious = box_iou(np.asarray(dt_boxes), np.asarray(gt_boxes))
        for tind, t in enumerate(IOU_THRS):
            for dind in range(D):
                iou = min(t, 1 - 1e-10)
                m = -1
                for gind in range(G):
                    if gtm[tind, gind] > 0:
                        continue
                    if ious[dind, gind] < iou:
                        continue
                    iou = ious[dind, gind]
                    m = gind
                if m == -1:
                    continue
                dtm[tind, dind] = 1  # matched flag; gt identity not needed
                gtm[tind, m] = 1
    return {"dtMatches": dtm, "dtScores": dt_scores, "nGt": G}


def evaluate_reference(gt_doc: dict, pred_doc: list) -> dict:
    image_ids = sorted(im["id"] for im in gt_doc["images"])
    cat_ids = sorted(c["id"] for c in gt_doc["categories"])

    gt_by_cell: dict[tuple, list] = {}
    for a in gt_doc["annotations"]:
        gt_by_cell.setdefault((a["image_id"], a["category_id"]), []).append(a["bbox"])
    dt_by_cell: dict[tuple, list] = {}
    for d in pred_doc:
        dt_by_cell.setdefault((d["image_id"], d["category_id"]), []).append(
            (d["bbox"], d["score"])
        )

    per_category = {}
    means = []
    for cid in cat_ids:
        cells = []
        for img in image_ids:
            gts = gt_by_cell.get((img, cid), [])
            dts = dt_by_cell.get((img, cid), [])
            if not gts and not dts:
                continue
            cells.append(
                evaluate_cell(gts, [b for b, _ in dts], [s for _, s in dts])
            )
        npig = sum(c["nGt"] for c in cells)
        if npig == 0:
            continue
        dt_scores = np.concatenate([np.asarray(c["dtScores"]) for c in cells]) if cells else np.empty(0)
        inds = np.argsort(-dt_scores, kind="mergesort")
        dtm = (
            np.concatenate([c["dtMatches"] for c in cells], axis=1)[:, inds]
            if cells
            else np.zeros((len(IOU_THRS), 0))
        )
        tps = dtm == 1
        fps = dtm == 0
        tp_sum = np.cumsum(tps, axis=1).astype(dtype=float)
        fp_sum = np.cumsum(fps, axis=1).astype(dtype=float)
        per_threshold = {}
        for tind in range(len(IOU_THRS)):
            tp = np.array(tp_sum[tind])
            fp = np.array(fp_sum[tind])
            nd = len(tp)
            rc = tp / npig
            pr = tp / (fp + tp + np.spacing(1))
            q = np.zeros(len(REC_THRS))
            pr = pr.tolist()
            q = q.tolist()
            for i in range(nd - 1, 0, -1):
                if pr[i] > pr[i - 1]:
                    pr[i - 1] = pr[i]
            pos = np.searchsorted(rc, REC_THRS, side="left")
            try:
                for ri, pi in enumerate(pos):
                    q[ri] = pr[pi]
            except IndexError:
                pass
            per_threshold[f"{IOU_THRS[tind]:.6g}"] = float(np.mean(q))
        ap = float(np.mean(list(per_threshold.values())))
        per_category[str(cid)] = {"ap": ap, "per_threshold": per_threshold}
        means.append(ap)
    return {"mAP": float(np.mean(means)) if means else 0.0, "per_category": per_category}


if __name__ == "__main__":
    with open(sys.argv[1]) as fh:
        gt_doc = json.load(fh)
    with open(sys.argv[2]) as fh:
        pred_doc = json.load(fh)
    print(json.dumps(evaluate_reference(gt_doc, pred_doc), sort_keys=True, indent=2))
