"""Shared fixtures: committed datasets, terse builders, random instances.

The builders accept flat tuples so tests can state a whole scenario in a
few lines.  ``make_random_instance`` quantizes coordinates to a 5-unit
grid and scores to k/20 on purpose: collisions force the tie-break rules
(equal IoU, equal score) to actually fire.
"""

from __future__ import annotations

import gzip
import json
from pathlib import Path

import numpy as np
import pytest

from nmsap.dataset import load_ground_truth, load_predictions

DATA_DIR = Path(__file__).resolve().parent / "data"

ACCEPTANCE_LINES: list[str] = []


# ---------------------------------------------------------------------------
# committed fixtures


@pytest.fixture(scope="session")
def twocar_gt():
    return load_ground_truth(DATA_DIR / "twocar_gt.json")


@pytest.fixture(scope="session")
def twocar_pred_wrong(twocar_gt):
    return load_predictions(DATA_DIR / "twocar_pred_wrong.json", twocar_gt)


@pytest.fixture(scope="session")
def twocar_pred_correct(twocar_gt):
    return load_predictions(DATA_DIR / "twocar_pred_correct.json", twocar_gt)


@pytest.fixture(scope="session")
def medium_gt():
    return load_ground_truth(DATA_DIR / "medium_gt.json")


@pytest.fixture(scope="session")
def medium_pred(medium_gt):
    return load_predictions(DATA_DIR / "medium_pred.json", medium_gt)


@pytest.fixture(scope="session")
def medium_golden():
    return json.loads((DATA_DIR / "medium_golden.json").read_text())


@pytest.fixture(scope="session")
def coco_meta_gt():
    raw = gzip.decompress((DATA_DIR / "coco_val_meta.json.gz").read_bytes())
    return load_ground_truth(raw)


# ---------------------------------------------------------------------------
# builders


def _make_gt(images, categories, annotations):
    """Ground truth from (id, w, h), (id, name), (id, img, cat, x, y, w, h)."""
    payload = {
        "images": [{"id": i, "width": w, "height": h} for i, w, h in images],
        "categories": [{"id": c, "name": n} for c, n in categories],
        "annotations": [
            {"id": a, "image_id": i, "category_id": c, "bbox": [x, y, w, h]}
            for a, i, c, x, y, w, h in annotations
        ],
    }
    return load_ground_truth(json.dumps(payload).encode())


def _make_preds(gt, rows):
    """Predictions from (image_id, category_id, x, y, w, h, score) rows."""
    payload = [
        {"image_id": i, "category_id": c, "bbox": [x, y, w, h], "score": s}
        for i, c, x, y, w, h, s in rows
    ]
    return load_predictions(json.dumps(payload).encode(), gt)


def _make_random_instance(seed):
    """A small random (gt, preds) pair on 100x100 images.

    Covers 1-5 images, 1-4 categories, 0-4 boxes per image, and 0-12
    predictions, including empty-prediction and zero-ground-truth
    category corners.  Roughly 70% of predictions perturb a real box so
    matches at varied IoU occur; the rest are placed independently.
    """
    rng = np.random.default_rng(seed)
    n_images = int(rng.integers(1, 6))
    n_cats = int(rng.integers(1, 5))
    images = [(i + 1, 100, 100) for i in range(n_images)]
    categories = [(c + 1, f"cat{c + 1}") for c in range(n_cats)]
    annotations = []
    ann_id = 1
    for img_id, _, _ in images:
        for _ in range(int(rng.integers(0, 5))):
            x = int(rng.integers(0, 16)) * 5
            y = int(rng.integers(0, 16)) * 5
            w = int(rng.integers(1, 5)) * 5
            h = int(rng.integers(1, 5)) * 5
            cat = int(rng.integers(1, n_cats + 1))
            annotations.append((ann_id, img_id, cat, x, y, w, h))
            ann_id += 1
    gt = _make_gt(images, categories, annotations)
    rows = []
    for _ in range(int(rng.integers(0, 13))):
        img_id = int(rng.integers(1, n_images + 1))
        cat_id = int(rng.integers(1, n_cats + 1))
        if annotations and rng.random() < 0.7:
            _, img_id, _, x, y, w, h = annotations[int(rng.integers(0, len(annotations)))]
            x += int(rng.integers(-2, 3)) * 5
            y += int(rng.integers(-2, 3)) * 5
            w = max(5, w + int(rng.integers(-1, 2)) * 5)
            h = max(5, h + int(rng.integers(-1, 2)) * 5)
        else:
            x, y = int(rng.integers(0, 16)) * 5, int(rng.integers(0, 16)) * 5
            w, h = int(rng.integers(1, 5)) * 5, int(rng.integers(1, 5)) * 5
        score = int(rng.integers(0, 21)) / 20.0
        rows.append((img_id, cat_id, float(x), float(y), float(w), float(h), score))
    return gt, _make_preds(gt, rows)


@pytest.fixture(scope="session")
def make_gt():
    return _make_gt


@pytest.fixture(scope="session")
def make_preds():
    return _make_preds


@pytest.fixture(scope="session")
def random_instance():
    return _make_random_instance


# ---------------------------------------------------------------------------
# acceptance reporting


class _Criterion:
    """Context manager that prints one [PASS]/[FAIL] line per criterion."""

    def __init__(self, name: str):
        self.name = name
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        ok = exc_type is None
        line = f"[{'PASS' if ok else 'FAIL'}] {self.name}"
        if ok and self.detail:
            line += f": {self.detail}"
        elif not ok:
            line += f": {exc_type.__name__}: {exc}"
        ACCEPTANCE_LINES.append(line)
        print(line, flush=True)
        return False


@pytest.fixture(scope="session")
def criterion():
    return _Criterion


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
