"""Freeze golden AP values for the medium fixture.

Runs the reference transcription (reference_eval.py) over the committed
medium fixture and writes tests/data/medium_golden.json. Run once after
regenerating fixtures; the committed golden is what the test suite checks
the engine against.
"""

from __future__ import annotations

import json
from pathlib import Path

from reference_eval import evaluate_reference

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"

if __name__ == "__main__":
    gt_doc = json.loads((DATA / "medium_gt.json").read_text())
    pred_doc = json.loads((DATA / "medium_pred.json").read_text())
    golden = evaluate_reference(gt_doc, pred_doc)
    out = DATA / "medium_golden.json"
    out.write_text(json.dumps(golden, sort_keys=True, indent=2) + "\n")
    print(f"wrote {out} (mAP={golden['mAP']:.6f})")
