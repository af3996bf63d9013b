"""Command-line front end.

Subcommands: evaluate, compare, simulate, gen-hardneg, stats, analyze,
report. Every run embeds a manifest (tool version, resolved config, input
digests) in its JSON output; wall-clock duration goes to stderr only, so
identical argv + inputs always produce byte-identical files.

Exit codes: 0 success, 1 invalid input or config, 2 usage errors.
Environment: NMSAP_THREADS default for --threads, NMSAP_OUT_DIR base
directory for relative output paths.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .analysis import (
    AspectReport,
    SubtaskMetrics,
    confidence_distribution,
    radar_svg,
)
from .ap import EvalConfig, evaluate
from .dataset import dump_predictions, load_ground_truth, load_predictions
from .errors import ConfigError, DatasetError, InapplicableLabel
from .hardneg import NegativeRuleSet, find_aspect_token, gen_negatives, ASPECTS
from .nms import NmsConfig, nms_ap_evaluate
from .simulate import DetectorSpec, simulate

_EVAL_FIELDS = set(EvalConfig.__dataclass_fields__)
_NMS_FIELDS = set(NmsConfig.__dataclass_fields__)


@dataclass(frozen=True)
class RunManifest:
    """Provenance of one run. duration_seconds never enters the canonical
    JSON payload; it is reported on stderr instead."""

    subcommand: str
    config: dict
    inputs: dict
    version: str = __version__
    duration_seconds: float | None = None

    def to_canonical_dict(self) -> dict:
        return {
            "tool": "nmsap",
            "version": self.version,
            "subcommand": self.subcommand,
            "config": self.config,
            "inputs": self.inputs,
        }

    def to_full_dict(self) -> dict:
        out = self.to_canonical_dict()
        out["duration_seconds"] = self.duration_seconds
        return out


def _digest(path: str) -> str:
    with open(path, "rb") as fh:
        return "sha256:" + hashlib.sha256(fh.read()).hexdigest()


def _parse_thresholds(text: str) -> tuple[float, ...]:
    parts = text.split(":")
    if len(parts) == 1:
        return (float(parts[0]),)
    if len(parts) != 3:
        raise ConfigError("iou thresholds must be 'a:b:step' or a single value")
    a, b, step = (float(p) for p in parts)
    if step <= 0 or b < a:
        raise ConfigError("iou thresholds need a <= b and step > 0")
    import numpy as np

    count = int(round((b - a) / step)) + 1
    return tuple(float(t) for t in np.linspace(a, b, count))


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, "rb") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a JSON object")
    unknown = set(doc) - _EVAL_FIELDS - _NMS_FIELDS
    if unknown:
        raise ConfigError(f"config file has unknown keys: {sorted(unknown)}")
    return doc


def _resolve_configs(args) -> tuple[EvalConfig, NmsConfig]:
    """defaults < --config file < explicit flags."""
    file_cfg = _load_config_file(getattr(args, "config", None))
    eval_kwargs = {k: v for k, v in file_cfg.items() if k in _EVAL_FIELDS}
    nms_kwargs = {k: v for k, v in file_cfg.items() if k in _NMS_FIELDS}
    if getattr(args, "iou_thresholds", None) is not None:
        eval_kwargs["iou_thresholds"] = _parse_thresholds(args.iou_thresholds)
    for flag, key in (
        ("recall_points", "recall_points"),
        ("max_dets", "max_dets"),
        ("score_floor", "score_floor"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            eval_kwargs[key] = value
    if getattr(args, "nms_mode", None) is not None:
        nms_kwargs["mode"] = args.nms_mode
    if getattr(args, "nms_iou", None) is not None:
        nms_kwargs["nms_iou"] = args.nms_iou
    if getattr(args, "gt_overlap", None) is not None:
        nms_kwargs["gt_overlap_threshold"] = args.gt_overlap
    if "iou_thresholds" in eval_kwargs:
        eval_kwargs["iou_thresholds"] = tuple(eval_kwargs["iou_thresholds"])
    return EvalConfig(**eval_kwargs), NmsConfig(**nms_kwargs)


def _resolve_threads(args) -> int:
    if getattr(args, "threads", None) is not None:
        return args.threads
    env = os.environ.get("NMSAP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"NMSAP_THREADS must be an integer, got {env!r}") from exc
    return os.cpu_count() or 1


def _out_path(out: str) -> str:
    if out == "-":
        return out
    base = os.environ.get("NMSAP_OUT_DIR")
    p = Path(out)
    if base and not p.is_absolute():
        p = Path(base) / p
    return str(p)


def _write_text(text: str, out: str) -> str:
    path = _out_path(out)
    if path == "-":
        sys.stdout.write(text)
        return "<stdout>"
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)
    return path


def _write_json(payload: dict, out: str) -> str:
    return _write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", out)


def _emit_manifest(manifest: RunManifest, written: str, quiet: bool) -> None:
    if quiet:
        return
    print(
        f"nmsap {manifest.subcommand}: wrote {written} "
        f"({manifest.duration_seconds:.3f}s)",
        file=sys.stderr,
    )
    print(json.dumps(manifest.to_full_dict(), sort_keys=True), file=sys.stderr)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default="-", help="output path, or - for stdout")
    p.add_argument("--quiet", action="store_true", help="suppress stderr progress")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with EvalConfig/NmsConfig fields")
    p.add_argument("--iou-thresholds", help="sweep as a:b:step, or one value")
    p.add_argument("--recall-points", type=int)
    p.add_argument("--max-dets", type=int)
    p.add_argument("--score-floor", type=float)
    p.add_argument("--nms-mode", choices=("greedy-nms", "keep-top-1"))
    p.add_argument("--nms-iou", type=float)
    p.add_argument("--gt-overlap", type=float, help="grouping IoU threshold")
    p.add_argument("--threads", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nmsap",
        description="Detection metrics: interpolated AP and suppression-aware AP.",
    )
    parser.add_argument("--version", action="version", version=f"nmsap {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("evaluate", help="score predictions against ground truth")
    p.add_argument("--gt", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--metric", choices=("ap", "nms-ap", "both"), default="ap")
    _add_config_flags(p)
    _add_common(p)

    p = sub.add_parser("compare", help="both metrics plus their gap")
    p.add_argument("--gt", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--name", help="subtask name (default: prediction file stem)")
    p.add_argument("--aspect", default="unspecified")
    _add_config_flags(p)
    _add_common(p)

    p = sub.add_parser("simulate", help="generate synthetic predictions")
    p.add_argument("--gt", required=True)
    p.add_argument("--spec", required=True, help="DetectorSpec JSON file")
    p.add_argument("--seed", type=int, help="override the spec's seed")
    p.add_argument("--manifest", help="also write the manifest to this path")
    _add_common(p)

    p = sub.add_parser("gen-hardneg", help="hard-negative labels for one aspect")
    p.add_argument("--aspect", required=True, choices=ASPECTS)
    p.add_argument("--labels", required=True, help="file with one label per line")
    p.add_argument("--vocab", help="file with one substitution token per line")
    p.add_argument("--cap", type=int, help="max negatives per label")
    _add_common(p)

    p = sub.add_parser("stats", help="dataset statistics")
    p.add_argument("--gt", required=True)
    p.add_argument("--negatives", help="JSON file mapping label to negatives")
    _add_common(p)

    p = sub.add_parser("analyze", help="confidence distribution of matched boxes")
    p.add_argument("--gt", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--iou-min", type=float, default=0.9)
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--csv", help="also write the histogram as CSV")
    _add_common(p)

    p = sub.add_parser("report", help="aggregate compare outputs in a directory")
    p.add_argument("--results", required=True, help="directory of compare JSON files")
    p.add_argument("--csv", help="also write the table as CSV")
    p.add_argument("--svg", help="also write a radar chart as SVG")
    _add_common(p)

    return parser


def _cmd_evaluate(args) -> dict:
    eval_cfg, nms_cfg = _resolve_configs(args)
    threads = _resolve_threads(args)
    gt = load_ground_truth(args.gt)
    preds = load_predictions(args.pred, gt)
    config = {"eval": eval_cfg.to_dict(), "metric": args.metric, "threads": threads}
    if args.metric in ("nms-ap", "both"):
        config["nms"] = nms_cfg.to_dict()
    if args.metric == "ap":
        payload = evaluate(gt, preds, eval_cfg, threads=threads).to_dict()
    elif args.metric == "nms-ap":
        payload = nms_ap_evaluate(gt, preds, nms_cfg, eval_cfg, threads=threads).to_dict()
    else:
        payload = {
            "ap": evaluate(gt, preds, eval_cfg, threads=threads).to_dict(),
            "nms_ap": nms_ap_evaluate(gt, preds, nms_cfg, eval_cfg, threads=threads).to_dict(),
        }
    payload["manifest"] = RunManifest(
        "evaluate", config, {"gt": _digest(args.gt), "pred": _digest(args.pred)}
    ).to_canonical_dict()
    return payload


def _cmd_compare(args) -> dict:
    eval_cfg, nms_cfg = _resolve_configs(args)
    threads = _resolve_threads(args)
    gt = load_ground_truth(args.gt)
    preds = load_predictions(args.pred, gt)
    plain = evaluate(gt, preds, eval_cfg, threads=threads)
    suppressed = nms_ap_evaluate(gt, preds, nms_cfg, eval_cfg, threads=threads)
    name = args.name or Path(args.pred).stem
    config = {"eval": eval_cfg.to_dict(), "nms": nms_cfg.to_dict(), "threads": threads}
    return {
        "name": name,
        "aspect": args.aspect,
        "ap": plain.mean_ap,
        "nms_ap": suppressed.mean_ap,
        "gap": plain.mean_ap - suppressed.mean_ap,
        "mode": nms_cfg.mode,
        "suppressed": suppressed.nms.suppressed,
        "results": {"ap": plain.to_dict(), "nms_ap": suppressed.to_dict()},
        "manifest": RunManifest(
            "compare", config, {"gt": _digest(args.gt), "pred": _digest(args.pred)}
        ).to_canonical_dict(),
    }


def _cmd_simulate(args, started: float, quiet: bool) -> None:
    with open(args.spec, "rb") as fh:
        try:
            spec_doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"detector spec is not valid JSON: {exc}") from exc
    if not isinstance(spec_doc, dict):
        raise ConfigError("detector spec must be a JSON object")
    if args.seed is not None:
        spec_doc["seed"] = args.seed
    spec = DetectorSpec.from_dict(spec_doc)
    gt = load_ground_truth(args.gt)
    preds = simulate(gt, spec)
    text = json.dumps(dump_predictions(preds), sort_keys=True, indent=2) + "\n"
    written = _write_text(text, args.out)
    manifest = RunManifest(
        "simulate",
        {"spec": spec.to_dict()},
        {"gt": _digest(args.gt), "spec": _digest(args.spec)},
        duration_seconds=time.perf_counter() - started,
    )
    if args.manifest:
        _write_json(manifest.to_canonical_dict(), args.manifest)
    _emit_manifest(manifest, written, quiet)


def _cmd_gen_hardneg(args) -> dict:
    labels = [
        line.strip()
        for line in Path(args.labels).read_text().splitlines()
        if line.strip()
    ]
    vocab: tuple[str, ...] = ()
    if args.vocab:
        vocab = tuple(
            line.strip()
            for line in Path(args.vocab).read_text().splitlines()
            if line.strip()
        )
    rules = NegativeRuleSet(aspect=args.aspect, vocabulary=vocab, cap=args.cap)
    negatives: dict[str, list[str]] = {}
    inapplicable: list[str] = []
    flagged: list[str] = []
    for label in labels:
        try:
            _, _, occurrences = find_aspect_token(label, rules)
        except InapplicableLabel:
            inapplicable.append(label)
            continue
        if occurrences > 1:
            flagged.append(label)
        negatives[label] = gen_negatives(label, rules)
    inputs = {"labels": _digest(args.labels)}
    if args.vocab:
        inputs["vocab"] = _digest(args.vocab)
    return {
        "aspect": args.aspect,
        "vocabulary": list(rules.vocabulary),
        "negatives": negatives,
        "inapplicable": inapplicable,
        "flagged": flagged,
        "manifest": RunManifest(
            "gen-hardneg", {"aspect": args.aspect, "cap": args.cap}, inputs
        ).to_canonical_dict(),
    }


def _cmd_stats(args) -> dict:
    from .hardneg import compute_stats

    gt = load_ground_truth(args.gt)
    negatives = None
    inputs = {"gt": _digest(args.gt)}
    if args.negatives:
        with open(args.negatives, "rb") as fh:
            try:
                negatives = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"negatives file is not valid JSON: {exc}") from exc
        if not isinstance(negatives, dict):
            raise DatasetError("negatives file must map labels to lists")
        inputs["negatives"] = _digest(args.negatives)
    payload = compute_stats(gt, negatives).to_dict()
    payload["manifest"] = RunManifest("stats", {}, inputs).to_canonical_dict()
    return payload


def _cmd_analyze(args) -> dict:
    gt = load_ground_truth(args.gt)
    preds = load_predictions(args.pred, gt)
    dist = confidence_distribution(gt, preds, iou_min=args.iou_min, bins=args.bins)
    if args.csv:
        _write_text(dist.to_csv(), args.csv)
    payload = dist.to_dict()
    payload["manifest"] = RunManifest(
        "analyze",
        {"iou_min": args.iou_min, "bins": args.bins},
        {"gt": _digest(args.gt), "pred": _digest(args.pred)},
    ).to_canonical_dict()
    return payload


def _cmd_report(args, quiet: bool) -> dict:
    results_dir = Path(args.results)
    if not results_dir.is_dir():
        raise DatasetError(f"not a directory: {args.results}")
    rows = []
    inputs = {}
    for path in sorted(results_dir.glob("*.json")):
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError:
            doc = None
        if not isinstance(doc, dict) or not {"name", "aspect", "ap", "nms_ap"} <= set(doc):
            if not quiet:
                print(f"nmsap report: skipping {path.name} (not a compare output)", file=sys.stderr)
            continue
        rows.append(SubtaskMetrics.from_values(doc["name"], doc["aspect"], doc["nms_ap"], doc["ap"]))
        inputs[path.name] = _digest(str(path))
    report = AspectReport.from_rows(rows)
    if args.csv:
        _write_text(report.to_csv(), args.csv)
    if args.svg:
        _write_text(radar_svg(report), args.svg)
    payload = report.to_dict()
    payload["manifest"] = RunManifest("report", {}, inputs).to_canonical_dict()
    return payload


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.perf_counter()
    try:
        if args.subcommand == "simulate":
            _cmd_simulate(args, started, args.quiet)
            return 0
        if args.subcommand == "evaluate":
            payload = _cmd_evaluate(args)
        elif args.subcommand == "compare":
            payload = _cmd_compare(args)
        elif args.subcommand == "gen-hardneg":
            payload = _cmd_gen_hardneg(args)
        elif args.subcommand == "stats":
            payload = _cmd_stats(args)
        elif args.subcommand == "analyze":
            payload = _cmd_analyze(args)
        else:
            payload = _cmd_report(args, args.quiet)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 1
    except DatasetError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"cannot read: {exc}", file=sys.stderr)
        return 1
    written = _write_json(payload, args.out)
    manifest = RunManifest(
        args.subcommand,
        payload.get("manifest", {}).get("config", {}),
        payload.get("manifest", {}).get("inputs", {}),
        duration_seconds=time.perf_counter() - started,
    )
    _emit_manifest(manifest, written, args.quiet)
    return 0


if __name__ == "__main__":
    sys.exit(main())
