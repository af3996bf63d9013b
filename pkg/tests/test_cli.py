"""Command-line interface: subcommands, exit codes, and output stability."""

from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from nmsap.cli import main

DATA_DIR = Path(__file__).resolve().parent / "data"
GT = str(DATA_DIR / "twocar_gt.json")
PRED_WRONG = str(DATA_DIR / "twocar_pred_wrong.json")
PRED_CORRECT = str(DATA_DIR / "twocar_pred_correct.json")


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestTopLevel:
    def test_no_subcommand_is_usage_error(self, capsys):
        code, _, err = run(capsys, [])
        assert code == 2
        assert err.startswith("usage:")

    def test_version(self, capsys):
        code, out, _ = run(capsys, ["--version"])
        assert code == 0
        assert out.startswith("nmsap ")

    def test_installed_entry_point(self):
        proc = subprocess.run(["nmsap", "--version"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert proc.stdout.startswith("nmsap ")

    def test_module_invocation(self):
        proc = subprocess.run([sys.executable, "-m", "nmsap.cli", "--version"],
                              capture_output=True, text=True)
        assert proc.returncode == 0


class TestErrorPaths:
    def test_missing_file(self, capsys):
        code, _, err = run(capsys, ["evaluate", "--gt", "nope.json", "--pred", "x.json"])
        assert code == 1
        assert err.startswith("cannot read:")

    def test_invalid_input(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        code, _, err = run(capsys, ["evaluate", "--gt", str(bad), "--pred", str(bad)])
        assert code == 1
        assert err.startswith("invalid input:")

    def test_invalid_config(self, capsys):
        code, _, err = run(capsys, [
            "evaluate", "--gt", GT, "--pred", PRED_WRONG, "--recall-points", "1",
        ])
        assert code == 1
        assert err.startswith("invalid config:")

    def test_bad_flag_value(self, capsys):
        code, _, err = run(capsys, ["evaluate", "--metric", "bogus", "--gt", GT, "--pred", PRED_WRONG])
        assert code == 2
        assert "usage:" in err

    def test_integrity_error_is_invalid_input(self, capsys, tmp_path):
        stray = tmp_path / "stray.json"
        stray.write_text(json.dumps([
            {"image_id": 99, "category_id": 1, "bbox": [0, 0, 5, 5], "score": 0.5},
        ]))
        code, _, err = run(capsys, ["evaluate", "--gt", GT, "--pred", str(stray)])
        assert code == 1
        assert err.startswith("invalid input:")


class TestEvaluate:
    def test_both_metrics(self, capsys):
        code, out, err = run(capsys, ["evaluate", "--gt", GT, "--pred", PRED_WRONG, "--metric", "both"])
        assert code == 0
        payload = json.loads(out)
        assert payload["ap"]["mAP"] == pytest.approx(0.5, abs=1e-12)
        assert payload["nms_ap"]["mAP"] == pytest.approx(0.0, abs=1e-12)
        assert payload["nms_ap"]["suppressed"] == 2
        assert "nmsap evaluate:" in err

    def test_single_metric_payloads(self, capsys):
        _, out_ap, _ = run(capsys, ["evaluate", "--gt", GT, "--pred", PRED_WRONG, "--metric", "ap", "--quiet"])
        payload = json.loads(out_ap)
        assert set(payload) >= {"mAP", "per_category", "manifest"}
        _, out_nms, _ = run(capsys, ["evaluate", "--gt", GT, "--pred", PRED_WRONG, "--metric", "nms-ap", "--quiet"])
        assert json.loads(out_nms)["mode"] == "greedy-nms"

    def test_quiet_silences_stderr(self, capsys):
        _, _, err = run(capsys, ["evaluate", "--gt", GT, "--pred", PRED_WRONG, "--quiet"])
        assert err == ""

    def test_stdout_is_byte_identical_across_runs(self, capsys):
        _, first, _ = run(capsys, ["evaluate", "--gt", GT, "--pred", PRED_WRONG, "--quiet"])
        _, second, _ = run(capsys, ["evaluate", "--gt", GT, "--pred", PRED_WRONG, "--quiet"])
        assert first == second

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "result.json"
        code, out, _ = run(capsys, [
            "evaluate", "--gt", GT, "--pred", PRED_WRONG, "--out", str(target), "--quiet",
        ])
        assert code == 0
        assert out == ""
        first = target.read_bytes()
        run(capsys, ["evaluate", "--gt", GT, "--pred", PRED_WRONG, "--out", str(target), "--quiet"])
        assert target.read_bytes() == first
        assert first.endswith(b"\n")

    def test_out_dir_env_redirects_relative_paths(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("NMSAP_OUT_DIR", str(tmp_path))
        run(capsys, ["evaluate", "--gt", GT, "--pred", PRED_WRONG, "--out", "inner.json", "--quiet"])
        assert (tmp_path / "inner.json").exists()

    def test_threshold_flag_matches_defaults(self, capsys):
        _, explicit, _ = run(capsys, [
            "evaluate", "--gt", GT, "--pred", PRED_WRONG,
            "--iou-thresholds", "0.5:0.95:0.05", "--quiet",
        ])
        _, default, _ = run(capsys, ["evaluate", "--gt", GT, "--pred", PRED_WRONG, "--quiet"])
        assert explicit == default

    def test_single_threshold(self, capsys):
        _, out, _ = run(capsys, [
            "evaluate", "--gt", GT, "--pred", PRED_WRONG, "--iou-thresholds", "0.75", "--quiet",
        ])
        assert json.loads(out)["config"]["iou_thresholds"] == [0.75]

    def test_config_file_and_flag_precedence(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"recall_points": 11, "max_dets": 7}))
        _, out, _ = run(capsys, [
            "evaluate", "--gt", GT, "--pred", PRED_WRONG,
            "--config", str(cfg), "--recall-points", "21", "--quiet",
        ])
        emitted = json.loads(out)["config"]
        assert emitted["recall_points"] == 21   # flag beats file
        assert emitted["max_dets"] == 7         # file beats default

    def test_unknown_config_key_rejected(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"recall_pts": 11}))
        code, _, err = run(capsys, [
            "evaluate", "--gt", GT, "--pred", PRED_WRONG, "--config", str(cfg),
        ])
        assert code == 1
        assert err.startswith("invalid config:")

    def test_threads_env(self, capsys, monkeypatch):
        monkeypatch.setenv("NMSAP_THREADS", "3")
        _, out, _ = run(capsys, ["evaluate", "--gt", GT, "--pred", PRED_WRONG, "--quiet"])
        assert json.loads(out)["mAP"] == pytest.approx(0.5, abs=1e-12)

    def test_manifest_embedded_in_payload(self, capsys):
        _, out, _ = run(capsys, ["evaluate", "--gt", GT, "--pred", PRED_WRONG, "--quiet"])
        manifest = json.loads(out)["manifest"]
        assert manifest["subcommand"] == "evaluate"
        assert manifest["inputs"]["gt"].startswith("sha256:")
        assert "duration_seconds" not in manifest


class TestCompare:
    def test_payload_fields(self, capsys):
        _, out, _ = run(capsys, [
            "compare", "--gt", GT, "--pred", PRED_WRONG,
            "--name", "wrong labels", "--aspect", "color", "--quiet",
        ])
        payload = json.loads(out)
        assert payload["name"] == "wrong labels"
        assert payload["aspect"] == "color"
        assert payload["ap"] == pytest.approx(0.5, abs=1e-12)
        assert payload["nms_ap"] == pytest.approx(0.0, abs=1e-12)
        assert payload["gap"] == pytest.approx(0.5, abs=1e-12)
        assert payload["suppressed"] == 2

    def test_nms_mode_flag(self, capsys):
        _, out, _ = run(capsys, [
            "compare", "--gt", GT, "--pred", PRED_WRONG,
            "--name", "x", "--aspect", "color", "--nms-mode", "keep-top-1", "--quiet",
        ])
        assert json.loads(out)["mode"] == "keep-top-1"


class TestSimulate:
    def write_spec(self, tmp_path, **overrides):
        spec = {"kind": "deceptive", "label_policy": "all-candidates",
                "confidence": {"kind": "uniform"}, "seed": 3}
        spec.update(overrides)
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(spec))
        return str(path)

    def test_output_loads_as_predictions(self, capsys, tmp_path, twocar_gt):
        from nmsap.dataset import load_predictions
        spec = self.write_spec(tmp_path)
        code, out, _ = run(capsys, ["simulate", "--gt", GT, "--spec", spec, "--quiet"])
        assert code == 0
        preds = load_predictions(out.encode(), twocar_gt)
        assert len(preds.predictions) == 4

    def test_seed_flag_overrides_spec(self, capsys, tmp_path):
        spec = self.write_spec(tmp_path)
        _, base, _ = run(capsys, ["simulate", "--gt", GT, "--spec", spec, "--quiet"])
        _, same, _ = run(capsys, ["simulate", "--gt", GT, "--spec", spec, "--seed", "3", "--quiet"])
        _, moved, _ = run(capsys, ["simulate", "--gt", GT, "--spec", spec, "--seed", "4", "--quiet"])
        assert base == same
        assert base != moved

    def test_manifest_file(self, capsys, tmp_path):
        spec = self.write_spec(tmp_path)
        manifest_path = tmp_path / "manifest.json"
        run(capsys, ["simulate", "--gt", GT, "--spec", spec,
                     "--manifest", str(manifest_path), "--quiet"])
        manifest = json.loads(manifest_path.read_text())
        assert manifest["subcommand"] == "simulate"
        assert manifest["config"]["spec"]["seed"] == 3

    def test_bad_spec_is_config_error(self, capsys, tmp_path):
        spec = self.write_spec(tmp_path, kind="alien")
        code, _, err = run(capsys, ["simulate", "--gt", GT, "--spec", spec])
        assert code == 1
        assert err.startswith("invalid config:")


class TestGenHardneg:
    def test_position_negatives(self, capsys, tmp_path):
        labels = tmp_path / "labels.txt"
        labels.write_text("the apple on the left of the banana\nblue car\n")
        code, out, _ = run(capsys, [
            "gen-hardneg", "--aspect", "position", "--labels", str(labels), "--quiet",
        ])
        assert code == 0
        payload = json.loads(out)
        assert len(payload["negatives"]["the apple on the left of the banana"]) == 6
        assert payload["inapplicable"] == ["blue car"]

    def test_custom_vocab_and_cap(self, capsys, tmp_path):
        labels = tmp_path / "labels.txt"
        labels.write_text("red car\n")
        vocab = tmp_path / "vocab.txt"
        vocab.write_text("red\npink\nteal\nmauve\n")
        _, out, _ = run(capsys, [
            "gen-hardneg", "--aspect", "color", "--labels", str(labels),
            "--vocab", str(vocab), "--cap", "2", "--quiet",
        ])
        payload = json.loads(out)
        assert payload["negatives"]["red car"] == ["pink car", "teal car"]

    def test_multi_occurrence_labels_are_flagged(self, capsys, tmp_path):
        labels = tmp_path / "labels.txt"
        labels.write_text("red car near red truck\n")
        _, out, _ = run(capsys, [
            "gen-hardneg", "--aspect", "color", "--labels", str(labels), "--quiet",
        ])
        assert json.loads(out)["flagged"] == ["red car near red truck"]


class TestStatsAnalyzeReport:
    def test_stats(self, capsys):
        _, out, _ = run(capsys, ["stats", "--gt", GT, "--quiet"])
        payload = json.loads(out)
        assert payload["images"] == 1
        assert payload["bboxes"] == 2
        assert payload["labels"] == 2
        assert payload["avg_label_words"] == 2.0
        assert payload["avg_negative_labels"] is None

    def test_stats_with_negatives(self, capsys, tmp_path):
        negatives = tmp_path / "negs.json"
        negatives.write_text(json.dumps({"red car": ["blue car"], "blue car": ["red car"]}))
        _, out, _ = run(capsys, ["stats", "--gt", GT, "--negatives", str(negatives), "--quiet"])
        assert json.loads(out)["avg_negative_labels"] == 1.0

    def test_analyze(self, capsys, tmp_path):
        csv_path = tmp_path / "hist.csv"
        _, out, _ = run(capsys, [
            "analyze", "--gt", GT, "--pred", PRED_CORRECT,
            "--iou-min", "0.5", "--bins", "10", "--csv", str(csv_path), "--quiet",
        ])
        payload = json.loads(out)
        assert payload["iou_min"] == 0.5
        assert len(payload["positive_counts"]) == 10
        assert csv_path.read_text().startswith("bin_low,bin_high,positive,negative")

    def test_report_aggregates_compare_outputs(self, capsys, tmp_path):
        results = tmp_path / "results"
        results.mkdir()
        run(capsys, ["compare", "--gt", GT, "--pred", PRED_WRONG,
                     "--name", "wrong", "--aspect", "color",
                     "--out", str(results / "wrong.json"), "--quiet"])
        run(capsys, ["compare", "--gt", GT, "--pred", PRED_CORRECT,
                     "--name", "correct", "--aspect", "position",
                     "--out", str(results / "correct.json"), "--quiet"])
        (results / "stray.json").write_text(json.dumps({"unrelated": True}))
        csv_path = tmp_path / "report.csv"
        svg_path = tmp_path / "report.svg"
        code, out, err = run(capsys, [
            "report", "--results", str(results),
            "--csv", str(csv_path), "--svg", str(svg_path),
        ])
        assert code == 0
        payload = json.loads(out)
        assert payload["per_aspect"]["color"]["ap"] == pytest.approx(0.5, abs=1e-12)
        assert payload["per_aspect"]["position"]["nms_ap"] == pytest.approx(1.0, abs=1e-12)
        assert payload["total"]["gap"] == pytest.approx(0.25, abs=1e-12)
        assert "skipping stray.json" in err
        assert csv_path.read_text().startswith("kind,name,aspect")
        assert svg_path.read_text().startswith("<svg")

    def test_report_rejects_empty_directory(self, capsys, tmp_path):
        empty = tmp_path / "results"
        empty.mkdir()
        code, _, err = run(capsys, ["report", "--results", str(empty)])
        assert code == 1
