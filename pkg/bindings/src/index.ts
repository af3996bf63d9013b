/**
 * Node bindings for the `nmsap` detection-metrics engine.
 *
 * Every function shells out to the engine's CLI and exchanges data through
 * its JSON file formats, so results are field-identical to what the CLI
 * prints — no metric logic lives on this side. Inputs may be paths to JSON
 * files or in-memory documents; in-memory inputs are written to a scratch
 * file at the call boundary and cleaned up afterwards.
 */

import {
  EngineError,
  type EngineOptions,
  materialize,
  runEngineJson,
  withScratchDir,
} from "./engine.js";
import type {
  ApResult,
  BothResult,
  CompareResult,
  DetectorSpecData,
  EvalConfigMap,
  GroundTruthData,
  NmsApResult,
  PredictionRow,
} from "./types.js";

export { EngineError } from "./engine.js";
export type { EngineOptions } from "./engine.js";
export type {
  AnnotationRecord,
  ApResult,
  Bbox,
  BothResult,
  CategoryRecord,
  CategoryResult,
  CompareResult,
  ConfidenceModelData,
  DetectorSpecData,
  EvalConfigEcho,
  EvalConfigMap,
  GroundTruthData,
  ImageRecord,
  NmsApResult,
  PredictionRow,
  RunManifest,
} from "./types.js";

/** Ground truth: a JSON file path or the document itself. */
export type GroundTruthInput = string | GroundTruthData;

/** Predictions: a JSON file path or the rows themselves. */
export type PredictionsInput = string | PredictionRow[];

/** Detector spec: a JSON file path or the spec itself. */
export type DetectorSpecInput = string | DetectorSpecData;

/** Which metric(s) `evaluateFiles` should compute. */
export type Metric = "ap" | "nms-ap" | "both";

/** Config mapping accepted by the evaluation entry points. */
export type EvaluateConfig = EvalConfigMap & {
  metric?: Metric;
  /** Worker threads inside the engine; does not change results. */
  threads?: number;
};

/** Config mapping accepted by `compareFiles`. */
export type CompareConfig = EvalConfigMap & {
  /** Subtask name recorded in the output; defaults to the prediction file stem. */
  name?: string;
  /** Aspect tag recorded in the output (e.g. "color"). */
  aspect?: string;
  threads?: number;
};

interface SplitConfig {
  flags: string[];
  engineConfig: Record<string, unknown>;
}

const FLAG_KEYS = new Set(["metric", "threads", "name", "aspect", "seed"]);

/** Split a config mapping into CLI flags and `--config` file content. */
function splitConfig(config: Record<string, unknown>): SplitConfig {
  const flags: string[] = [];
  const engineConfig: Record<string, unknown> = {};
  for (const [key, value] of Object.entries(config)) {
    if (value === undefined) {
      continue;
    }
    if (FLAG_KEYS.has(key)) {
      flags.push(`--${key}`, String(value));
    } else {
      engineConfig[key] = value;
    }
  }
  return { flags, engineConfig };
}

async function runEvaluation<T>(
  subcommand: "evaluate" | "compare",
  gt: GroundTruthInput,
  pred: PredictionsInput,
  config: Record<string, unknown>,
  options?: EngineOptions,
): Promise<T> {
  const { flags, engineConfig } = splitConfig(config);
  return withScratchDir(async (dir) => {
    const args = [
      subcommand,
      "--gt",
      await materialize(gt, dir, "gt.json"),
      "--pred",
      await materialize(pred, dir, "pred.json"),
      ...flags,
      "--quiet",
    ];
    if (Object.keys(engineConfig).length > 0) {
      args.push("--config", await materialize(engineConfig, dir, "config.json"));
    }
    return runEngineJson<T>(args, options);
  });
}

/**
 * Score predictions against ground truth.
 *
 * Computes classic interpolated AP by default; `metric: "nms-ap"` runs the
 * suppression-aware variant instead, and `metric: "both"` returns the two
 * results side by side under `ap` and `nms_ap` keys.
 *
 * @throws {EngineError} when the engine rejects the inputs or config; the
 *   error message is the engine's own, verbatim.
 */
export async function evaluateFiles(
  gt: GroundTruthInput,
  pred: PredictionsInput,
  config?: EvaluateConfig & { metric?: "ap" },
  options?: EngineOptions,
): Promise<ApResult>;
export async function evaluateFiles(
  gt: GroundTruthInput,
  pred: PredictionsInput,
  config: EvaluateConfig & { metric: "nms-ap" },
  options?: EngineOptions,
): Promise<NmsApResult>;
export async function evaluateFiles(
  gt: GroundTruthInput,
  pred: PredictionsInput,
  config: EvaluateConfig & { metric: "both" },
  options?: EngineOptions,
): Promise<BothResult>;
export async function evaluateFiles(
  gt: GroundTruthInput,
  pred: PredictionsInput,
  config: EvaluateConfig = {},
  options?: EngineOptions,
): Promise<ApResult | NmsApResult | BothResult> {
  return runEvaluation(
    "evaluate",
    gt,
    pred,
    { ...config, metric: config.metric ?? "ap" },
    options,
  );
}

/** Score predictions with the suppression-aware metric only. */
export async function nmsApFiles(
  gt: GroundTruthInput,
  pred: PredictionsInput,
  config: Omit<EvaluateConfig, "metric"> = {},
  options?: EngineOptions,
): Promise<NmsApResult> {
  return evaluateFiles(gt, pred, { ...config, metric: "nms-ap" }, options);
}

/**
 * Compute both metrics and their gap, tagged with a subtask `name` and
 * optional `aspect` so outputs can be aggregated into reports.
 */
export async function compareFiles(
  gt: GroundTruthInput,
  pred: PredictionsInput,
  config: CompareConfig = {},
  options?: EngineOptions,
): Promise<CompareResult> {
  return runEvaluation("compare", gt, pred, { ...config }, options);
}

/**
 * Generate synthetic predictions for a ground-truth set from a detector
 * spec. The same spec and seed always produce the same predictions;
 * `seed` overrides the spec's own seed.
 */
export async function simulate(
  gt: GroundTruthInput,
  spec: DetectorSpecInput,
  config: { seed?: number } = {},
  options?: EngineOptions,
): Promise<PredictionRow[]> {
  const { flags } = splitConfig({ ...config });
  return withScratchDir(async (dir) => {
    const args = [
      "simulate",
      "--gt",
      await materialize(gt, dir, "gt.json"),
      "--spec",
      await materialize(spec, dir, "spec.json"),
      ...flags,
      "--quiet",
    ];
    return runEngineJson<PredictionRow[]>(args, options);
  });
}
