/** Wire types for the JSON documents the `nmsap` engine reads and writes. */

/** `[x, y, width, height]` in pixels. */
export type Bbox = [number, number, number, number];

export interface ImageRecord {
  id: number;
  width: number;
  height: number;
}

export interface CategoryRecord {
  id: number;
  name: string;
}

export interface AnnotationRecord {
  id: number;
  image_id: number;
  category_id: number;
  bbox: Bbox;
  area?: number;
  iscrowd?: number;
}

/** A ground-truth document: the shape of a `--gt` JSON file. */
export interface GroundTruthData {
  images: ImageRecord[];
  categories: CategoryRecord[];
  annotations: AnnotationRecord[];
}

/** One detection: the element shape of a `--pred` JSON file. */
export interface PredictionRow {
  image_id: number;
  category_id: number;
  bbox: Bbox;
  score: number;
}

/** Confidence model inside a detector spec. */
export interface ConfidenceModelData {
  kind: "fixed-list" | "uniform" | "label-advantage";
  values?: number[];
  low?: number;
  high?: number;
  base?: number;
  delta?: number;
}

/** Detector spec: the shape of a `simulate --spec` JSON file. */
export interface DetectorSpecData {
  kind: "perfect" | "deceptive" | "noisy";
  label_policy?: "correct" | "all-candidates" | "random";
  boxes_per_gt?: number;
  fp_rate?: number;
  drop_rate?: number;
  jitter?: number;
  full_vocabulary?: boolean;
  seed?: number;
  confidence?: ConfidenceModelData;
}

/**
 * Evaluation settings, passed through to the engine verbatim as a
 * `--config` file. Keys are the engine's own config-field names; the
 * engine validates values and unknown keys.
 */
export interface EvalConfigMap {
  iou_thresholds?: number[];
  recall_points?: number;
  max_dets?: number;
  score_floor?: number;
  tie_break?: "index";
  mode?: "greedy-nms" | "keep-top-1";
  nms_iou?: number;
  gt_overlap_threshold?: number;
}

/** Run manifest embedded in every engine output (no timing fields). */
export interface RunManifest {
  tool: string;
  version: string;
  subcommand: string;
  config: Record<string, unknown>;
  inputs: Record<string, string>;
}

/** Per-category block of an evaluation result. */
export interface CategoryResult {
  ap: number;
  gt_count: number;
  per_threshold: Record<string, number>;
  tp: Record<string, number>;
  fp: Record<string, number>;
}

export interface EvalConfigEcho {
  iou_thresholds: number[];
  recall_points: number;
  max_dets: number;
  score_floor: number;
  tie_break: string;
}

/** Classic interpolated-AP result (`--metric ap`). */
export interface ApResult {
  mAP: number;
  config: EvalConfigEcho;
  excluded_categories: number[];
  per_category: Record<string, CategoryResult>;
  manifest: RunManifest;
}

/** Suppression-aware result (`--metric nms-ap`). */
export interface NmsApResult extends ApResult {
  nms_ap: true;
  mode: "greedy-nms" | "keep-top-1";
  suppressed: number;
}

/** Combined result (`--metric both`). */
export interface BothResult {
  ap: Omit<ApResult, "manifest">;
  nms_ap: Omit<NmsApResult, "manifest">;
  manifest: RunManifest;
}

/** Output of `compare`: both metrics plus their gap, tagged for reports. */
export interface CompareResult {
  name: string;
  /** The `aspect` tag, or `"unspecified"` when none was given. */
  aspect: string;
  ap: number;
  nms_ap: number;
  gap: number;
  mode: "greedy-nms" | "keep-top-1";
  suppressed: number;
  results: {
    ap: Omit<ApResult, "manifest">;
    nms_ap: Omit<NmsApResult, "manifest">;
  };
  manifest: RunManifest;
}
