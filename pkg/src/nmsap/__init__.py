"""Detection metrics engine.

Scores object detections two ways: the standard interpolated average
precision, and a suppression-aware variant that first runs class-ignored
NMS over predictions anchored to ground-truth boxes, so near-duplicate
boxes carrying every candidate label stop inflating the score. Ships with
synthetic adversarial detectors, hard-negative label generation, and
distribution analyses.
"""

__version__ = "0.1.0"

from .ap import (
    CategoryEval,
    EvalConfig,
    EvalResult,
    MatchEntry,
    MatchTable,
    PRCurve,
    default_iou_thresholds,
    evaluate,
    interpolated_ap,
    match,
    pr_curve,
    recall_grid,
)
from .analysis import (
    AspectReport,
    ConfidenceDistribution,
    SubtaskMetrics,
    aspect_report,
    confidence_distribution,
    radar_svg,
)
from .dataset import (
    Annotation,
    Category,
    DiagnosticsReport,
    GroundTruthSet,
    ImageRecord,
    Prediction,
    PredictionSet,
    dump_ground_truth,
    dump_predictions,
    load_ground_truth,
    load_predictions,
    validate,
)
from .errors import (
    ConfigError,
    DatasetError,
    InapplicableLabel,
    IntegrityError,
    ParseError,
    SchemaError,
)
from .geometry import BBox, area, boxes_to_array, iou, iou_matrix
from .hardneg import (
    ASPECTS,
    DatasetStats,
    NegativeRuleSet,
    compute_stats,
    gen_negatives,
    normalize_label,
    passivize,
    reinsert_negation,
    remove_negation,
)
from .nms import (
    GtAssignment,
    NmsConfig,
    assign_to_gt,
    class_ignored_nms,
    nms_ap_evaluate,
    suppress,
)
from .simulate import ConfidenceModel, DetectorSpec, oracle_ap, simulate

__all__ = [
    "ASPECTS",
    "Annotation",
    "AspectReport",
    "BBox",
    "Category",
    "CategoryEval",
    "ConfidenceDistribution",
    "ConfidenceModel",
    "ConfigError",
    "DatasetError",
    "DatasetStats",
    "DetectorSpec",
    "DiagnosticsReport",
    "EvalConfig",
    "EvalResult",
    "GroundTruthSet",
    "GtAssignment",
    "ImageRecord",
    "InapplicableLabel",
    "IntegrityError",
    "MatchEntry",
    "MatchTable",
    "NegativeRuleSet",
    "NmsConfig",
    "PRCurve",
    "ParseError",
    "Prediction",
    "PredictionSet",
    "SchemaError",
    "SubtaskMetrics",
    "area",
    "aspect_report",
    "assign_to_gt",
    "boxes_to_array",
    "class_ignored_nms",
    "compute_stats",
    "confidence_distribution",
    "default_iou_thresholds",
    "dump_ground_truth",
    "dump_predictions",
    "evaluate",
    "gen_negatives",
    "interpolated_ap",
    "iou",
    "iou_matrix",
    "load_ground_truth",
    "load_predictions",
    "match",
    "nms_ap_evaluate",
    "normalize_label",
    "oracle_ap",
    "passivize",
    "pr_curve",
    "radar_svg",
    "recall_grid",
    "reinsert_negation",
    "remove_negation",
    "simulate",
    "suppress",
    "validate",
]
