"""seglock: segment-level deepfake localization post-processing.

Frame-grid decoding into segment proposals, joint localization loss kernels
with analytic gradients, Soft-NMS multi-model fusion, polynomial logistic
score fusion, and the AP/AR/AUC evaluation suite with the weighted overall
score.
"""

from .core import (
    FrameGrid,
    InputError,
    MetricConfig,
    MetricUndefinedError,
    Modality,
    ScoreSpace,
    Segment,
    VideoAnnotation,
    annotations_by_id,
    frame_centers,
    iou,
    sigmoid,
)
from .decode import chunk_max_score, decode_grid
from .fuse import (
    DEFAULT_LAMBDA_GRID,
    FusionModel,
    SoftNmsConfig,
    apply_fusion,
    fit_fusion,
    monomial_exponents,
    poly_features,
    soft_nms,
)
from .losses import (
    FrameTargets,
    JointLossResult,
    LossConfig,
    diou_loss,
    focal_loss,
    interval_diou_loss,
    joint_loss,
    make_frame_targets,
    relu,
    softplus,
)
from .metrics import (
    MetricReport,
    ap_at_iou,
    ar_at_n,
    auc,
    evaluate_localization,
    format_report_table,
    overall_score,
)
from .oracle import (
    SynthConfig,
    grid_from_segments,
    synth_predictions,
    synth_truth,
)

__version__ = "0.1.0"

__all__ = [
    "FrameGrid",
    "InputError",
    "MetricConfig",
    "MetricUndefinedError",
    "Modality",
    "ScoreSpace",
    "Segment",
    "VideoAnnotation",
    "annotations_by_id",
    "frame_centers",
    "iou",
    "sigmoid",
    "chunk_max_score",
    "decode_grid",
    "DEFAULT_LAMBDA_GRID",
    "FusionModel",
    "SoftNmsConfig",
    "apply_fusion",
    "fit_fusion",
    "monomial_exponents",
    "poly_features",
    "soft_nms",
    "FrameTargets",
    "JointLossResult",
    "LossConfig",
    "diou_loss",
    "focal_loss",
    "interval_diou_loss",
    "joint_loss",
    "make_frame_targets",
    "relu",
    "softplus",
    "MetricReport",
    "ap_at_iou",
    "ar_at_n",
    "auc",
    "evaluate_localization",
    "format_report_table",
    "overall_score",
    "SynthConfig",
    "grid_from_segments",
    "synth_predictions",
    "synth_truth",
    "__version__",
]
