"""Joint localization loss kernels: forward values and analytic gradients.

The kernels are plain numpy functions usable from any external training loop;
gradients are hand-derived closed forms (no autodiff). Losses reduce by mean
over the frames they apply to, so values are comparable across videos of
different lengths. Frames can be masked out (padding), which makes the loss
and every gradient entry exactly independent of that frame's inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InputError, VideoAnnotation, frame_centers, sigmoid

__all__ = [
    "LossConfig",
    "FrameTargets",
    "JointLossResult",
    "make_frame_targets",
    "focal_loss",
    "interval_diou_loss",
    "diou_loss",
    "joint_loss",
    "softplus",
    "relu",
]


@dataclass(frozen=True)
class LossConfig:
    """Loss hyperparameters.

    ``focal_alpha`` weights the positive (fake-frame) class, ``focal_gamma``
    down-weights easy examples, and ``regression_coefficient`` scales the
    boundary-regression term inside the joint loss to account for its larger
    magnitude.
    """

    focal_alpha: float = 0.9
    focal_gamma: float = 2.0
    regression_coefficient: float = 0.03

    def __post_init__(self) -> None:
        if not 0.0 < self.focal_alpha < 1.0:
            raise InputError(f"focal_alpha must lie in (0, 1), got {self.focal_alpha}")
        if self.focal_gamma < 0.0:
            raise InputError(f"focal_gamma must be >= 0, got {self.focal_gamma}")
        if self.regression_coefficient < 0.0:
            raise InputError(
                f"regression_coefficient must be >= 0, got {self.regression_coefficient}"
            )


def _bool_array(x) -> np.ndarray:
    arr = np.asarray(x)
    if arr.dtype != bool:
        arr = arr.astype(bool)
    return arr


def _float_array(name: str, x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class FrameTargets:
    """Per-frame training targets derived from ground-truth segments.

    ``labels[i]`` is True iff the center of frame i lies inside a fake
    segment; the target offsets are defined (>= 0) exactly there and are
    never read elsewhere. ``valid`` masks frames whose center falls beyond
    the video duration.
    """

    labels: np.ndarray
    target_start_offsets: np.ndarray
    target_end_offsets: np.ndarray
    valid: np.ndarray

    def __post_init__(self) -> None:
        labels = _bool_array(self.labels)
        ts = np.asarray(self.target_start_offsets, dtype=np.float64)
        te = np.asarray(self.target_end_offsets, dtype=np.float64)
        valid = _bool_array(self.valid)
        n = len(labels)
        if not (len(ts) == len(te) == len(valid) == n):
            raise InputError("FrameTargets arrays must share one length")
        if np.any(ts[labels] < 0.0) or np.any(te[labels] < 0.0):
            raise InputError("target offsets must be >= 0 at labeled frames")
        for name, arr in (("labels", labels), ("target_start_offsets", ts),
                          ("target_end_offsets", te), ("valid", valid)):
            a = np.array(arr, copy=True)
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @property
    def n_frames(self) -> int:
        return len(self.labels)


def make_frame_targets(
    annotation: VideoAnnotation, resolution: float, n_frames: int
) -> FrameTargets:
    """Rasterize ground-truth segments onto a frame grid.

    A frame is positive iff its center (i + 0.5) * resolution lies in a fake
    segment [start, end); its targets are the distances from the center to
    that segment's boundaries. When fake segments overlap, the segment with
    the earliest start (then earliest end) claims the frame. A frame is valid
    iff its center does not pass the video duration.
    """
    if resolution <= 0.0:
        raise InputError(f"resolution must be > 0, got {resolution}")
    n = int(n_frames)
    centers = frame_centers(n, resolution)
    labels = np.zeros(n, dtype=bool)
    ts = np.zeros(n, dtype=np.float64)
    te = np.zeros(n, dtype=np.float64)
    valid = centers <= annotation.duration
    for seg in sorted(annotation.fake_segments, key=lambda s: (s.start, s.end)):
        mask = ~labels & (centers >= seg.start) & (centers < seg.end)
        ts[mask] = centers[mask] - seg.start
        te[mask] = seg.end - centers[mask]
        labels |= mask
    return FrameTargets(labels, ts, te, valid)


def focal_loss(logits, labels, valid, cfg: LossConfig | None = None):
    """Class-balanced focal loss over valid frames, with d(loss)/d(logit).

    Per positive frame: -alpha * (1-p)^gamma * log(p); per negative frame:
    -(1-alpha) * p^gamma * log(1-p), where p = sigmoid(logit). The mean is
    taken over valid frames; zero valid frames yield loss 0 and zero
    gradients (fully padded input, never a division by zero).

    Returns (loss, grad_logits).
    """
    cfg = cfg or LossConfig()
    x = _float_array("logits", logits)
    y = _bool_array(labels)
    v = _bool_array(valid)
    if not (len(x) == len(y) == len(v)):
        raise InputError("focal_loss arrays must share one length")
    n_valid = int(v.sum())
    if n_valid == 0:
        return 0.0, np.zeros_like(x)

    a, g = cfg.focal_alpha, cfg.focal_gamma
    p = sigmoid(x)
    q = sigmoid(-x)  # stable 1 - p
    log_p = -np.logaddexp(0.0, -x)
    log_q = -np.logaddexp(0.0, x)

    per_frame = np.where(y, -a * q**g * log_p, -(1.0 - a) * p**g * log_q)
    grad = np.where(
        y,
        a * q**g * (g * p * log_p - q),
        (1.0 - a) * p**g * (p - g * q * log_q),
    )
    loss = float(per_frame[v].sum() / n_valid)
    return loss, np.where(v, grad, 0.0) / n_valid


def interval_diou_loss(pred_lo, pred_hi, tgt_lo, tgt_hi):
    """Elementwise distance-IoU loss between 1-D intervals.

    Per pair: 1 - IoU + (d/c)^2 where d is the distance between interval
    centers and c the length of the smallest enclosing interval (the 1-D
    specialization of the enclosing-box diagonal). Degenerate cases are
    defined as IoU 0 for an empty union and penalty 0 for a zero-length
    enclosure, both with zero gradient contribution (subgradient choice).

    Returns (loss, d_loss/d_pred_lo, d_loss/d_pred_hi), all elementwise.
    """
    p_lo = np.asarray(pred_lo, dtype=np.float64)
    p_hi = np.asarray(pred_hi, dtype=np.float64)
    t_lo = np.asarray(tgt_lo, dtype=np.float64)
    t_hi = np.asarray(tgt_hi, dtype=np.float64)

    inter_raw = np.minimum(p_hi, t_hi) - np.maximum(p_lo, t_lo)
    overlap = inter_raw > 0.0
    inter = np.where(overlap, inter_raw, 0.0)
    union = (p_hi - p_lo) + (t_hi - t_lo) - inter
    pos_union = union > 0.0
    safe_union = np.where(pos_union, union, 1.0)
    v = np.where(pos_union, inter / safe_union, 0.0)

    d_inter_lo = np.where(overlap & (p_lo > t_lo), -1.0, 0.0)
    d_inter_hi = np.where(overlap & (p_hi < t_hi), 1.0, 0.0)
    d_union_lo = -1.0 - d_inter_lo
    d_union_hi = 1.0 - d_inter_hi
    dv_lo = np.where(pos_union, (d_inter_lo * union - inter * d_union_lo) / safe_union**2, 0.0)
    dv_hi = np.where(pos_union, (d_inter_hi * union - inter * d_union_hi) / safe_union**2, 0.0)

    d = 0.5 * ((p_lo + p_hi) - (t_lo + t_hi))
    c = np.maximum(p_hi, t_hi) - np.minimum(p_lo, t_lo)
    pos_c = c > 0.0
    safe_c = np.where(pos_c, c, 1.0)
    penalty = np.where(pos_c, (d / safe_c) ** 2, 0.0)
    dc_lo = np.where(p_lo < t_lo, -1.0, 0.0)
    dc_hi = np.where(p_hi > t_hi, 1.0, 0.0)
    dpen_lo = np.where(pos_c, d / safe_c**2 - 2.0 * penalty * dc_lo / safe_c, 0.0)
    dpen_hi = np.where(pos_c, d / safe_c**2 - 2.0 * penalty * dc_hi / safe_c, 0.0)

    loss = 1.0 - v + penalty
    return loss, -dv_lo + dpen_lo, -dv_hi + dpen_hi


def _masked_diou(pred_start, pred_end, tgt_start, tgt_end, active):
    """Mean DIoU loss over active frames with gradients w.r.t. the offsets.

    Predicted and target intervals share the frame center, so the loss is
    computed in center-relative coordinates [-start_offset, +end_offset];
    the result is invariant to the absolute center position.
    """
    ps = _float_array("pred_start", pred_start)
    pe = _float_array("pred_end", pred_end)
    n_active = int(active.sum())
    if n_active == 0:
        return 0.0, np.zeros_like(ps), np.zeros_like(pe)
    per_frame, d_lo, d_hi = interval_diou_loss(-ps, pe, -tgt_start, tgt_end)
    loss = float(per_frame[active].sum() / n_active)
    grad_start = np.where(active, -d_lo, 0.0) / n_active
    grad_end = np.where(active, d_hi, 0.0) / n_active
    return loss, grad_start, grad_end


def diou_loss(pred_start, pred_end, targets: FrameTargets):
    """Distance-IoU regression loss over labeled valid frames.

    Only frames inside a fake segment contribute; zero labeled frames (a
    real-only clip) yield loss 0 and zero gradients.

    Returns (loss, grad_start_offsets, grad_end_offsets).
    """
    ps = _float_array("pred_start", pred_start)
    pe = _float_array("pred_end", pred_end)
    if not (len(ps) == len(pe) == targets.n_frames):
        raise InputError("diou_loss arrays must match the target length")
    active = targets.labels & targets.valid
    return _masked_diou(ps, pe, targets.target_start_offsets, targets.target_end_offsets, active)


@dataclass(frozen=True)
class JointLossResult:
    total: float
    classification: float
    regression: float
    grad_logits: np.ndarray
    grad_start_offsets: np.ndarray
    grad_end_offsets: np.ndarray


def joint_loss(grid, targets: FrameTargets, cfg: LossConfig | None = None) -> JointLossResult:
    """Weighted sum of the focal classification and DIoU regression losses.

    total = classification + regression_coefficient * regression. A frame
    counts only where both the grid and the targets mark it valid; the
    regression additionally requires the frame to be labeled fake.
    """
    cfg = cfg or LossConfig()
    if grid.n_frames != targets.n_frames:
        raise InputError(
            f"grid has {grid.n_frames} frames but targets have {targets.n_frames}"
        )
    valid = grid.valid & targets.valid
    cls_loss, grad_logits = focal_loss(grid.scores, targets.labels, valid, cfg)
    reg_loss, grad_start, grad_end = _masked_diou(
        grid.start_offsets,
        grid.end_offsets,
        targets.target_start_offsets,
        targets.target_end_offsets,
        targets.labels & valid,
    )
    coef = cfg.regression_coefficient
    return JointLossResult(
        total=cls_loss + coef * reg_loss,
        classification=cls_loss,
        regression=reg_loss,
        grad_logits=grad_logits,
        grad_start_offsets=coef * grad_start,
        grad_end_offsets=coef * grad_end,
    )


def softplus(x):
    """Overflow-safe ln(1 + exp(x)). Returns (value, derivative)."""
    arr = np.asarray(x, dtype=np.float64)
    value = np.logaddexp(0.0, arr)
    deriv = sigmoid(arr)
    if arr.ndim == 0:
        return float(value), float(deriv)
    return value, deriv


def relu(x):
    """max(0, x) with derivative 0 at x <= 0. Returns (value, derivative)."""
    arr = np.asarray(x, dtype=np.float64)
    value = np.maximum(arr, 0.0)
    deriv = (arr > 0.0).astype(np.float64)
    if arr.ndim == 0:
        return float(value), float(deriv)
    return value, deriv
