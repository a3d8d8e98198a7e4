"""Challenge evaluation: ROC AUC, AP@IoU, AR@N, and the weighted overall score.

Localization predictions are matched to ground truth greedily in score order,
one-to-one per ground-truth segment, with the highest-IoU unmatched segment
winning. Recall denominators are dataset-level (instance-weighted), so
real-only videos contribute only false positives. Every sort has a fully
specified tie-break and videos are always visited in sorted-id order, which
makes the evaluator deterministic and invariant to video permutation and to
worker-thread count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import (
    InputError,
    MetricConfig,
    MetricUndefinedError,
    Segment,
    VideoAnnotation,
)

__all__ = [
    "MetricReport",
    "auc",
    "ap_at_iou",
    "ar_at_n",
    "overall_score",
    "evaluate_localization",
    "format_report_table",
]

Predictions = Mapping[str, Sequence[Segment]]
Truth = Mapping[str, VideoAnnotation]


def auc(scores, labels) -> float:
    """Rank-based (Mann-Whitney) ROC AUC with ties counted as 1/2.

    Equals the trapezoidal area under the ROC curve. Both classes must be
    present.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    if s.ndim != 1 or s.shape != y.shape:
        raise InputError("scores and labels must be 1-D with one shared length")
    if not np.all(np.isfinite(s)):
        raise InputError("scores must be finite")
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise InputError("auc requires both classes, got a single class")

    order = np.argsort(s, kind="mergesort")
    sorted_scores = s[order]
    # Average ranks over tie groups (1-based).
    new_group = np.r_[True, sorted_scores[1:] != sorted_scores[:-1]]
    group_first = np.flatnonzero(new_group)
    group_sizes = np.diff(np.r_[group_first, len(s)])
    avg_rank = group_first + (group_sizes - 1) / 2.0 + 1.0
    ranks = np.empty(len(s), dtype=np.float64)
    ranks[order] = np.repeat(avg_rank, group_sizes)

    u = ranks[y].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def _positive_gt(ann: VideoAnnotation) -> tuple[np.ndarray, np.ndarray]:
    """Ground-truth boundary arrays; zero-length segments can never match
    and are excluded from both matching and recall denominators."""
    segs = [s for s in ann.fake_segments if s.length > 0.0]
    starts = np.array([s.start for s in segs], dtype=np.float64)
    ends = np.array([s.end for s in segs], dtype=np.float64)
    return starts, ends


def _sorted_video_preds(preds: Sequence[Segment]) -> tuple[np.ndarray, ...]:
    """Canonical per-video prediction order: descending score, then ascending
    start, end, and input position."""
    starts = np.array([p.start for p in preds], dtype=np.float64)
    ends = np.array([p.end for p in preds], dtype=np.float64)
    scores = np.array([p.score for p in preds], dtype=np.float64)
    pos = np.arange(len(preds))
    order = np.lexsort((pos, ends, starts, -scores))
    return starts[order], ends[order], scores[order]


def _greedy_match(
    p_starts: np.ndarray,
    p_ends: np.ndarray,
    g_starts: np.ndarray,
    g_ends: np.ndarray,
    iou_t: float,
) -> np.ndarray:
    """True-positive flags for predictions (already in match order): each one
    claims the highest-IoU still-unmatched ground-truth segment with
    IoU >= iou_t (IoU ties go to the earliest segment)."""
    tp = np.zeros(len(p_starts), dtype=bool)
    if len(g_starts) == 0:
        return tp
    taken = np.zeros(len(g_starts), dtype=bool)
    g_len = g_ends - g_starts
    for i in range(len(p_starts)):
        if taken.all():
            break
        inter = np.minimum(p_ends[i], g_ends) - np.maximum(p_starts[i], g_starts)
        inter = np.maximum(inter, 0.0)
        union = (p_ends[i] - p_starts[i]) + g_len - inter
        iou = np.where((inter > 0.0) & (union > 0.0), inter / np.where(union > 0.0, union, 1.0), 0.0)
        iou[taken] = -1.0
        j = int(np.argmax(iou))
        if iou[j] >= iou_t:
            taken[j] = True
            tp[i] = True
    return tp


def _validate_videos(predictions: Predictions, truth: Truth) -> None:
    unknown = sorted(set(predictions) - set(truth))
    if unknown:
        raise InputError(f"predictions reference videos absent from the ground truth: {unknown}")


def _total_gt(truth: Truth) -> int:
    return sum(len(_positive_gt(ann)[0]) for ann in truth.values())


def ap_at_iou(predictions: Predictions, truth: Truth, iou_t: float) -> float:
    """Dataset-pooled average precision at one IoU threshold.

    Predictions from all videos are pooled and sorted by descending score
    (ties: ascending video id, start, end, input position), greedily matched
    within their own video, and the precision-recall curve is integrated with
    all-point interpolation (monotone precision envelope). The recall
    denominator is the total ground-truth segment count across the dataset.
    """
    iou_t = float(iou_t)
    if not 0.0 < iou_t <= 1.0:
        raise InputError(f"IoU threshold {iou_t} outside (0, 1]")
    _validate_videos(predictions, truth)
    n_gt = _total_gt(truth)
    if n_gt == 0:
        raise MetricUndefinedError("AP is undefined: no ground-truth segments in the dataset")

    scores_parts, tp_parts, vid_parts, start_parts, end_parts, pos_parts = [], [], [], [], [], []
    for vid_idx, vid in enumerate(sorted(predictions)):
        preds = predictions[vid]
        if len(preds) == 0:
            continue
        p_starts, p_ends, p_scores = _sorted_video_preds(preds)
        g_starts, g_ends = _positive_gt(truth[vid])
        tp = _greedy_match(p_starts, p_ends, g_starts, g_ends, iou_t)
        scores_parts.append(p_scores)
        tp_parts.append(tp)
        vid_parts.append(np.full(len(p_scores), vid_idx))
        start_parts.append(p_starts)
        end_parts.append(p_ends)
        pos_parts.append(np.arange(len(p_scores)))
    if not scores_parts:
        return 0.0

    scores = np.concatenate(scores_parts)
    tp = np.concatenate(tp_parts)
    vids = np.concatenate(vid_parts)
    starts = np.concatenate(start_parts)
    ends = np.concatenate(end_parts)
    pos = np.concatenate(pos_parts)
    order = np.lexsort((pos, ends, starts, vids, -scores))
    tp = tp[order]

    cum_tp = np.cumsum(tp)
    precision = cum_tp / np.arange(1, len(tp) + 1)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    return float(envelope[tp].sum() / n_gt)


def ar_at_n(
    predictions: Predictions,
    truth: Truth,
    n: int,
    iou_set: Sequence[float] | None = None,
) -> float:
    """Average recall keeping at most the top-n proposals per video.

    Recall is computed at every threshold of ``iou_set`` (default: the 0.5 to
    0.95 ladder in steps of 0.05) against the dataset-level ground-truth
    count, then averaged over the thresholds.
    """
    if int(n) < 1:
        raise InputError(f"n must be >= 1, got {n}")
    thresholds = tuple(float(t) for t in (iou_set if iou_set is not None else MetricConfig().ar_iou_set))
    if not thresholds:
        raise InputError("iou_set must be non-empty")
    for t in thresholds:
        if not 0.0 < t <= 1.0:
            raise InputError(f"IoU threshold {t} outside (0, 1]")
    _validate_videos(predictions, truth)
    n_gt = _total_gt(truth)
    if n_gt == 0:
        raise MetricUndefinedError("AR is undefined: no ground-truth segments in the dataset")

    matched = np.zeros(len(thresholds), dtype=np.int64)
    for vid in sorted(predictions):
        preds = predictions[vid]
        if len(preds) == 0:
            continue
        p_starts, p_ends, _ = _sorted_video_preds(preds)
        p_starts, p_ends = p_starts[: int(n)], p_ends[: int(n)]
        g_starts, g_ends = _positive_gt(truth[vid])
        if len(g_starts) == 0:
            continue
        for k, t in enumerate(thresholds):
            matched[k] += int(_greedy_match(p_starts, p_ends, g_starts, g_ends, t).sum())
    recalls = matched / n_gt
    return float(recalls.mean())


def overall_score(ap: Mapping, ar: Mapping, cfg: MetricConfig | None = None) -> float:
    """Weighted overall localization score on a 0..100 scale.

    100 * (sum of AP values * ap_weight + sum of AR values * ar_weight),
    which with the default weights equals the mean of the average AP and the
    average AR, in percent.
    """
    cfg = cfg or MetricConfig()
    ap_sum = 0.0
    for t in cfg.ap_iou_thresholds:
        if t not in ap:
            raise InputError(f"AP map is missing the IoU threshold {t}")
        ap_sum += float(ap[t])
    ar_sum = 0.0
    for n in cfg.ar_n_values:
        if n not in ar:
            raise InputError(f"AR map is missing N={n}")
        ar_sum += float(ar[n])
    return 100.0 * (ap_sum * cfg.ap_weight + ar_sum * cfg.ar_weight)


@dataclass(frozen=True)
class MetricReport:
    """AP per IoU threshold, AR per proposal budget, optional AUC, and the
    weighted overall score for one evaluation run."""

    ap: dict[float, float]
    ar: dict[int, float]
    overall: float
    auc: float | None = None


def evaluate_localization(
    predictions: Predictions, truth: Truth, cfg: MetricConfig | None = None
) -> MetricReport:
    """Full localization evaluation under one metric configuration."""
    cfg = cfg or MetricConfig()
    ap = {t: ap_at_iou(predictions, truth, t) for t in cfg.ap_iou_thresholds}
    ar = {n: ar_at_n(predictions, truth, n, cfg.ar_iou_set) for n in cfg.ar_n_values}
    return MetricReport(ap=ap, ar=ar, overall=overall_score(ap, ar, cfg))


def format_report_table(report: MetricReport) -> str:
    """Aligned one-row table: overall score, then AP and AR columns (percent)."""
    headers = ["Score"]
    values = [report.overall]
    for t, v in report.ap.items():
        headers.append(f"AP@{t:g}")
        values.append(100.0 * v)
    for n, v in report.ar.items():
        headers.append(f"AR@{n}")
        values.append(100.0 * v)
    if report.auc is not None:
        headers.append("AUC")
        values.append(100.0 * report.auc)
    cells = [f"{v:.2f}" for v in values]
    widths = [max(len(h), len(c)) for h, c in zip(headers, cells)]
    head = "  ".join(h.rjust(w) for h, w in zip(headers, widths))
    row = "  ".join(c.rjust(w) for c, w in zip(cells, widths))
    return head + "\n" + row
