"""Synthetic corpora and brute-force reference implementations.

The generators are pure functions of (config, seed). Randomness comes from
the counter-based Philox-4x64-10 bit generator: the draw stream for purpose
``p`` and item ``i`` under seed ``s`` uses the 128-bit Philox key
``[s mod 2^64, (p << 32) | i]``, so videos (and models) can be generated
independently, in any order, on any number of workers, with bit-identical
results. Golden-file tests pin the generator output.

The ``ref_*`` evaluators are deliberately simple pure-Python loops, kept
structurally independent of the vectorized fast paths; they exist only for
property tests and the acceptance suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    FrameGrid,
    InputError,
    MetricConfig,
    MetricUndefinedError,
    Modality,
    ScoreSpace,
    Segment,
    VideoAnnotation,
    frame_centers,
    iou,
)
from .fuse import SoftNmsConfig
from .metrics import MetricReport

__all__ = [
    "SynthConfig",
    "stream",
    "synth_truth",
    "synth_predictions",
    "grid_from_segments",
    "synth_interaction_corpus",
    "ref_auc",
    "ref_soft_nms",
    "ref_ap",
    "ref_ar",
    "ref_evaluate",
]

_PURPOSE_TRUTH = 0
_PURPOSE_PREDICTIONS = 1  # + model index


def stream(seed: int, purpose: int, item: int) -> np.random.Generator:
    """Independent Philox draw stream for one (purpose, item) pair."""
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, ((purpose & 0xFFFFFFFF) << 32) | (item & 0xFFFFFFFF)],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _default_modality_mix() -> dict[Modality, float]:
    return {
        Modality.REAL: 0.25,
        Modality.FAKE_AUDIO: 0.25,
        Modality.FAKE_VISUAL: 0.25,
        Modality.FAKE_BOTH: 0.25,
    }


@dataclass(frozen=True)
class SynthConfig:
    """Synthetic ground-truth generator settings.

    Fake-segment durations are exponential around ``segment_duration_mean``
    with a floor of ``segment_min_duration`` (one 40 ms analysis frame by
    default, so every generated segment is representable on a default grid);
    segments never overlap within a video. Videos with a fake modality carry
    at least one segment regardless of the lower count bound.
    """

    n_videos: int = 50
    duration_range: tuple[float, float] = (4.0, 12.0)
    segments_per_video: tuple[int, int] = (0, 3)
    segment_duration_mean: float = 0.33
    segment_min_duration: float = 0.04
    modality_mix: dict[Modality, float] = field(default_factory=_default_modality_mix)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_videos < 0:
            raise InputError(f"n_videos must be >= 0, got {self.n_videos}")
        lo, hi = self.duration_range
        if not (0.0 < lo <= hi):
            raise InputError(f"invalid duration_range {self.duration_range}")
        s_lo, s_hi = self.segments_per_video
        if not (0 <= s_lo <= s_hi):
            raise InputError(f"invalid segments_per_video {self.segments_per_video}")
        if self.segment_duration_mean <= 0.0 or self.segment_min_duration <= 0.0:
            raise InputError("segment durations must be positive")
        total = sum(self.modality_mix.get(m, 0.0) for m in Modality)
        if any(p < 0.0 for p in self.modality_mix.values()) or abs(total - 1.0) > 1e-9:
            raise InputError("modality_mix probabilities must be non-negative and sum to 1")


def _pick_modality(mix: dict[Modality, float], u: float) -> Modality:
    acc = 0.0
    for modality in Modality:
        acc += mix.get(modality, 0.0)
        if u < acc:
            return modality
    return Modality.FAKE_BOTH


def _place_segments(g: np.random.Generator, cfg: SynthConfig, duration: float, count: int) -> list[Segment]:
    placed: list[Segment] = []
    for _ in range(count):
        d = max(float(g.exponential(cfg.segment_duration_mean)), cfg.segment_min_duration)
        d = min(d, duration)
        accepted = None
        while d >= cfg.segment_min_duration:
            for _ in range(64):  # resample, then shrink
                t = float(g.uniform(0.0, duration - d)) if duration > d else 0.0
                cand = Segment(t, t + d)
                if all(min(cand.end, s.end) <= max(cand.start, s.start) for s in placed):
                    accepted = cand
                    break
            if accepted is not None:
                break
            d *= 0.5
        if accepted is not None:
            placed.append(accepted)
    return sorted(placed, key=lambda s: (s.start, s.end))


def synth_truth(cfg: SynthConfig) -> list[VideoAnnotation]:
    """Deterministic synthetic ground truth: one annotation per video."""
    out: list[VideoAnnotation] = []
    for v in range(cfg.n_videos):
        g = stream(cfg.seed, _PURPOSE_TRUTH, v)
        lo, hi = cfg.duration_range
        duration = float(g.uniform(lo, hi))
        modality = _pick_modality(cfg.modality_mix, float(g.random()))
        if modality is Modality.REAL:
            segments: list[Segment] = []
        else:
            s_lo, s_hi = cfg.segments_per_video
            count = int(g.integers(max(1, s_lo), s_hi + 1))
            segments = _place_segments(g, cfg, duration, count)
            if not segments:
                modality = Modality.REAL
        out.append(VideoAnnotation(f"vid{v:05d}", duration, modality, tuple(segments)))
    return out


def synth_predictions(
    truth,
    jitter_std: float,
    noise_rate: float,
    miss_rate: float,
    seed: int,
    model_ids=("model_a",),
) -> dict[str, dict[str, list[Segment]]]:
    """Per-model synthetic predictions derived from the ground truth.

    Each ground-truth boundary moves by ``jitter_std`` times a unit normal
    draw; segments are dropped with probability ``miss_rate`` and spurious
    segments arrive Poisson(``noise_rate``) per video. Scores decrease with
    the jitter magnitude (0.95 at zero jitter). The unit draws do not depend
    on ``jitter_std``, so a sweep over jitter values under one seed perturbs
    identical base noise by growing amounts.
    """
    if jitter_std < 0.0 or noise_rate < 0.0 or not 0.0 <= miss_rate <= 1.0:
        raise InputError("jitter_std/noise_rate must be >= 0 and miss_rate in [0, 1]")
    out: dict[str, dict[str, list[Segment]]] = {}
    for m, model in enumerate(model_ids):
        per_video: dict[str, list[Segment]] = {}
        for v, ann in enumerate(truth):
            g = stream(seed, _PURPOSE_PREDICTIONS + m, v)
            preds: list[Segment] = []
            for seg in ann.fake_segments:
                u_miss = float(g.random())
                eps_start, eps_end = g.standard_normal(2)
                if u_miss < miss_rate:
                    continue
                d_start = jitter_std * float(eps_start)
                d_end = jitter_std * float(eps_end)
                start = min(max(seg.start + d_start, 0.0), ann.duration)
                end = min(max(seg.end + d_end, 0.0), ann.duration)
                if end <= start:
                    continue
                score = 0.95 * math.exp(-(abs(d_start) + abs(d_end)))
                preds.append(Segment(start, end, score))
            for _ in range(int(g.poisson(noise_rate))):
                d = min(max(float(g.exponential(0.33)), 0.04), ann.duration)
                t = float(g.uniform(0.0, ann.duration - d)) if ann.duration > d else 0.0
                preds.append(Segment(t, t + d, float(g.uniform(0.05, 0.85))))
            per_video[ann.video_id] = preds
        out[str(model)] = per_video
    return out


def grid_from_segments(
    segments,
    duration: float,
    resolution: float = 0.04,
    space: ScoreSpace = ScoreSpace.PROBABILITY,
    background_logit: float = -6.0,
) -> FrameGrid:
    """Encode scored segments as a frame grid (the inverse of decoding).

    Frames whose center lies in a segment carry that segment's boundary
    offsets and its score (as a logit for probability space, raw otherwise);
    earlier segments in the list claim contested frames. Background frames
    carry zero offsets, so decoding drops them as degenerate.
    """
    if duration <= 0.0 or resolution <= 0.0:
        raise InputError("duration and resolution must be > 0")
    n = int(math.ceil(duration / resolution))
    centers = frame_centers(n, resolution)
    logits = np.full(n, float(background_logit), dtype=np.float64)
    so = np.zeros(n, dtype=np.float64)
    eo = np.zeros(n, dtype=np.float64)
    claimed = np.zeros(n, dtype=bool)
    for seg in segments:
        mask = ~claimed & (centers >= seg.start) & (centers < seg.end)
        if not np.any(mask):
            continue
        so[mask] = centers[mask] - seg.start
        eo[mask] = seg.end - centers[mask]
        if space is ScoreSpace.PROBABILITY:
            p = min(max(float(seg.score), 1e-9), 1.0 - 1e-9)
            logits[mask] = math.log(p / (1.0 - p))
        else:
            logits[mask] = float(seg.score)
        claimed |= mask
    valid = centers <= duration
    return FrameGrid(resolution, logits, so, eo, valid)


def synth_interaction_corpus(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Two per-model score columns that are individually uninformative but
    jointly decisive: the label is the sign of their product."""
    g = stream(seed, 7, 0)
    scores = g.standard_normal((int(n), 2))
    labels = (scores[:, 0] * scores[:, 1]) > 0.0
    return scores, labels


# ---------------------------------------------------------------------------
# Brute-force references (test oracles)
# ---------------------------------------------------------------------------


def ref_auc(scores, labels) -> float:
    """Pairwise-count AUC: wins + half-ties over all pos/neg pairs."""
    pos = [float(s) for s, y in zip(scores, labels) if y]
    neg = [float(s) for s, y in zip(scores, labels) if not y]
    if not pos or not neg:
        raise InputError("auc requires both classes, got a single class")
    wins = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1.0
            elif p == q:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def ref_soft_nms(proposals, cfg: SoftNmsConfig | None = None) -> list[Segment]:
    """Pure-Python Soft-NMS: same selection and decay rules, loop-based."""
    cfg = cfg or SoftNmsConfig()
    live = [
        [seg.start, seg.end, seg.score, i]
        for i, seg in enumerate(proposals)
        if seg.score >= cfg.pre_threshold
    ]
    out: list[Segment] = []
    limit = len(live) if cfg.max_output is None else cfg.max_output
    while live and len(out) < limit:
        best = min(live, key=lambda r: (-r[2], r[0], r[1], r[3]))
        live.remove(best)
        picked = Segment(best[0], best[1], best[2])
        out.append(picked)
        for row in live:
            overlap = iou(picked, Segment(row[0], row[1]))
            row[2] = row[2] * math.exp(-(overlap**2) / cfg.sigma)
    return out


def _ref_match_video(preds: list[Segment], gts: list[Segment], iou_t: float) -> list[bool]:
    """Greedy matching of already-ordered predictions within one video."""
    available = [g for g in gts if g.length > 0.0]
    flags: list[bool] = []
    for p in preds:
        best_j, best_iou = -1, 0.0
        for j, g in enumerate(available):
            v = iou(p, g)
            if v > best_iou:
                best_j, best_iou = j, v
        if best_j >= 0 and best_iou >= iou_t:
            del available[best_j]
            flags.append(True)
        else:
            flags.append(False)
    return flags


def _ref_sorted(preds, vid: str) -> list[tuple]:
    rows = [(-p.score, vid, p.start, p.end, i, p) for i, p in enumerate(preds)]
    rows.sort(key=lambda r: r[:5])
    return rows


def ref_ap(predictions, truth, iou_t: float) -> float:
    """Loop-based dataset-pooled AP with all-point interpolation."""
    n_gt = sum(1 for ann in truth.values() for s in ann.fake_segments if s.length > 0.0)
    if n_gt == 0:
        raise MetricUndefinedError("AP is undefined: no ground-truth segments in the dataset")
    pooled: list[tuple] = []
    for vid in predictions:
        pooled.extend(_ref_sorted(predictions[vid], vid))
    pooled.sort(key=lambda r: r[:5])

    taken: dict[str, list[Segment]] = {
        vid: [s for s in truth[vid].fake_segments if s.length > 0.0] for vid in truth
    }
    tp_flags: list[bool] = []
    for _, vid, _, _, _, pred in pooled:
        available = taken[vid]
        best_j, best_iou = -1, 0.0
        for j, g in enumerate(available):
            v = iou(pred, g)
            if v > best_iou:
                best_j, best_iou = j, v
        if best_j >= 0 and best_iou >= iou_t:
            del available[best_j]
            tp_flags.append(True)
        else:
            tp_flags.append(False)

    precisions, recalls = [], []
    tp_count = 0
    for i, flag in enumerate(tp_flags):
        tp_count += int(flag)
        precisions.append(tp_count / (i + 1))
        recalls.append(tp_count / n_gt)
    for i in range(len(precisions) - 2, -1, -1):
        precisions[i] = max(precisions[i], precisions[i + 1])
    ap = 0.0
    prev_recall = 0.0
    for p, r, flag in zip(precisions, recalls, tp_flags):
        if flag:
            ap += (r - prev_recall) * p
            prev_recall = r
    return ap


def ref_ar(predictions, truth, n: int, iou_set=None) -> float:
    """Loop-based AR@N over the IoU ladder."""
    thresholds = list(iou_set) if iou_set is not None else list(MetricConfig().ar_iou_set)
    n_gt = sum(1 for ann in truth.values() for s in ann.fake_segments if s.length > 0.0)
    if n_gt == 0:
        raise MetricUndefinedError("AR is undefined: no ground-truth segments in the dataset")
    recalls = []
    for t in thresholds:
        matched = 0
        for vid in predictions:
            rows = _ref_sorted(predictions[vid], vid)[: int(n)]
            preds = [r[5] for r in rows]
            matched += sum(_ref_match_video(preds, list(truth[vid].fake_segments), t))
        recalls.append(matched / n_gt)
    return sum(recalls) / len(recalls)


def ref_evaluate(predictions, truth, cfg: MetricConfig | None = None) -> MetricReport:
    """Reference composition of ref_ap / ref_ar into a full report."""
    cfg = cfg or MetricConfig()
    ap = {t: ref_ap(predictions, truth, t) for t in cfg.ap_iou_thresholds}
    ar = {n: ref_ar(predictions, truth, n, cfg.ar_iou_set) for n in cfg.ar_n_values}
    overall = 100.0 * (
        sum(ap.values()) * cfg.ap_weight + sum(ar.values()) * cfg.ar_weight
    )
    return MetricReport(ap=ap, ar=ar, overall=overall)
