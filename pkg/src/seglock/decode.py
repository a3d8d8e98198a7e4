"""Turn frame-grid head outputs into scored segment proposals."""

from __future__ import annotations

import math

import numpy as np

from .core import FrameGrid, InputError, ScoreSpace, Segment, sigmoid

__all__ = ["decode_grid", "chunk_max_score"]


def decode_grid(grid: FrameGrid, duration: float, space: ScoreSpace) -> list[Segment]:
    """One proposal per valid frame, clamped to the video bounds.

    Frame i with center c proposes [c - start_offset, c + end_offset], both
    ends clamped to [0, duration]. Probability-space grids pass their logits
    through a sigmoid; logit-space grids emit raw scores (so a confident raw
    logit can outrank every probability downstream). Proposals that collapse
    to zero length after clamping are dropped. The output is sorted by
    descending score, ties broken by ascending start time then frame index,
    which makes fusion and evaluation reproducible across platforms.
    """
    duration = float(duration)
    if not (math.isfinite(duration) and duration > 0.0):
        raise InputError(f"duration must be > 0, got {duration}")
    centers = grid.centers()
    starts = np.clip(centers - grid.start_offsets, 0.0, duration)
    ends = np.clip(centers + grid.end_offsets, 0.0, duration)
    keep = grid.valid & (ends > starts)
    if not np.any(keep):
        return []
    idx = np.flatnonzero(keep)
    starts, ends = starts[idx], ends[idx]
    if space is ScoreSpace.PROBABILITY:
        scores = sigmoid(grid.scores[idx])
    else:
        scores = grid.scores[idx]
    order = np.lexsort((idx, starts, -scores))
    return [
        Segment(float(starts[j]), float(ends[j]), float(scores[j])) for j in order
    ]


def chunk_max_score(chunk_scores) -> float:
    """File-level fake score from per-chunk scores: the maximum.

    A long file whose fake content falls in a single chunk is still scored
    by that chunk.
    """
    scores = [float(s) for s in chunk_scores]
    if not scores:
        raise InputError("chunk_max_score requires at least one chunk score")
    if not all(math.isfinite(s) for s in scores):
        raise InputError("chunk scores must be finite")
    return max(scores)
