"""Shared domain types, interval arithmetic, and metric configuration.

Every quantity is expressed in seconds on the media timeline. All types are
immutable value objects (frozen dataclasses; array fields are stored as
read-only float64/bool copies), so they can be shared freely across worker
threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

__all__ = [
    "InputError",
    "MetricUndefinedError",
    "ScoreSpace",
    "Modality",
    "Segment",
    "FrameGrid",
    "VideoAnnotation",
    "MetricConfig",
    "annotations_by_id",
    "frame_centers",
    "iou",
    "sigmoid",
]


class InputError(ValueError):
    """An input violates a documented precondition (CLI exit code 2)."""


class MetricUndefinedError(ValueError):
    """A requested metric has no defined value, e.g. AP with zero ground-truth
    segments in the entire dataset (CLI exit code 3)."""


class ScoreSpace(enum.Enum):
    """Interpretation of a model's confidence values.

    PROBABILITY scores live in [0, 1]; LOGIT scores are unconstrained reals.
    Heterogeneous spaces are fused deliberately: a raw logit well above 1 will
    outrank every probability during Soft-NMS selection.
    """

    PROBABILITY = "probability"
    LOGIT = "logit"

    @classmethod
    def parse(cls, name: str) -> "ScoreSpace":
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise InputError(
                f"unknown score space {name!r}; expected 'probability' or 'logit'"
            ) from None


class Modality(enum.Enum):
    """Which streams of a video carry manipulated content."""

    REAL = "real"
    FAKE_AUDIO = "fake_audio"
    FAKE_VISUAL = "fake_visual"
    FAKE_BOTH = "fake_both"

    @classmethod
    def parse(cls, name: str) -> "Modality":
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise InputError(f"unknown modality {name!r}; expected one of: {valid}") from None


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InputError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class Segment:
    """A time interval [start, end) with a fake-confidence score.

    The universal proposal / ground-truth unit. ``start <= end``; zero-length
    segments are representable but are dropped by decoding and can never match
    anything during evaluation (their IoU against any interval is 0).
    """

    start: float
    end: float
    score: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", _require_finite("segment start", self.start))
        object.__setattr__(self, "end", _require_finite("segment end", self.end))
        object.__setattr__(self, "score", _require_finite("segment score", self.score))
        if self.start < 0.0:
            raise InputError(f"segment start must be >= 0, got {self.start}")
        if self.end < self.start:
            raise InputError(f"segment end {self.end} precedes start {self.start}")

    @property
    def length(self) -> float:
        return self.end - self.start

    def with_score(self, score: float) -> "Segment":
        return Segment(self.start, self.end, score)


def iou(a: Segment, b: Segment) -> float:
    """1-D intersection over union of two segments, in [0, 1].

    Returns 0 when the union has zero length, so degenerate (zero-length)
    segments have IoU 0 against everything, including themselves.
    """
    inter = min(a.end, b.end) - max(a.start, b.start)
    if inter <= 0.0:
        return 0.0
    union = a.length + b.length - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def sigmoid(x):
    """Numerically stable logistic function, elementwise.

    Uses exp(-|x|) so neither branch can overflow; accepts scalars or arrays
    and returns a float for scalar input.
    """
    arr = np.asarray(x, dtype=np.float64)
    z = np.exp(-np.abs(arr))
    out = np.where(arr >= 0.0, 1.0 / (1.0 + z), z / (1.0 + z))
    if arr.ndim == 0:
        return float(out)
    return out


def _readonly(arr: np.ndarray, dtype) -> np.ndarray:
    out = np.array(arr, dtype=dtype, copy=True)
    out.flags.writeable = False
    return out


def frame_centers(n_frames: int, resolution: float) -> np.ndarray:
    """Centers of frames 0..n_frames-1; frame i covers [i*res, (i+1)*res)."""
    return (np.arange(int(n_frames), dtype=np.float64) + 0.5) * float(resolution)


@dataclass(frozen=True)
class FrameGrid:
    """Per-frame model head output at a fixed temporal resolution.

    ``scores`` are raw classification logits; ``start_offsets`` and
    ``end_offsets`` are non-negative distances (seconds) from each frame
    center to the predicted segment boundaries; ``valid`` masks out padding.
    """

    resolution: float
    scores: np.ndarray
    start_offsets: np.ndarray
    end_offsets: np.ndarray
    valid: np.ndarray

    def __post_init__(self) -> None:
        res = _require_finite("grid resolution", self.resolution)
        if res <= 0.0:
            raise InputError(f"grid resolution must be > 0, got {res}")
        object.__setattr__(self, "resolution", res)
        scores = _readonly(self.scores, np.float64)
        so = _readonly(self.start_offsets, np.float64)
        eo = _readonly(self.end_offsets, np.float64)
        valid = _readonly(self.valid, bool)
        n = len(scores)
        for name, arr in (("start_offsets", so), ("end_offsets", eo), ("valid", valid)):
            if len(arr) != n:
                raise InputError(f"grid {name} has length {len(arr)}, expected {n}")
        if not np.all(np.isfinite(scores[valid])):
            raise InputError("grid scores must be finite at valid frames")
        for name, arr in (("start_offsets", so), ("end_offsets", eo)):
            vals = arr[valid]
            if not np.all(np.isfinite(vals)):
                raise InputError(f"grid {name} must be finite at valid frames")
            if np.any(vals < 0.0):
                i = int(np.flatnonzero(valid)[np.argmax(vals < 0.0)])
                raise InputError(f"grid {name} negative at frame {i}")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "start_offsets", so)
        object.__setattr__(self, "end_offsets", eo)
        object.__setattr__(self, "valid", valid)

    @property
    def n_frames(self) -> int:
        return len(self.scores)

    def centers(self) -> np.ndarray:
        return frame_centers(self.n_frames, self.resolution)


@dataclass(frozen=True)
class VideoAnnotation:
    """Ground-truth record for one video.

    Fake segments may overlap each other (they are never merged); each one
    satisfies 0 <= start < end <= duration. A REAL video has no fake segments
    and vice versa. Ground-truth segment scores are unused and default to 1.
    """

    video_id: str
    duration: float
    modality: Modality
    fake_segments: tuple[Segment, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "fake_segments", tuple(self.fake_segments))
        dur = _require_finite(f"duration of {self.video_id!r}", self.duration)
        if dur <= 0.0:
            raise InputError(f"duration of {self.video_id!r} must be > 0, got {dur}")
        object.__setattr__(self, "duration", dur)
        for i, seg in enumerate(self.fake_segments):
            if not seg.start < seg.end:
                raise InputError(
                    f"{self.video_id!r} fake_segments[{i}]: zero-length ground truth"
                )
            if seg.end > dur:
                raise InputError(
                    f"{self.video_id!r} fake_segments[{i}]: end {seg.end} exceeds duration {dur}"
                )
        if (self.modality is Modality.REAL) != (len(self.fake_segments) == 0):
            raise InputError(
                f"{self.video_id!r}: modality {self.modality.value!r} inconsistent with "
                f"{len(self.fake_segments)} fake segment(s)"
            )

    @property
    def is_fake(self) -> bool:
        return self.modality is not Modality.REAL


def annotations_by_id(annotations: Iterable[VideoAnnotation]) -> dict[str, VideoAnnotation]:
    out: dict[str, VideoAnnotation] = {}
    for ann in annotations:
        if ann.video_id in out:
            raise InputError(f"duplicate video id {ann.video_id!r}")
        out[ann.video_id] = ann
    return out


def _default_ar_iou_set() -> tuple[float, ...]:
    return tuple(round(0.5 + 0.05 * i, 2) for i in range(10))


@dataclass(frozen=True)
class MetricConfig:
    """Evaluation protocol constants.

    Defaults: AP at IoU {0.5, 0.75, 0.9, 0.95} weighted 1/8 each, AR at
    N in {50, 30, 20, 10, 5} over the IoU ladder 0.5..0.95 (step 0.05)
    weighted 1/10 each, so the default weights sum to exactly 1.
    """

    ap_iou_thresholds: tuple[float, ...] = (0.5, 0.75, 0.9, 0.95)
    ar_n_values: tuple[int, ...] = (50, 30, 20, 10, 5)
    ar_iou_set: tuple[float, ...] = field(default_factory=_default_ar_iou_set)
    ap_weight: float = 1.0 / 8.0
    ar_weight: float = 1.0 / 10.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "ap_iou_thresholds", tuple(float(t) for t in self.ap_iou_thresholds))
        object.__setattr__(self, "ar_n_values", tuple(int(n) for n in self.ar_n_values))
        object.__setattr__(self, "ar_iou_set", tuple(float(t) for t in self.ar_iou_set))
        for t in self.ap_iou_thresholds + self.ar_iou_set:
            if not 0.0 < t <= 1.0:
                raise InputError(f"IoU threshold {t} outside (0, 1]")
        for n in self.ar_n_values:
            if n < 1:
                raise InputError(f"AR proposal count {n} must be >= 1")
        if self.ap_weight < 0.0 or self.ar_weight < 0.0:
            raise InputError("metric weights must be non-negative")


def _segment_arrays(segments: Iterable[Segment]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Column arrays (start, end, score) for vectorized interval math."""
    segs = list(segments)
    starts = np.array([s.start for s in segs], dtype=np.float64)
    ends = np.array([s.end for s in segs], dtype=np.float64)
    scores = np.array([s.score for s in segs], dtype=np.float64)
    return starts, ends, scores
