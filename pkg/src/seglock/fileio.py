"""File formats: ground-truth manifests, frame grids, proposal files, fusion
models, metric reports, and score CSVs.

All JSON writers emit canonical output (sorted keys, two-space indent, a
trailing newline, floats in shortest round-trip decimal), so identical data
produces byte-identical files on any platform. Readers validate against the
domain invariants and raise :class:`~seglock.core.InputError` naming the
offending record and field.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import (
    FrameGrid,
    InputError,
    Modality,
    ScoreSpace,
    Segment,
    VideoAnnotation,
)
from .fuse import FusionModel
from .metrics import MetricReport

__all__ = [
    "canonical_dumps",
    "write_json",
    "read_json",
    "read_manifest",
    "write_manifest",
    "GridRecord",
    "read_grids",
    "write_grids",
    "read_proposals",
    "write_proposals",
    "read_fusion_model",
    "write_fusion_model",
    "write_report",
    "read_scores_csv",
    "write_fused_scores_csv",
]

FUSION_FORMAT_VERSION = 1


def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(canonical_dumps(obj), encoding="utf-8")


def read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from None


def _number(ctx: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(f"{ctx}: expected a number, got {value!r}")
    if not math.isfinite(float(value)):
        raise InputError(f"{ctx}: must be finite, got {value!r}")
    return float(value)


def _string(ctx: str, value) -> str:
    if not isinstance(value, str) or not value:
        raise InputError(f"{ctx}: expected a non-empty string, got {value!r}")
    return value


# ---------------------------------------------------------------------------
# Manifest (ground truth)
# ---------------------------------------------------------------------------


def read_manifest(path) -> list[VideoAnnotation]:
    """Read a ground-truth manifest: a JSON array of video records."""
    data = read_json(path)
    if not isinstance(data, list):
        raise InputError(f"{path}: manifest must be a JSON array")
    out: list[VideoAnnotation] = []
    for i, row in enumerate(data):
        ctx = f"{path}: manifest[{i}]"
        if not isinstance(row, dict):
            raise InputError(f"{ctx}: expected an object")
        video = _string(f"{ctx}.video", row.get("video"))
        duration = _number(f"{ctx}.duration_s", row.get("duration_s"))
        modality = Modality.parse(_string(f"{ctx}.modality", row.get("modality")))
        raw_segs = row.get("fake_segments", [])
        if not isinstance(raw_segs, list):
            raise InputError(f"{ctx}.fake_segments: expected an array")
        segs = []
        for j, s in enumerate(raw_segs):
            sctx = f"{ctx}.fake_segments[{j}]"
            if not isinstance(s, dict):
                raise InputError(f"{sctx}: expected an object")
            segs.append(
                Segment(_number(f"{sctx}.start", s.get("start")), _number(f"{sctx}.end", s.get("end")))
            )
        try:
            out.append(VideoAnnotation(video, duration, modality, tuple(segs)))
        except InputError as exc:
            raise InputError(f"{ctx}: {exc}") from None
    return out


def write_manifest(path, annotations: Iterable[VideoAnnotation]) -> None:
    rows = [
        {
            "video": ann.video_id,
            "duration_s": ann.duration,
            "modality": ann.modality.value,
            "fake_segments": [{"start": s.start, "end": s.end} for s in ann.fake_segments],
        }
        for ann in annotations
    ]
    write_json(path, rows)


# ---------------------------------------------------------------------------
# Frame grids
# ---------------------------------------------------------------------------


class GridRecord:
    """One video's frame grid plus its declared score space."""

    __slots__ = ("video_id", "resolution", "score_space", "frames")

    def __init__(self, video_id: str, resolution: float, score_space: ScoreSpace, frames: np.ndarray):
        self.video_id = video_id
        self.resolution = resolution
        self.score_space = score_space
        self.frames = frames  # rows of (logit, start_offset_s, end_offset_s, valid)

    def to_frame_grid(self) -> FrameGrid:
        return FrameGrid(
            self.resolution,
            self.frames[:, 0],
            self.frames[:, 1],
            self.frames[:, 2],
            self.frames[:, 3] != 0.0,
        )


def _parse_grid(ctx: str, obj) -> GridRecord:
    if not isinstance(obj, dict):
        raise InputError(f"{ctx}: expected an object")
    video = _string(f"{ctx}.video", obj.get("video"))
    resolution = _number(f"{ctx}.resolution_s", obj.get("resolution_s"))
    if resolution <= 0.0:
        raise InputError(f"{ctx}.resolution_s: must be > 0, got {resolution}")
    n_frames = obj.get("n_frames")
    if not isinstance(n_frames, int) or isinstance(n_frames, bool) or n_frames < 0:
        raise InputError(f"{ctx}.n_frames: expected a non-negative integer, got {n_frames!r}")
    space = ScoreSpace.parse(_string(f"{ctx}.score_space", obj.get("score_space")))
    rows = obj.get("frames")
    if not isinstance(rows, list):
        raise InputError(f"{ctx}.frames: expected an array")
    if len(rows) != n_frames:
        raise InputError(f"{ctx}: n_frames is {n_frames} but frames has {len(rows)} rows")
    frames = np.zeros((n_frames, 4), dtype=np.float64)
    for i, row in enumerate(rows):
        rctx = f"{ctx}.frames (video {video!r}, frame_index {i})"
        if not isinstance(row, list) or len(row) != 5:
            raise InputError(f"{rctx}: expected [frame_index, logit, start_offset_s, end_offset_s, valid]")
        idx = row[0]
        if idx != i:
            raise InputError(f"{rctx}: frame_index {idx!r} breaks the contiguous 0..{n_frames - 1} order")
        logit = _number(f"{rctx}: logit", row[1])
        so = _number(f"{rctx}: start_offset_s", row[2])
        eo = _number(f"{rctx}: end_offset_s", row[3])
        if so < 0.0:
            raise InputError(f"{rctx}: negative start_offset_s {so}")
        if eo < 0.0:
            raise InputError(f"{rctx}: negative end_offset_s {eo}")
        valid = row[4]
        if not isinstance(valid, (bool, int)) or (isinstance(valid, int) and valid not in (0, 1)):
            raise InputError(f"{rctx}: valid must be a boolean or 0/1, got {valid!r}")
        frames[i] = (logit, so, eo, 1.0 if valid else 0.0)
    return GridRecord(video, resolution, space, frames)


def read_grids(path) -> list[GridRecord]:
    """Read a frame-grid file: one grid object or an array of them."""
    data = read_json(path)
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list):
        raise InputError(f"{path}: expected a grid object or an array of grid objects")
    return [_parse_grid(f"{path}: grid[{i}]", obj) for i, obj in enumerate(data)]


def write_grids(path, grids: Sequence[GridRecord]) -> None:
    docs = []
    for g in grids:
        docs.append(
            {
                "video": g.video_id,
                "resolution_s": g.resolution,
                "n_frames": int(len(g.frames)),
                "score_space": g.score_space.value,
                "frames": [
                    [i, float(r[0]), float(r[1]), float(r[2]), bool(r[3])]
                    for i, r in enumerate(g.frames)
                ],
            }
        )
    write_json(path, docs)


# ---------------------------------------------------------------------------
# Proposal files
# ---------------------------------------------------------------------------


def read_proposals(path) -> tuple[str, str, dict[str, list[Segment]]]:
    """Read a proposal file; returns (model, score_space, videos).

    ``score_space`` stays a raw string because fused files may carry "mixed".
    """
    data = read_json(path)
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a proposal object")
    model = _string(f"{path}: model", data.get("model"))
    space = _string(f"{path}: score_space", data.get("score_space"))
    videos = data.get("videos")
    if not isinstance(videos, dict):
        raise InputError(f"{path}: videos must be an object")
    out: dict[str, list[Segment]] = {}
    for vid, rows in videos.items():
        if not isinstance(rows, list):
            raise InputError(f"{path}: videos[{vid!r}] must be an array")
        segs = []
        for j, row in enumerate(rows):
            ctx = f"{path}: videos[{vid!r}][{j}]"
            if not isinstance(row, dict):
                raise InputError(f"{ctx}: expected an object")
            try:
                segs.append(
                    Segment(
                        _number(f"{ctx}.start", row.get("start")),
                        _number(f"{ctx}.end", row.get("end")),
                        _number(f"{ctx}.score", row.get("score")),
                    )
                )
            except InputError as exc:
                raise InputError(f"{ctx}: {exc}") from None
        out[vid] = segs
    return model, space, out


def write_proposals(path, model: str, score_space: str, videos: Mapping[str, Sequence[Segment]]) -> None:
    doc = {
        "model": model,
        "score_space": score_space,
        "videos": {
            vid: [{"start": s.start, "end": s.end, "score": s.score} for s in videos[vid]]
            for vid in videos
        },
    }
    write_json(path, doc)


# ---------------------------------------------------------------------------
# Fusion models
# ---------------------------------------------------------------------------


def write_fusion_model(path, model: FusionModel) -> None:
    write_json(
        path,
        {
            "format_version": FUSION_FORMAT_VERSION,
            "model_ids": list(model.model_ids),
            "means": [float(v) for v in model.means],
            "stds": [float(v) for v in model.stds],
            "degree": model.degree,
            "coefficients": [float(v) for v in model.coefficients],
            "bias": model.bias,
            "reg_lambda": model.reg_lambda,
        },
    )


def read_fusion_model(path) -> FusionModel:
    data = read_json(path)
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a fusion model object")
    version = data.get("format_version")
    if version != FUSION_FORMAT_VERSION:
        raise InputError(f"{path}: unsupported format_version {version!r}")
    try:
        return FusionModel(
            model_ids=tuple(data["model_ids"]),
            means=np.asarray(data["means"], dtype=np.float64),
            stds=np.asarray(data["stds"], dtype=np.float64),
            degree=int(data["degree"]),
            coefficients=np.asarray(data["coefficients"], dtype=np.float64),
            bias=float(data["bias"]),
            reg_lambda=float(data["reg_lambda"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise InputError(f"{path}: {exc}") from None
        raise InputError(f"{path}: malformed fusion model ({exc!r})") from None


# ---------------------------------------------------------------------------
# Metric reports
# ---------------------------------------------------------------------------


def write_report(path, report: MetricReport) -> None:
    doc = {
        "ap": {repr(t): v for t, v in report.ap.items()},
        "ar": {str(n): v for n, v in report.ar.items()},
        "auc": report.auc,
        "overall": report.overall,
    }
    write_json(path, doc)


# ---------------------------------------------------------------------------
# Score CSVs
# ---------------------------------------------------------------------------


def read_scores_csv(path):
    """Read a per-model score table.

    Columns: ``video``, one column per model, and optionally a trailing
    ``label`` column (1/0 or true/false). Returns
    (video_ids, model_ids, scores[n, m], labels or None).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty CSV") from None
        if not header or header[0] != "video":
            raise InputError(f"{path}: first column must be 'video', got {header[:1]!r}")
        has_labels = bool(header) and header[-1] == "label"
        model_ids = header[1 : -1 if has_labels else len(header)]
        if not model_ids:
            raise InputError(f"{path}: no model score columns between 'video' and 'label'")
        videos: list[str] = []
        scores: list[list[float]] = []
        labels: list[bool] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise InputError(f"{path}:{lineno}: expected {len(header)} columns, got {len(row)}")
            videos.append(row[0])
            try:
                scores.append([float(v) for v in row[1 : 1 + len(model_ids)]])
            except ValueError:
                raise InputError(f"{path}:{lineno}: non-numeric score") from None
            if has_labels:
                raw = row[-1].strip().lower()
                if raw in ("1", "true"):
                    labels.append(True)
                elif raw in ("0", "false"):
                    labels.append(False)
                else:
                    raise InputError(f"{path}:{lineno}: label must be 0/1 or true/false, got {row[-1]!r}")
    mat = np.array(scores, dtype=np.float64) if scores else np.zeros((0, len(model_ids)))
    if not np.all(np.isfinite(mat)):
        raise InputError(f"{path}: scores must be finite")
    return videos, model_ids, mat, (np.array(labels, dtype=bool) if has_labels else None)


def write_fused_scores_csv(path, video_ids: Sequence[str], fused: Sequence[float]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["video", "fused_score"])
        for vid, score in zip(video_ids, fused):
            writer.writerow([vid, repr(float(score))])
