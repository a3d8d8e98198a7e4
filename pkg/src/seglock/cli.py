"""Command-line surface: decode, fuse, eval, train-fusion, score, synth.

Every command is deterministic and idempotent for identical inputs and
flags; ``--threads`` caps parallelism without changing any output byte.
Exit codes: 0 success, 2 schema/input error, 3 metric-undefined error.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import fileio
from .core import InputError, MetricUndefinedError, Modality, ScoreSpace, annotations_by_id
from .decode import decode_grid
from .fuse import SoftNmsConfig, apply_fusion, fit_fusion, soft_nms
from .metrics import auc, evaluate_localization, format_report_table
from .oracle import SynthConfig, grid_from_segments, synth_predictions, synth_truth

__all__ = ["main"]

SEED_ENV_VAR = "SEGLOCK_SEED"


def _map_ordered(fn, items, threads: int):
    """Apply fn over items preserving order; threads only cap parallelism."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _add_threads(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--threads", type=int, default=1, help="max worker threads (default 1)")


def _cmd_decode(args) -> int:
    truth = annotations_by_id(fileio.read_manifest(args.truth))
    grids = fileio.read_grids(args.grid)
    if not grids:
        raise InputError(f"{args.grid}: no grids found")
    spaces = {g.score_space for g in grids}
    if len(spaces) > 1:
        raise InputError(f"{args.grid}: grids mix score spaces {sorted(s.value for s in spaces)}")
    space = spaces.pop()
    if args.space is not None and ScoreSpace.parse(args.space) is not space:
        raise InputError(
            f"--space {args.space!r} conflicts with the grid file's score_space {space.value!r}"
        )

    def one(record):
        if record.video_id not in truth:
            raise InputError(f"grid video {record.video_id!r} is absent from the manifest")
        duration = truth[record.video_id].duration
        return record.video_id, decode_grid(record.to_frame_grid(), duration, space)

    pairs = _map_ordered(one, grids, args.threads)
    seen = set()
    for vid, _ in pairs:
        if vid in seen:
            raise InputError(f"{args.grid}: duplicate grid for video {vid!r}")
        seen.add(vid)
    model = args.model if args.model else Path(args.grid).stem
    fileio.write_proposals(args.out, model, space.value, dict(pairs))
    return 0


def _cmd_fuse(args) -> int:
    cfg = SoftNmsConfig(sigma=args.sigma, pre_threshold=args.pre_threshold, max_output=args.max_output)
    pooled: dict[str, list] = {}
    spaces = []
    for path in args.proposals:
        _, space, videos = fileio.read_proposals(path)
        spaces.append(space)
        for vid, segs in videos.items():
            pooled.setdefault(vid, []).extend(segs)
    score_space = spaces[0] if len(set(spaces)) == 1 else "mixed"

    vids = sorted(pooled)
    fused = _map_ordered(lambda vid: soft_nms(pooled[vid], cfg), vids, args.threads)
    fileio.write_proposals(args.out, "fusion", score_space, dict(zip(vids, fused)))
    return 0


def _cmd_eval(args) -> int:
    truth = annotations_by_id(fileio.read_manifest(args.truth))
    _, _, predictions = fileio.read_proposals(args.proposals)
    report = evaluate_localization(predictions, truth)
    if args.report:
        fileio.write_report(args.report, report)
    if args.table:
        print(format_report_table(report))
    return 0


def _cmd_train_fusion(args) -> int:
    train_path, val_path = args.scores
    _, train_ids, train_scores, train_labels = fileio.read_scores_csv(train_path)
    _, val_ids, val_scores, val_labels = fileio.read_scores_csv(val_path)
    if train_labels is None:
        raise InputError(f"{train_path}: training CSV must carry a 'label' column")
    if val_labels is None:
        raise InputError(f"{val_path}: validation CSV must carry a 'label' column")
    if train_ids != val_ids:
        raise InputError(
            f"model columns differ between {train_path} ({train_ids}) and {val_path} ({val_ids})"
        )
    model = fit_fusion(
        train_scores, train_labels, val_scores, val_labels,
        degree=args.degree, model_ids=train_ids,
    )
    fileio.write_fusion_model(args.out, model)
    return 0


def _cmd_score(args) -> int:
    model = fileio.read_fusion_model(args.fusion)
    videos, model_ids, scores, labels = fileio.read_scores_csv(args.scores)
    if tuple(model_ids) != model.model_ids:
        raise InputError(
            f"{args.scores}: model columns {model_ids} do not match the fusion model's "
            f"{list(model.model_ids)}"
        )
    fused = [apply_fusion(model, row) for row in scores]
    fileio.write_fused_scores_csv(args.out, videos, fused)
    if args.auc:
        if labels is None:
            raise InputError(f"{args.scores}: --auc requires a 'label' column")
        print(f"AUC {auc(np.asarray(fused), labels):.6f}")
    return 0


def _synth_config_from_json(doc: dict) -> tuple[SynthConfig, dict]:
    if not isinstance(doc, dict):
        raise InputError("synth config must be a JSON object")
    mix_raw = doc.get("modality_mix")
    if mix_raw is None:
        mix = None
    else:
        if not isinstance(mix_raw, dict):
            raise InputError("modality_mix must be an object")
        mix = {Modality.parse(k): float(v) for k, v in mix_raw.items()}
    cfg_kwargs = {}
    for key in ("n_videos", "seed"):
        if key in doc:
            cfg_kwargs[key] = int(doc[key])
    for key in ("segment_duration_mean", "segment_min_duration"):
        if key in doc:
            cfg_kwargs[key] = float(doc[key])
    for key in ("duration_range", "segments_per_video"):
        if key in doc:
            pair = doc[key]
            if not (isinstance(pair, list) and len(pair) == 2):
                raise InputError(f"{key} must be a two-element array")
            cfg_kwargs[key] = tuple(pair)
    if mix is not None:
        cfg_kwargs["modality_mix"] = mix
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        try:
            cfg_kwargs["seed"] = int(env_seed)
        except ValueError:
            raise InputError(f"{SEED_ENV_VAR}={env_seed!r} is not an integer") from None
    extras = {
        "models": doc.get("models", ["model_a"]),
        "jitter_std": float(doc.get("jitter_std", 0.0)),
        "noise_rate": float(doc.get("noise_rate", 0.0)),
        "miss_rate": float(doc.get("miss_rate", 0.0)),
        "resolution_s": float(doc.get("resolution_s", 0.04)),
        "score_space": ScoreSpace.parse(doc.get("score_space", "probability")),
    }
    if not (isinstance(extras["models"], list) and extras["models"]
            and all(isinstance(m, str) for m in extras["models"])):
        raise InputError("models must be a non-empty array of strings")
    if extras["resolution_s"] <= 0.0:
        raise InputError(f"resolution_s must be > 0, got {extras['resolution_s']}")
    return SynthConfig(**cfg_kwargs), extras


def _cmd_synth(args) -> int:
    cfg, extras = _synth_config_from_json(fileio.read_json(args.config))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    truth = synth_truth(cfg)
    fileio.write_manifest(out_dir / "manifest.json", truth)
    durations = {ann.video_id: ann.duration for ann in truth}

    predictions = synth_predictions(
        truth,
        jitter_std=extras["jitter_std"],
        noise_rate=extras["noise_rate"],
        miss_rate=extras["miss_rate"],
        seed=cfg.seed,
        model_ids=extras["models"],
    )
    space = extras["score_space"]
    resolution = extras["resolution_s"]
    for model in extras["models"]:
        videos = predictions[model]
        vids = [ann.video_id for ann in truth]

        def encode(vid, videos=videos):
            grid = grid_from_segments(videos[vid], durations[vid], resolution, space)
            return fileio.GridRecord(
                vid,
                resolution,
                space,
                np.column_stack(
                    [grid.scores, grid.start_offsets, grid.end_offsets, grid.valid.astype(np.float64)]
                ),
            )

        records = _map_ordered(encode, vids, args.threads)
        fileio.write_grids(out_dir / f"grid_{model}.json", records)
        fileio.write_proposals(out_dir / f"proposals_{model}.json", model, space.value, videos)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seglock",
        description="Segment decoding, fusion, score fusion, and localization scoring.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decode", help="decode frame grids into segment proposals")
    p.add_argument("--grid", required=True, help="frame-grid JSON file")
    p.add_argument("--truth", required=True, help="ground-truth manifest (for durations)")
    p.add_argument("--space", choices=["probability", "logit"], default=None,
                   help="expected score space; must match the grid file when given")
    p.add_argument("--out", required=True, help="output proposal JSON")
    p.add_argument("--model", default=None, help="model name for the output (default: grid file stem)")
    _add_threads(p)
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("fuse", help="joint Soft-NMS over proposal files")
    p.add_argument("--proposals", required=True, nargs="+", help="input proposal JSON files")
    p.add_argument("--sigma", type=float, default=0.8, help="Gaussian decay std (default 0.8)")
    p.add_argument("--pre-threshold", type=float, default=0.2,
                   help="drop proposals scoring below this before suppression (default 0.2)")
    p.add_argument("--max-output", type=int, default=None, help="cap on fused proposals per video")
    p.add_argument("--out", required=True, help="output proposal JSON")
    _add_threads(p)
    p.set_defaults(func=_cmd_fuse)

    p = sub.add_parser("eval", help="score proposals against a manifest")
    p.add_argument("--proposals", required=True, help="proposal JSON (typically fused)")
    p.add_argument("--truth", required=True, help="ground-truth manifest")
    p.add_argument("--report", default=None, help="write the metric report JSON here")
    p.add_argument("--table", action="store_true", help="print an aligned metric table")
    _add_threads(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("train-fusion", help="fit the polynomial logistic score fuser")
    p.add_argument("--scores", required=True, nargs=2, metavar=("TRAIN_CSV", "VAL_CSV"),
                   help="training and validation score CSVs (video, <models...>, label)")
    p.add_argument("--degree", type=int, default=2, help="polynomial degree (default 2)")
    p.add_argument("--out", required=True, help="output fusion model JSON")
    p.set_defaults(func=_cmd_train_fusion)

    p = sub.add_parser("score", help="apply a fitted fusion model to score CSVs")
    p.add_argument("--fusion", required=True, help="fusion model JSON")
    p.add_argument("--scores", required=True, help="score CSV (video, <models...>[, label])")
    p.add_argument("--out", required=True, help="output CSV of fused per-video probabilities")
    p.add_argument("--auc", action="store_true", help="print AUC (requires a label column)")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("synth", help="write a reproducible synthetic corpus")
    p.add_argument("--config", required=True, help="synth config JSON")
    p.add_argument("--out-dir", required=True, help="output directory")
    _add_threads(p)
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MetricUndefinedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
