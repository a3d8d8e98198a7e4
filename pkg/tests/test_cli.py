import json
import subprocess
import sys

import pytest

from seglock import ScoreSpace, Segment, annotations_by_id, decode_grid
from seglock import fileio
from seglock.cli import main


def run(*argv):
    return main([str(a) for a in argv])


def synth_config(tmp_path, **overrides):
    doc = {"n_videos": 12, "seed": 5, "models": ["model_a", "model_b"]}
    doc.update(overrides)
    tmp_path.mkdir(parents=True, exist_ok=True)
    path = tmp_path / "synth.json"
    path.write_text(json.dumps(doc))
    return path


def build_corpus(tmp_path, **overrides):
    cfg = synth_config(tmp_path, **overrides)
    out = tmp_path / "corpus"
    assert run("synth", "--config", cfg, "--out-dir", out) == 0
    return out


class TestSynthCommand:
    def test_writes_expected_files(self, tmp_path):
        out = build_corpus(tmp_path)
        assert (out / "manifest.json").exists()
        for model in ("model_a", "model_b"):
            assert (out / f"grid_{model}.json").exists()
            assert (out / f"proposals_{model}.json").exists()

    def test_deterministic_and_idempotent(self, tmp_path):
        out1 = build_corpus(tmp_path / "one")
        out2 = build_corpus(tmp_path / "two")
        for name in ("manifest.json", "grid_model_a.json", "proposals_model_b.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_seed_env_override(self, tmp_path, monkeypatch):
        base = build_corpus(tmp_path / "base")
        monkeypatch.setenv("SEGLOCK_SEED", "999")
        other = build_corpus(tmp_path / "override")
        assert (base / "manifest.json").read_bytes() != (other / "manifest.json").read_bytes()

    def test_bad_config_is_schema_error(self, tmp_path):
        cfg = tmp_path / "synth.json"
        cfg.write_text(json.dumps({"models": []}))
        assert run("synth", "--config", cfg, "--out-dir", tmp_path / "x") == 2


class TestDecodeCommand:
    def test_round_trip_matches_library(self, tmp_path):
        corpus = build_corpus(tmp_path)
        out = tmp_path / "props.json"
        assert run("decode", "--grid", corpus / "grid_model_a.json",
                   "--truth", corpus / "manifest.json",
                   "--space", "probability", "--model", "model_a", "--out", out) == 0
        model, space, videos = fileio.read_proposals(out)
        assert model == "model_a" and space == "probability"

        truth = annotations_by_id(fileio.read_manifest(corpus / "manifest.json"))
        for rec in fileio.read_grids(corpus / "grid_model_a.json"):
            expected = decode_grid(rec.to_frame_grid(), truth[rec.video_id].duration,
                                   ScoreSpace.PROBABILITY)
            assert videos[rec.video_id] == expected

    def test_space_mismatch_rejected(self, tmp_path):
        corpus = build_corpus(tmp_path)
        assert run("decode", "--grid", corpus / "grid_model_a.json",
                   "--truth", corpus / "manifest.json",
                   "--space", "logit", "--out", tmp_path / "x.json") == 2

    def test_negative_offset_exit_code_and_message(self, tmp_path, capsys):
        corpus = build_corpus(tmp_path)
        doc = json.loads((corpus / "grid_model_a.json").read_text())
        doc[0]["frames"][2][2] = -0.5
        bad = tmp_path / "bad_grid.json"
        bad.write_text(json.dumps(doc))
        assert run("decode", "--grid", bad, "--truth", corpus / "manifest.json",
                   "--out", tmp_path / "x.json") == 2
        assert "frame_index 2" in capsys.readouterr().err

    def test_missing_file_is_input_error(self, tmp_path):
        assert run("decode", "--grid", tmp_path / "nope.json",
                   "--truth", tmp_path / "nope2.json", "--out", tmp_path / "x.json") == 2


class TestFuseCommand:
    def test_single_file_equals_library_soft_nms(self, tmp_path):
        from seglock import soft_nms

        corpus = build_corpus(tmp_path)
        fused_path = tmp_path / "fused.json"
        assert run("fuse", "--proposals", corpus / "proposals_model_a.json",
                   "--out", fused_path) == 0
        model, space, fused = fileio.read_proposals(fused_path)
        assert model == "fusion" and space == "probability"
        _, _, raw = fileio.read_proposals(corpus / "proposals_model_a.json")
        for vid, segs in raw.items():
            assert fused[vid] == soft_nms(segs)

    def test_joint_fusion_pools_models(self, tmp_path):
        corpus = build_corpus(tmp_path)
        fused_path = tmp_path / "fused.json"
        assert run("fuse", "--proposals",
                   corpus / "proposals_model_a.json", corpus / "proposals_model_b.json",
                   "--sigma", "0.8", "--pre-threshold", "0.2",
                   "--out", fused_path) == 0
        _, _, fused = fileio.read_proposals(fused_path)
        _, _, a = fileio.read_proposals(corpus / "proposals_model_a.json")
        _, _, b = fileio.read_proposals(corpus / "proposals_model_b.json")
        for vid in fused:
            pool_size = len([s for s in a.get(vid, []) + b.get(vid, []) if s.score >= 0.2])
            assert len(fused[vid]) == pool_size


class TestEvalCommand:
    def test_perfect_pipeline_scores_hundred(self, tmp_path, capsys):
        corpus = build_corpus(tmp_path)
        props = tmp_path / "props.json"
        fused = tmp_path / "fused.json"
        report = tmp_path / "report.json"
        assert run("decode", "--grid", corpus / "grid_model_a.json",
                   "--truth", corpus / "manifest.json", "--out", props) == 0
        assert run("fuse", "--proposals", props, "--out", fused) == 0
        assert run("eval", "--proposals", fused, "--truth", corpus / "manifest.json",
                   "--report", report, "--table") == 0
        doc = json.loads(report.read_text())
        assert doc["overall"] == pytest.approx(100.0, abs=1e-9)
        table = capsys.readouterr().out
        assert "100.00" in table and "AP@0.95" in table

    def test_zero_ground_truth_exit_three(self, tmp_path):
        manifest = tmp_path / "manifest.json"
        manifest.write_text(json.dumps(
            [{"video": "v", "duration_s": 2.0, "modality": "real", "fake_segments": []}]
        ))
        props = tmp_path / "props.json"
        fileio.write_proposals(props, "m", "probability", {"v": [Segment(0, 1, 0.5)]})
        assert run("eval", "--proposals", props, "--truth", manifest,
                   "--report", tmp_path / "r.json") == 3


class TestFusionCommands:
    def write_scores(self, path, rows, with_label=True):
        header = "video,m1,m2" + (",label" if with_label else "")
        lines = [header]
        for i, (a, b, y) in enumerate(rows):
            lines.append(f"v{i},{a},{b}" + (f",{int(y)}" if with_label else ""))
        path.write_text("\n".join(lines) + "\n")

    def test_train_then_score(self, tmp_path, capsys):
        from seglock.oracle import synth_interaction_corpus

        scores, labels = synth_interaction_corpus(800, seed=3)
        rows = [(s[0], s[1], y) for s, y in zip(scores, labels)]
        train_csv, val_csv, test_csv = (tmp_path / n for n in ("tr.csv", "va.csv", "te.csv"))
        self.write_scores(train_csv, rows[:400])
        self.write_scores(val_csv, rows[400:600])
        self.write_scores(test_csv, rows[600:])
        fusion = tmp_path / "fusion.json"
        out_csv = tmp_path / "scored.csv"
        assert run("train-fusion", "--scores", train_csv, val_csv, "--out", fusion) == 0
        assert run("score", "--fusion", fusion, "--scores", test_csv,
                   "--out", out_csv, "--auc") == 0
        printed = capsys.readouterr().out
        assert printed.startswith("AUC ")
        assert float(printed.split()[1]) >= 0.95
        assert out_csv.read_text().startswith("video,fused_score\n")

    def test_score_requires_matching_columns(self, tmp_path):
        rows = [(0.1, 0.2, True), (0.3, 0.1, False), (0.9, 0.8, True), (0.2, 0.9, False)]
        train_csv = tmp_path / "tr.csv"
        self.write_scores(train_csv, rows)
        fusion = tmp_path / "fusion.json"
        assert run("train-fusion", "--scores", train_csv, train_csv, "--out", fusion) == 0
        bad_csv = tmp_path / "bad.csv"
        bad_csv.write_text("video,other\nv0,0.5\n")
        assert run("score", "--fusion", fusion, "--scores", bad_csv,
                   "--out", tmp_path / "o.csv") == 2

    def test_auc_without_labels_rejected(self, tmp_path):
        rows = [(0.1, 0.2, True), (0.3, 0.1, False), (0.9, 0.8, True), (0.2, 0.9, False)]
        train_csv = tmp_path / "tr.csv"
        self.write_scores(train_csv, rows)
        fusion = tmp_path / "fusion.json"
        assert run("train-fusion", "--scores", train_csv, train_csv, "--out", fusion) == 0
        test_csv = tmp_path / "te.csv"
        self.write_scores(test_csv, rows, with_label=False)
        assert run("score", "--fusion", fusion, "--scores", test_csv,
                   "--out", tmp_path / "o.csv", "--auc") == 2


class TestThreadInvariance:
    def test_byte_identical_outputs_across_threads(self, tmp_path):
        digests = {}
        for threads in (1, 4):
            base = tmp_path / f"t{threads}"
            cfg = synth_config(base_dir(base), jitter_std=0.05, noise_rate=0.4, miss_rate=0.1)
            corpus = base / "corpus"
            run("synth", "--config", cfg, "--out-dir", corpus, "--threads", threads)
            props = base / "props.json"
            fused = base / "fused.json"
            report = base / "report.json"
            run("decode", "--grid", corpus / "grid_model_a.json",
                "--truth", corpus / "manifest.json", "--out", props,
                "--threads", threads)
            run("fuse", "--proposals", props, "--out", fused, "--threads", threads)
            run("eval", "--proposals", fused, "--truth", corpus / "manifest.json",
                "--report", report)
            digests[threads] = tuple(
                p.read_bytes() for p in (corpus / "manifest.json", props, fused, report)
            )
        assert digests[1] == digests[4]


def base_dir(path):
    path.mkdir(parents=True, exist_ok=True)
    return path


class TestEntryPoint:
    def test_module_invocation(self, tmp_path):
        cfg = synth_config(tmp_path, n_videos=3)
        proc = subprocess.run(
            [sys.executable, "-m", "seglock.cli", "synth",
             "--config", str(cfg), "--out-dir", str(tmp_path / "c")],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert (tmp_path / "c" / "manifest.json").exists()
