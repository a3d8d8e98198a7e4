import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from seglock import (
    FrameGrid,
    InputError,
    ScoreSpace,
    chunk_max_score,
    decode_grid,
)


def grid_with(frames=None, n=25, resolution=0.04):
    """Background grid with per-frame overrides: frames={idx: (logit, so, eo)}."""
    logits = np.full(n, -6.0)
    so = np.zeros(n)
    eo = np.zeros(n)
    for idx, (logit, s, e) in (frames or {}).items():
        logits[idx], so[idx], eo[idx] = logit, s, e
    return FrameGrid(resolution, logits, so, eo, np.ones(n, bool))


class TestDecodeGrid:
    def test_worked_example(self):
        grid = grid_with({10: (2.0, 0.10, 0.20)})
        out = decode_grid(grid, 1.0, ScoreSpace.PROBABILITY)
        assert len(out) == 1
        seg = out[0]
        assert seg.start == pytest.approx(0.32, abs=1e-12)
        assert seg.end == pytest.approx(0.62, abs=1e-12)
        assert seg.score == pytest.approx(0.8807970779778823, abs=1e-12)

    def test_all_zero_offsets_yield_nothing(self):
        out = decode_grid(grid_with(), 1.0, ScoreSpace.PROBABILITY)
        assert out == []

    def test_logit_space_keeps_raw_scores(self):
        grid = grid_with({3: (5.3, 0.05, 0.05)})
        out = decode_grid(grid, 1.0, ScoreSpace.LOGIT)
        assert len(out) == 1 and out[0].score == 5.3

    def test_invalid_frames_are_skipped(self):
        grid = FrameGrid(0.04, [0.0, 0.0], [0.01, 0.01], [0.01, 0.01], [True, False])
        out = decode_grid(grid, 1.0, ScoreSpace.PROBABILITY)
        assert len(out) == 1

    def test_clamped_to_bounds(self):
        grid = grid_with({0: (1.0, 5.0, 5.0), 24: (1.0, 5.0, 5.0)})
        out = decode_grid(grid, 1.0, ScoreSpace.PROBABILITY)
        assert len(out) == 2
        for seg in out:
            assert 0.0 <= seg.start < seg.end <= 1.0

    def test_rejects_nonpositive_duration(self):
        with pytest.raises(InputError):
            decode_grid(grid_with(), 0.0, ScoreSpace.PROBABILITY)
        with pytest.raises(InputError):
            decode_grid(grid_with(), -1.0, ScoreSpace.PROBABILITY)

    def test_sorted_by_score_then_start_then_frame(self):
        grid = grid_with({
            2: (3.0, 0.02, 0.02),
            5: (1.0, 0.02, 0.02),
            8: (3.0, 0.02, 0.02),
        })
        out = decode_grid(grid, 2.0, ScoreSpace.PROBABILITY)
        assert [round(s.score, 6) for s in out] == sorted(
            [round(s.score, 6) for s in out], reverse=True
        )
        # equal scores: earlier start first
        assert out[0].start < out[1].start
        assert out[2].score < out[0].score

    def test_deterministic(self):
        rng = np.random.default_rng(0)
        n = 60
        grid = FrameGrid(
            0.02,
            rng.normal(0, 2, n),
            rng.uniform(0, 0.3, n),
            rng.uniform(0, 0.3, n),
            rng.random(n) < 0.9,
        )
        a = decode_grid(grid, 1.2, ScoreSpace.PROBABILITY)
        b = decode_grid(grid, 1.2, ScoreSpace.PROBABILITY)
        assert a == b

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    def test_outputs_inside_video_and_positive(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 40))
        duration = float(rng.uniform(0.1, 3.0))
        grid = FrameGrid(
            0.04,
            rng.normal(0, 3, n),
            rng.uniform(0, 1.0, n),
            rng.uniform(0, 1.0, n),
            rng.random(n) < 0.8,
        )
        out = decode_grid(grid, duration, ScoreSpace.PROBABILITY)
        assert len(out) <= int(grid.valid.sum())
        for seg in out:
            assert 0.0 <= seg.start < seg.end <= duration
            assert 0.0 < seg.score < 1.0

    def test_raising_logit_never_lowers_rank(self):
        rng = np.random.default_rng(42)
        n = 20
        logits = rng.normal(0, 1, n)
        so = rng.uniform(0.01, 0.2, n)
        eo = rng.uniform(0.01, 0.2, n)
        valid = np.ones(n, bool)
        base = decode_grid(FrameGrid(0.04, logits, so, eo, valid), 2.0, ScoreSpace.PROBABILITY)
        target_frame = 7
        key = (round((target_frame + 0.5) * 0.04 - so[target_frame], 9),
               round((target_frame + 0.5) * 0.04 + eo[target_frame], 9))

        def rank(segs):
            for i, s in enumerate(segs):
                if (round(s.start, 9), round(s.end, 9)) == key:
                    return i
            raise AssertionError("proposal not found")

        boosted = logits.copy()
        boosted[target_frame] += 2.0
        after = decode_grid(FrameGrid(0.04, boosted, so, eo, valid), 2.0, ScoreSpace.PROBABILITY)
        assert rank(after) <= rank(base)


class TestChunkMaxScore:
    def test_max(self):
        assert chunk_max_score([0.1, 0.9, 0.3]) == 0.9

    def test_single_chunk(self):
        assert chunk_max_score([0.2]) == 0.2

    def test_single_fake_chunk_dominates(self):
        scores = [0.05] * 9 + [0.97]
        assert chunk_max_score(scores) == 0.97

    def test_empty_rejected(self):
        with pytest.raises(InputError):
            chunk_max_score([])

    def test_non_finite_rejected(self):
        with pytest.raises(InputError):
            chunk_max_score([0.1, float("nan")])
