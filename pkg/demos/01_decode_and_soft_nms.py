"""Decoding a frame grid into proposals, then fusing with Soft-NMS.

A localization head emits, per analysis frame, a fake logit and two
non-negative boundary offsets (seconds from the frame center). Decoding turns
every valid frame into one scored interval; Soft-NMS then reduces the joint
pool from several models, decaying (never deleting) overlapping scores.
"""

import numpy as np

from seglock import (
    FrameGrid,
    ScoreSpace,
    Segment,
    SoftNmsConfig,
    decode_grid,
    soft_nms,
)

# A 1-second clip at 40 ms resolution: 25 frames. Frames 10-12 believe they
# sit inside a fake segment around [0.40, 0.72] and point at its boundaries.
n = 25
resolution = 0.04
centers = (np.arange(n) + 0.5) * resolution

logits = np.full(n, -5.0)
start_offsets = np.zeros(n)
end_offsets = np.zeros(n)
for frame in (10, 11, 12):
    logits[frame] = 2.5
    start_offsets[frame] = centers[frame] - 0.40
    end_offsets[frame] = 0.72 - centers[frame]

grid = FrameGrid(resolution, logits, start_offsets, end_offsets, np.ones(n, bool))
proposals = decode_grid(grid, duration=1.0, space=ScoreSpace.PROBABILITY)

print("decoded proposals (score-sorted):")
for seg in proposals:
    print(f"  [{seg.start:.3f}, {seg.end:.3f}]  score={seg.score:.4f}")
print("note: background frames carry zero offsets -> degenerate -> dropped\n")

# Join proposals from a second, logit-space model. Its raw score 5.3 is far
# above any probability, so it wins the first Soft-NMS pick and suppresses
# the overlapping probability-space duplicates.
other_model = [Segment(0.41, 0.70, 5.3)]
fused = soft_nms(proposals + other_model, SoftNmsConfig(sigma=0.8, pre_threshold=0.2))

print("fused (Gaussian Soft-NMS, sigma=0.8, pre-threshold=0.2):")
for seg in fused:
    print(f"  [{seg.start:.3f}, {seg.end:.3f}]  score={seg.score:.4f}")
