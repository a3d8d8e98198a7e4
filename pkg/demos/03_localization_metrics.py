"""AP@IoU, AR@N, and the weighted overall score.

AP pools predictions across the dataset and integrates the precision-recall
curve with a monotone envelope; AR keeps the top-N proposals per video and
averages recall over the 0.5..0.95 IoU ladder. The overall score weights the
four AP values by 1/8 and the five AR values by 1/10, which equals the mean
of the average AP and average AR, in percent.
"""

from seglock import (
    Modality,
    Segment,
    VideoAnnotation,
    annotations_by_id,
    evaluate_localization,
    format_report_table,
    overall_score,
)

truth = annotations_by_id([
    VideoAnnotation("clip_a", 6.0, Modality.FAKE_AUDIO,
                    (Segment(0.5, 0.9), Segment(3.2, 3.5))),
    VideoAnnotation("clip_b", 4.0, Modality.FAKE_VISUAL, (Segment(1.0, 1.4),)),
    VideoAnnotation("clip_c", 5.0, Modality.REAL),
])

predictions = {
    "clip_a": [
        Segment(0.52, 0.88, 0.95),   # tight hit
        Segment(3.25, 3.60, 0.80),   # sloppy hit
        Segment(5.00, 5.30, 0.40),   # false positive
    ],
    "clip_b": [Segment(1.02, 1.38, 0.90)],
    "clip_c": [Segment(2.00, 2.30, 0.30)],  # FP on a real-only video
}

report = evaluate_localization(predictions, truth)
print(format_report_table(report))
print()
for threshold, value in report.ap.items():
    print(f"AP@{threshold:g} = {value:.4f}")
for n, value in report.ar.items():
    print(f"AR@{n} = {value:.4f}")

# The overall-score arithmetic also reproduces published leaderboard rows:
# average AP 55.85% and average AR 78.55% combine to 67.20.
ap = {t: 0.5585 for t in (0.5, 0.75, 0.9, 0.95)}
ar = {n: 0.7855 for n in (50, 30, 20, 10, 5)}
print(f"\n(55.85% avg AP, 78.55% avg AR) -> overall {overall_score(ap, ar):.2f}")
