"""Scoring a segmentation and summarising many cases as a cumulative histogram.

Run:  python3 demos/03_metrics_and_histograms.py
"""

import numpy as np

from lobewalker.metrics import avg_surface_distance, cumulative_histogram, jaccard, lobe_scores
from lobewalker.volume import GridMeta, LabelVolume, MaskVolume

meta = GridMeta((20, 20, 20), spacing=(0.8, 0.8, 1.5))
z, y, x = np.indices(meta.shape)

# Two overlapping boxes: Jaccard counts voxels, ASD measures in millimetres
# between the two outer surfaces (x steps are 0.8 mm here).
a = MaskVolume(meta, (x >= 4) & (x < 14) & (y >= 4) & (y < 14) & (z >= 4) & (z < 14))
b = MaskVolume(meta, (x >= 6) & (x < 16) & (y >= 4) & (y < 14) & (z >= 4) & (z < 14))
print(f"Jaccard {jaccard(a, b):.4f}, ASD {avg_surface_distance(a, b):.4f} mm")

# Lobe scores weight each lobe by its true size.
gt = np.zeros(meta.shape, np.uint8)
for lobe in range(1, 6):
    gt[:, :, 4 * (lobe - 1) : 4 * lobe] = lobe
pred = np.roll(gt, 1, axis=2)
pred[:, :, 0] = 1
scores = lobe_scores(LabelVolume(meta, pred), LabelVolume(meta, gt))
print("per-lobe Jaccard:", [round(j, 3) for j in scores.jaccard])
print(f"overall: {scores.overall_jaccard:.4f}")

# Fraction of cases at or below each threshold, as plotted for a test set.
rng = np.random.default_rng(1)
per_case = np.clip(rng.normal(0.88, 0.12, size=150), 0, 1)
hist = cumulative_histogram(per_case, 10, (0.0, 1.0))
for t, f in zip(hist.thresholds, hist.fractions):
    print(f"  <= {t:.1f}: {f:.3f} " + "#" * int(40 * f))
