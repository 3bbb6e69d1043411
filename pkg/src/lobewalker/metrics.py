"""Overlap and surface-distance scores for lobe label volumes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyMask, EmptyScores
from .seeding import LobeId
from .volume import MaskVolume, check_same_grid, distance_transform, surface_mask

__all__ = [
    "LobeScores",
    "CumulativeHistogram",
    "jaccard",
    "lobe_scores",
    "avg_surface_distance",
    "cumulative_histogram",
]


@dataclass
class LobeScores:
    """Per-lobe Jaccard and ASD, in LobeId order, plus the weighted overall."""

    jaccard: list
    asd_mm: list
    overall_jaccard: float
    gt_lobe_voxels: list


@dataclass
class CumulativeHistogram:
    thresholds: np.ndarray
    fractions: np.ndarray


def jaccard(pred, gt):
    """Intersection over union; 1.0 when both masks are empty."""
    check_same_grid(pred, gt)
    union = np.count_nonzero(pred.data | gt.data)
    if union == 0:
        return 1.0
    return np.count_nonzero(pred.data & gt.data) / union


def avg_surface_distance(pred, gt, meta=None):
    """Symmetric mean distance (mm) between the Face6 surfaces of two masks.

    Every surface voxel of one mask contributes its exact distance to the
    nearest surface voxel of the other; the result is the mean over both
    surfaces pooled together.
    """
    check_same_grid(pred, gt)
    if meta is not None and meta != pred.meta:
        check_same_grid(pred, MaskVolume(meta, pred.data))
    if not pred.data.any() or not gt.data.any():
        raise EmptyMask("surface distance needs two non-empty masks")
    s_pred = surface_mask(pred)
    s_gt = surface_mask(gt)
    to_gt = distance_transform(s_gt).data[s_pred.data]
    to_pred = distance_transform(s_pred).data[s_gt.data]
    return float((to_gt.sum() + to_pred.sum()) / (to_gt.size + to_pred.size))


def lobe_scores(pred, gt):
    """Score a predicted lobe labelling against ground truth.

    A lobe absent from both volumes scores J = 1 and ASD = 0 with zero weight.
    A lobe present in only one of them has an undefined ASD, reported as NaN.
    The overall Jaccard weights each lobe by its ground-truth voxel count.
    """
    check_same_grid(pred, gt)
    jac, asd, counts = [], [], []
    for lobe in LobeId:
        p = MaskVolume(pred.meta, pred.data == lobe)
        g = MaskVolume(gt.meta, gt.data == lobe)
        jac.append(float(jaccard(p, g)))
        counts.append(g.count())
        has_p, has_g = p.data.any(), g.data.any()
        if has_p and has_g:
            asd.append(avg_surface_distance(p, g))
        else:
            asd.append(0.0 if not (has_p or has_g) else float("nan"))
    total = sum(counts)
    if total:
        overall = sum(n * j for n, j in zip(counts, jac)) / total
    else:
        overall = 1.0
    return LobeScores(jac, asd, float(overall), counts)


def cumulative_histogram(scores, n_bins, value_range):
    """Fraction of scores at or below each bin's right edge."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    if scores.size == 0:
        raise EmptyScores("no scores to tabulate")
    lo, hi = value_range
    if n_bins < 1 or not lo < hi:
        raise ValueError("need n_bins >= 1 and lo < hi")
    edges = np.linspace(lo, hi, n_bins + 1)[1:]
    fractions = np.searchsorted(np.sort(scores), edges, side="right") / scores.size
    return CumulativeHistogram(edges, fractions)
