"""Seed regions from a lobar-boundary probability map.

The boundary map is thresholded, inverted inside the lung, and the result
is eroded one Face6 step at a time until exactly five sizeable connected
regions remain. Those regions are the random-walker seeds; their
centroids decide which lobe each one is.

Axis convention: x grows toward the patient's left, z toward the head.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyLung, LungPartitionError, SeedCountNeverFive
from .volume import (
    Connectivity,
    LabelVolume,
    MaskVolume,
    centroid,
    check_same_grid,
    connected_components,
    erode,
)

__all__ = [
    "LobeId",
    "SeedSet",
    "SeedingConfig",
    "boundary_mask",
    "interior_mask",
    "generate_seeds",
    "identify_lobes",
    "compute_seeds",
]


class LobeId(enum.IntEnum):
    LU = 1
    LL = 2
    RU = 3
    RM = 4
    RL = 5


@dataclass(frozen=True)
class SeedingConfig:
    theta: float = 0.5
    max_erosions: int = 64
    min_seed_voxels: int = 50

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        if self.max_erosions < 1:
            raise ValueError("max_erosions must be positive")
        if self.min_seed_voxels < 1:
            raise ValueError("min_seed_voxels must be positive")


@dataclass
class SeedSet:
    """Disjoint seed regions keyed by label.

    ``regions`` maps a label (a :class:`LobeId` for the five-lobe case) to a
    sorted array of flat voxel indices.
    """

    meta: object
    regions: dict
    erosion_iterations: int = 0
    sizes: dict = field(init=False)

    def __post_init__(self):
        regions = {}
        seen = np.zeros(self.meta.size, dtype=bool)
        for key in sorted(self.regions):
            idx = np.unique(np.asarray(self.regions[key], dtype=np.int64))
            if idx.size == 0:
                raise ValueError(f"seed region {key} is empty")
            if idx[0] < 0 or idx[-1] >= self.meta.size:
                raise ValueError(f"seed region {key} has indices outside the grid")
            if seen[idx].any():
                raise ValueError(f"seed region {key} overlaps another region")
            seen[idx] = True
            regions[key] = idx
        self.regions = regions
        self.sizes = {k: int(v.size) for k, v in regions.items()}

    @classmethod
    def from_labels(cls, labels, erosion_iterations=0):
        """Rebuild a seed set from a label volume (0 = no seed)."""
        flat = labels.flat
        keys = [int(k) for k in np.unique(flat) if k]
        as_lobes = set(keys) == {int(k) for k in LobeId}
        regions = {
            (LobeId(k) if as_lobes else k): np.flatnonzero(flat == k) for k in keys
        }
        return cls(labels.meta, regions, erosion_iterations)

    @property
    def labels(self):
        return list(self.regions)

    def label_volume(self):
        out = np.zeros(self.meta.size, dtype=np.uint8)
        for key, idx in self.regions.items():
            out[idx] = int(key)
        return LabelVolume(self.meta, out)

    def split(self, foreground):
        """``(S_f, S_b)`` flat-index arrays for one foreground label."""
        fg = self.regions[foreground]
        rest = [v for k, v in self.regions.items() if k != foreground]
        bg = np.concatenate(rest) if rest else np.empty(0, dtype=np.int64)
        return fg, np.sort(bg)


def boundary_mask(prob, lung, theta=0.5):
    """In-lung voxels whose boundary probability is at least ``theta``."""
    check_same_grid(prob, lung)
    return MaskVolume(lung.meta, lung.data & (prob.data >= theta))


def interior_mask(boundary, lung):
    check_same_grid(boundary, lung)
    return MaskVolume(lung.meta, lung.data & ~boundary.data)


def generate_seeds(interior, lung, cfg=SeedingConfig(), n_regions=5):
    """Erode ``interior`` until exactly ``n_regions`` large components remain.

    Components smaller than ``cfg.min_seed_voxels`` are treated as noise.
    The first (shallowest) erosion depth that yields the target count wins,
    which keeps the seeds as large as possible. With ``n_regions == 5`` the
    regions are keyed by :class:`LobeId`; otherwise by 1..n in size order.

    Raises
    ------
    EmptyLung
        The lung mask has no voxel.
    SeedCountNeverFive
        ``cfg.max_erosions`` exhausted, or the mask vanished, first.
    LungPartitionError
        From :func:`identify_lobes`.
    """
    check_same_grid(interior, lung)
    if not lung.data.any():
        raise EmptyLung("lung mask is empty")
    if np.any(interior.data & ~lung.data):
        raise ValueError("interior mask must lie inside the lung mask")

    current = interior
    best = 0
    for n in range(cfg.max_erosions + 1):
        if n:
            current = erode(current, Connectivity.FACE6)
        if not current.data.any():
            raise SeedCountNeverFive(n, best, n_regions)
        comps, count = connected_components(current, Connectivity.FACE6)
        sizes = np.bincount(comps.reshape(-1), minlength=count + 1)[1:]
        # components are size-sorted, so qualifying ones form a prefix
        n_big = int(np.count_nonzero(sizes >= cfg.min_seed_voxels))
        if abs(n_big - n_regions) < abs(best - n_regions) or (
            abs(n_big - n_regions) == abs(best - n_regions) and n_big > best
        ):
            best = n_big
        if n_big == n_regions:
            flat = comps.reshape(-1)
            regions = [np.flatnonzero(flat == k) for k in range(1, n_big + 1)]
            break
    else:
        raise SeedCountNeverFive(cfg.max_erosions, best, n_regions)

    if n_regions == 5:
        keyed = identify_lobes(regions, lung)
    else:
        keyed = {k + 1: r for k, r in enumerate(regions)}
    return SeedSet(lung.meta, keyed, erosion_iterations=n)


def identify_lobes(components, lung):
    """Name five seed regions by lung side and height.

    The two largest Face6 components of the lung are the two lungs; the one
    with the larger x centroid is the patient's left. Each region goes to the
    side holding most of its voxels. The left must receive two regions
    (LU above LL), the right three (RU, RM, RL from head to foot).
    """
    if len(components) != 5:
        raise ValueError(f"need five regions, got {len(components)}")
    lung_cc, count = connected_components(lung, Connectivity.FACE6)
    if count < 2:
        raise LungPartitionError(f"lung mask has {count} component(s), need two lungs")
    cx1 = centroid(lung_cc, 1)[0]
    cx2 = centroid(lung_cc, 2)[0]
    left_id, right_id = (1, 2) if cx1 > cx2 else (2, 1)

    flat_cc = lung_cc.reshape(-1)
    sides = {"left": [], "right": []}
    for region in components:
        region = np.asarray(region)
        if region.size == 0:
            raise ValueError("seed region is empty")
        n_left = int(np.count_nonzero(flat_cc[region] == left_id))
        n_right = int(np.count_nonzero(flat_cc[region] == right_id))
        if n_left == n_right:
            raise LungPartitionError(
                f"region straddles both lungs equally ({n_left} voxels each)"
            )
        sides["left" if n_left > n_right else "right"].append(region)
    if len(sides["left"]) != 2 or len(sides["right"]) != 3:
        raise LungPartitionError(
            f"expected 2 left / 3 right regions, got "
            f"{len(sides['left'])} / {len(sides['right'])}"
        )

    def z_desc(regs):
        zc = [lung.meta.coords(r)[2].mean() for r in regs]
        return [regs[i] for i in sorted(range(len(regs)), key=lambda i: -zc[i])]

    lu, ll = z_desc(sides["left"])
    ru, rm, rl = z_desc(sides["right"])
    return {LobeId.LU: lu, LobeId.LL: ll, LobeId.RU: ru, LobeId.RM: rm, LobeId.RL: rl}


def compute_seeds(prob, lung, cfg=SeedingConfig()):
    """Threshold, invert and erode in one call."""
    prob.check_probability()
    boundary = boundary_mask(prob, lung, cfg.theta)
    return generate_seeds(interior_mask(boundary, lung), lung, cfg)
