"""Synthetic two-lung, five-lobe phantoms with a known answer.

Each lung is an axis-aligned ellipsoid; the right one (small x) is cut into
RU/RM/RL by two wavy, tilted sheets, the left one into LU/LL by one. The
boundary probability is a Gaussian ridge around the discrete lobe
interfaces, which can be punched with disc-shaped holes (incomplete
fissures) and perturbed by additive Gaussian noise.

Randomness comes only from ``numpy.random.Generator(PCG64(rng_seed))``,
so a config fully determines the output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DimsTooSmall
from .seeding import LobeId
from .volume import GridMeta, LabelVolume, MaskVolume, ScalarVolume

__all__ = ["PhantomConfig", "PhantomCase", "generate", "splitting_surfaces"]

MIN_DIM = 32


@dataclass(frozen=True)
class PhantomConfig:
    dims: tuple = (64, 64, 64)
    spacing: tuple = (1.0, 1.0, 1.0)
    ridge_sigma: float = 1.5
    gap_frac: float = 0.0
    noise_sigma: float = 0.0
    rng_seed: int = 0
    gap_radius: float = 4.0  # mm, radius of one fissure hole

    def __post_init__(self):
        if not 0.0 <= self.gap_frac <= 1.0:
            raise ValueError("gap_frac must lie in [0, 1]")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.ridge_sigma <= 0:
            raise ValueError("ridge_sigma must be > 0")
        if self.gap_radius <= 0:
            raise ValueError("gap_radius must be > 0")


@dataclass
class PhantomCase:
    prob: ScalarVolume
    lung: MaskVolume
    gt: LabelVolume
    fissure_voxel_count: int
    zeroed_voxel_count: int


def _layout(meta):
    """Lung centres and semi-axes in mm, as ``{side: (centre, axes)}``."""
    ext = [(n - 1) * s for n, s in zip(meta.dims, meta.spacing)]
    lx, ly, lz = ext
    axes = (0.2 * lx, 0.4 * ly, 0.45 * lz)
    return {
        "right": ((0.27 * lx, 0.5 * ly, 0.5 * lz), axes),
        "left": ((0.73 * lx, 0.5 * ly, 0.5 * lz), axes),
    }


def splitting_surfaces(meta):
    """Height functions ``z = f(x, y)`` (mm) of the three inter-lobe sheets.

    Returns a dict with keys ``"left"``, ``"right_upper"``, ``"right_lower"``.
    """
    lay = _layout(meta)
    ly = (meta.dims[1] - 1) * meta.spacing[1]
    lz = (meta.dims[2] - 1) * meta.spacing[2]

    def sheet(side, offset, tilt, amp, phase):
        (cx, cy, cz), (ax, _, _) = lay[side]

        def f(x, y):
            return (
                cz
                + offset
                + tilt * (y - cy)
                + 0.1 * (x - cx)
                + amp * np.sin(2 * np.pi * (y - cy) / (0.9 * ly) + phase)
                + 0.5 * amp * np.cos(np.pi * (x - cx) / (2 * ax))
            )

        return f

    az = lay["right"][1][2]
    # +-0.226 of the semi-axis cuts an ellipsoid into three equal volumes
    return {
        "left": sheet("left", 0.0, 0.25, 0.04 * lz, 0.0),
        "right_upper": sheet("right", 0.226 * az, 0.15, 0.03 * lz, 1.0),
        "right_lower": sheet("right", -0.226 * az, 0.15, 0.03 * lz, 2.0),
    }


def _ground_truth(meta):
    z, y, x = np.indices(meta.shape, dtype=np.float64)
    sx, sy, sz = meta.spacing
    X, Y, Z = x * sx, y * sy, z * sz
    lay = _layout(meta)
    surf = splitting_surfaces(meta)
    gt = np.zeros(meta.shape, dtype=np.uint8)

    def inside(side):
        (cx, cy, cz), (ax, ay, az) = lay[side]
        return ((X - cx) / ax) ** 2 + ((Y - cy) / ay) ** 2 + ((Z - cz) / az) ** 2 <= 1.0

    left = inside("left")
    above = Z >= surf["left"](X, Y)
    gt[left & above] = LobeId.LU
    gt[left & ~above] = LobeId.LL

    right = inside("right")
    upper = Z >= surf["right_upper"](X, Y)
    lower = Z < surf["right_lower"](X, Y)
    gt[right & upper] = LobeId.RU
    gt[right & ~upper & ~lower] = LobeId.RM
    gt[right & lower] = LobeId.RL
    return gt


def _interfaces(gt):
    """Face6 pairs of in-lung voxels with different labels.

    Returns one ``np.nonzero``-style ``(z, y, x)`` index tuple per array
    axis, locating the lower voxel of every such pair along that axis.
    """
    out = []
    for axis in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        a, b = gt[tuple(lo)], gt[tuple(hi)]
        out.append(np.nonzero((a > 0) & (b > 0) & (a != b)))
    return out


def _pick_gaps(fissure, meta, frac, radius, rng):
    """Zero whole disc patches of fissure voxels until ``frac`` of them are gone."""
    n = fissure.size
    zeroed = np.zeros(n, dtype=bool)
    target = frac * n
    if target <= 0:
        return zeroed
    x, y, z = meta.coords(fissure)
    pts = np.stack([x * meta.spacing[0], y * meta.spacing[1], z * meta.spacing[2]], axis=1)
    # prefer non-overlapping discs so holes keep a bounded size
    free = np.ones(n, dtype=bool)
    while zeroed.sum() < target:
        cand = np.flatnonzero(~zeroed & free)
        if cand.size == 0:
            cand = np.flatnonzero(~zeroed)
        c = pts[cand[rng.integers(cand.size)]]
        d2 = ((pts - c) ** 2).sum(axis=1)
        zeroed |= d2 <= radius**2
        free &= d2 > (2 * radius) ** 2
    return zeroed


def generate(cfg=PhantomConfig()):
    """Build a :class:`PhantomCase` from ``cfg``.

    Raises
    ------
    DimsTooSmall
        Any dimension below 32 voxels.
    """
    if any(int(d) < MIN_DIM for d in cfg.dims):
        raise DimsTooSmall(f"phantom dims must be >= {MIN_DIM} each, got {tuple(cfg.dims)}")
    meta = GridMeta(cfg.dims, cfg.spacing)
    rng = np.random.Generator(np.random.PCG64(cfg.rng_seed))
    gt = _ground_truth(meta)
    lung = gt > 0

    pairs = _interfaces(gt)
    on_fissure = np.zeros(meta.shape, dtype=bool)
    for axis, lo in enumerate(pairs):
        on_fissure[lo] = True
        hi = list(lo)
        hi[axis] = hi[axis] + 1
        on_fissure[tuple(hi)] = True
    fissure = np.flatnonzero(on_fissure)
    zeroed = np.zeros(meta.size, dtype=bool)
    zeroed[fissure] = _pick_gaps(fissure, meta, cfg.gap_frac, cfg.gap_radius, rng)
    zeroed = zeroed.reshape(meta.shape)

    # ridge centre = midpoints of the surviving interface pairs, found on a
    # half-spacing grid where voxel centres sit at even indices
    fine = np.zeros(tuple(2 * n - 1 for n in meta.shape), dtype=bool)
    for axis, lo in enumerate(pairs):
        hi = list(lo)
        hi[axis] = hi[axis] + 1
        keep = ~zeroed[lo] & ~zeroed[tuple(hi)]
        mid = [2 * c[keep] for c in lo]
        mid[axis] = mid[axis] + 1
        fine[tuple(mid)] = True

    if fine.any():
        half = tuple(s / 2 for s in meta.sampling)
        dist = ndimage.distance_transform_edt(~fine, sampling=half)[::2, ::2, ::2]
        prob = np.exp(-(dist**2) / (2 * cfg.ridge_sigma**2))
    else:
        prob = np.zeros(meta.shape)
    if cfg.noise_sigma > 0:
        prob = prob + rng.normal(0.0, cfg.noise_sigma, size=meta.shape)
    prob = np.where(lung, np.clip(prob, 0.0, 1.0), 0.0)

    return PhantomCase(
        prob=ScalarVolume(meta, prob),
        lung=MaskVolume(meta, lung),
        gt=LabelVolume(meta, gt),
        fissure_voxel_count=int(fissure.size),
        zeroed_voxel_count=int(np.count_nonzero(zeroed)),
    )
