"""3D grid containers and the binary morphology they need.

Arrays are stored C-contiguous with shape ``(nz, ny, nx)`` so that
``data.ravel()`` is the x-fastest flat layout used on disk
(``index = x + nx * (y + ny * z)``). Public coordinates are always given
in ``(x, y, z)`` order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import EmptyMask, MetaMismatch, UnknownLabel

__all__ = [
    "GridMeta",
    "ScalarVolume",
    "MaskVolume",
    "ByteVolume",
    "LabelVolume",
    "HUVolume",
    "Connectivity",
    "erode",
    "connected_components",
    "centroid",
    "distance_transform",
    "surface_mask",
    "surface_voxels",
    "check_same_grid",
]


@dataclass(frozen=True)
class GridMeta:
    """Voxel counts ``(nx, ny, nz)`` and spacing ``(sx, sy, sz)`` in mm."""

    dims: tuple
    spacing: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        spacing = tuple(float(s) for s in self.spacing)
        if len(dims) != 3 or len(spacing) != 3:
            raise ValueError("GridMeta needs exactly three dims and three spacings")
        if any(d < 1 for d in dims):
            raise ValueError(f"dims must be >= 1, got {dims}")
        if not all(math.isfinite(s) and s > 0 for s in spacing):
            raise ValueError(f"spacing must be finite and > 0, got {spacing}")
        if math.prod(dims) > np.iinfo(np.intp).max:
            raise ValueError(f"grid {dims} exceeds the addressable voxel count")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "spacing", spacing)

    @property
    def shape(self):
        """Array shape ``(nz, ny, nx)``."""
        nx, ny, nz = self.dims
        return (nz, ny, nx)

    @property
    def sampling(self):
        """Spacing in array-axis order, for scipy.ndimage."""
        sx, sy, sz = self.spacing
        return (sz, sy, sx)

    @property
    def size(self):
        return math.prod(self.dims)

    def flat_index(self, x, y, z):
        nx, ny, _ = self.dims
        return np.asarray(x) + nx * (np.asarray(y) + ny * np.asarray(z))

    def coords(self, flat):
        """Inverse of ``flat_index``; returns ``(x, y, z)`` integer arrays."""
        z, y, x = np.unravel_index(np.asarray(flat), self.shape)
        return x, y, z


class _Volume:
    dtype = None

    def __init__(self, meta, data):
        if not isinstance(meta, GridMeta):
            meta = GridMeta(*meta)
        arr = np.asarray(data)
        if arr.size != meta.size:
            raise ValueError(f"data has {arr.size} elements, grid {meta.dims} needs {meta.size}")
        # always copy: volumes are immutable and must not alias caller buffers
        arr = np.array(arr.reshape(meta.shape), dtype=self.dtype, order="C")
        arr.flags.writeable = False
        self.meta = meta
        self.data = arr

    @property
    def flat(self):
        return self.data.reshape(-1)

    def __eq__(self, other):
        return (
            type(self) is type(other)
            and self.meta == other.meta
            and np.array_equal(self.data, other.data)
        )

    def __repr__(self):
        return f"{type(self).__name__}(dims={self.meta.dims}, spacing={self.meta.spacing})"


class ScalarVolume(_Volume):
    dtype = np.float64

    def check_probability(self):
        d = self.data
        if not np.all(np.isfinite(d)) or d.min(initial=0.0) < 0.0 or d.max(initial=0.0) > 1.0:
            raise ValueError("probability volume must hold finite values in [0, 1]")
        return self


class MaskVolume(_Volume):
    dtype = np.bool_

    def count(self):
        return int(np.count_nonzero(self.data))


class ByteVolume(_Volume):
    """Unsigned 8-bit image, e.g. one display window of a CT volume."""

    dtype = np.uint8


class LabelVolume(ByteVolume):
    """Lobe labels: 0 outside the lung, 1..5 = LU, LL, RU, RM, RL."""

    def mask(self, label):
        return MaskVolume(self.meta, self.data == label)


class HUVolume(_Volume):
    """CT attenuation in Hounsfield units."""

    dtype = np.int16


def check_same_grid(*volumes):
    first = volumes[0].meta
    for v in volumes[1:]:
        if v.meta != first:
            raise MetaMismatch(f"grid {v.meta} differs from {first}")
    return first


class Connectivity(enum.Enum):
    FACE6 = 6
    VERTEX26 = 26

    @property
    def structure(self):
        """3x3x3 boolean structuring element (centre included)."""
        if self is Connectivity.FACE6:
            return ndimage.generate_binary_structure(3, 1)
        return ndimage.generate_binary_structure(3, 3)

    @property
    def offsets(self):
        """Neighbour steps as ``(dx, dy, dz)`` tuples."""
        dz, dy, dx = np.nonzero(self.structure)
        steps = [(int(a) - 1, int(b) - 1, int(c) - 1) for a, b, c in zip(dx, dy, dz)]
        return [s for s in steps if s != (0, 0, 0)]


def erode(mask, conn=Connectivity.FACE6):
    """One binary erosion step; voxels beyond the grid count as false."""
    out = ndimage.binary_erosion(mask.data, structure=conn.structure, border_value=0)
    return MaskVolume(mask.meta, out)


def connected_components(mask, conn=Connectivity.FACE6):
    """Label the components of ``mask``.

    Returns
    -------
    labels : ndarray of int32, shape ``meta.shape``
        0 outside the mask, otherwise 1..count with 1 the largest component.
        Equal sizes are ordered by the smallest flat index in the component.
    count : int
    """
    raw, count = ndimage.label(mask.data, structure=conn.structure)
    if count == 0:
        return np.zeros(mask.meta.shape, dtype=np.int32), 0
    flat = raw.reshape(-1)
    sizes = np.bincount(flat, minlength=count + 1)[1:]
    _, first = np.unique(flat, return_index=True)
    first = first[1:] if flat[first[0]] == 0 else first
    order = np.lexsort((first, -sizes))
    remap = np.zeros(count + 1, dtype=np.int32)
    remap[order + 1] = np.arange(1, count + 1, dtype=np.int32)
    return remap[raw], int(count)


def centroid(components, label):
    """Mean ``(x, y, z)`` voxel coordinate of the voxels carrying ``label``."""
    z, y, x = np.nonzero(np.asarray(components) == label)
    if x.size == 0:
        raise UnknownLabel(f"no voxel carries label {label}")
    return (float(x.mean()), float(y.mean()), float(z.mean()))


def distance_transform(mask):
    """Exact Euclidean distance (mm) from every voxel to the nearest true voxel."""
    if not mask.data.any():
        raise EmptyMask("distance transform of an empty mask")
    dist = ndimage.distance_transform_edt(~mask.data, sampling=mask.meta.sampling)
    return ScalarVolume(mask.meta, dist)


def surface_mask(mask):
    """True voxels with at least one false or out-of-grid face neighbour."""
    return MaskVolume(mask.meta, mask.data & ~erode(mask).data)


def surface_voxels(mask):
    """Sorted flat indices of the surface voxels of ``mask``."""
    return np.flatnonzero(surface_mask(mask).data)
