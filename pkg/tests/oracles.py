"""Slow, obviously-correct reference implementations used only by tests.

None of these call scipy.ndimage; they work on plain Python loops or
all-pairs numpy broadcasting so they stay independent of the code under test.
"""

from collections import deque
from itertools import product

import numpy as np

FACE6 = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
VERTEX26 = [d for d in product((-1, 0, 1), repeat=3) if d != (0, 0, 0)]


def _inside(shape, z, y, x):
    return 0 <= z < shape[0] and 0 <= y < shape[1] and 0 <= x < shape[2]


def erode(arr, steps=FACE6):
    """arr is indexed [z, y, x]; steps are (dx, dy, dz)."""
    out = np.zeros_like(arr, dtype=bool)
    for z, y, x in zip(*np.nonzero(arr)):
        ok = True
        for dx, dy, dz in steps:
            zz, yy, xx = z + dz, y + dy, x + dx
            if not _inside(arr.shape, zz, yy, xx) or not arr[zz, yy, xx]:
                ok = False
                break
        out[z, y, x] = ok
    return out


def flood_components(arr, steps=FACE6):
    """List of components, each a sorted list of flat indices, in discovery order."""
    seen = np.zeros_like(arr, dtype=bool)
    comps = []
    for flat in np.flatnonzero(arr):
        start = np.unravel_index(flat, arr.shape)
        if seen[start]:
            continue
        seen[start] = True
        queue = deque([start])
        members = []
        while queue:
            z, y, x = queue.popleft()
            members.append(int(np.ravel_multi_index((z, y, x), arr.shape)))
            for dx, dy, dz in steps:
                n = (z + dz, y + dy, x + dx)
                if _inside(arr.shape, *n) and arr[n] and not seen[n]:
                    seen[n] = True
                    queue.append(n)
        comps.append(sorted(members))
    return comps


def _points(arr, spacing):
    """Physical (x, y, z) coordinates of the true voxels; spacing is (sx, sy, sz)."""
    z, y, x = np.nonzero(arr)
    return np.stack([x * spacing[0], y * spacing[1], z * spacing[2]], axis=1).astype(float)


def distance_to(arr, spacing):
    """All-pairs minimum distance from every voxel to the true voxels of arr."""
    targets = _points(arr, spacing)
    z, y, x = np.indices(arr.shape)
    every = np.stack([x.ravel() * spacing[0], y.ravel() * spacing[1], z.ravel() * spacing[2]], axis=1)
    d2 = ((every[:, None, :] - targets[None, :, :]) ** 2).sum(axis=2)
    return np.sqrt(d2.min(axis=1)).reshape(arr.shape)


def surface(arr):
    out = np.zeros_like(arr, dtype=bool)
    for z, y, x in zip(*np.nonzero(arr)):
        for dx, dy, dz in FACE6:
            zz, yy, xx = z + dz, y + dy, x + dx
            if not _inside(arr.shape, zz, yy, xx) or not arr[zz, yy, xx]:
                out[z, y, x] = True
                break
    return out


def asd(a, b, spacing):
    """Symmetric mean surface distance by explicit surface-to-surface pairs."""
    pa = _points(surface(a), spacing)
    pb = _points(surface(b), spacing)
    d = np.sqrt(((pa[:, None, :] - pb[None, :, :]) ** 2).sum(axis=2))
    return (d.min(axis=1).sum() + d.min(axis=0).sum()) / (len(pa) + len(pb))
