import numpy as np

from lobewalker.rw import build_graph
from lobewalker.seeding import SeedSet
from lobewalker.volume import GridMeta, MaskVolume, ScalarVolume, connected_components


def box(dims, value=True, spacing=(1.0, 1.0, 1.0)):
    meta = GridMeta(dims, spacing)
    return MaskVolume(meta, np.full(meta.shape, value))


def mask_from(meta, voxels):
    """Mask with the given (x, y, z) voxels set."""
    arr = np.zeros(meta.shape, dtype=bool)
    for x, y, z in voxels:
        arr[z, y, x] = True
    return MaskVolume(meta, arr)


def random_instance(rng, max_dim=4, n_regions=None, full_box=None):
    """Random connected lung on a grid of at most max_dim per axis, random
    weights in [1e-6, 1], and 2..5 disjoint random seed regions."""
    while True:
        dims = tuple(int(d) for d in rng.integers(1, max_dim + 1, size=3))
        if np.prod(dims) < 3:
            continue
        meta = GridMeta(dims)
        if full_box if full_box is not None else rng.random() < 0.5:
            lung_arr = np.ones(meta.shape, dtype=bool)
        else:
            lung_arr = rng.random(meta.shape) < 0.7
            comps, count = connected_components(MaskVolume(meta, lung_arr))
            if count == 0:
                continue
            lung_arr = comps == 1
        n_nodes = int(lung_arr.sum())
        k = n_regions or int(rng.integers(2, 6))
        if n_nodes < k + 1:
            continue
        break
    lung = MaskVolume(meta, lung_arr)
    prob = ScalarVolume(meta, np.zeros(meta.shape))
    graph = build_graph(prob, lung)
    graph = graph.with_weights(rng.uniform(1e-6, 1.0, size=graph.n_edges))

    voxels = rng.permutation(np.flatnonzero(lung_arr))
    n_seeded = int(rng.integers(k, n_nodes))  # leaves >= 1 unseeded node
    chosen = voxels[:n_seeded]
    owner = np.concatenate([np.arange(k), rng.integers(0, k, size=n_seeded - k)])
    regions = {lab + 1: chosen[owner == lab] for lab in range(k)}
    return graph, SeedSet(meta, regions), lung
