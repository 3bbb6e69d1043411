"""How the erosion loop turns a leaky boundary map into five seeds.

Run:  python3 demos/02_seeding_by_erosion.py
"""

import numpy as np

from lobewalker.phantom import PhantomConfig, generate
from lobewalker.seeding import SeedingConfig, boundary_mask, interior_mask
from lobewalker.volume import Connectivity, connected_components, erode

case = generate(PhantomConfig(gap_frac=0.3, noise_sigma=0.05, rng_seed=42))
cfg = SeedingConfig()

# With holes in the fissures, lobes leak into each other through the
# thresholded interior. Each Face6 erosion step shaves one voxel layer and
# eventually cuts those thin bridges.
interior = interior_mask(boundary_mask(case.prob, case.lung, cfg.theta), case.lung)
current = interior
for step in range(6):
    if step:
        current = erode(current, Connectivity.FACE6)
    comps, count = connected_components(current)
    sizes = np.bincount(comps.ravel())[1:]
    big = sizes[sizes >= cfg.min_seed_voxels]
    print(f"step {step}: {current.count():6d} voxels, {len(big)} components >= {cfg.min_seed_voxels}: {big.tolist()}")
    if len(big) == 5:
        print("five regions: this depth is used for the seeds")
        break

# Each region should lie inside one true lobe.
flat = case.gt.flat
for k in range(1, 6):
    lobes, counts = np.unique(flat[comps.ravel() == k], return_counts=True)
    print(f"region {k}: true lobe(s) {dict(zip(lobes.tolist(), counts.tolist()))}")
