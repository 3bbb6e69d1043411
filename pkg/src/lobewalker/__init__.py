"""Five-lobe lung segmentation with a seeded 3D random walker.

Typical use::

    from lobewalker import compute_seeds, segment_lobes
    seeds = compute_seeds(prob, lung)
    result = segment_lobes(prob, lung, seeds)
"""

from .errors import LobeWalkerError
from .metrics import LobeScores, avg_surface_distance, jaccard, lobe_scores
from .phantom import PhantomConfig, generate as generate_phantom
from .rw import RwConfig, build_graph, segment_lobes, solve_lobe
from .seeding import LobeId, SeedingConfig, SeedSet, compute_seeds, generate_seeds
from .volume import GridMeta, HUVolume, LabelVolume, MaskVolume, ScalarVolume

__version__ = "0.1.0"

__all__ = [
    "LobeWalkerError",
    "LobeScores",
    "avg_surface_distance",
    "jaccard",
    "lobe_scores",
    "PhantomConfig",
    "generate_phantom",
    "RwConfig",
    "build_graph",
    "segment_lobes",
    "solve_lobe",
    "LobeId",
    "SeedingConfig",
    "SeedSet",
    "compute_seeds",
    "generate_seeds",
    "GridMeta",
    "HUVolume",
    "LabelVolume",
    "MaskVolume",
    "ScalarVolume",
]
