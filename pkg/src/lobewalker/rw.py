"""Seeded random walker on the Face6 graph of in-lung voxels.

For a foreground label ``k`` the walker probability ``y`` minimises

    E(y) = sum over edges (i, j) of w_ij * (y_i - y_j)**2

with ``y = 1`` on the seeds of ``k`` and ``y = 0`` on every other seed.
Setting the gradient to zero on the unseeded nodes ``U`` gives the
Dirichlet system ``L_UU y_U = -L_US y_S`` with ``L`` the weighted graph
Laplacian. It is symmetric positive definite whenever every unseeded
component touches a seed, and is solved here by Jacobi-preconditioned
conjugate gradients.

Edge weights come from the boundary probability alone,
``w_ij = max(exp(-beta * (p_i - p_j)**2), weight_floor)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage, sparse
from scipy.sparse import csgraph

from .errors import EmptyLung, MetaMismatch, SolverDiverged, TooLarge
from .volume import LabelVolume, MaskVolume, ScalarVolume, check_same_grid

__all__ = [
    "RwConfig",
    "LungGraph",
    "SolveStats",
    "SegmentationResult",
    "edge_weight",
    "build_graph",
    "solve_lobe",
    "segment_lobes",
    "brute_force_rw",
    "conjugate_gradient",
    "nearest_seed_labels",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RwConfig:
    beta: float = 100.0
    weight_floor: float = 1e-6
    cg_tolerance: float = 1e-8
    cg_max_iterations: int = 5000

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if not 0 < self.weight_floor <= 1:
            raise ValueError("weight_floor must lie in (0, 1]")
        if not 0 < self.cg_tolerance < 1:
            raise ValueError("cg_tolerance must lie in (0, 1)")
        if self.cg_max_iterations < 1:
            raise ValueError("cg_max_iterations must be positive")


def edge_weight(p_i, p_j, cfg=RwConfig()):
    """Gaussian weight on a probability difference, floored at ``cfg.weight_floor``."""
    p_i = np.asarray(p_i, dtype=np.float64)
    p_j = np.asarray(p_j, dtype=np.float64)
    w = np.maximum(np.exp(-cfg.beta * (p_i - p_j) ** 2), cfg.weight_floor)
    return float(w) if w.ndim == 0 else w


@dataclass
class LungGraph:
    """Weighted Face6 graph over the true voxels of a lung mask.

    Attributes
    ----------
    meta : GridMeta
    node_voxel : (N,) int64
        Flat voxel index of each node, ascending.
    voxel_node : (nx*ny*nz,) int64
        Node id of each voxel, -1 outside the lung.
    edges : (E, 2) int64
        Node pairs ``i < j``, one row per unordered adjacent pair.
    weights : (E,) float64
    """

    meta: object
    node_voxel: np.ndarray
    voxel_node: np.ndarray
    edges: np.ndarray
    weights: np.ndarray

    @property
    def n_nodes(self):
        return int(self.node_voxel.size)

    @property
    def n_edges(self):
        return int(self.edges.shape[0])

    def with_weights(self, weights):
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != self.weights.shape:
            raise ValueError("weights must match the edge count")
        return replace(self, weights=weights)

    def adjacency(self):
        i, j = self.edges[:, 0], self.edges[:, 1]
        n = self.n_nodes
        w = sparse.coo_matrix(
            (np.concatenate([self.weights, self.weights]), (np.concatenate([i, j]), np.concatenate([j, i]))),
            shape=(n, n),
        )
        return w.tocsr()

    def laplacian(self):
        w = self.adjacency()
        deg = np.asarray(w.sum(axis=1)).ravel()
        return (sparse.diags(deg) - w).tocsr()

    def seed_nodes(self, seeds):
        """Per-node seed label (0 = unseeded) for a :class:`SeedSet`."""
        out = np.zeros(self.n_nodes, dtype=np.int64)
        for key, voxels in seeds.regions.items():
            nodes = self.voxel_node[voxels]
            if np.any(nodes < 0):
                raise ValueError(f"seed region {key} has voxels outside the lung")
            out[nodes] = int(key)
        return out


def build_graph(prob, lung, cfg=RwConfig()):
    """One node per in-lung voxel, one edge per in-lung Face6 pair."""
    check_same_grid(prob, lung)
    prob.check_probability()
    m = lung.data
    if not m.any():
        raise EmptyLung("lung mask is empty")
    voxel_node = np.full(lung.meta.size, -1, dtype=np.int64)
    node_voxel = np.flatnonzero(m)
    voxel_node[node_voxel] = np.arange(node_voxel.size)
    vn = voxel_node.reshape(m.shape)
    p = prob.data

    pairs, weights = [], []
    for axis in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        both = m[lo] & m[hi]
        a = vn[lo][both]
        b = vn[hi][both]
        pairs.append(np.stack([a, b], axis=1))
        weights.append(edge_weight(p[lo][both], p[hi][both], cfg))
    edges = np.concatenate(pairs)
    w = np.concatenate(weights)
    # voxel order == node order, and the +1 neighbour along any axis has the larger flat index
    assert np.all(edges[:, 0] < edges[:, 1])
    return LungGraph(lung.meta, node_voxel, voxel_node, edges, w)


def conjugate_gradient(A, b, tol=1e-8, maxiter=5000, diag=None):
    """Jacobi-preconditioned conjugate gradients from a zero start.

    Stops once ``||D^-1 r|| / ||D^-1 b|| <= tol`` with ``D = diag(A)``.
    Measuring the residual after the Jacobi scaling keeps weakly coupled
    nodes (all edges near the weight floor) from hiding a large error
    behind a small raw residual. Returns ``(x, iterations, relres)``.

    Raises
    ------
    SolverDiverged
        ``maxiter`` reached with the residual still above ``tol``.
    """
    b = np.asarray(b, dtype=np.float64)
    x = np.zeros_like(b)
    if diag is None:
        diag = A.diagonal()
    inv_diag = 1.0 / diag
    normb = np.linalg.norm(inv_diag * b)
    if normb == 0.0:
        return x, 0, 0.0
    r = b.copy()
    z = inv_diag * r
    p = z.copy()
    rz = r @ z
    relres = 1.0
    for it in range(1, maxiter + 1):
        Ap = A @ p
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        z = inv_diag * r
        relres = np.linalg.norm(z) / normb
        if relres <= tol:
            return x, it, float(relres)
        rz_new = r @ z
        p *= rz_new / rz
        p += z
        rz = rz_new
    raise SolverDiverged(float(relres), maxiter)


@dataclass
class SolveStats:
    iterations: int
    residual: float
    max_overshoot: float = 0.0


class _Dirichlet:
    """Reduced system shared by every foreground label of one seed set."""

    def __init__(self, graph, seeds):
        self.graph = graph
        self.seed_label = graph.seed_nodes(seeds)
        seeded = self.seed_label > 0
        lap = graph.laplacian()

        # unseeded components without any seed make L_UU singular; they are
        # labelled by the nearest seed region instead of being solved
        n_comp, comp = csgraph.connected_components(graph.adjacency(), directed=False)
        has_seed = np.zeros(n_comp, dtype=bool)
        has_seed[comp[seeded]] = True
        orphan = ~has_seed[comp]
        self.orphans = np.flatnonzero(orphan)
        self.orphan_label = np.zeros(graph.n_nodes, dtype=np.int64)
        if self.orphans.size:
            nearest = nearest_seed_labels(
                MaskVolume(graph.meta, graph.voxel_node.reshape(graph.meta.shape) >= 0), seeds
            ).flat
            self.orphan_label[self.orphans] = nearest[graph.node_voxel[self.orphans]]

        self.unseeded = np.flatnonzero(~seeded & ~orphan)
        rows = lap[self.unseeded]
        self.L_UU = rows[:, self.unseeded].tocsr()
        self.L_Uall = rows.tocsr()
        self.diag = self.L_UU.diagonal()

    def solve(self, foreground, cfg):
        y = (self.seed_label == foreground).astype(np.float64)
        y[self.orphans] = (self.orphan_label[self.orphans] == foreground)
        if self.unseeded.size == 0:
            return y, SolveStats(0, 0.0)
        rhs = -(self.L_Uall @ np.where(self.seed_label > 0, y, 0.0))
        x, it, res = conjugate_gradient(
            self.L_UU, rhs, cfg.cg_tolerance, cfg.cg_max_iterations, self.diag
        )
        y[self.unseeded] = x
        return y, SolveStats(it, res)


def solve_lobe(graph, seeds, foreground, cfg=RwConfig()):
    """Walker probability of ``foreground`` at every node of ``graph``.

    ``seeds`` is a :class:`~lobewalker.seeding.SeedSet`; the foreground
    region is fixed to 1 and all other regions to 0. Values are returned
    unclamped, one per node.
    """
    if foreground not in seeds.regions:
        raise KeyError(f"no seed region labelled {foreground}")
    y, _ = _Dirichlet(graph, seeds).solve(foreground, cfg)
    return y


@dataclass
class SegmentationResult:
    """Output of :func:`segment_lobes`.

    ``solver_stats`` has one entry per label that was actually solved, so the
    complement label is absent from it.
    """

    labels: LabelVolume
    probabilities: dict | None
    solver_stats: dict
    warnings: list = field(default_factory=list)
    n_nodes: int = 0
    n_unseeded: int = 0


def segment_lobes(prob, lung, seeds, cfg=RwConfig(), keep_probabilities=True):
    """Label every lung voxel with the lobe of highest walker probability.

    All seed labels but the last are solved; the last one is the complement
    ``1 - sum(others)``, so the per-voxel probabilities sum to one. Ties go to
    the smallest label; seed voxels always keep their own label.
    """
    check_same_grid(prob, lung)
    if seeds.meta != lung.meta:
        raise MetaMismatch(f"seed grid {seeds.meta} differs from {lung.meta}")
    graph = build_graph(prob, lung, cfg)
    system = _Dirichlet(graph, seeds)
    keys = seeds.labels
    warnings = []
    if system.orphans.size:
        msg = f"{system.orphans.size} lung voxels share no component with any seed; nearest seed used"
        log.warning(msg)
        warnings.append(msg)

    ys = np.empty((len(keys), graph.n_nodes))
    stats = {}
    for row, key in enumerate(keys[:-1]):
        y, st = system.solve(key, cfg)
        st.max_overshoot = float(max(y.max() - 1.0, -y.min(), 0.0))
        ys[row] = np.clip(y, 0.0, 1.0)
        stats[key] = st

    # running clamp keeps the partial sums <= 1 so the complement is never negative
    total = np.zeros(graph.n_nodes)
    for row in range(len(keys) - 1):
        np.minimum(ys[row], 1.0 - total, out=ys[row])
        total += ys[row]
    ys[-1] = 1.0 - total

    winner = np.asarray(keys, dtype=np.uint8)[np.argmax(ys, axis=0)]
    seeded = system.seed_label > 0
    winner[seeded] = system.seed_label[seeded]

    labels = np.zeros(lung.meta.size, dtype=np.uint8)
    labels[graph.node_voxel] = winner
    probabilities = None
    if keep_probabilities:
        probabilities = {}
        for row, key in enumerate(keys):
            field_ = np.zeros(lung.meta.size)
            field_[graph.node_voxel] = ys[row]
            probabilities[key] = ScalarVolume(lung.meta, field_)
    return SegmentationResult(
        labels=LabelVolume(lung.meta, labels),
        probabilities=probabilities,
        solver_stats=stats,
        warnings=warnings,
        n_nodes=graph.n_nodes,
        n_unseeded=int(system.unseeded.size),
    )


def brute_force_rw(graph, seeds, foreground, max_nodes=2000):
    """Dense reference solve of the same Dirichlet problem.

    Builds the full Laplacian entry by entry and solves the reduced system by
    LU factorisation. Meant as a test oracle for small graphs only.
    """
    n = graph.n_nodes
    if n > max_nodes:
        raise TooLarge(f"{n} nodes exceeds the dense cap of {max_nodes}")
    L = np.zeros((n, n))
    for (i, j), w in zip(graph.edges.tolist(), graph.weights.tolist()):
        L[i, j] -= w
        L[j, i] -= w
        L[i, i] += w
        L[j, j] += w
    fixed = np.full(n, np.nan)
    for key, voxels in seeds.regions.items():
        for v in np.asarray(voxels).tolist():
            fixed[graph.voxel_node[v]] = 1.0 if key == foreground else 0.0
    free = np.isnan(fixed)
    y = np.where(free, 0.0, fixed)
    if free.any():
        A = L[np.ix_(free, free)]
        rhs = -L[np.ix_(free, ~free)] @ fixed[~free]
        y[free] = np.linalg.solve(A, rhs)
    return y


def nearest_seed_labels(lung, seeds):
    """Give each lung voxel the label of its nearest seed voxel (mm distance)."""
    seed_vol = seeds.label_volume().data
    _, idx = ndimage.distance_transform_edt(
        seed_vol == 0, sampling=lung.meta.sampling, return_indices=True
    )
    nearest = seed_vol[tuple(idx)]
    return LabelVolume(lung.meta, np.where(lung.data, nearest, 0))
