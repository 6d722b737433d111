"""Leiden-style minimization of the attraction-repulsion energy at fixed gamma.

Phases per level: local moving until stable, refinement (local moving from
singletons constrained to the current clusters), then aggregation on the
refined partition with the coarse partition as the starting point on the
aggregate graph.  A final item-level polish pass on the original graph
guarantees single-move stability of the returned partition.
"""

from dataclasses import dataclass

import numpy as np

from .energy import EnergySummary, canonicalize, cluster_count, hamiltonian
from .graph import AffinityGraph
from . import kernels


@dataclass(frozen=True)
class OptimizeOptions:
    seed: int = 0
    max_levels: int = 32
    max_sweeps_per_level: int = 100
    epsilon: float = 1e-12
    restarts: int = 1  # independent seeded runs; the best energy wins

    def __post_init__(self):
        if self.max_levels < 1 or self.max_sweeps_per_level < 1 or self.epsilon <= 0:
            raise ValueError("all optimizer bounds must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass(frozen=True)
class AggregateGraph:
    """Coarse graph over super-nodes plus the constants needed for exactness.

    H(super-partition on .graph) + const_h_a + gamma * const_h_r equals
    H(expanded partition) on the original graph.
    """

    graph: AffinityGraph
    mapping: np.ndarray       # original/previous node -> super-node id
    const_h_a: float
    const_h_r: float

    def members(self, super_node: int) -> np.ndarray:
        return np.nonzero(self.mapping == super_node)[0]

    def hamiltonian(self, labels, gamma: float) -> EnergySummary:
        part = hamiltonian(self.graph, labels, gamma)
        h_a = part.h_a + self.const_h_a
        h_r = part.h_r + self.const_h_r
        return EnergySummary(gamma=float(gamma), h_a=h_a, h_r=h_r,
                             total=h_a + gamma * h_r)


def _run_sweeps(graph, labels, gamma, constraint, rng, max_sweeps, epsilon):
    """Local moving until a full pass accepts no move. Returns total moves."""
    total = 0
    for _ in range(max_sweeps):
        order = rng.permutation(graph.n).astype(np.int64)
        moves = kernels.sweep(
            graph.indptr, graph.indices, graph.weights,
            graph.rep_mode, graph.rep_strength, graph.rep_denom,
            graph.rep_indptr, graph.rep_indices, graph.rep_weights,
            float(gamma), labels, constraint, order, epsilon)
        total += int(moves)
        if moves == 0:
            break
    return total


def local_move_sweep(graph: AffinityGraph, labels, gamma: float, rng):
    """One seeded-shuffle pass of item moves; returns (labels, improved)."""
    labels = np.array(labels, dtype=np.int64)
    order = rng.permutation(graph.n).astype(np.int64)
    constraint = np.zeros(graph.n, dtype=np.int64)
    moves = kernels.sweep(
        graph.indptr, graph.indices, graph.weights,
        graph.rep_mode, graph.rep_strength, graph.rep_denom,
        graph.rep_indptr, graph.rep_indices, graph.rep_weights,
        float(gamma), labels, constraint, order, 1e-12)
    return canonicalize(labels), moves > 0


def aggregate(graph: AffinityGraph, labels) -> AggregateGraph:
    """Collapse clusters to super-nodes; energies are preserved exactly."""
    labels = canonicalize(labels)
    k = cluster_count(labels)
    # split attraction edges into cross-cluster (kept) and internal (constant)
    mask = graph.indices > np.repeat(np.arange(graph.n), np.diff(graph.indptr))
    ii = np.repeat(np.arange(graph.n), np.diff(graph.indptr))[mask]
    jj = graph.indices[mask]
    ww = graph.weights[mask]
    ci, cj = labels[ii], labels[jj]
    internal = ci == cj
    const_h_a = -float(np.sum(ww[internal]))
    lo = np.minimum(ci[~internal], cj[~internal])
    hi = np.maximum(ci[~internal], cj[~internal])
    key = lo * k + hi
    uniq, inv = np.unique(key, return_inverse=True)
    w_agg = np.zeros(len(uniq))
    np.add.at(w_agg, inv, ww[~internal])
    rows = (uniq // k).astype(np.int64)
    cols = (uniq % k).astype(np.int64)

    strengths = np.zeros(k)
    np.add.at(strengths, labels, graph.strengths)
    sizes = np.zeros(k)
    np.add.at(sizes, labels, graph.node_sizes)

    from .graph import _csr_from_pairs  # local import to avoid cycle at module load

    indptr, indices, weights = _csr_from_pairs(k, rows, cols, w_agg)
    kwargs = {}
    const_h_r = 0.0
    if graph.rep_mode == kernels.REP_PRODUCT:
        rho = np.zeros(k)
        np.add.at(rho, labels, graph.rep_strength)
        rho_sq = np.zeros(k)
        np.add.at(rho_sq, labels, graph.rep_strength ** 2)
        const_h_r = float(np.sum(rho ** 2 - rho_sq)) / (2.0 * graph.rep_denom)
        rep_strength = rho
    else:
        rmask = graph.rep_indices > np.repeat(np.arange(graph.n),
                                              np.diff(graph.rep_indptr))
        ri = np.repeat(np.arange(graph.n), np.diff(graph.rep_indptr))[rmask]
        rj = graph.rep_indices[rmask]
        rw = graph.rep_weights[rmask]
        rci, rcj = labels[ri], labels[rj]
        rint = rci == rcj
        const_h_r = float(np.sum(rw[rint]))
        rlo = np.minimum(rci[~rint], rcj[~rint])
        rhi = np.maximum(rci[~rint], rcj[~rint])
        rkey = rlo * k + rhi
        runiq, rinv = np.unique(rkey, return_inverse=True)
        r_agg = np.zeros(len(runiq))
        np.add.at(r_agg, rinv, rw[~rint])
        rp, rix, rwt = _csr_from_pairs(
            k, (runiq // k).astype(np.int64), (runiq % k).astype(np.int64), r_agg)
        kwargs = {"rep_indptr": rp, "rep_indices": rix, "rep_weights": rwt}
        rep_strength = np.zeros(k)

    coarse = AffinityGraph(
        n=k, indptr=indptr, indices=indices, weights=weights,
        strengths=strengths, total_weight=float(np.sum(w_agg)),
        repulsion_scheme=graph.repulsion_scheme, rep_strength=rep_strength,
        rep_denom=graph.rep_denom, node_sizes=sizes, **kwargs)
    return AggregateGraph(graph=coarse, mapping=labels,
                          const_h_a=const_h_a, const_h_r=const_h_r)


def optimize(graph: AffinityGraph, gamma: float,
             opts: OptimizeOptions = None):
    """Minimize H at fixed gamma; returns (labels, EnergySummary).

    Deterministic for a fixed seed; the returned partition is canonical
    and single-move stable on the original graph.
    """
    if opts is None:
        opts = OptimizeOptions()
    if opts.restarts > 1:
        best = None
        for attempt in range(opts.restarts):
            single = OptimizeOptions(
                seed=opts.seed + attempt, max_levels=opts.max_levels,
                max_sweeps_per_level=opts.max_sweeps_per_level,
                epsilon=opts.epsilon)
            labels, energy = optimize(graph, gamma, single)
            if best is None or energy.total < best[1].total - opts.epsilon:
                best = (labels, energy)
        return best
    rng = np.random.default_rng(np.random.PCG64(opts.seed))
    cur = graph
    mapping = np.arange(graph.n)
    labels = np.arange(cur.n, dtype=np.int64)
    zeros = np.zeros(cur.n, dtype=np.int64)
    for _ in range(opts.max_levels):
        moved = _run_sweeps(cur, labels, gamma, zeros, rng,
                            opts.max_sweeps_per_level, opts.epsilon)
        labels = canonicalize(labels)
        k = cluster_count(labels)
        if moved == 0 or k == cur.n:
            break
        # refinement: singletons re-merged inside each cluster
        refined = np.arange(cur.n, dtype=np.int64)
        _run_sweeps(cur, refined, gamma, labels, rng,
                    opts.max_sweeps_per_level, opts.epsilon)
        refined = canonicalize(refined)
        if cluster_count(refined) == cur.n and k == cur.n:
            break
        if cluster_count(refined) == cur.n:
            refined = labels  # refinement kept everything apart; aggregate coarse
        agg = aggregate(cur, refined)
        # start the next level from the coarse partition expressed on super-nodes
        start = np.full(agg.graph.n, -1, dtype=np.int64)
        start[agg.mapping] = labels
        mapping = agg.mapping[mapping]
        cur = agg.graph
        labels = start
        zeros = np.zeros(cur.n, dtype=np.int64)
    final = labels[mapping]
    # polish on the original graph so single-item moves cannot improve H
    zeros = np.zeros(graph.n, dtype=np.int64)
    _run_sweeps(graph, final, gamma, zeros, rng,
                10 * opts.max_sweeps_per_level, opts.epsilon)
    final = canonicalize(final)
    return final, hamiltonian(graph, final, gamma)
