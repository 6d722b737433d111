"""kNN graph construction and attraction/repulsion affinity graphs."""

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NumericalError, ParameterError
from .kernels import REP_EXPLICIT, REP_PRODUCT

REPULSION_SCHEMES = ("configuration_null", "uniform", "explicit")
KNN_METRICS = ("euclidean", "cosine")
AFFINITY_KERNELS = ("self_tuning_gaussian", "inverse_distance")

_EMPTY_I = np.empty(0, dtype=np.int64)
_EMPTY_F = np.empty(0, dtype=np.float64)


@dataclass(frozen=True)
class NeighborGraph:
    """Symmetrized kNN graph: undirected (i, j, distance) edges."""

    n: int
    edges: np.ndarray       # (m, 2) int64, i < j, unique
    distances: np.ndarray   # (m,) float64
    k: int


@dataclass(frozen=True)
class AffinityGraph:
    """Sparse symmetric attraction weights plus a repulsion scheme.

    Attraction is stored in CSR form with both edge directions so the
    optimizer kernels can walk neighbourhoods directly.  Repulsion is
    either product-form (rho_i * rho_j / rep_denom, covering the
    configuration-null and uniform schemes) or an explicit CSR map.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    strengths: np.ndarray        # s_i = sum_j w+_ij
    total_weight: float          # W = sum_{i<j} w+_ij
    repulsion_scheme: str
    rep_strength: np.ndarray     # rho_i for the product form
    rep_denom: float
    node_sizes: np.ndarray = field(default=None)
    rep_indptr: np.ndarray = field(default=None)
    rep_indices: np.ndarray = field(default=None)
    rep_weights: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.node_sizes is None:
            object.__setattr__(self, "node_sizes", np.ones(self.n))
        if self.rep_indptr is None:
            object.__setattr__(self, "rep_indptr", np.zeros(self.n + 1, dtype=np.int64))
            object.__setattr__(self, "rep_indices", _EMPTY_I)
            object.__setattr__(self, "rep_weights", _EMPTY_F)

    @property
    def rep_mode(self) -> int:
        return REP_EXPLICIT if self.repulsion_scheme == "explicit" else REP_PRODUCT

    def degree(self, i: int) -> int:
        return int(self.indptr[i + 1] - self.indptr[i])

    def attraction_dense(self) -> np.ndarray:
        """Dense w+ matrix; intended for small-n tests and oracles."""
        a = np.zeros((self.n, self.n))
        for i in range(self.n):
            for e in range(self.indptr[i], self.indptr[i + 1]):
                a[i, self.indices[e]] = self.weights[e]
        return a

    def repulsion_dense(self) -> np.ndarray:
        """Dense w- matrix under the active scheme (zero diagonal)."""
        if self.rep_mode == REP_PRODUCT:
            r = np.outer(self.rep_strength, self.rep_strength) / self.rep_denom
            np.fill_diagonal(r, 0.0)
            return r
        r = np.zeros((self.n, self.n))
        for i in range(self.n):
            for e in range(self.rep_indptr[i], self.rep_indptr[i + 1]):
                r[i, self.rep_indices[e]] = self.rep_weights[e]
        return r


def _check_points(points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 2 or points.shape[1] < 1:
        raise InputError("points must be an n x d matrix with n >= 2, d >= 1")
    if not np.all(np.isfinite(points)):
        raise InputError("points contain non-finite coordinates")
    return points


def _pairwise_distances(points: np.ndarray, metric: str) -> np.ndarray:
    if metric == "euclidean":
        sq = np.sum(points ** 2, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (points @ points.T)
        return np.sqrt(np.maximum(d2, 0.0))
    if metric == "cosine":
        norms = np.linalg.norm(points, axis=1)
        if np.any(norms == 0.0):
            raise NumericalError("cosine metric undefined for zero vectors")
        sim = (points @ points.T) / np.outer(norms, norms)
        return 1.0 - np.clip(sim, -1.0, 1.0)
    raise ParameterError(f"unknown metric {metric!r}")


def build_knn_graph(points, k: int, metric: str = "euclidean") -> NeighborGraph:
    """Link each item to its k nearest others; edge set is the union.

    Ties in distance are broken by smaller item index, so the graph is
    deterministic for a given point matrix.
    """
    points = _check_points(points)
    n = points.shape[0]
    if not 1 <= k <= n - 1:
        raise ParameterError(f"k must satisfy 1 <= k <= n-1, got k={k}, n={n}")
    dist = _pairwise_distances(points, metric)
    np.fill_diagonal(dist, np.inf)
    # stable argsort on distance gives the smaller-index tie rule
    nn = np.argsort(dist, axis=1, kind="stable")[:, :k]
    pair_d = {}
    for i in range(n):
        for j in nn[i]:
            a, b = (i, int(j)) if i < j else (int(j), i)
            pair_d[(a, b)] = dist[a, b]
    items = sorted(pair_d.items())
    edges = np.array([p for p, _ in items], dtype=np.int64).reshape(-1, 2)
    distances = np.array([d for _, d in items])
    return NeighborGraph(n=n, edges=edges, distances=distances, k=k)


def _csr_from_pairs(n, rows, cols, vals):
    """Both-direction CSR from unordered unique pairs."""
    ii = np.concatenate([rows, cols])
    jj = np.concatenate([cols, rows])
    vv = np.concatenate([vals, vals])
    order = np.lexsort((jj, ii))
    ii, jj, vv = ii[order], jj[order], vv[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, ii + 1, 1)
    indptr = np.cumsum(indptr)
    return indptr, jj.astype(np.int64), vv.astype(np.float64)


def _assemble(n, rows, cols, vals, scheme, rep_pairs=None, require_positive=True):
    strengths = np.zeros(n)
    np.add.at(strengths, rows, vals)
    np.add.at(strengths, cols, vals)
    total = float(np.sum(vals))
    if require_positive and total <= 0.0:
        raise NumericalError("total attraction weight W must be positive")
    indptr, indices, weights = _csr_from_pairs(n, rows, cols, vals)
    kwargs = {}
    if scheme == "configuration_null":
        rep_strength = strengths.copy()
        rep_denom = 2.0 * total
    elif scheme == "uniform":
        rep_strength = np.ones(n)
        rep_denom = float(n)
    elif scheme == "explicit":
        if rep_pairs is None:
            raise ParameterError("explicit repulsion scheme needs repulsion edges")
        rr, rc, rv = rep_pairs
        rep_strength = np.zeros(n)
        rep_denom = 1.0
        ri, rj, rw = _csr_from_pairs(n, rr, rc, rv)
        kwargs = {"rep_indptr": ri, "rep_indices": rj, "rep_weights": rw}
    else:
        raise ParameterError(f"unknown repulsion scheme {scheme!r}")
    return AffinityGraph(
        n=n, indptr=indptr, indices=indices, weights=weights,
        strengths=strengths, total_weight=total,
        repulsion_scheme=scheme, rep_strength=rep_strength,
        rep_denom=rep_denom, **kwargs)


def _merge_pairs(n, edges, label="edge"):
    """Average duplicate directions / repeats of unordered pairs."""
    acc = {}
    cnt = {}
    for i, j, w in edges:
        i, j = int(i), int(j)
        w = float(w)
        if not (0 <= i < n and 0 <= j < n):
            raise InputError(f"{label} index ({i}, {j}) out of range for n={n}")
        if i == j:
            raise InputError(f"self-loop ({i}, {i}) not allowed")
        if w < 0.0:
            raise InputError(f"negative {label} weight {w} on ({i}, {j})")
        key = (i, j) if i < j else (j, i)
        acc[key] = acc.get(key, 0.0) + w
        cnt[key] = cnt.get(key, 0) + 1
    keys = sorted(acc)
    rows = np.array([a for a, _ in keys], dtype=np.int64)
    cols = np.array([b for _, b in keys], dtype=np.int64)
    vals = np.array([acc[k] / cnt[k] for k in keys])
    return rows, cols, vals


def from_edge_list(n: int, edges, repulsion_scheme: str = "configuration_null",
                   repulsion_edges=None) -> AffinityGraph:
    """Build an AffinityGraph from (i, j, w+) triples.

    Duplicate directions of the same unordered pair are averaged.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    if len(edges) == 0:
        raise InputError("edge list is empty")
    rows, cols, vals = _merge_pairs(n, edges)
    rep_pairs = None
    if repulsion_edges is not None:
        rep_pairs = _merge_pairs(n, repulsion_edges, label="repulsion")
    return _assemble(n, rows, cols, vals, repulsion_scheme, rep_pairs)


def derive_affinity(graph: NeighborGraph, kernel: str = "self_tuning_gaussian",
                    repulsion_scheme: str = "configuration_null",
                    repulsion_edges=None) -> AffinityGraph:
    """Kernelize distances, row-normalize, symmetrize w+ = (P + P^T) / 2."""
    if kernel not in AFFINITY_KERNELS:
        raise ParameterError(f"unknown kernel {kernel!r}")
    n = graph.n
    rows = graph.edges[:, 0]
    cols = graph.edges[:, 1]
    dist = graph.distances
    if kernel == "self_tuning_gaussian":
        # sigma_i = distance to the ceil(k/2)-th neighbour of i
        rank = max((graph.k + 1) // 2, 1)
        sigma = np.zeros(n)
        for i in range(n):
            d_i = np.sort(np.concatenate([dist[rows == i], dist[cols == i]]))
            sigma[i] = d_i[min(rank, len(d_i)) - 1]
        if np.any(sigma <= 0.0):
            sigma = np.maximum(sigma, np.max(sigma) * 1e-12)
        if np.all(sigma <= 0.0):
            raise NumericalError("degenerate distances: all sigmas are zero")
        sim = np.exp(-dist ** 2 / (sigma[rows] * sigma[cols]))
    else:
        if np.any(dist <= 0.0):
            raise NumericalError("inverse_distance kernel needs strictly positive distances")
        sim = 1.0 / dist
    if not np.all(np.isfinite(sim)) or np.sum(sim) <= 0.0:
        raise NumericalError("all-zero or non-finite similarities")
    # stochastic reweighting: rows of the similarity matrix sum to one
    rowsum = np.zeros(n)
    np.add.at(rowsum, rows, sim)
    np.add.at(rowsum, cols, sim)
    if np.any(rowsum <= 0.0):
        raise NumericalError("item with all-zero similarities")
    p_fwd = sim / rowsum[rows]
    p_bwd = sim / rowsum[cols]
    w = 0.5 * (p_fwd + p_bwd)
    rep_pairs = None
    if repulsion_edges is not None:
        rep_pairs = _merge_pairs(n, repulsion_edges, label="repulsion")
    return _assemble(n, rows, cols, w, repulsion_scheme, rep_pairs)


def load_points_csv(path) -> np.ndarray:
    """n x d numeric CSV, optional header row."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise InputError(f"empty points file: {path}")
    start = 0
    try:
        [float(x) for x in lines[0].split(",")]
    except ValueError:
        start = 1
    rows = []
    for ln in lines[start:]:
        try:
            rows.append([float(x) for x in ln.split(",")])
        except ValueError as exc:
            raise InputError(f"non-numeric row in {path}: {ln!r}") from exc
    points = np.array(rows)
    return _check_points(points)


def load_edges_csv(path):
    """(i, j, w) CSV rows, optional header."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise InputError(f"empty edge file: {path}")
    start = 0
    try:
        float(lines[0].split(",")[2])
    except (ValueError, IndexError):
        start = 1
    edges = []
    for ln in lines[start:]:
        parts = ln.split(",")
        if len(parts) != 3:
            raise InputError(f"edge row must be i,j,w: {ln!r}")
        try:
            edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
        except ValueError as exc:
            raise InputError(f"bad edge row {ln!r}") from exc
    return edges


def load_labels_csv(path) -> np.ndarray:
    """Single integer column, header tolerated."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise InputError(f"empty labels file: {path}")
    start = 0
    try:
        int(float(lines[0].split(",")[0]))
    except ValueError:
        start = 1
    labels = []
    for ln in lines[start:]:
        try:
            labels.append(int(float(ln.split(",")[0])))
        except ValueError as exc:
            raise InputError(f"non-integer label row {ln!r}") from exc
    return np.array(labels, dtype=np.int64)
