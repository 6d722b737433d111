"""Desk-scale experiments: hierarchical selectivity, novelty, category evolution.

Synthetic generators stand in for the embedding datasets; every run is
deterministic under its seed.  The working resolution for a dataset is the
midpoint of the widest non-extreme plateau of its sweep.
"""

from dataclasses import dataclass, asdict

import numpy as np

from .energy import canonicalize
from .errors import InputError, ParameterError
from .evaluation import ari, contingency, inverse_ari, item_energy_scores, roc_auc
from .graph import build_knn_graph, derive_affinity
from .optimizer import OptimizeOptions
from .resolution import find_configurations


@dataclass(frozen=True)
class HierarchySpec:
    superordinate_count: int = 2
    basic_per_super: int = 2
    points_per_basic: int = 50
    super_separation: float = 12.0
    basic_separation: float = 3.0
    dimension: int = 2
    noise_sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.superordinate_count < 1 or self.basic_per_super < 1 \
                or self.points_per_basic < 1 or self.dimension < 2:
            raise ParameterError("degenerate hierarchy spec")
        if self.super_separation <= 0 or self.basic_separation <= 0:
            raise ParameterError("separations must be positive")
        if self.basic_per_super > 1 and self.super_separation <= self.basic_separation:
            raise ParameterError("super_separation must exceed basic_separation")

    @property
    def n(self) -> int:
        return self.superordinate_count * self.basic_per_super * self.points_per_basic


def _ring(count: int, radius: float, dim: int, phase: float = 0.0) -> np.ndarray:
    """Evenly spaced centers on a circle in the first two dimensions."""
    centers = np.zeros((count, dim))
    if count == 1:
        return centers
    angles = phase + 2.0 * np.pi * np.arange(count) / count
    centers[:, 0] = radius * np.cos(angles)
    centers[:, 1] = radius * np.sin(angles)
    return centers


def hierarchy_centers(spec: HierarchySpec):
    sup = _ring(spec.superordinate_count, spec.super_separation, spec.dimension)
    basic = []
    for s in range(spec.superordinate_count):
        offs = _ring(spec.basic_per_super, spec.basic_separation, spec.dimension,
                     phase=0.5 * np.pi * s)
        basic.append(sup[s] + offs)
    return sup, np.concatenate(basic, axis=0)


def generate_hierarchy(spec: HierarchySpec):
    """Gaussian basic-level clusters grouped around superordinate centers.

    Returns (points, super_labels, basic_labels).
    """
    rng = np.random.default_rng(spec.seed)
    _, basic_centers = hierarchy_centers(spec)
    points = []
    super_labels = []
    basic_labels = []
    b = 0
    for s in range(spec.superordinate_count):
        for _ in range(spec.basic_per_super):
            pts = basic_centers[b] + spec.noise_sigma * rng.standard_normal(
                (spec.points_per_basic, spec.dimension))
            points.append(pts)
            super_labels.extend([s] * spec.points_per_basic)
            basic_labels.extend([b] * spec.points_per_basic)
            b += 1
    return (np.concatenate(points, axis=0),
            np.array(super_labels, dtype=np.int64),
            np.array(basic_labels, dtype=np.int64))


def inject_outliers(points, fraction: float, spread: float = 2.0, seed: int = 0):
    """Append uniform-box outliers; returns (points, novel_flags)."""
    points = np.asarray(points, dtype=np.float64)
    if fraction < 0.0:
        raise ParameterError("fraction must be >= 0")
    n = points.shape[0]
    count = int(round(fraction * n))
    flags = np.zeros(n + count, dtype=bool)
    if count == 0:
        return points.copy(), flags
    rng = np.random.default_rng(seed)
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo) * spread
    outliers = center + rng.uniform(-1.0, 1.0, (count, points.shape[1])) * half
    flags[n:] = True
    return np.concatenate([points, outliers], axis=0), flags


def points_to_graph(points, k: int = 10, metric: str = "euclidean",
                    repulsion_scheme: str = "configuration_null"):
    knn = build_knn_graph(points, k=k, metric=metric)
    return derive_affinity(knn, "self_tuning_gaussian", repulsion_scheme)


def _working_partition(configs):
    entry = configs.widest(skip_extremes=True)
    gamma = 0.5 * (entry.gamma_lo + entry.gamma_hi)
    return entry.labels, gamma, entry


def default_neighbors(spec: HierarchySpec) -> int:
    """k large enough that sibling basic clusters share kNN edges."""
    return min(spec.n - 1, spec.points_per_basic + 10)


def run_hierarchy_experiment(spec: HierarchySpec, gamma_max: float = 4.0,
                             k: int = None, opts: OptimizeOptions = None) -> dict:
    """Sweep the hierarchy dataset; report best plateau per label level."""
    points, super_labels, basic_labels = generate_hierarchy(spec)
    if k is None:
        k = default_neighbors(spec)
    graph = points_to_graph(points, k=k)
    if opts is None:
        opts = OptimizeOptions(seed=spec.seed)
    configs = find_configurations(graph, gamma_max, opts)
    report = {"spec": asdict(spec), "gamma_max": gamma_max,
              "plateau_count": configs.m, "levels": {}}
    for name, truth in (("superordinate", super_labels), ("basic", basic_labels)):
        best = None
        for entry in configs.entries:
            score = ari(contingency(truth, entry.labels))
            if best is None or score > best["ari"]:
                best = {"gamma_lo": entry.gamma_lo, "gamma_hi": entry.gamma_hi,
                        "ari": score, "clusters": entry.cluster_count}
        report["levels"][name] = best
    sup = report["levels"]["superordinate"]
    bas = report["levels"]["basic"]
    report["coarse_before_fine"] = sup["gamma_lo"] <= bas["gamma_lo"]
    return report


def novelty_spec(seed: int = 0) -> HierarchySpec:
    """Blob layout for the novelty experiment: four well-separated Gaussian
    blobs in 8 dimensions.  The dimension keeps uniform-box outliers sparse
    enough that they attach to blobs instead of each other."""
    return HierarchySpec(superordinate_count=4, basic_per_super=1,
                         points_per_basic=250, super_separation=12.0,
                         basic_separation=3.0, dimension=8, seed=seed)


def run_novelty_experiment(spec: HierarchySpec = None, fraction: float = 0.05,
                           spread: float = 1.0, gamma_max: float = 2.0,
                           k: int = 30, opts: OptimizeOptions = None) -> dict:
    """Cluster at the widest plateau and score novelty by item energy."""
    if fraction <= 0.0:
        raise InputError("novelty experiment needs a positive outlier fraction")
    if spec is None:
        spec = novelty_spec()
    points, _, _ = generate_hierarchy(spec)
    points, flags = inject_outliers(points, fraction, spread, seed=spec.seed + 1)
    graph = points_to_graph(points, k=k)
    if opts is None:
        opts = OptimizeOptions(seed=spec.seed)
    configs = find_configurations(graph, gamma_max, opts)
    labels, gamma, entry = _working_partition(configs)
    scores = item_energy_scores(graph, labels, gamma)
    auc = roc_auc(scores.scores, flags)
    return {"spec": asdict(spec), "fraction": fraction, "gamma": gamma,
            "clusters": entry.cluster_count, "auc": auc,
            "novel_mean": float(scores.scores[flags].mean()),
            "familiar_mean": float(scores.scores[~flags].mean()),
            "scores": scores.scores.tolist(),
            "novel_flags": flags.tolist()}


def kmeans_baseline(points, k: int, seed: int = 0, max_iter: int = 100):
    """Lloyd iterations from k distinct seeded items; deterministic per seed."""
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ParameterError(f"k must satisfy 1 <= k <= n, got {k}")
    rng = np.random.default_rng(seed)
    centers = points[rng.choice(n, size=k, replace=False)].copy()
    assign = None
    for _it in range(max_iter):
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assign = np.argmin(d2, axis=1)
        for c in range(k):
            if not np.any(new_assign == c):
                # reseed an empty cluster from the point farthest from its center
                far = int(np.argmax(d2[np.arange(n), new_assign]))
                centers[c] = points[far]
                new_assign[far] = c
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c in range(k):
            members = points[assign == c]
            if len(members):
                centers[c] = members.mean(axis=0)
    return canonicalize(assign)


def detect_events(p_t, p_next, mass_threshold: float = 0.2,
                  min_counterparts: int = 2):
    """Splits/merges between consecutive partitions from their contingency.

    A cluster of p_t spreading >= mass_threshold of its mass onto
    min_counterparts or more clusters of p_next is a split; a cluster of
    p_next drawing likewise from several clusters of p_t is a merge.
    """
    table = contingency(p_t, p_next)
    counts = table.counts.astype(np.float64)
    events = []
    r = table.row_sums
    for i in range(counts.shape[0]):
        heavy = np.nonzero(counts[i] / r[i] >= mass_threshold)[0]
        if len(heavy) >= min_counterparts:
            events.append(("split", int(i), tuple(int(j) for j in heavy)))
    c = table.col_sums
    for j in range(counts.shape[1]):
        heavy = np.nonzero(counts[:, j] / c[j] >= mass_threshold)[0]
        if len(heavy) >= min_counterparts:
            events.append(("merge", int(j), tuple(int(i) for i in heavy)))
    return events


@dataclass(frozen=True)
class EvolutionTrace:
    timesteps: int
    true_labels: tuple             # per-step ground-truth labellings
    partitions: dict               # method -> list of per-step labellings
    inverse_ari_series: dict       # method -> list of length T-1
    events: tuple                  # (t, kind, clusters involved)


def _evolution_centers(spec: HierarchySpec, t: int, split_at, merge_at):
    """Per-step subgroup centers, truth label ids, and subgroup sizes.

    The item count is constant across steps: a split moves the two halves
    of cluster 0's points apart, a merge drifts the last two clusters onto
    their midpoint.
    """
    _, centers = hierarchy_centers(spec)
    centers = centers.copy()
    b = centers.shape[0]
    ppb = spec.points_per_basic
    out_centers = [centers[i] for i in range(b)]
    labels = list(range(b))
    sizes = [ppb] * b
    if split_at is not None and t >= split_at:
        # cluster 0 bifurcates over two steps along the first axis
        f = min((t - split_at + 1) / 2.0, 1.0)
        delta = np.zeros(spec.dimension)
        delta[0] = 0.75 * spec.basic_separation * f
        half = ppb // 2
        out_centers[0] = centers[0] - delta
        sizes[0] = ppb - half
        out_centers.insert(1, centers[0] + delta)
        labels.insert(1, b if f >= 1.0 else 0)
        sizes.insert(1, half)
    if merge_at is not None and t >= merge_at and b >= 3:
        # the last two clusters coalesce over two steps
        f = min((t - merge_at + 1) / 2.0, 1.0)
        mid = 0.5 * (centers[b - 2] + centers[b - 1])
        out_centers[-2] = centers[b - 2] + f * (mid - centers[b - 2])
        out_centers[-1] = centers[b - 1] + f * (mid - centers[b - 1])
        if f >= 1.0:
            labels[-1] = labels[-2]
    return (np.array(out_centers), np.array(labels, dtype=np.int64),
            np.array(sizes, dtype=np.int64))


def run_evolution_experiment(timesteps: int = 12, split_at: int = 4,
                             merge_at: int = 8, spec: HierarchySpec = None,
                             methods=("configurations", "kmeans"),
                             gamma_max: float = 2.0, k: int = None,
                             seed: int = None) -> EvolutionTrace:
    """Cluster each step independently; compare consecutive-step stability.

    The configurations method re-selects its resolution per step (widest
    plateau); k-means keeps k frozen at the step-0 truth cluster count.
    """
    if spec is None:
        spec = HierarchySpec(superordinate_count=2, basic_per_super=2,
                             points_per_basic=40, super_separation=14.0,
                             basic_separation=5.0, noise_sigma=1.0)
    if seed is None:
        seed = spec.seed
    if k is None:
        k = default_neighbors(spec)
    for event_t, name in ((split_at, "split_at"), (merge_at, "merge_at")):
        if event_t is not None and not 0 <= event_t < timesteps:
            raise ParameterError(f"{name}={event_t} outside [0, {timesteps})")
    rng = np.random.default_rng(seed)
    true_labels = []
    step_points = []
    for t in range(timesteps):
        centers, label_ids, sizes = _evolution_centers(spec, t, split_at, merge_at)
        pts = []
        labs = []
        for c in range(centers.shape[0]):
            pts.append(centers[c] + spec.noise_sigma * rng.standard_normal(
                (int(sizes[c]), spec.dimension)))
            labs.extend([label_ids[c]] * int(sizes[c]))
        step_points.append(np.concatenate(pts, axis=0))
        true_labels.append(canonicalize(np.array(labs, dtype=np.int64)))
    k0 = int(true_labels[0].max()) + 1
    partitions = {m: [] for m in methods}
    for t in range(timesteps):
        pts = step_points[t]
        for method in methods:
            if method == "configurations":
                graph = points_to_graph(pts, k=k)
                configs = find_configurations(
                    graph, gamma_max, OptimizeOptions(seed=seed))
                labels, _, _ = _working_partition(configs)
                partitions[method].append(labels)
            elif method == "kmeans":
                partitions[method].append(
                    kmeans_baseline(pts, k0, seed=seed * 1000 + t))
            else:
                raise ParameterError(f"unknown method {method!r}")
    series = {
        m: [inverse_ari(partitions[m][t], partitions[m][t + 1])
            for t in range(timesteps - 1)]
        for m in methods}
    events = []
    for t in range(timesteps - 1):
        for kind, cid, parts in detect_events(true_labels[t], true_labels[t + 1]):
            events.append((t + 1, kind, (cid,) + parts))
    return EvolutionTrace(
        timesteps=timesteps,
        true_labels=tuple(true_labels),
        partitions=partitions,
        inverse_ari_series=series,
        events=tuple(events))
