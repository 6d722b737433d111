import itertools

import numpy as np
import pytest

from confres.graph import build_knn_graph, derive_affinity, from_edge_list


def random_affinity(rng, n=None, scheme=None):
    """Small random affinity graph for property tests."""
    if n is None:
        n = int(rng.integers(4, 9))
    if scheme is None:
        scheme = rng.choice(["configuration_null", "uniform"])
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.7:
                edges.append((i, j, float(rng.random())))
    if not edges:
        edges = [(0, 1, 1.0)]
    return from_edge_list(n, edges, repulsion_scheme=scheme)


def blob_points(rng, centers, per=30, sigma=1.0, dim=2):
    pts = [np.asarray(c, dtype=float) + sigma * rng.standard_normal((per, dim))
           for c in centers]
    labels = np.repeat(np.arange(len(centers)), per)
    return np.concatenate(pts, axis=0), labels


def blob_graph(rng, centers, per=30, sigma=1.0, dim=2, k=10):
    pts, labels = blob_points(rng, centers, per, sigma, dim)
    return derive_affinity(build_knn_graph(pts, k=k)), labels


def set_partitions(n):
    """All partitions of range(n) as label vectors (restricted growth)."""
    labels = np.zeros(n, dtype=np.int64)

    def rec(i, maxlab):
        if i == n:
            yield labels.copy()
            return
        for lab in range(maxlab + 2):
            labels[i] = lab
            yield from rec(i + 1, max(maxlab, lab))

    yield from rec(1, 0)


def dense_energy(graph, labels, gamma):
    """Brute-force H from dense attraction/repulsion matrices."""
    a = graph.attraction_dense()
    r = graph.repulsion_dense()
    labels = np.asarray(labels)
    same = labels[:, None] == labels[None, :]
    np.fill_diagonal(same, False)
    h_a = -0.5 * a[same].sum()
    h_r = 0.5 * r[same].sum()
    return h_a + gamma * h_r, h_a, h_r


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
