"""Attraction-repulsion energy of a partition and incremental move deltas.

The objective is H = h_a + gamma * h_r with h_a the negated sum of
within-cluster attraction and h_r the sum of within-cluster repulsion.
Both components are gamma-independent, so H is linear in gamma for a
fixed partition.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError, ParameterError
from .graph import AffinityGraph
from . import kernels


@dataclass(frozen=True)
class EnergySummary:
    gamma: float
    h_a: float
    h_r: float
    total: float

    def at(self, gamma: float) -> float:
        """H of the same partition at another resolution."""
        return self.h_a + gamma * self.h_r


def canonicalize(labels) -> np.ndarray:
    """Relabel clusters in first-occurrence order starting at 0."""
    labels = np.asarray(labels, dtype=np.int64)
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    # rank each unique value by where it first appears
    rank = np.argsort(np.argsort(first, kind="stable"), kind="stable")
    return rank[inverse].astype(np.int64)


def cluster_count(labels) -> int:
    return int(np.max(labels)) + 1 if len(labels) else 0


def _check(graph: AffinityGraph, labels, gamma: float) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape[0] != graph.n:
        raise InputError(f"partition length {labels.shape[0]} != graph.n {graph.n}")
    if gamma < 0.0:
        raise ParameterError(f"gamma must be >= 0, got {gamma}")
    return labels


def landscape_point(graph: AffinityGraph, labels) -> tuple:
    """(h_a, h_r) coordinates of a partition in the energy landscape."""
    labels = _check(graph, labels, 0.0)
    h_a, h_r = kernels.energy_components(
        graph.indptr, graph.indices, graph.weights, labels,
        graph.rep_mode, graph.rep_strength, graph.rep_denom,
        graph.rep_indptr, graph.rep_indices, graph.rep_weights)
    return float(h_a), float(h_r)


def hamiltonian(graph: AffinityGraph, labels, gamma: float) -> EnergySummary:
    labels = _check(graph, labels, gamma)
    h_a, h_r = landscape_point(graph, labels)
    return EnergySummary(gamma=float(gamma), h_a=h_a, h_r=h_r,
                         total=h_a + gamma * h_r)


def move_delta(graph: AffinityGraph, labels, item: int, target: int,
               gamma: float) -> float:
    """H(after moving item to target) - H(before); target = K opens a new cluster."""
    labels = _check(graph, labels, gamma)
    if not 0 <= item < graph.n:
        raise InputError(f"item {item} out of range")
    k = cluster_count(labels)
    if not 0 <= target <= k:
        raise InputError(f"target {target} out of range [0, {k}]")
    cluster_rho = np.zeros(k)
    np.add.at(cluster_rho, labels, graph.rep_strength)
    return float(kernels.move_delta(
        graph.indptr, graph.indices, graph.weights,
        graph.rep_mode, graph.rep_strength, graph.rep_denom,
        graph.rep_indptr, graph.rep_indices, graph.rep_weights,
        float(gamma), labels, cluster_rho, item, target))
