"""kNN construction, affinity derivation, and ingestion."""

import numpy as np
import pytest

from confres.errors import InputError, ParameterError
from confres.graph import (build_knn_graph, derive_affinity, from_edge_list,
                           load_edges_csv, load_labels_csv, load_points_csv)


def _edge_set(graph):
    return {tuple(e) for e in graph.edges.tolist()}


class TestBuildKnn:
    def test_two_points_single_edge(self):
        pts = np.array([[0.0], [2.0]])
        g = build_knn_graph(pts, k=1)
        assert _edge_set(g) == {(0, 1)}
        assert g.distances[0] == pytest.approx(2.0)

    def test_collinear_union(self):
        pts = np.array([[0.0], [1.0], [3.0]])
        g = build_knn_graph(pts, k=1)
        assert _edge_set(g) == {(0, 1), (1, 2)}

    def test_unit_square_excludes_diagonal(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        g = build_knn_graph(pts, k=2)
        assert _edge_set(g) == {(0, 1), (0, 3), (1, 2), (2, 3)}

    def test_tie_breaking_prefers_lower_index(self):
        # item 0 equidistant from 1 and 2; the lower index must win
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [5.0, 5.0]])
        g = build_knn_graph(pts, k=1)
        assert (0, 1) in _edge_set(g)

    def test_row_order_invariance(self, rng):
        pts = rng.standard_normal((40, 3))
        perm = rng.permutation(40)
        g1 = build_knn_graph(pts, k=5)
        g2 = build_knn_graph(pts[perm], k=5)
        inv = np.empty(40, dtype=int)
        inv[perm] = np.arange(40)
        remapped = {tuple(sorted((perm[i], perm[j])))
                    for i, j in _edge_set(g2)}
        assert remapped == _edge_set(g1)

    def test_k_out_of_range(self):
        pts = np.zeros((3, 2))
        with pytest.raises(ParameterError):
            build_knn_graph(pts, k=3)

    def test_non_finite_points(self):
        pts = np.array([[0.0], [np.nan]])
        with pytest.raises(InputError):
            build_knn_graph(pts, k=1)


class TestDeriveAffinity:
    def test_single_edge_normalizes_to_one(self):
        pts = np.array([[0.0], [1.0]])
        g = derive_affinity(build_knn_graph(pts, k=1))
        assert g.attraction_dense()[0, 1] == pytest.approx(1.0)
        assert g.total_weight == pytest.approx(1.0)

    def test_path_splits_middle_mass(self):
        pts = np.array([[0.0], [1.0], [2.0]])
        g = derive_affinity(build_knn_graph(pts, k=1))
        a = g.attraction_dense()
        # middle row of P is (1/2, 1/2); ends give their full unit mass
        assert a[1, 0] == pytest.approx(0.75)
        assert a[1, 2] == pytest.approx(0.75)
        assert np.allclose(a, a.T)

    def test_total_strength_equals_n(self, rng):
        pts = rng.standard_normal((30, 2))
        g = derive_affinity(build_knn_graph(pts, k=4))
        assert g.strengths.sum() == pytest.approx(30.0, abs=1e-9)

    def test_configuration_null_hand_value(self):
        g = from_edge_list(3, [(0, 1, 1.0), (1, 2, 1.0)])
        assert tuple(g.strengths) == (1.0, 2.0, 1.0)
        assert g.total_weight == pytest.approx(2.0)
        assert g.repulsion_dense()[0, 1] == pytest.approx(0.5)

    def test_configuration_null_closed_form_total(self, rng):
        from conftest import random_affinity
        g = random_affinity(rng, scheme="configuration_null")
        s = g.strengths
        expected = (s.sum() ** 2 - (s ** 2).sum()) / (4.0 * g.total_weight)
        r = g.repulsion_dense()
        assert np.triu(r, 1).sum() == pytest.approx(expected, abs=1e-9)

    def test_uniform_scheme(self):
        g = from_edge_list(4, [(0, 1, 1.0)], repulsion_scheme="uniform")
        assert g.repulsion_dense()[2, 3] == pytest.approx(0.25)

    def test_explicit_scheme(self):
        g = from_edge_list(3, [(0, 1, 1.0)], repulsion_scheme="explicit",
                           repulsion_edges=[(1, 2, 0.7)])
        r = g.repulsion_dense()
        assert r[1, 2] == pytest.approx(0.7)
        assert r[0, 1] == 0.0


class TestFromEdgeList:
    def test_basic(self):
        g = from_edge_list(2, [(0, 1, 1.0)])
        assert g.total_weight == pytest.approx(1.0)
        assert tuple(g.strengths) == (1.0, 1.0)

    def test_duplicate_directions_averaged(self):
        g = from_edge_list(2, [(0, 1, 1.0), (1, 0, 3.0)])
        assert g.attraction_dense()[0, 1] == pytest.approx(2.0)

    def test_index_out_of_range(self):
        with pytest.raises(InputError):
            from_edge_list(3, [(0, 5, 1.0)])

    def test_negative_weight(self):
        with pytest.raises(InputError):
            from_edge_list(2, [(0, 1, -1.0)])


class TestLoaders:
    def test_points_roundtrip(self, tmp_path, rng):
        pts = rng.standard_normal((7, 3))
        path = tmp_path / "pts.csv"
        np.savetxt(path, pts, delimiter=",")
        assert np.allclose(load_points_csv(path), pts)

    def test_points_with_header(self, tmp_path):
        path = tmp_path / "pts.csv"
        path.write_text("x,y\n0.5,1.5\n2.5,3.5\n")
        assert np.allclose(load_points_csv(path),
                           [[0.5, 1.5], [2.5, 3.5]])

    def test_labels_single_column(self, tmp_path):
        path = tmp_path / "labels.csv"
        path.write_text("2\n0\n1\n")
        assert load_labels_csv(path).tolist() == [2, 0, 1]

    def test_edges_csv(self, tmp_path):
        path = tmp_path / "edges.csv"
        path.write_text("i,j,w\n0,1,0.5\n1,2,0.25\n")
        edges = load_edges_csv(path)
        assert [tuple(e) for e in edges] == [(0, 1, 0.5), (1, 2, 0.25)]

    def test_malformed_labels(self, tmp_path):
        path = tmp_path / "labels.csv"
        path.write_text("abc\ndef\n")
        with pytest.raises(InputError):
            load_labels_csv(path)
