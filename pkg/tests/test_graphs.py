import json

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import G1_LITERAL, G2_LITERAL, G3_LITERAL
from multisync.errors import ValidationError
from multisync.graphs import (
    WeightedDigraph,
    circulant,
    directed_cycle,
    directed_path,
    from_laplacian,
    graph_from_json,
    graph_sum,
    graph_to_json,
    has_spanning_directed_tree,
    is_balanced,
    is_strongly_connected,
    laplacian,
    reversal,
    support_strongly_connected,
    three_layer_example,
    two_layer_circulant_example,
)
from multisync.instances import random_digraph


def _digraph_from_edges(n, edges):
    W = np.zeros((n, n))
    for i, j in edges:
        W[i, j] = 1.0
    return WeightedDigraph(W)


def _cycle_edges(vertices):
    return list(zip(vertices, vertices[1:] + vertices[:1]))


@st.composite
def digraphs(draw, min_n=2, max_n=7):
    n = draw(st.integers(min_n, max_n))
    mask = draw(arrays(np.bool_, (n, n)))
    w = draw(arrays(np.float64, (n, n), elements=st.floats(0.1, 5.0)))
    W = np.where(mask, w, 0.0)
    np.fill_diagonal(W, 0.0)
    return WeightedDigraph(W)


def _zero_multiplicity(L, tol=1e-7):
    vals = np.linalg.eigvals(L)
    return int(np.sum(np.abs(vals) <= tol * max(1.0, np.linalg.norm(L))))


class TestDigraph:
    def test_rejects_negative_weight(self):
        with pytest.raises(ValidationError):
            WeightedDigraph([[0.0, -1.0], [0.0, 0.0]])

    def test_rejects_self_loop(self):
        with pytest.raises(ValidationError):
            WeightedDigraph([[1.0, 0.0], [0.0, 0.0]])

    def test_weights_immutable(self):
        g = directed_cycle(3)
        with pytest.raises(ValueError):
            g.weights[0, 1] = 5.0


class TestLaplacian:
    def test_directed_three_cycle(self):
        expected = [[1, -1, 0], [0, 1, -1], [-1, 0, 1]]
        np.testing.assert_array_equal(laplacian(directed_cycle(3)), expected)

    def test_empty_graph(self):
        np.testing.assert_array_equal(laplacian(WeightedDigraph(np.zeros((4, 4)))), 0)

    @pytest.mark.parametrize("G", [G1_LITERAL, G2_LITERAL, G3_LITERAL])
    def test_rebuild_from_offdiagonal_pattern(self, G):
        A = -G.copy()
        np.fill_diagonal(A, 0.0)
        np.testing.assert_array_equal(laplacian(WeightedDigraph(A)), G)

    @given(digraphs())
    def test_rows_sum_to_zero(self, g):
        L = laplacian(g)
        bound = 8 * np.finfo(float).eps * g.weights.sum(axis=1)
        assert np.all(np.abs(L @ np.ones(g.n)) <= bound)

    @given(st.integers(2, 7).flatmap(
        lambda n: arrays(np.int64, (n, n), elements=st.integers(0, 64))))
    def test_rows_sum_to_zero_exactly_for_dyadic_weights(self, K):
        W = K / 8.0
        np.fill_diagonal(W, 0.0)
        L = laplacian(WeightedDigraph(W))
        assert np.all(L @ np.ones(len(W)) == 0)

    @given(digraphs())
    def test_roundtrip(self, g):
        assert from_laplacian(laplacian(g)) == g

    def test_from_laplacian_rejects_bad_rows(self):
        with pytest.raises(ValidationError):
            from_laplacian([[1.0, 0.0], [0.0, 0.0]])


class TestExample:
    def test_matches_printed_matrices(self):
        for G, lit in zip(three_layer_example(), (G1_LITERAL, G2_LITERAL, G3_LITERAL)):
            np.testing.assert_array_equal(G, lit)

    def test_g1_row_sums(self):
        np.testing.assert_array_equal(three_layer_example()[0].sum(axis=1), 0)

    def test_g2_first_row(self):
        np.testing.assert_array_equal(three_layer_example()[1][0], [2, -1, 0, 0, -1])

    def test_g3_last_row(self):
        np.testing.assert_array_equal(three_layer_example()[2][4], [-1, -1, -1, 0, 3])


class TestGraphSum:
    def test_with_empty(self):
        g = directed_cycle(4)
        assert graph_sum([g, WeightedDigraph(np.zeros((4, 4)))]) == g

    def test_mismatched_orders(self):
        with pytest.raises(ValidationError):
            graph_sum([directed_cycle(3), directed_cycle(4)])

    def test_two_layers_of_disjoint_cycles(self):
        a = _digraph_from_edges(5, _cycle_edges([0, 1, 2]) + _cycle_edges([3, 4]))
        b = _digraph_from_edges(5, _cycle_edges([0, 3]) + _cycle_edges([1, 2, 4]))
        for g in (a, b):
            assert not is_strongly_connected(g)
            assert _zero_multiplicity(laplacian(g)) == 2
        s = graph_sum([a, b])
        assert is_strongly_connected(s)
        assert _zero_multiplicity(laplacian(s)) == 1

    def test_example_sum(self):
        gs = [from_laplacian(G) for G in three_layer_example()]
        np.testing.assert_array_equal(laplacian(graph_sum(gs)),
                                      G1_LITERAL + G2_LITERAL + G3_LITERAL)

    @given(st.lists(digraphs(4, 4), min_size=1, max_size=4))
    def test_commutes_with_laplacian(self, gs):
        np.testing.assert_allclose(laplacian(graph_sum(gs)), sum(laplacian(g) for g in gs),
                                   atol=1e-12)


class TestReversal:
    @given(digraphs())
    def test_involution(self, g):
        assert reversal(reversal(g)) == g

    def test_single_edge(self):
        r = reversal(_digraph_from_edges(3, [(1, 2)]))
        assert r == _digraph_from_edges(3, [(2, 1)])

    @given(digraphs())
    def test_preserves_balance(self, g):
        W = g.weights
        # degree-count oracle
        oracle = np.allclose(W.sum(axis=0), W.sum(axis=1), atol=1e-9)
        assert is_balanced(reversal(g)) == is_balanced(g) == oracle


class TestSpanningTree:
    def test_path(self):
        ok, roots = has_spanning_directed_tree(directed_path(3))
        assert ok and roots == {0}

    def test_two_disjoint_two_cycles(self):
        g = _digraph_from_edges(4, _cycle_edges([0, 1]) + _cycle_edges([2, 3]))
        assert has_spanning_directed_tree(g) == (False, frozenset())

    def test_example_sum_reversal(self):
        gs = [from_laplacian(G) for G in three_layer_example()]
        ok, roots = has_spanning_directed_tree(reversal(graph_sum(gs)))
        # BFS oracle from networkx
        nxg = nx.DiGraph()
        nxg.add_nodes_from(range(5))
        W = reversal(graph_sum(gs)).weights
        nxg.add_edges_from(zip(*np.nonzero(W)))
        expected = {r for r in range(5) if len(nx.descendants(nxg, r)) == 4}
        assert ok and roots == expected

    def test_matches_simple_zero_eigenvalue_on_random_layers(self, rng):
        """Spanning tree of the reversed sum iff the summed Laplacian has a
        simple zero eigenvalue."""
        for trial in range(220):
            n = int(rng.integers(4, 8))
            r = int(rng.integers(1, 4))
            gs = [random_digraph(rng, n, density=rng.uniform(0.05, 0.35)) for _ in range(r)]
            ok, _ = has_spanning_directed_tree(reversal(graph_sum(gs)))
            L = sum(laplacian(g) for g in gs)
            assert ok == (_zero_multiplicity(L) == 1), trial


class TestPredicates:
    def test_cycle_balanced_and_connected(self):
        g = directed_cycle(5)
        assert is_balanced(g) and is_strongly_connected(g)

    def test_single_edge_unbalanced(self):
        assert not is_balanced(_digraph_from_edges(2, [(0, 1)]))

    def test_path_not_strongly_connected(self):
        assert not is_strongly_connected(directed_path(4))

    def test_g3_balance_by_column_sums(self):
        # column sums of G3 are (-1, -1, -2, 1, 3): not balanced
        np.testing.assert_array_equal(G3_LITERAL.sum(axis=0), [-1, -1, -2, 1, 3])
        assert not is_balanced(from_laplacian(three_layer_example()[2]))

    @pytest.mark.parametrize("G", [G1_LITERAL, G2_LITERAL, G3_LITERAL])
    def test_symmetrized_support_irreducible(self, G):
        S = G + G.T
        closure = nx.transitive_closure(nx.from_numpy_array(
            (np.abs(S) > 0).astype(int) - np.eye(5, dtype=int), create_using=nx.DiGraph))
        oracle = all(closure.has_edge(i, j) for i in range(5) for j in range(5) if i != j)
        assert support_strongly_connected(S) == oracle

    @given(digraphs())
    def test_strong_connectivity_matches_networkx(self, g):
        nxg = nx.DiGraph()
        nxg.add_nodes_from(range(g.n))
        nxg.add_edges_from(zip(*np.nonzero(g.weights)))
        assert is_strongly_connected(g) == nx.is_strongly_connected(nxg)

    @given(digraphs())
    def test_balance_iff_zero_column_sums(self, g):
        L = laplacian(g)
        assert is_balanced(g) == bool(np.abs(L.sum(axis=0)).max() <= 1e-10 * max(1, np.linalg.norm(g.weights)))


class TestCirculantExample:
    def test_layers_disconnected_sum_connected(self):
        a, b = two_layer_circulant_example()
        assert not is_strongly_connected(a) and not is_strongly_connected(b)
        assert is_strongly_connected(graph_sum([a, b]))

    def test_laplacians_commute(self):
        La, Lb = (laplacian(g) for g in two_layer_circulant_example())
        np.testing.assert_allclose(La @ Lb, Lb @ La, atol=1e-12)

    def test_circulant_rejects_zero_shift(self):
        with pytest.raises(ValidationError):
            circulant(4, {4: 1.0})


class TestJson:
    def test_roundtrip(self):
        g = directed_cycle(4, 2.5)
        assert graph_from_json(json.loads(json.dumps(graph_to_json(g)))) == g

    def test_laplacian_form(self):
        g = graph_from_json({"n": 5, "laplacian": G1_LITERAL.tolist()})
        np.testing.assert_array_equal(laplacian(g), G1_LITERAL)

    @pytest.mark.parametrize("obj", [
        {"weights": [[0]]},
        {"n": 2},
        {"n": 3, "weights": [[0, 1], [1, 0]]},
        {"n": 2, "laplacian": [[1, 0], [0, 0]]},
    ])
    def test_rejects_bad(self, obj):
        with pytest.raises(ValidationError):
            graph_from_json(obj)
