import numpy as np
import pytest

from helpers import (
    brute_force_max_matching,
    brute_force_min_cover,
    complete_graph,
    cycle_graph,
    path_graph,
    random_gnp,
)
from vcgap.bipartite_vc import Matching, konig_cover, max_matching, maximal_matching_cover
from vcgap.errors import ArgumentError
from vcgap.graph_core import Bipartition, Graph, find_odd_cycle, verify_cover
from vcgap.harness_cli import generate_graph


def bipartite_k(a: int, b: int) -> Graph:
    return Graph.build(range(a + b), [(i, a + j) for i in range(a) for j in range(b)])


class TestMaxMatching:
    def test_path_three(self):
        g = path_graph(3)
        m = max_matching(g, find_odd_cycle(g))
        assert m.size == 1

    def test_c6(self):
        g = cycle_graph(6)
        assert brute_force_max_matching(g) == 3
        m = max_matching(g, find_odd_cycle(g))
        assert m.size == 3

    def test_k33(self):
        g = bipartite_k(3, 3)
        assert brute_force_max_matching(g) == 3
        assert max_matching(g, find_odd_cycle(g)).size == 3

    def test_matching_edges_are_disjoint_graph_edges(self):
        g = generate_graph("bipartite_gnp", 14, 0.4, seed=2)
        m = max_matching(g, find_odd_cycle(g))
        used = [v for e in m.edges for v in e]
        assert len(used) == len(set(used))
        assert all(e in g.edges for e in m.edges)

    def test_invalid_parts_rejected(self):
        g = path_graph(3)
        with pytest.raises(ArgumentError):
            max_matching(g, Bipartition(frozenset({1, 2}), frozenset({3})))
        with pytest.raises(ArgumentError):
            max_matching(g, Bipartition(frozenset({1}), frozenset({3})))


class TestKonigCover:
    def test_path_three_center(self):
        g = path_graph(3)
        parts = find_odd_cycle(g)
        cover = konig_cover(g, parts, max_matching(g, parts))
        assert cover.in_cover == {2}

    def test_c6_size_three(self):
        g = cycle_graph(6)
        parts = find_odd_cycle(g)
        cover = konig_cover(g, parts, max_matching(g, parts))
        assert cover.size == 3 == brute_force_min_cover(g)

    def test_single_edge(self):
        g = complete_graph(2)
        parts = find_odd_cycle(g)
        cover = konig_cover(g, parts, max_matching(g, parts))
        assert cover.size == 1

    def test_equality_on_random_bipartite(self):
        rng = np.random.default_rng(83)
        for _ in range(50):
            n = int(rng.integers(2, 13))
            g = generate_graph("bipartite_gnp", n, float(rng.random()), seed=int(rng.integers(1 << 30)))
            parts = find_odd_cycle(g)
            assert isinstance(parts, Bipartition)
            m = max_matching(g, parts)
            cover = konig_cover(g, parts, m)
            assert cover.size == m.size == brute_force_min_cover(g)
            ok, _ = verify_cover(g, cover)
            assert ok


class TestMaximalMatchingCover:
    def test_k2_takes_both(self):
        cover = maximal_matching_cover(complete_graph(2))
        assert cover.in_cover == {1, 2}

    def test_k3_size_two(self):
        assert maximal_matching_cover(complete_graph(3)).size == 2

    def test_edgeless_empty(self):
        assert maximal_matching_cover(Graph.build(range(4), [])).size == 0

    def test_c5_two_matched_edges(self):
        assert maximal_matching_cover(cycle_graph(5)).size == 4

    def test_within_factor_two_of_optimum(self):
        rng = np.random.default_rng(89)
        for _ in range(30):
            n = int(rng.integers(1, 13))
            g = random_gnp(n, float(rng.random()), seed=int(rng.integers(1 << 30)))
            cover = maximal_matching_cover(g)
            ok, _ = verify_cover(g, cover)
            assert ok
            assert cover.size <= 2 * brute_force_min_cover(g)
