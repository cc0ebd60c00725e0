import itertools
import json
import logging
import math
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from randgraphstate.core.errors import BudgetExceededError
from randgraphstate.core.graphs import (
    Graph,
    complete_graph,
    cycle_graph,
    empty_graph,
    grid_graph,
    path_graph,
    sample_erdos_renyi,
    sample_uniform_regular,
    sparsified_grid_graph,
    star_graph,
)
from randgraphstate.core.subgraphs import (
    PatternGraph,
    automorphism_count,
    count_induced,
    cycle_count_limit,
    expected_induced_count,
    graph_density,
    induced_probability_leading,
    is_connected,
    is_isomorphic,
    mc_induced_count,
    parse_pattern,
    sparse_overlap_condition,
)

C4 = PatternGraph.from_graph(cycle_graph(4), "c4")


def _pattern(n: int, edges: list) -> PatternGraph:
    return PatternGraph.from_graph(Graph.from_edges(n, edges))


def _brute_force_count(host: Graph, pattern: Graph) -> int:
    nx_host = host.to_networkx()
    nx_pattern = pattern.to_networkx()
    return sum(
        nx.is_isomorphic(nx_host.subgraph(combo), nx_pattern)
        for combo in itertools.combinations(range(host.n), pattern.n)
    )


class TestPatternInvariants:
    """Automorphisms, density and connectivity of small patterns."""

    def test_automorphisms(self):
        assert automorphism_count(cycle_graph(4)) == 8
        assert automorphism_count(path_graph(3)) == 2
        assert automorphism_count(complete_graph(4)) == 24
        assert automorphism_count(empty_graph(1)) == 1

    def test_density(self):
        assert graph_density(complete_graph(2)) == Fraction(1, 2)
        assert graph_density(grid_graph(2)) == 1
        assert graph_density(sparsified_grid_graph(2)) == 1
        assert graph_density(complete_graph(4)) == Fraction(3, 2)

    @pytest.mark.parametrize("L", [1, 2, 3])
    def test_grid_density_at_most_two(self, L):
        assert graph_density(grid_graph(L)) <= 2

    def test_connectivity(self):
        assert is_connected(cycle_graph(5))
        assert is_connected(empty_graph(1))
        assert not is_connected(empty_graph(2))

    def test_large_patterns_skip_scans(self):
        pattern = parse_pattern("sparsegrid:3")
        assert pattern.v == 33 and pattern.e == 36
        assert pattern.aut is None and pattern.density is None
        assert parse_pattern("grid:3").density == Fraction(4, 3)

    def test_to_dict(self):
        record = C4.to_dict()
        assert (record["v"], record["e"], record["aut"], record["density"]) == (4, 4, 8, "1")

    def test_isomorphism_agrees_with_networkx(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(200):
            g = sample_erdos_renyi(6, 0.5, rng)
            h = sample_erdos_renyi(6, 0.5, rng)
            assert is_isomorphic(g, h) == nx.is_isomorphic(g.to_networkx(), h.to_networkx())
            perm = [int(p) for p in rng.permutation(6)]
            assert is_isomorphic(g, g.relabeled(perm))


class TestCountInduced:
    """Induced copies of a pattern in a host graph."""

    def test_anchor_counts(self):
        assert count_induced(complete_graph(4), C4) == 0
        assert count_induced(cycle_graph(4), C4) == 1
        assert count_induced(grid_graph(3), C4) == 4

    def test_small_patterns(self):
        host = cycle_graph(5)
        assert count_induced(host, parse_pattern("empty:1")) == 5
        assert count_induced(host, parse_pattern("nonedge")) == 5
        assert count_induced(host, parse_pattern("k:2")) == 5
        assert count_induced(host, parse_pattern("path:3")) == 5
        assert count_induced(host, parse_pattern("triangle")) == 0
        assert count_induced(empty_graph(2), parse_pattern("k:3")) == 0

    @pytest.mark.parametrize("name", ["path:4", "star:4", "c4", "k:4", "empty:3", "empty:4"])
    def test_matches_brute_force(self, seed, name):
        pattern = parse_pattern(name)
        rng = np.random.default_rng(seed)
        for _ in range(3):
            host = sample_erdos_renyi(10, 0.4, rng)
            assert count_induced(host, pattern) == _brute_force_count(host, pattern.graph)

    def test_relabelling_invariant(self, seed):
        rng = np.random.default_rng(seed)
        host = sample_erdos_renyi(14, 0.3, rng)
        perm = [int(p) for p in rng.permutation(14)]
        for name in ("c4", "path:3", "star:4"):
            pattern = parse_pattern(name)
            assert count_induced(host.relabeled(perm), pattern) == count_induced(host, pattern)

    def test_complement_identity(self, seed):
        rng = np.random.default_rng(seed)
        for n in (12, 20):
            host = sample_erdos_renyi(n, 0.5, rng)
            for name in ("path:3", "c4", "star:4", "empty:3"):
                pattern = parse_pattern(name)
                flipped = PatternGraph.from_graph(pattern.graph.complement())
                assert count_induced(host, pattern) == count_induced(host.complement(), flipped)

    def test_pattern_budget(self):
        with pytest.raises(BudgetExceededError):
            count_induced(complete_graph(8), parse_pattern("k:7"))

    @pytest.mark.parametrize(
        "n, edges",
        [
            (3, [(0, 1)]),
            (4, [(0, 1)]),
            (4, [(0, 1), (2, 3)]),
            (4, [(0, 1), (1, 2)]),
            (4, [(0, 1), (1, 2), (0, 2)]),
            (5, [(0, 1), (1, 2), (2, 3), (3, 0)]),
            (5, [(0, 1), (2, 3)]),
        ],
    )
    def test_disconnected_patterns_match_brute_force(self, seed, n, edges):
        pattern = _pattern(n, edges)
        assert not pattern.connected
        rng = np.random.default_rng(seed)
        for p in (0.2, 0.5):
            host = sample_erdos_renyi(11, p, rng)
            assert count_induced(host, pattern) == _brute_force_count(host, pattern.graph)

    def test_empty_host(self):
        assert count_induced(empty_graph(200), parse_pattern("empty:5")) == math.comb(200, 5)
        assert count_induced(empty_graph(30), _pattern(4, [(0, 1), (2, 3)])) == 0

    def test_three_sets_on_large_cubic_host(self, seed):
        host = sample_uniform_regular(300, 3, seed)
        independent = count_induced(host, parse_pattern("empty:3"))
        edge_plus_vertex = count_induced(host, _pattern(3, [(0, 1)]))
        paths = count_induced(host, parse_pattern("path:3"))
        triangles = count_induced(host, parse_pattern("triangle"))
        assert independent + edge_plus_vertex + paths + triangles == math.comb(300, 3)
        assert edge_plus_vertex == host.edge_count * 298 - 2 * paths - 3 * triangles

    def test_four_set_types_partition_large_cubic_host(self, seed):
        host = sample_uniform_regular(300, 3, seed)
        shapes = [
            [],
            [(0, 1)],
            [(0, 1), (2, 3)],
            [(0, 1), (1, 2)],
            [(0, 1), (1, 2), (0, 2)],
            [(0, 1), (1, 2), (2, 3)],
            [(0, 1), (0, 2), (0, 3)],
            [(0, 1), (1, 2), (2, 3), (3, 0)],
            [(0, 1), (1, 2), (0, 2), (2, 3)],
            [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)],
            list(itertools.combinations(range(4), 2)),
        ]
        counts = [count_induced(host, _pattern(4, edges)) for edges in shapes]
        assert sum(counts) == math.comb(300, 4)
        assert counts[0] > 0


class TestLeadingOrder:
    """Leading-order induced-subgraph probabilities in random regular graphs."""

    def test_probability_examples(self):
        assert induced_probability_leading(100, 10, 0, 0) == 1.0
        assert induced_probability_leading(200, 14, 1, 0) == pytest.approx(0.07)
        assert induced_probability_leading(50, 5, 0, 1) == pytest.approx(0.9)

    def test_overlap_condition(self):
        assert sparse_overlap_condition(10, 2, 4)
        assert not sparse_overlap_condition(10, 2, 5)

    def test_warns_outside_sparse_regime(self, caplog):
        with caplog.at_level(logging.WARNING, logger="randgraphstate.core.subgraphs"):
            induced_probability_leading(200, 14, 4, 4)
        assert any("advisory" in record.getMessage() for record in caplog.records)

    def test_argument_errors(self):
        with pytest.raises(ValueError):
            induced_probability_leading(10, 10, 1, 0)
        with pytest.raises(ValueError):
            induced_probability_leading(10, 3, -1, 0)
        with pytest.raises(ValueError):
            expected_induced_count(10, 3, parse_pattern("sparsegrid:3"))

    def test_expected_c4_count(self):
        assert expected_induced_count(100, 10, C4) == pytest.approx(952.93, rel=1e-3)

    def test_expected_count_closed_form(self):
        n, d = 10_000, 200
        p = d / n
        expected = math.comb(n, 4) * 24 / 8 * p**4 * (1 - p) ** 2
        assert expected_induced_count(n, d, parse_pattern("grid:2")) == pytest.approx(expected)

    def test_expected_count_edge_cases(self):
        assert expected_induced_count(50, 0, C4) == 0.0
        labelled = math.comb(50, 4) * 3
        assert 0.0 <= expected_induced_count(50, 7, C4) / labelled <= 1.0

    def test_cycle_limit(self):
        assert cycle_count_limit(3, 4) == 2.0
        assert cycle_count_limit(4, 3) == pytest.approx(27 / 6)
        with pytest.raises(ValueError):
            cycle_count_limit(3, 2)


class TestRegularGraphFrequencies:
    """Sampled counts in uniform random regular graphs."""

    def test_fixed_edge_frequency(self, seed):
        n, d, samples = 20, 3, 4000
        rng = np.random.default_rng(seed)
        hits = sum(sample_uniform_regular(n, d, rng).has_edge(0, 1) for _ in range(samples))
        p = d / (n - 1)
        assert abs(hits / samples - p) <= 4 * math.sqrt(p * (1 - p) / samples)

    def test_non_edge_count_is_deterministic(self, seed):
        n, d = 30, 3
        result = mc_induced_count(n, d, parse_pattern("nonedge"), 20, seed)
        assert result.mean == math.comb(n, 2) - n * d // 2
        assert result.stderr == 0.0

    def test_c4_count_tracks_cycle_limit(self, seed):
        n, d = 60, 3
        result = mc_induced_count(n, d, C4, 200, seed)
        limit = cycle_count_limit(d, 4)
        assert 0.5 * limit <= result.mean <= 2.0 * limit
        assert expected_induced_count(n, d, C4) > 2.0 * limit

    def test_threads_do_not_change_estimate(self, seed):
        pattern = parse_pattern("path:3")
        assert mc_induced_count(16, 3, pattern, 30, seed, threads=3) == mc_induced_count(
            16, 3, pattern, 30, seed
        )

    def test_independent_sets_at_largest_host(self, seed):
        result = mc_induced_count(300, 3, parse_pattern("empty:4"), 2, seed)
        assert 0 < result.mean < math.comb(300, 4)

    def test_budgets(self, seed):
        with pytest.raises(BudgetExceededError):
            mc_induced_count(20, 5, C4, 10, seed)
        with pytest.raises(BudgetExceededError):
            mc_induced_count(20, 3, parse_pattern("path:5"), 10, seed)
        with pytest.raises(BudgetExceededError):
            mc_induced_count(400, 3, C4, 10, seed)


class TestParsePattern:
    """Pattern names and JSON files."""

    @pytest.mark.parametrize(
        "text, graph",
        [
            ("c4", cycle_graph(4)),
            ("Triangle", complete_graph(3)),
            ("nonedge", empty_graph(2)),
            ("k:5", complete_graph(5)),
            ("empty:3", empty_graph(3)),
            ("path:4", path_graph(4)),
            ("cycle:6", cycle_graph(6)),
            ("star:5", star_graph(5)),
            ("grid:2", grid_graph(2)),
        ],
    )
    def test_names(self, text, graph):
        assert parse_pattern(text).graph == graph

    def test_json_file(self, tmp_path):
        path = tmp_path / "paw.json"
        path.write_text(json.dumps({"n": 4, "edges": [[0, 1], [1, 2], [0, 2], [2, 3]]}))
        pattern = parse_pattern(str(path))
        assert (pattern.name, pattern.v, pattern.e, pattern.aut) == ("paw.json", 4, 4, 2)

    @pytest.mark.parametrize("text", ["k:0", "path:x", "hexagon", "cycle:2"])
    def test_errors(self, text):
        with pytest.raises(ValueError):
            parse_pattern(text)
