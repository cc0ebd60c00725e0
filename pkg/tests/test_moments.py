import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randgraphstate.core.errors import BudgetExceededError
from randgraphstate.core.graphs import (
    EnsembleSpec,
    Graph,
    Multigraph,
    complete_graph,
    cycle_graph,
    empty_graph,
    iter_perfect_matchings,
    path_graph,
    sample_erdos_renyi,
    sample_pairing,
    simplify,
    star_graph,
)
from randgraphstate.core.moments import (
    ANGLE_CHUNK_ENTRIES,
    AngleVector,
    OutcomeDistribution,
    angle_chunk_rows,
    anticoncentration_fraction,
    asymptotic_m2,
    avg_m2_float,
    avg_matching_parity,
    avg_matching_parity_bruteforce,
    conditioned_m2_ceiling,
    exact_avg_m2,
    exact_avg_m2_matching,
    exact_avg_m2_pairing,
    exact_table,
    graph_moment_report,
    graph_state_distribution,
    graph_state_vector,
    m2_angle_samples,
    m2_of_distribution,
    m2_statmech,
    m2_statmech_multigraph,
    m2_statmech_ternary,
    mc_angle_average,
    mc_avg_m2,
    moment_summand_table,
    walsh_hadamard,
)


def _dense_distribution(g: Graph, theta: np.ndarray) -> np.ndarray:
    """Outcome probabilities by explicit Kronecker products."""
    psi = graph_state_vector(g)
    probs = []
    for x in range(1 << g.n):
        factors = []
        for j in reversed(range(g.n)):
            sign = -1.0 if (x >> j) & 1 else 1.0
            factors.append(np.array([1.0, sign * np.exp(-1j * theta[j])]) / math.sqrt(2))
        bra = factors[0]
        for factor in factors[1:]:
            bra = np.kron(bra, factor)
        probs.append(abs(np.dot(bra, psi)) ** 2)
    return np.array(probs)


class TestOutcomeDistribution:
    """State-vector route for a fixed graph and angles."""

    def test_single_qubit_at_zero_angle(self):
        p = graph_state_distribution(empty_graph(1), AngleVector.zeros(1))
        assert p.probs == pytest.approx([1.0, 0.0], abs=1e-12)

    def test_single_qubit_at_quarter_turn(self):
        p = graph_state_distribution(empty_graph(1), AngleVector((math.pi / 2,)))
        assert p.probs == pytest.approx([0.5, 0.5], abs=1e-12)

    @pytest.mark.parametrize("g", [complete_graph(2), path_graph(3), star_graph(4), cycle_graph(5)])
    def test_matches_kronecker_products(self, seed, g):
        theta = AngleVector.random(g.n, seed)
        p = graph_state_distribution(g, theta)
        assert p.probs == pytest.approx(_dense_distribution(g, theta.as_array()), abs=1e-12)

    def test_angles_reduced(self):
        assert AngleVector((2 * math.pi + 1.0,)).theta == pytest.approx((1.0,))

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            OutcomeDistribution(1, np.array([0.5, 0.4]))
        with pytest.raises(ValueError):
            OutcomeDistribution(2, np.array([0.5, 0.5]))

    def test_rejects_wrong_angle_count(self):
        with pytest.raises(ValueError):
            graph_state_distribution(path_graph(3), AngleVector.zeros(2))

    def test_walsh_hadamard_small(self):
        assert walsh_hadamard(np.array([1.0, 0.0, 0.0, 0.0])).tolist() == [1.0, 1.0, 1.0, 1.0]
        assert walsh_hadamard(np.array([0.0, 1.0])).tolist() == [1.0, -1.0]

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            graph_state_vector(empty_graph(15))


class TestSecondMoment:
    """m2 and anticoncentration of a fixed distribution."""

    def test_uniform(self):
        assert m2_of_distribution(OutcomeDistribution(2, np.full(4, 0.25))) == pytest.approx(1.0)

    def test_point_mass(self):
        assert m2_of_distribution(OutcomeDistribution(3, np.eye(8)[5])) == pytest.approx(8.0)

    def test_biased_bit(self):
        p = OutcomeDistribution(1, np.array([0.75, 0.25]))
        assert m2_of_distribution(p) == pytest.approx(1.25)

    def test_anticoncentration(self):
        uniform = OutcomeDistribution(2, np.full(4, 0.25))
        assert anticoncentration_fraction(uniform, 1.0) == 1.0
        point = OutcomeDistribution(2, np.eye(4)[0])
        assert anticoncentration_fraction(point, 0.5) == 0.25
        with pytest.raises(ValueError):
            anticoncentration_fraction(uniform, 0.0)

    def test_angle_samples_match_distribution(self, seed):
        g = cycle_graph(4)
        rng = np.random.default_rng(seed)
        thetas = rng.uniform(0, 2 * math.pi, size=(5, 4))
        values = m2_angle_samples(g, thetas)
        for theta, value in zip(thetas, values):
            expected = m2_of_distribution(graph_state_distribution(g, AngleVector(tuple(theta))))
            assert value == pytest.approx(expected, rel=1e-10)

    @pytest.mark.parametrize("n", [1, 10, 12, 14])
    def test_angle_batches_shrink_with_qubits(self, n):
        rows = angle_chunk_rows(n)
        assert rows >= 1
        assert rows << n <= ANGLE_CHUNK_ENTRIES

    def test_angle_samples_across_batches(self, seed):
        g = cycle_graph(12)
        rows = angle_chunk_rows(12) + 7
        thetas = np.random.default_rng(seed).uniform(0, 2 * math.pi, size=(rows, 12))
        batched = m2_angle_samples(g, thetas)
        single = np.concatenate([m2_angle_samples(g, thetas[i : i + 1]) for i in range(rows)])
        np.testing.assert_allclose(batched, single, rtol=1e-12)


class TestStatmech:
    """Exact angle average by the crossing-parity sum."""

    def test_empty_single_qubit(self):
        assert m2_statmech(empty_graph(1)) == Fraction(3, 2)

    def test_single_edge(self):
        assert m2_statmech(complete_graph(2)) == Fraction(5, 4)

    def test_empty_graph_is_product(self):
        assert m2_statmech(empty_graph(4)) == Fraction(3, 2) ** 4

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.floats(0.0, 1.0))
    def test_ternary_oracle_agrees(self, seed, n, p):
        g = sample_erdos_renyi(n, p, seed)
        assert m2_statmech_ternary(g) == m2_statmech(g)

    def test_relabelling_invariant(self, seed):
        rng = np.random.default_rng(seed)
        g = sample_erdos_renyi(9, 0.4, rng)
        perm = [int(p) for p in rng.permutation(9)]
        assert m2_statmech(g.relabeled(perm)) == m2_statmech(g)

    def test_triangle_angle_average(self, seed):
        g = complete_graph(3)
        result = mc_angle_average(g, 100_000, seed)
        assert result.within(float(m2_statmech(g)))

    def test_random_graphs_angle_average(self, seed):
        rng = np.random.default_rng(seed)
        for index in range(5):
            g = sample_erdos_renyi(int(rng.integers(2, 7)), 0.5, rng)
            result = mc_angle_average(g, 20_000, seed + index)
            assert result.within(float(m2_statmech(g)))

    def test_multigraph_reading_matches_simplified(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(20):
            g = sample_pairing(8, 3, rng)
            assert m2_statmech_multigraph(g) == m2_statmech(simplify(g))

    def test_multigraph_ignores_loops_and_double_edges(self):
        g = Multigraph(3, ((0, 0), (1, 2), (1, 2), (0, 1)))
        assert m2_statmech_multigraph(g) == m2_statmech(Graph.from_edges(3, [(0, 1)]))

    def test_budgets(self):
        with pytest.raises(BudgetExceededError):
            m2_statmech(empty_graph(17))
        with pytest.raises(BudgetExceededError):
            m2_statmech_ternary(empty_graph(13))

    def test_report(self, seed):
        report = graph_moment_report(path_graph(3), 2000, seed)
        assert report["ternary_agrees"] is True
        assert Fraction(report["statmech_num"], report["statmech_den"]) == m2_statmech(path_graph(3))
        assert report["angle_mc"]["samples"] == 2000


class TestMatchingParity:
    """Closed-form averages over perfect matchings."""

    def test_anchor_values(self):
        assert avg_matching_parity(4, 1, 1) == Fraction(1, 3)
        assert avg_matching_parity(6, 2, 2) == Fraction(-1, 15)
        assert avg_matching_parity(0, 0, 0) == 1

    def test_matches_enumeration(self):
        for n in range(2, 11, 2):
            for a in range(n + 1):
                for b in range(n - a + 1):
                    assert avg_matching_parity(n, a, b) == avg_matching_parity_bruteforce(n, a, b)

    def test_symmetric_in_set_sizes(self):
        for a, b in itertools.product(range(8), repeat=2):
            if a + b <= 14:
                assert avg_matching_parity(14, a, b) == avg_matching_parity(14, b, a)

    def test_argument_errors(self):
        with pytest.raises(ValueError):
            avg_matching_parity(5, 1, 1)
        with pytest.raises(ValueError):
            avg_matching_parity(4, 3, 2)
        with pytest.raises(ValueError):
            avg_matching_parity(4, -1, 0)


def _pairing_average_by_enumeration(n: int, d: int) -> Fraction:
    total = Fraction(0)
    count = 0
    for pairing in iter_perfect_matchings(range(n * d)):
        g = Multigraph(n, tuple((a // d, b // d) for a, b in pairing))
        total += m2_statmech(simplify(g))
        count += 1
    return total / count


def _matching_average_by_enumeration(n: int, d: int) -> Fraction:
    matchings = list(iter_perfect_matchings(range(n)))
    total = Fraction(0)
    count = 0
    for choice in itertools.product(matchings, repeat=d):
        edges = tuple(edge for matching in choice for edge in matching)
        total += m2_statmech(simplify(Multigraph(n, edges)))
        count += 1
    return total / count


class TestExactEnsembleAverage:
    """Exact E[m2] for the pairing and matching ensembles."""

    def test_anchor_values(self):
        assert exact_avg_m2_pairing(2, 1) == Fraction(5, 4)
        assert exact_avg_m2_pairing(2, 2) == Fraction(9, 4)
        assert exact_avg_m2_matching(2, 1) == Fraction(5, 4)

    @pytest.mark.parametrize("n, d", [(2, 2), (2, 3), (4, 1), (4, 2), (4, 3)])
    def test_pairing_matches_enumeration(self, n, d):
        assert exact_avg_m2_pairing(n, d) == _pairing_average_by_enumeration(n, d)

    @pytest.mark.parametrize("n, d", [(2, 2), (4, 2), (4, 3), (6, 2)])
    def test_matching_matches_enumeration(self, n, d):
        assert exact_avg_m2_matching(n, d) == _matching_average_by_enumeration(n, d)

    def test_threads_do_not_change_value(self):
        assert exact_avg_m2("pairing", 20, 3, threads=4) == exact_avg_m2("pairing", 20, 3)

    def test_at_least_one(self):
        for model in ("pairing", "matching"):
            for n in (2, 6, 10):
                assert exact_avg_m2(model, n, 2) >= 1

    def test_summand_table_sums_to_value(self):
        table = moment_summand_table("matching", 8, 3)
        assert sum(table.values()) == exact_avg_m2_matching(8, 3)
        assert all(table[(k, l)] == table[(l, k)] for k, l in table)

    @pytest.mark.parametrize("model, n, d", [("pairing", 12, 3), ("matching", 16, 4), ("pairing", 30, 2)])
    def test_float_evaluation(self, model, n, d):
        assert avg_m2_float(model, n, d) == pytest.approx(float(exact_avg_m2(model, n, d)), rel=1e-9)

    def test_argument_errors(self):
        with pytest.raises(ValueError):
            exact_avg_m2_pairing(3, 3)
        with pytest.raises(ValueError):
            exact_avg_m2_matching(3, 2)
        with pytest.raises(ValueError):
            exact_avg_m2("erdos-renyi", 4, 2)
        with pytest.raises(BudgetExceededError):
            exact_avg_m2_pairing(66, 2)

    def test_exact_table_rows(self):
        rows = exact_table("matching", 2, [2, 4])
        assert [row["n"] for row in rows] == [2, 4]
        assert Fraction(rows[0]["num"], rows[0]["den"]) == exact_avg_m2_matching(2, 2)

    def test_asymptote(self):
        assert [asymptotic_m2(d) for d in (1, 2, 3, 4)] == [2, 3, 2, 3]
        with pytest.raises(ValueError):
            asymptotic_m2(0)

    def test_conditioned_ceiling(self):
        assert conditioned_m2_ceiling(6, 2) == 16 * exact_avg_m2_pairing(6, 2)

    @pytest.mark.slow
    @pytest.mark.parametrize("model", ["pairing", "matching"])
    @pytest.mark.parametrize("d", [3, 4])
    def test_approach_to_limit(self, model, d):
        limit = asymptotic_m2(d)
        gaps = [abs(avg_m2_float(model, n, d) - limit) for n in range(16, 65, 8)]
        assert gaps[-1] <= 0.25
        if d % 2:
            # odd degree: the gap peaks near n = 24 before shrinking
            assert gaps[1] > gaps[0]
            gaps = gaps[1:]
        assert all(later <= earlier + 1e-12 for earlier, later in zip(gaps, gaps[1:]))


class TestMonteCarloEnsemble:
    """Sampled ensemble averages."""

    def test_pairing_two_vertices(self, seed):
        result = mc_avg_m2(EnsembleSpec("pairing", 2, 2, seed=seed), 5000)
        assert result.within(2.25)

    def test_pairing_matches_exact(self, seed):
        result = mc_avg_m2(EnsembleSpec("pairing", 6, 3, seed=seed), 3000)
        assert result.within(float(exact_avg_m2_pairing(6, 3)))

    def test_statevector_and_statmech_agree(self, seed):
        spec = EnsembleSpec("matching", 8, 3, seed=seed)
        exact_route = mc_avg_m2(spec, 800)
        sampled_route = mc_avg_m2(spec, 800, mode="statevector", angle_samples=4)
        joint = math.hypot(exact_route.stderr, sampled_route.stderr)
        assert abs(exact_route.mean - sampled_route.mean) <= 4 * joint

    def test_thread_count_does_not_change_result(self, seed):
        spec = EnsembleSpec("pairing", 10, 3, seed=seed)
        assert mc_avg_m2(spec, 200, threads=4) == mc_avg_m2(spec, 200, threads=1)

    def test_uniform_regular_below_ceiling(self, seed):
        result = mc_avg_m2(EnsembleSpec("uniform-regular", 8, 3, seed=seed), 300)
        assert result.mean <= float(conditioned_m2_ceiling(8, 3))
        assert result.mean >= 1.0

    def test_rejects_unknown_mode(self, seed):
        with pytest.raises(ValueError):
            mc_avg_m2(EnsembleSpec("pairing", 4, 2, seed=seed), 10, mode="tensor")
