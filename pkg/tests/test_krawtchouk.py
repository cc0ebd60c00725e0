import math

import pytest

from randgraphstate.core.krawtchouk import (
    KrawtchoukEval,
    derksen_bound,
    double_factorial,
    krawtchouk,
    krawtchouk_row,
    orth_bound,
    orthogonality_defect,
)

SLACK = 1 + 1e-9


def test_small_values():
    assert krawtchouk(0, 5, 3) == 1
    assert krawtchouk(1, 4, 1) == 2
    assert krawtchouk(2, 4, 2) == -2
    assert krawtchouk(1, 2, 2) == -2
    assert krawtchouk(3, 3, 3) == -1


def test_degree_one_is_linear():
    for N in range(1, 15):
        for x in range(N + 1):
            assert krawtchouk(1, N, x) == N - 2 * x


def test_row_examples():
    assert krawtchouk_row(4, 0, 4) == [1, 4, 6, 4, 1]
    assert krawtchouk_row(4, 2, 4) == [1, 0, -2, 0, 1]


def test_row_matches_direct_sum():
    for N in range(31):
        for x in range(N + 1):
            assert krawtchouk_row(N, x, N) == [krawtchouk(i, N, x) for i in range(N + 1)]


def test_reflection_symmetry():
    for N in range(21):
        for i in range(N + 1):
            for t in range(N + 1):
                assert krawtchouk(i, N, N - t) == (-1) ** i * krawtchouk(i, N, t)


def test_orthogonality_is_exact():
    for N in range(25):
        assert orthogonality_defect(N) == 0


def test_domain_errors():
    with pytest.raises(ValueError):
        krawtchouk(5, 4, 0)
    with pytest.raises(ValueError):
        krawtchouk(1, 4, 5)
    with pytest.raises(ValueError):
        krawtchouk(0, -1, 0)
    with pytest.raises(ValueError):
        krawtchouk_row(3, 4, 1)


class TestBounds:
    """Pointwise magnitude bounds."""

    def test_orth_bound_example(self):
        assert orth_bound(0, 2, 1) == pytest.approx(math.sqrt(2))

    def test_orth_bound_minimized_at_centre(self):
        N = 10
        for i in range(N + 1):
            values = [orth_bound(i, N, t) for t in range(N + 1)]
            assert min(values) == pytest.approx(orth_bound(i, N, N // 2))

    def test_bounds_hold_exhaustively(self):
        for N in range(1, 21):
            for i in range(N + 1):
                for t in range(N + 1):
                    value = abs(krawtchouk(i, N, t))
                    assert value <= orth_bound(i, N, t) * SLACK
                    assert value <= derksen_bound(i, N, t) * SLACK

    def test_derksen_degree_zero(self):
        assert derksen_bound(0, 7, 3) == 1.0

    def test_derksen_holds_at_far_end(self):
        assert abs(krawtchouk(1, 2, 2)) == 2
        assert derksen_bound(1, 2, 2) >= 2 / SLACK

    def test_large_arguments_stay_finite_or_inf(self):
        assert math.isfinite(orth_bound(500, 1000, 500))
        assert derksen_bound(500, 1000, 0) > 0


def test_double_factorial():
    assert double_factorial(-1) == 1
    assert double_factorial(0) == 1
    assert double_factorial(5) == 15
    assert double_factorial(6) == 48
    with pytest.raises(ValueError):
        double_factorial(-3)


def test_eval_to_dict_keeps_exact_value():
    record = KrawtchoukEval.evaluate(30, 60, 0).to_dict()
    assert record["value"] == str(math.comb(60, 30))
    assert record["orth_bound"] >= math.comb(60, 30) / SLACK
