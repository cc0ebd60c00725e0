"""Binary Krawtchouk polynomials in exact integer arithmetic, plus pointwise bounds.

``K_i^N(x) = sum_q (-1)^q C(x, q) C(N - x, i - q)``. The direct sum is the
source of truth; rows over the degree use the three-term recurrence and are
checked against it in the test suite. Bounds are returned as floats computed
in log space.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

logger = logging.getLogger(__name__)


def _check_domain(i: int, N: int, x: int) -> None:
    if N < 0:
        raise ValueError(f"N must be non-negative, got {N}")
    if not 0 <= i <= N:
        raise ValueError(f"degree i must lie in [0, N={N}], got {i}")
    if not 0 <= x <= N:
        raise ValueError(f"evaluation point x must lie in [0, N={N}], got {x}")


def krawtchouk(i: int, N: int, x: int) -> int:
    """Exact ``K_i^N(x)`` by the defining alternating sum."""
    _check_domain(i, N, x)
    total = 0
    for q in range(max(0, i - (N - x)), min(i, x) + 1):
        term = math.comb(x, q) * math.comb(N - x, i - q)
        total += -term if q % 2 else term
    return total


def krawtchouk_row(N: int, x: int, i_max: int) -> list[int]:
    """``[K_0^N(x), ..., K_{i_max}^N(x)]`` via the degree recurrence.

    ``(i + 1) K_{i+1} = (N - 2x) K_i - (N - i + 1) K_{i-1}``; every division is
    exact because the values are integers.
    """
    _check_domain(i_max, N, x)
    row = [1]
    if i_max >= 1:
        row.append(N - 2 * x)
    for i in range(1, i_max):
        numerator = (N - 2 * x) * row[i] - (N - i + 1) * row[i - 1]
        value, remainder = divmod(numerator, i + 1)
        if remainder:
            raise ArithmeticError(f"non-integral recurrence step at i={i + 1}, N={N}, x={x}")
        row.append(value)
    return row


def _log_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _exp_or_inf(value: float) -> float:
    try:
        return math.exp(value)
    except OverflowError:
        return math.inf


def orth_bound(i: int, N: int, t: int) -> float:
    """``2^{N/2} C(N,i)^{1/2} C(N,t)^{-1/2}``, from the orthogonality relation."""
    _check_domain(i, N, t)
    log_value = 0.5 * N * math.log(2.0) + 0.5 * _log_comb(N, i) - 0.5 * _log_comb(N, t)
    return _exp_or_inf(log_value)


def derksen_bound(i: int, N: int, t: int) -> float:
    """``C(N,i) (i/N + (N-2t)^2/N^2)^{i/2}``.

    The centred form ``(N-2t)`` is what makes the bound hold at ``t = N``
    (``|K_1^2(2)| = 2``); the uncentred ``(N-t)`` variant fails there.
    """
    _check_domain(i, N, t)
    if i == 0:
        return 1.0
    base = i / N + ((N - 2 * t) / N) ** 2
    log_value = _log_comb(N, i) + 0.5 * i * math.log(base)
    return _exp_or_inf(log_value)


@lru_cache(maxsize=None)
def double_factorial(m: int) -> int:
    """``m!!`` with ``0!! = (-1)!! = 1``."""
    if m < -1:
        raise ValueError(f"double factorial undefined for {m}")
    return math.prod(range(m, 0, -2))


def orthogonality_defect(N: int) -> int:
    """Largest deviation of ``sum_t C(N,t) K_i(t) K_j(t)`` from ``2^N C(N,i) [i == j]``.

    Exactly 0 when the binomial-weight orthogonality holds.
    """
    table = [krawtchouk_row(N, t, N) for t in range(N + 1)]
    weights = [math.comb(N, t) for t in range(N + 1)]
    worst = 0
    for i in range(N + 1):
        for j in range(i, N + 1):
            inner = sum(w * row[i] * row[j] for w, row in zip(weights, table))
            expected = (1 << N) * math.comb(N, i) if i == j else 0
            worst = max(worst, abs(inner - expected))
    if worst:
        logger.warning("Krawtchouk orthogonality defect %d at N=%d", worst, N)
    return worst


@dataclass(frozen=True)
class KrawtchoukEval:
    """One exact evaluation ``K_i^N(x)``."""

    i: int
    N: int
    x: int
    value: int

    @classmethod
    def evaluate(cls, i: int, N: int, x: int) -> KrawtchoukEval:
        return cls(i, N, x, krawtchouk(i, N, x))

    def to_dict(self) -> dict:
        """Convert to dictionary; the value is a decimal string to keep it exact."""
        return {
            "i": self.i,
            "N": self.N,
            "x": self.x,
            "value": str(self.value),
            "orth_bound": orth_bound(self.i, self.N, self.x),
            "derksen_bound": derksen_bound(self.i, self.N, self.x),
        }
