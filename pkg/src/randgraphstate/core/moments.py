"""Second moments of graph-state output distributions.

Per-graph quantities come from two independent routes: the state vector
(Walsh-Hadamard transform of the phased graph state) and the exact
crossing-parity sum over disjoint vertex sets ``L, R``. Ensemble averages for
the pairing and matching models are exact rationals assembled from
Krawtchouk values and double factorials.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from randgraphstate.core.errors import BudgetExceededError
from randgraphstate.core.graphs import (
    EnsembleSpec,
    Graph,
    Multigraph,
    iter_perfect_matchings,
    sample_graph,
)
from randgraphstate.core.krawtchouk import double_factorial, krawtchouk_row
from randgraphstate.core.montecarlo import (
    MomentEstimate,
    SeedLike,
    as_generator,
    estimate,
    summarize,
    validate_seed,
)

logger = logging.getLogger(__name__)

ExactRational = Fraction

MAX_STATEVECTOR_QUBITS = 14
MAX_STATMECH_QUBITS = 16
MAX_TERNARY_QUBITS = 12
MAX_EXACT_N = 64
MAX_EXACT_D = 8
MAX_BRUTEFORCE_MATCHING_N = 12
ANGLE_CHUNK_ENTRIES = 1 << 20
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class AngleVector:
    """Measurement angles in the X-Y plane, reduced to ``[0, 2*pi)``."""

    theta: tuple[float, ...]

    def __post_init__(self) -> None:
        reduced = tuple(float(t) % TWO_PI for t in self.theta)
        object.__setattr__(self, "theta", reduced)

    @property
    def n(self) -> int:
        return len(self.theta)

    @classmethod
    def zeros(cls, n: int) -> AngleVector:
        return cls((0.0,) * n)

    @classmethod
    def random(cls, n: int, seed: SeedLike) -> AngleVector:
        return cls(tuple(as_generator(seed).uniform(0.0, TWO_PI, size=n)))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.theta, dtype=float)


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """Probabilities of the ``2**n`` measurement outcomes; qubit ``j`` is bit ``j``."""

    n: int
    probs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} probabilities, got shape {probs.shape}")
        if np.any(probs < -1e-15):
            raise ValueError("probabilities must be non-negative")
        total = float(probs.sum())
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"probabilities sum to {total!r}, expected 1")
        object.__setattr__(self, "probs", probs)


# ------------------ State-vector route ------------------


def _check_qubits(n: int, limit: int, what: str) -> None:
    if n > limit:
        raise BudgetExceededError(what, n, limit)


def _index_bits(n: int) -> np.ndarray:
    """``(2**n, n)`` 0/1 matrix; row ``z`` holds the bits of ``z``."""
    index = np.arange(1 << n, dtype=np.int64)
    return ((index[:, None] >> np.arange(n)) & 1).astype(np.int8)


def _edge_parity(g: Graph) -> np.ndarray:
    """``x^T U x mod 2`` for every basis index ``x``."""
    index = np.arange(1 << g.n, dtype=np.int64)
    parity = np.zeros(1 << g.n, dtype=np.int64)
    for u, v in g.edges:
        parity ^= (index >> u) & (index >> v) & 1
    return parity


def walsh_hadamard(values: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis."""
    out = np.asarray(values)
    lead = out.shape[:-1]
    size = out.shape[-1]
    half = 1
    while half < size:
        blocks = out.reshape(*lead, -1, 2, half)
        out = np.stack(
            (blocks[..., 0, :] + blocks[..., 1, :], blocks[..., 0, :] - blocks[..., 1, :]),
            axis=-2,
        ).reshape(*lead, size)
        half *= 2
    return out


def graph_state_vector(g: Graph) -> np.ndarray:
    """Amplitudes ``(-1)^{x^T U x} / sqrt(2**n)`` in the computational basis."""
    _check_qubits(g.n, MAX_STATEVECTOR_QUBITS, "state-vector qubits")
    signs = 1.0 - 2.0 * _edge_parity(g)
    return signs / math.sqrt(1 << g.n)


def _outcome_probabilities(g: Graph, thetas: np.ndarray) -> np.ndarray:
    """Rows of outcome probabilities for rows of angles, shape ``(B, 2**n)``."""
    signs = 1.0 - 2.0 * _edge_parity(g)
    phases = np.exp(-1j * (thetas @ _index_bits(g.n).T.astype(float)))
    amplitudes = walsh_hadamard(signs[None, :] * phases) / float(1 << g.n)
    return np.abs(amplitudes) ** 2


def graph_state_distribution(g: Graph, theta: AngleVector) -> OutcomeDistribution:
    """Outcome distribution of ``|G>`` measured qubit-wise at angles ``theta``.

    Qubit ``j`` is projected on ``(|0> + (-1)^{x_j} e^{i theta_j} |1>)/sqrt(2)``.
    """
    _check_qubits(g.n, MAX_STATEVECTOR_QUBITS, "state-vector qubits")
    if theta.n != g.n:
        raise ValueError(f"need {g.n} angles, got {theta.n}")
    probs = _outcome_probabilities(g, theta.as_array()[None, :])[0]
    return OutcomeDistribution(g.n, probs)


def m2_of_distribution(p: OutcomeDistribution) -> float:
    """Normalized second moment ``2**n * sum p(x)**2``."""
    return float((1 << p.n) * np.dot(p.probs, p.probs))


def anticoncentration_fraction(p: OutcomeDistribution, alpha: float) -> float:
    """Fraction of outcomes with ``p(x) >= alpha / 2**n``."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    threshold = alpha / (1 << p.n) * (1.0 - 1e-12)
    return float(np.count_nonzero(p.probs >= threshold)) / (1 << p.n)


def angle_chunk_rows(n: int) -> int:
    """Angle rows per batch so one ``(rows, 2**n)`` array stays near ``ANGLE_CHUNK_ENTRIES``."""
    return max(1, ANGLE_CHUNK_ENTRIES >> n)


def m2_angle_samples(g: Graph, thetas: np.ndarray) -> np.ndarray:
    """``m2(G, theta)`` for each row of ``thetas`` (shape ``(B, n)``)."""
    _check_qubits(g.n, MAX_STATEVECTOR_QUBITS, "state-vector qubits")
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    if thetas.shape[1] != g.n:
        raise ValueError(f"need {g.n} angles per row, got {thetas.shape[1]}")
    out = np.empty(thetas.shape[0], dtype=float)
    chunk = angle_chunk_rows(g.n)
    for start in range(0, thetas.shape[0], chunk):
        probs = _outcome_probabilities(g, thetas[start : start + chunk])
        out[start : start + chunk] = (1 << g.n) * np.einsum("ij,ij->i", probs, probs)
    return out


def mc_angle_average(g: Graph, samples: int, seed: int) -> MomentEstimate:
    """Monte Carlo average of ``m2(G, theta)`` over uniform angles."""
    if samples < 1:
        raise ValueError(f"samples must be positive, got {samples}")
    rng = as_generator(validate_seed(seed))
    thetas = rng.uniform(0.0, TWO_PI, size=(samples, g.n))
    return summarize(m2_angle_samples(g, thetas), seed)


# ------------------ Crossing-parity route ------------------


def m2_statmech(g: Graph) -> Fraction:
    """Exact angle average ``2^{-n} sum_{L,R disjoint} (-1)^{|E(L,R)|}``.

    Summing over ``R`` first factorizes: for a fixed ``L`` every vertex outside
    ``L`` contributes ``1 + (-1)^{|N(v) & L|}``, so only sets ``L`` that every
    outside vertex meets an even number of times survive, each with weight
    ``2^{-|L|}``.
    """
    _check_qubits(g.n, MAX_STATMECH_QUBITS, "statmech qubits")
    n = g.n
    masks = np.arange(1 << n, dtype=np.uint64)
    odd = np.zeros(1 << n, dtype=bool)
    for v in range(n):
        outside = ((masks >> np.uint64(v)) & np.uint64(1)) == 0
        hits = np.bitwise_count(masks & np.uint64(g.neighbor_mask(v))) & 1
        odd |= outside & (hits == 1)
    sizes = np.bitwise_count(masks[~odd]).astype(np.int64)
    counts = np.bincount(sizes, minlength=n + 1)
    numerator = sum(int(counts[s]) << (n - s) for s in range(n + 1))
    return Fraction(numerator, 1 << n)


def m2_statmech_ternary(g: Graph) -> Fraction:
    """Same sum, enumerated over all ``3**n`` (out, L, R) labelings in Gray-code order.

    Each step moves one vertex between adjacent labels, so the crossing
    parity updates from that vertex's neighbourhood alone.
    """
    _check_qubits(g.n, MAX_TERNARY_QUBITS, "ternary enumeration qubits")
    n = g.n
    hoods = [g.neighbor_mask(v) for v in range(n)]
    digits = [0] * n
    direction = [1] * n
    sets = [0, 0, 0]
    parity = 0
    total = 1
    for _ in range(3**n - 1):
        j = 0
        while not 0 <= digits[j] + direction[j] <= 2:
            direction[j] = -direction[j]
            j += 1
        old = digits[j]
        new = old + direction[j]
        bit = 1 << j
        sets[old] &= ~bit
        if old:
            parity ^= (hoods[j] & sets[3 - old]).bit_count() & 1
        if new:
            parity ^= (hoods[j] & sets[3 - new]).bit_count() & 1
        sets[new] |= bit
        digits[j] = new
        total += -1 if parity else 1
    return Fraction(total, 1 << n)


def m2_statmech_multigraph(g: Multigraph) -> Fraction:
    """Crossing sum with integer edge multiplicities; loops never cross."""
    _check_qubits(g.n, MAX_STATMECH_QUBITS, "statmech qubits")
    n = g.n
    masks = np.arange(1 << n, dtype=np.int64)
    members = [(masks >> v) & 1 for v in range(n)]
    crossings = [np.zeros(1 << n, dtype=np.int64) for _ in range(n)]
    for (u, v), count in g.multiplicities().items():
        if u == v:
            continue
        crossings[v] += count * members[u]
        crossings[u] += count * members[v]
    odd = np.zeros(1 << n, dtype=bool)
    for v in range(n):
        odd |= (members[v] == 0) & (crossings[v] % 2 == 1)
    sizes = np.bitwise_count(masks[~odd].astype(np.uint64)).astype(np.int64)
    counts = np.bincount(sizes, minlength=n + 1)
    numerator = sum(int(counts[s]) << (n - s) for s in range(n + 1))
    return Fraction(numerator, 1 << n)


# ------------------ Matching parity ------------------


def _check_parity_args(n: int, a: int, b: int) -> None:
    if n < 0 or n % 2:
        raise ValueError(f"perfect matchings need an even n >= 0, got {n}")
    if a < 0 or b < 0:
        raise ValueError(f"set sizes must be non-negative, got a={a}, b={b}")
    if a + b > n:
        raise ValueError(f"a + b must not exceed n, got a={a}, b={b}, n={n}")


@lru_cache(maxsize=None)
def _matching_parity_numerator(n: int, a: int, b: int) -> int:
    """``(n-1)!! * E[(-1)^{|M(L,R)|}]`` for ``|L| = a``, ``|R| = b``.

    Sizes are first rotated so the complement ``T`` is the largest set, using
    ``E(L,R) = E(R,L)`` and ``E(L,R) = (-1)^{|L|} E(L,T)`` (edges leaving
    ``L`` number ``|L|`` mod 2).
    """
    c = n - a - b
    sign = 1
    if c >= a and c >= b:
        pass
    elif b >= a:
        sign = -1 if a % 2 else 1
        b = c
    else:
        sign = -1 if b % 2 else 1
        a, b = b, c
    rows = krawtchouk_row(n - a, b, a)
    total = 0
    for i in range(a % 2, a + 1, 2):
        weight = math.factorial(a) // double_factorial(a - i)
        total += rows[i] * weight * double_factorial(n - a - i - 1)
    return sign * total


def avg_matching_parity(n: int, a: int, b: int) -> Fraction:
    """Average of ``(-1)^{#matching edges between L and R}`` over uniform perfect matchings."""
    _check_parity_args(n, a, b)
    if n == 0:
        return Fraction(1)
    return Fraction(_matching_parity_numerator(n, a, b), double_factorial(n - 1))


def avg_matching_parity_bruteforce(n: int, a: int, b: int) -> Fraction:
    """Enumeration oracle with ``L = {0..a-1}`` and ``R = {a..a+b-1}``."""
    _check_parity_args(n, a, b)
    if n > MAX_BRUTEFORCE_MATCHING_N:
        raise BudgetExceededError("matching enumeration size", n, MAX_BRUTEFORCE_MATCHING_N)
    side = [0] * a + [1] * b + [2] * (n - a - b)
    total = 0
    count = 0
    for matching in iter_perfect_matchings(range(n)):
        crossing = sum(1 for u, v in matching if {side[u], side[v]} == {0, 1})
        total += -1 if crossing % 2 else 1
        count += 1
    return Fraction(total, count)


# ------------------ Ensemble averages ------------------


def _check_exact_args(model: str, n: int, d: int) -> None:
    if model not in ("pairing", "matching"):
        raise ValueError(f"exact averages exist for pairing/matching, got {model!r}")
    if n < 1 or d < 1:
        raise ValueError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    if n > MAX_EXACT_N:
        raise BudgetExceededError("exact-formula n", n, MAX_EXACT_N)
    if d > MAX_EXACT_D:
        raise BudgetExceededError("exact-formula d", d, MAX_EXACT_D)
    if model == "pairing" and (n * d) % 2:
        raise ValueError(f"pairing model needs n*d even, got n={n}, d={d}")
    if model == "matching" and n % 2:
        raise ValueError(f"matching model needs n even, got n={n}")


def _summand_numerator(model: str, n: int, d: int, k: int, l: int) -> int:
    """Integer summand over the common denominator of the model."""
    multinomial = math.comb(n, k) * math.comb(n - k, l)
    if model == "pairing":
        return multinomial * _matching_parity_numerator(d * n, d * k, d * l)
    return multinomial * _matching_parity_numerator(n, k, l) ** d


def _common_denominator(model: str, n: int, d: int) -> int:
    if model == "pairing":
        return (1 << n) * double_factorial(d * n - 1)
    return (1 << n) * double_factorial(n - 1) ** d


def _row_numerator(model: str, n: int, d: int, k: int) -> int:
    return sum(_summand_numerator(model, n, d, k, l) for l in range(n - k + 1))


def _exact_avg_m2(model: str, n: int, d: int, threads: int = 1) -> Fraction:
    _check_exact_args(model, n, d)
    ks = range(n + 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda k: _row_numerator(model, n, d, k), ks))
    else:
        rows = [_row_numerator(model, n, d, k) for k in ks]
    value = Fraction(sum(rows), _common_denominator(model, n, d))
    logger.debug("Exact E[m2] %s n=%d d=%d = %.12g", model, n, d, float(value))
    return value


def exact_avg_m2_pairing(n: int, d: int, threads: int = 1) -> Fraction:
    """Exact ``E[m2]`` over pairing-model graphs and uniform angles.

    Every vertex splits into its ``d`` half-edges, so vertex sets of sizes
    ``k, l`` become half-edge sets of sizes ``dk, dl`` under one perfect
    matching on ``dn`` points.
    """
    return _exact_avg_m2("pairing", n, d, threads)


def exact_avg_m2_matching(n: int, d: int, threads: int = 1) -> Fraction:
    """Exact ``E[m2]`` over the union of ``d`` independent perfect matchings."""
    return _exact_avg_m2("matching", n, d, threads)


def exact_avg_m2(model: str, n: int, d: int, threads: int = 1) -> Fraction:
    return _exact_avg_m2(model, n, d, threads)


def moment_summand_table(model: str, n: int, d: int) -> dict[tuple[int, int], Fraction]:
    """Per-``(k, l)`` contributions to the exact average; they sum to it."""
    _check_exact_args(model, n, d)
    denominator = _common_denominator(model, n, d)
    return {
        (k, l): Fraction(_summand_numerator(model, n, d, k, l), denominator)
        for k in range(n + 1)
        for l in range(n - k + 1)
    }


def avg_m2_float(model: str, n: int, d: int) -> float:
    """Float evaluation of the exact average.

    Inner parity sums stay in integers; only the per-summand ratios are
    rounded, then accumulated with ``math.fsum``. Skips the large final
    fraction reduction.
    """
    _check_exact_args(model, n, d)
    terms = []
    for k in range(n + 1):
        for l in range(n - k + 1):
            log_weight = (
                math.lgamma(n + 1)
                - math.lgamma(k + 1)
                - math.lgamma(l + 1)
                - math.lgamma(n - k - l + 1)
                - n * math.log(2.0)
            )
            if model == "pairing":
                parity = _matching_parity_numerator(d * n, d * k, d * l) / double_factorial(d * n - 1)
            else:
                parity = (_matching_parity_numerator(n, k, l) / double_factorial(n - 1)) ** d
            terms.append(math.exp(log_weight) * parity)
    return math.fsum(terms)


def conditioned_m2_ceiling(n: int, d: int) -> Fraction:
    """Upper bound on ``E[m2]`` over uniform simple ``d``-regular graphs.

    Conditioning on simplicity costs at most the inverse acceptance
    probability, which is at least ``2^{-d^2}``.
    """
    return (1 << (d * d)) * exact_avg_m2_pairing(n, d)


def asymptotic_m2(d: int) -> int:
    """Large-``n`` limit of ``E[m2]``: 2 for odd ``d``, 3 for even ``d``."""
    if d < 1:
        raise ValueError(f"degree must be positive, got {d}")
    return 2 if d % 2 else 3


# ------------------ Monte Carlo ------------------


def mc_avg_m2(
    spec: EnsembleSpec,
    samples: int,
    mode: str = "statmech",
    angle_samples: int = 1,
    threads: int = 1,
) -> MomentEstimate:
    """Mean of ``m2`` over sampled graphs.

    ``statmech`` evaluates the exact angle average per graph; ``statevector``
    draws ``angle_samples`` angle vectors per graph and averages ``m2`` over
    them. Per-sample generators derive from ``spec.seed``.
    """
    if mode == "statmech":
        limit = MAX_STATMECH_QUBITS
    elif mode == "statevector":
        limit = MAX_STATEVECTOR_QUBITS
    else:
        raise ValueError(f"mode must be 'statmech' or 'statevector', got {mode!r}")
    _check_qubits(spec.n, limit, f"{mode} qubits")
    if angle_samples < 1:
        raise ValueError(f"angle_samples must be positive, got {angle_samples}")

    def one_sample(rng: np.random.Generator) -> float:
        g = sample_graph(spec, rng)
        if mode == "statmech":
            return float(m2_statmech(g))
        thetas = rng.uniform(0.0, TWO_PI, size=(angle_samples, spec.n))
        return float(np.mean(m2_angle_samples(g, thetas)))

    return estimate(one_sample, samples, spec.seed, threads)


def graph_moment_report(g: Graph, angle_samples: int, seed: int) -> dict:
    """Both exact routes plus the angle Monte Carlo for a single graph."""
    exact = m2_statmech(g)
    report = {
        "n": g.n,
        "edges": g.edge_count,
        "statmech_num": exact.numerator,
        "statmech_den": exact.denominator,
        "statmech": float(exact),
    }
    if g.n <= MAX_TERNARY_QUBITS:
        report["ternary_agrees"] = m2_statmech_ternary(g) == exact
    if angle_samples > 0:
        report["angle_mc"] = mc_angle_average(g, angle_samples, seed).to_dict()
    return report


def exact_table(model: str, d: int, ns: Sequence[int]) -> list[dict]:
    """Rows ``model, n, d, num, den, float_value`` for the exact averages."""
    rows = []
    for n in ns:
        value = exact_avg_m2(model, n, d)
        rows.append(
            {
                "model": model,
                "n": n,
                "d": d,
                "num": value.numerator,
                "den": value.denominator,
                "float_value": float(value),
            }
        )
    return rows
