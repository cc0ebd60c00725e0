"""Geometric-entanglement bounds for graph states from GF(2) rank deficiency.

The best real-stabilizer product state for ``|G>`` puts ``|0>`` outside a set
``S`` and ``|+>``/``|->`` inside it, reaching squared overlap
``2^{-(n - (|S| - rank A[S]))}``. This module finds good sets ``S``, gives the
exact rank law of uniform random adjacency matrices, and evolves the
rank-deficiency Markov chain that describes matrices grown one random
symmetric row and column at a time.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, isqrt

import numpy as np
from scipy import stats

from randgraphstate.core.errors import BudgetExceededError
from randgraphstate.core.gf2 import (
    BATCH_MAX_DIM,
    mask_batch_rows,
    rank_gf2_batch,
    sample_adjacency_batch,
    submatrix_rank,
)
from randgraphstate.core.graphs import EnsembleSpec, Graph, sample_graph
from randgraphstate.core.moments import graph_state_vector, walsh_hadamard
from randgraphstate.core.montecarlo import (
    DEFAULT_SEED,
    MomentEstimate,
    SeedLike,
    as_generator,
    estimate,
    summarize,
    validate_seed,
)

logger = logging.getLogger(__name__)

MAX_EXHAUSTIVE_N = 22
MAX_ALS_N = 12
MAX_RANK_DIST_N = 200
MAX_ENUMERATED_N = 6
DEFAULT_CHAIN_CAP = 64
MASK_CHUNK = 1 << 15
SAMPLE_CHUNK = 10_000
STATIONARY_RESIDUAL = 1e-10


@dataclass(frozen=True)
class DeficiencyResult:
    """Best vertex set found and its rank deficiency ``|S| - rank A[S]``."""

    best_set: tuple[int, ...]
    deficiency: int
    method: str

    def mask(self) -> int:
        return sum(1 << v for v in self.best_set)

    def to_dict(self) -> dict:
        """Convert to dictionary for serialization."""
        return {
            "best_set": list(self.best_set),
            "deficiency": self.deficiency,
            "method": self.method,
        }


@dataclass(frozen=True)
class RankDistribution:
    """Exact law of ``rank A = 2h`` for a uniform ``n x n`` adjacency matrix."""

    n: int
    probs: dict[int, Fraction]

    def total(self) -> Fraction:
        return sum(self.probs.values(), Fraction(0))

    def deficiency_marginal(self) -> dict[int, Fraction]:
        """Law of ``n - rank``."""
        return {self.n - 2 * h: p for h, p in sorted(self.probs.items())}

    def to_rows(self) -> list[dict]:
        return [
            {
                "n": self.n,
                "h": h,
                "rank": 2 * h,
                "num": p.numerator,
                "den": p.denominator,
                "probability": float(p),
            }
            for h, p in sorted(self.probs.items())
        ]


@dataclass(frozen=True, eq=False)
class RankDeficiencyChain:
    """Distribution over deficiency states ``0..cap`` with mass lost past the cap."""

    dist: np.ndarray = field(repr=False)
    parity: str | None = None
    leak: float = 0.0

    def __post_init__(self) -> None:
        dist = np.asarray(self.dist, dtype=float).copy()
        dist.setflags(write=False)
        if dist.ndim != 1 or dist.size < 2:
            raise ValueError("chain distribution must be a vector over at least 2 states")
        if np.any(dist < 0):
            raise ValueError("chain distribution must be non-negative")
        object.__setattr__(self, "dist", dist)

    @property
    def cap(self) -> int:
        return self.dist.size - 1

    @classmethod
    def point_mass(cls, state: int, cap: int = DEFAULT_CHAIN_CAP) -> RankDeficiencyChain:
        if not 0 <= state <= cap:
            raise ValueError(f"state must lie in [0, {cap}], got {state}")
        dist = np.zeros(cap + 1)
        dist[state] = 1.0
        return cls(dist, "even" if state % 2 == 0 else "odd")

    def total(self) -> float:
        return float(self.dist.sum())

    def to_dict(self) -> dict:
        """Convert to dictionary for serialization."""
        support = np.flatnonzero(self.dist > 0)
        last = int(support[-1]) + 1 if support.size else 1
        return {
            "dist": [float(p) for p in self.dist[:last]],
            "parity": self.parity,
            "leak": self.leak,
        }


@dataclass(frozen=True, eq=False)
class ProductState:
    """One normalized single-qubit vector per qubit, shape ``(n, 2)``."""

    vectors: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        vectors = np.asarray(self.vectors, dtype=complex).copy()
        if vectors.ndim != 2 or vectors.shape[1] != 2:
            raise ValueError(f"expected shape (n, 2), got {vectors.shape}")
        norms = np.linalg.norm(vectors, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValueError("every qubit vector must have unit norm")
        vectors.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @classmethod
    def random(cls, n: int, seed: SeedLike) -> ProductState:
        rng = as_generator(seed)
        raw = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
        return cls(raw / np.linalg.norm(raw, axis=1, keepdims=True))

    def to_dict(self) -> dict:
        """Convert to dictionary; amplitudes as ``[re, im]`` pairs."""
        return {
            "vectors": [
                [[float(a.real), float(a.imag)] for a in qubit] for qubit in self.vectors
            ]
        }


# ------------------ Deficiency search ------------------


def _exhaustive_deficiency(g: Graph) -> DeficiencyResult:
    n = g.n
    if n > MAX_EXHAUSTIVE_N:
        raise BudgetExceededError("exhaustive deficiency search n", n, MAX_EXHAUSTIVE_N)
    rows = g.adjacency.to_uint64()
    best_mask, best = 0, 0
    for start in range(0, 1 << n, MASK_CHUNK):
        masks = np.arange(start, min(start + MASK_CHUNK, 1 << n), dtype=np.uint64)
        ranks = rank_gf2_batch(mask_batch_rows(rows, masks))
        deficiency = np.bitwise_count(masks).astype(np.int64) - ranks
        index = int(np.argmax(deficiency))
        if deficiency[index] > best:
            best = int(deficiency[index])
            best_mask = int(masks[index])
    best_set = tuple(v for v in range(n) if (best_mask >> v) & 1)
    return DeficiencyResult(best_set, best, "exhaustive")


def _interval_union_start(n: int, rng: np.random.Generator) -> int:
    """Union of a random half of the consecutive intervals of length about sqrt(n)."""
    width = max(1, isqrt(n))
    intervals = [range(s, min(s + width, n)) for s in range(0, n, width)]
    chosen = rng.permutation(len(intervals))[: max(1, len(intervals) // 2)]
    mask = 0
    for index in chosen:
        for v in intervals[index]:
            mask |= 1 << v
    return mask


def _heuristic_deficiency(g: Graph, restarts: int, seed: SeedLike) -> DeficiencyResult:
    n = g.n
    rng = as_generator(seed)
    matrix = g.adjacency
    best_mask, best = 0, 0
    steps = 2 * n * n
    for restart in range(restarts):
        if restart % 2 == 0:
            mask = int(sum(1 << v for v in range(n) if rng.random() < 0.5))
        else:
            mask = _interval_union_start(n, rng)
        current = mask.bit_count() - submatrix_rank(matrix, mask)
        for v in rng.integers(0, n, size=steps):
            candidate = mask ^ (1 << int(v))
            value = candidate.bit_count() - submatrix_rank(matrix, candidate)
            if value >= current:
                mask, current = candidate, value
                if current > best:
                    best, best_mask = current, mask
        if current > best:
            best, best_mask = current, mask
    best_set = tuple(v for v in range(n) if (best_mask >> v) & 1)
    return DeficiencyResult(best_set, best, "heuristic")


def max_rank_deficiency(
    g: Graph,
    mode: str = "exhaustive",
    budget: int | None = None,
    seed: SeedLike = DEFAULT_SEED,
) -> DeficiencyResult:
    """Largest ``|S| - rank A[S]`` over vertex sets ``S``.

    ``exhaustive`` scans every subset (ties go to the smallest bitmask).
    ``heuristic`` runs ``budget`` hill-climbing restarts (default ``2n``) of
    ``2n^2`` single-vertex toggles each, alternating uniform random starts and
    unions of consecutive intervals.
    """
    if g.n == 0:
        return DeficiencyResult((), 0, mode)
    if mode == "exhaustive":
        return _exhaustive_deficiency(g)
    if mode == "heuristic":
        restarts = budget if budget is not None else 2 * g.n
        if restarts < 1:
            raise ValueError(f"heuristic budget must be positive, got {restarts}")
        return _heuristic_deficiency(g, restarts, seed)
    raise ValueError(f"mode must be 'exhaustive' or 'heuristic', got {mode!r}")


def real_stab_entanglement_bound(
    g: Graph,
    mode: str = "exhaustive",
    budget: int | None = None,
    seed: SeedLike = DEFAULT_SEED,
) -> float:
    """``n - max deficiency``: minus log2 of the best real-stabilizer product overlap."""
    return float(g.n - max_rank_deficiency(g, mode, budget, seed).deficiency)


# ------------------ Product-state overlaps ------------------


def _state_tensor(g: Graph) -> np.ndarray:
    """State vector as an ``n``-axis tensor; axis ``k`` is qubit ``n - 1 - k``."""
    return graph_state_vector(g).astype(complex).reshape((2,) * g.n)


def _kron_all(vectors: list[np.ndarray]) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for vec in vectors:
        out = np.kron(out, vec)
    return out


def product_overlap(g: Graph, state: ProductState) -> float:
    """``|<alpha|G>|^2`` for a product state ``alpha``."""
    if state.n != g.n:
        raise ValueError(f"product state has {state.n} qubits, graph has {g.n}")
    bra = _kron_all([np.conj(state.vectors[j]) for j in reversed(range(g.n))])
    amplitude = np.dot(bra, graph_state_vector(g))
    return float(abs(amplitude) ** 2)


def real_stabilizer_optimum(
    g: Graph, result: DeficiencyResult | None = None
) -> tuple[ProductState, float]:
    """Best ``|0>``/``|+->`` product state supported on ``result.best_set``.

    With the other qubits fixed to ``|0>``, the remaining amplitudes form the
    graph state of ``G[S]``; its Walsh-Hadamard transform picks the sign
    pattern of the ``|+->`` factors with the largest overlap.
    """
    if result is None:
        result = max_rank_deficiency(g, "exhaustive")
    support = result.best_set
    sub = g.induced(support)
    spectrum = walsh_hadamard(graph_state_vector(sub))
    signs = int(np.argmax(np.abs(spectrum)))
    vectors = np.zeros((g.n, 2), dtype=complex)
    vectors[:, 0] = 1.0
    for position, v in enumerate(support):
        sign = -1.0 if (signs >> position) & 1 else 1.0
        vectors[v] = np.array([1.0, sign]) / math.sqrt(2.0)
    state = ProductState(vectors)
    return state, product_overlap(g, state)


def _environment(tensor: np.ndarray, vectors: np.ndarray, j: int) -> np.ndarray:
    """Contraction of the state with every conjugated factor except qubit ``j``."""
    n = vectors.shape[0]
    moved = np.moveaxis(tensor, n - 1 - j, 0).reshape(2, -1)
    others = [np.conj(vectors[k]) for k in reversed(range(n)) if k != j]
    return moved @ _kron_all(others)


def als_sweep_history(
    g: Graph, start: ProductState, tol: float = 1e-12, max_sweeps: int = 200
) -> tuple[ProductState, list[float]]:
    """Run alternating sweeps from ``start``; returns the final state and the
    overlap before the first sweep followed by the overlap after each sweep.

    Each update sets qubit ``j`` to its normalized environment vector, which
    cannot lower the overlap. A vanishing environment keeps the previous
    vector. Sweeps stop once the gain drops below ``tol``.
    """
    if g.n > MAX_ALS_N:
        raise BudgetExceededError("product-state optimization qubits", g.n, MAX_ALS_N)
    if start.n != g.n:
        raise ValueError(f"product state has {start.n} qubits, graph has {g.n}")
    tensor = _state_tensor(g)
    vectors = np.array(start.vectors)
    history = [product_overlap(g, start)]
    for _ in range(max_sweeps):
        for j in range(g.n):
            env = _environment(tensor, vectors, j)
            norm = np.linalg.norm(env)
            if norm > 1e-15:
                vectors[j] = env / norm
        history.append(product_overlap(g, ProductState(vectors)))
        if history[-1] - history[-2] < tol:
            break
    return ProductState(vectors), history


def als_product_overlap(
    g: Graph,
    restarts: int = 4,
    init: str = "real-stabilizer",
    tol: float = 1e-12,
    seed: SeedLike = DEFAULT_SEED,
    max_sweeps: int = 200,
) -> tuple[ProductState, float]:
    """Best ``|<alpha|G>|^2`` over restarts of ``als_sweep_history``.

    With ``init="real-stabilizer"`` the first restart starts from
    ``real_stabilizer_optimum`` and the rest are random.
    """
    if g.n > MAX_ALS_N:
        raise BudgetExceededError("product-state optimization qubits", g.n, MAX_ALS_N)
    if init not in ("random", "real-stabilizer"):
        raise ValueError(f"init must be 'random' or 'real-stabilizer', got {init!r}")
    if restarts < 1:
        raise ValueError(f"restarts must be positive, got {restarts}")
    if g.n == 0:
        return ProductState(np.zeros((0, 2))), 1.0
    rng = as_generator(seed)
    best_state, best_overlap = None, -1.0
    for restart in range(restarts):
        if restart == 0 and init == "real-stabilizer":
            start, _ = real_stabilizer_optimum(g)
        else:
            start = ProductState.random(g.n, rng)
        state, history = als_sweep_history(g, start, tol, max_sweeps)
        overlap = max(history)
        logger.debug(
            "ALS restart %d finished after %d sweeps: %.12g", restart, len(history) - 1, overlap
        )
        if overlap > best_overlap:
            best_state, best_overlap = state, overlap
    return best_state, best_overlap


# ------------------ Rank law of random adjacency matrices ------------------


def rank_distribution_exact(n: int) -> RankDistribution:
    """``P(rank = 2h)`` for a uniform symmetric zero-diagonal ``n x n`` matrix.

    With deficiency ``j = n - 2h``:
    ``2^{-j(j-1)/2} prod_{m=j+1}^{n} (1 - 2^{-m}) / prod_{i=1}^{h} (1 - 4^{-i})``.
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if n > MAX_RANK_DIST_N:
        raise BudgetExceededError("exact rank distribution n", n, MAX_RANK_DIST_N)
    tail = [Fraction(1)] * (n + 2)
    for m in range(n, 0, -1):
        tail[m - 1] = tail[m] * (1 - Fraction(1, 1 << m))
    quarter = [Fraction(1)]
    for i in range(1, n // 2 + 1):
        quarter.append(quarter[-1] * (1 - Fraction(1, 1 << (2 * i))))
    probs = {}
    for h in range(n // 2 + 1):
        j = n - 2 * h
        probs[h] = Fraction(1, 1 << (j * (j - 1) // 2)) * tail[j] / quarter[h]
    return RankDistribution(n, probs)


def _all_adjacency_rows(n: int) -> np.ndarray:
    """Every symmetric zero-diagonal ``n x n`` matrix as packed rows."""
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    codes = np.arange(1 << len(pairs), dtype=np.uint64)
    rows = np.zeros((codes.size, n), dtype=np.uint64)
    for bit, (u, v) in enumerate(pairs):
        present = (codes >> np.uint64(bit)) & np.uint64(1)
        rows[:, u] |= present << np.uint64(v)
        rows[:, v] |= present << np.uint64(u)
    return rows


def rank_distribution_enumerated(n: int) -> RankDistribution:
    """Rank law by enumerating all ``2^{C(n,2)}`` matrices."""
    if not 0 <= n <= MAX_ENUMERATED_N:
        raise BudgetExceededError("enumerated rank distribution n", n, MAX_ENUMERATED_N)
    ranks = rank_gf2_batch(_all_adjacency_rows(n))
    counts = np.bincount(ranks, minlength=n + 1)
    total = 1 << comb(n, 2)
    return RankDistribution(
        n, {h: Fraction(int(counts[2 * h]), total) for h in range(n // 2 + 1)}
    )


def rank_distribution_gaussian_bounds(n: int, h: int) -> tuple[float, float]:
    """Lower and upper envelopes ``(e^{-2}/4) k`` and ``e^{2/3} k`` of ``P(rank = 2h)``.

    ``k = 2^{-j^2/2 + j/2}`` with ``j = n - 2h``.
    """
    if not 0 <= h <= n // 2:
        raise ValueError(f"h must lie in [0, {n // 2}], got {h}")
    j = n - 2 * h
    kernel = 2.0 ** (-(j * j) / 2 + j / 2)
    return math.exp(-2.0) / 4.0 * kernel, math.exp(2.0 / 3.0) * kernel


def deficiency_tail_bound(t: int) -> float:
    """Lower bound ``(e^{-2}/4) 2^{-t^2/2 - t/2}`` on ``P(deficiency >= t)``."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    return math.exp(-2.0) / 4.0 * 2.0 ** (-(t * t) / 2 - t / 2)


def sample_ranks(n: int, samples: int, seed: SeedLike) -> np.ndarray:
    """GF(2) ranks of ``samples`` uniform ``n x n`` adjacency matrices."""
    if n > BATCH_MAX_DIM:
        raise BudgetExceededError("sampled matrix dimension", n, BATCH_MAX_DIM)
    rng = as_generator(seed)
    chunks = []
    for start in range(0, samples, SAMPLE_CHUNK):
        count = min(SAMPLE_CHUNK, samples - start)
        chunks.append(rank_gf2_batch(sample_adjacency_batch(count, n, rng)))
    return np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)


@dataclass(frozen=True)
class RankSampleComparison:
    """Sampled rank histogram against the exact law."""

    n: int
    samples: int
    counts: dict[int, int]
    expected: dict[int, float]
    statistic: float
    p_value: float

    def to_dict(self) -> dict:
        """Convert to dictionary for serialization."""
        return {
            "n": self.n,
            "samples": self.samples,
            "counts": {str(h): c for h, c in sorted(self.counts.items())},
            "expected": {str(h): e for h, e in sorted(self.expected.items())},
            "statistic": self.statistic,
            "p_value": self.p_value,
        }


def rank_distribution_empirical(n: int, samples: int, seed: SeedLike) -> RankSampleComparison:
    """Chi-square comparison of sampled ranks with ``rank_distribution_exact``.

    Cells expecting fewer than 5 hits are pooled, starting from the highest
    deficiency.
    """
    if samples < 1:
        raise ValueError(f"samples must be positive, got {samples}")
    ranks = sample_ranks(n, samples, seed)
    exact = rank_distribution_exact(n)
    observed = np.bincount(ranks // 2, minlength=n // 2 + 1)
    expected = np.array([float(exact.probs[h]) * samples for h in range(n // 2 + 1)])
    obs_cells, exp_cells = [], []
    pool_obs, pool_exp = 0.0, 0.0
    for h in range(n // 2 + 1):
        pool_obs += observed[h]
        pool_exp += expected[h]
        if pool_exp >= 5.0:
            obs_cells.append(pool_obs)
            exp_cells.append(pool_exp)
            pool_obs, pool_exp = 0.0, 0.0
    if pool_exp > 0 and exp_cells:
        obs_cells[-1] += pool_obs
        exp_cells[-1] += pool_exp
    if len(obs_cells) < 2:
        statistic, p_value = 0.0, 1.0
    else:
        exp_arr = np.asarray(exp_cells)
        exp_arr *= np.sum(obs_cells) / exp_arr.sum()
        statistic, p_value = stats.chisquare(obs_cells, exp_arr)
    return RankSampleComparison(
        n=n,
        samples=samples,
        counts={h: int(observed[h]) for h in range(n // 2 + 1)},
        expected={h: float(expected[h]) for h in range(n // 2 + 1)},
        statistic=float(statistic),
        p_value=float(p_value),
    )


def empirical_deficiency_tail(n: int, t: int, samples: int, seed: int) -> MomentEstimate:
    """Frequency of ``n - rank >= t`` over uniform ``n x n`` adjacency matrices."""
    ranks = sample_ranks(n, samples, validate_seed(seed))
    return summarize(((n - ranks) >= t).astype(float), seed)


# ------------------ Deficiency Markov chain ------------------


def markov_step(chain: RankDeficiencyChain) -> RankDeficiencyChain:
    """One transition: ``i -> i+1`` with probability ``2^{-i}``, else ``i -> i-1``."""
    dist = chain.dist
    up = np.exp2(-np.arange(dist.size, dtype=float))
    rising = dist * up
    falling = dist - rising
    new = np.zeros_like(dist)
    new[1:] += rising[:-1]
    new[:-1] += falling[1:]
    parity = None
    if chain.parity is not None:
        parity = "odd" if chain.parity == "even" else "even"
    return RankDeficiencyChain(new, parity, chain.leak + float(rising[-1]))


def markov_evolve(chain: RankDeficiencyChain, k: int) -> RankDeficiencyChain:
    if k < 0:
        raise ValueError(f"step count must be non-negative, got {k}")
    for _ in range(k):
        chain = markov_step(chain)
    return chain


def grow_random_symmetric(r0: int, m0: int, k: int, samples: int, seed: SeedLike) -> np.ndarray:
    """Deficiency after appending ``k`` random symmetric row/column pairs.

    Every sample starts from the ``m0 x m0`` matrix holding ``r0/2`` diagonal
    ``[[0,1],[1,0]]`` blocks (rank ``r0``) padded with zeros.
    """
    if r0 % 2 or not 0 <= r0 <= m0:
        raise ValueError(f"r0 must be even with 0 <= r0 <= m0, got r0={r0}, m0={m0}")
    size = m0 + k
    if size > BATCH_MAX_DIM:
        raise BudgetExceededError("grown matrix dimension", size, BATCH_MAX_DIM)
    rng = as_generator(seed)
    base = np.zeros(size, dtype=np.uint64)
    for block in range(r0 // 2):
        u, v = 2 * block, 2 * block + 1
        base[u] |= np.uint64(1) << np.uint64(v)
        base[v] |= np.uint64(1) << np.uint64(u)
    out = []
    for start in range(0, samples, SAMPLE_CHUNK):
        count = min(SAMPLE_CHUNK, samples - start)
        rows = np.tile(base, (count, 1))
        for m in range(m0, size):
            bits = rng.integers(0, 2, size=(count, m), dtype=np.uint64)
            weights = np.left_shift(np.uint64(1), np.arange(m, dtype=np.uint64))
            rows[:, m] = (bits * weights).sum(axis=1, dtype=np.uint64)
            rows[:, :m] |= bits << np.uint64(m)
        out.append(size - rank_gf2_batch(rows))
    return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class GrowthComparison:
    """Chain prediction against the simulated matrix growth."""

    chain: RankDeficiencyChain
    empirical: np.ndarray = field(repr=False)
    tv: float

    def to_rows(self) -> list[dict]:
        top = max(int(np.flatnonzero(self.chain.dist > 1e-15).max(initial=0)), self.empirical.size - 1)
        rows = []
        for state in range(top + 1):
            rows.append(
                {
                    "deficiency": state,
                    "chain": float(self.chain.dist[state]) if state <= self.chain.cap else 0.0,
                    "empirical": float(self.empirical[state]) if state < self.empirical.size else 0.0,
                }
            )
        return rows


def markov_evolve_vs_growth(
    r0: int, m0: int, k: int, samples: int, seed: SeedLike
) -> GrowthComparison:
    """Evolve the chain ``k`` steps from ``m0 - r0`` and compare with simulated growth."""
    if samples < 1000:
        raise ValueError(f"need at least 1000 samples, got {samples}")
    if k < 0:
        raise ValueError(f"step count must be non-negative, got {k}")
    deficiencies = grow_random_symmetric(r0, m0, k, samples, seed)
    chain = markov_evolve(RankDeficiencyChain.point_mass(m0 - r0), k)
    empirical = np.bincount(deficiencies, minlength=chain.cap + 1) / samples
    padded = np.zeros(max(empirical.size, chain.dist.size))
    padded[: chain.dist.size] = chain.dist
    other = np.zeros_like(padded)
    other[: empirical.size] = empirical
    tv = 0.5 * float(np.abs(padded - other).sum())
    logger.info("Chain vs growth after %d steps: TV %.4g over %d samples", k, tv, samples)
    return GrowthComparison(chain, empirical, tv)


def _stationary_weights(parity: int, cap: int) -> np.ndarray:
    """Unnormalized limit law ``2^{-j(j-1)/2} prod_{m>j}(1 - 2^{-m})`` on one parity class."""
    weights = np.zeros(cap + 1)
    for j in range(parity, cap + 1, 2):
        product = 1.0
        m = j + 1
        while True:
            factor = 1.0 - 2.0 ** (-m)
            if 1.0 - factor < 2.0**-64:
                break
            product *= factor
            m += 1
        weights[j] = 2.0 ** (-(j * (j - 1)) / 2) * product
    return weights


def stationary_deficiency(parity: str, D_cap: int = DEFAULT_CHAIN_CAP) -> RankDeficiencyChain:
    """Stationary law of the two-step chain on the even or odd states.

    Raises ``RuntimeError`` when the result is not a fixed point of two steps
    to within ``1e-10`` in L1.
    """
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    if D_cap < 8:
        raise ValueError(f"D_cap must be at least 8, got {D_cap}")
    weights = _stationary_weights(0 if parity == "even" else 1, D_cap)
    pi = RankDeficiencyChain(weights / weights.sum(), parity)
    residual = float(np.abs(markov_evolve(pi, 2).dist - pi.dist).sum())
    if residual > STATIONARY_RESIDUAL:
        raise RuntimeError(f"stationary residual {residual:.3e} exceeds {STATIONARY_RESIDUAL}")
    logger.debug("Stationary %s law residual %.3e", parity, residual)
    return pi


# ------------------ Surveys ------------------


def deficiency_survey(
    spec: EnsembleSpec,
    samples: int,
    mode: str = "exhaustive",
    threads: int = 1,
) -> MomentEstimate:
    """Mean maximal deficiency over graphs drawn from ``spec``."""
    if mode == "exhaustive" and spec.n > MAX_EXHAUSTIVE_N:
        raise BudgetExceededError("exhaustive deficiency search n", spec.n, MAX_EXHAUSTIVE_N)

    def one_sample(rng: np.random.Generator) -> float:
        g = sample_graph(spec, rng)
        return float(max_rank_deficiency(g, mode, seed=rng).deficiency)

    return estimate(one_sample, samples, spec.seed, threads)
