"""Bit-packed GF(2) matrices.

Rows are stored as Python integers (bit ``j`` of row ``i`` is entry ``(i, j)``),
so a row update is a single XOR regardless of the dimension. Batches of
matrices with at most 64 rows use numpy ``uint64`` rows and are eliminated
in parallel across the batch.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from randgraphstate.core.montecarlo import SeedLike, as_generator

logger = logging.getLogger(__name__)

BATCH_MAX_DIM = 64


@dataclass(frozen=True)
class BitMatrix:
    """Square GF(2) matrix with bit-packed rows."""

    n: int
    rows: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError(f"dimension must be non-negative, got {self.n}")
        if len(self.rows) != self.n:
            raise ValueError(f"expected {self.n} rows, got {len(self.rows)}")
        limit = 1 << self.n
        for i, row in enumerate(self.rows):
            if row < 0 or row >= limit:
                raise ValueError(f"row {i} has bits outside [0, {self.n})")

    @classmethod
    def zeros(cls, n: int) -> BitMatrix:
        return cls(n, (0,) * n)

    @classmethod
    def from_dense(cls, matrix: Sequence[Sequence[int]] | np.ndarray) -> BitMatrix:
        dense = np.asarray(matrix, dtype=np.int64) % 2
        if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {dense.shape}")
        rows = []
        for line in dense:
            value = 0
            for j in np.flatnonzero(line):
                value |= 1 << int(j)
            rows.append(value)
        return cls(dense.shape[0], tuple(rows))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> BitMatrix:
        """Symmetric adjacency matrix toggling one entry pair per edge."""
        rows = [0] * n
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) outside [0, {n})")
            if u == v:
                continue
            rows[u] ^= 1 << v
            rows[v] ^= 1 << u
        return cls(n, tuple(rows))

    def get(self, i: int, j: int) -> int:
        return (self.rows[i] >> j) & 1

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n, self.n), dtype=np.uint8)
        for i, row in enumerate(self.rows):
            for j in range(self.n):
                if (row >> j) & 1:
                    dense[i, j] = 1
        return dense

    def is_symmetric(self) -> bool:
        return all(
            self.get(i, j) == self.get(j, i)
            for i in range(self.n)
            for j in range(i + 1, self.n)
        )

    def has_zero_diagonal(self) -> bool:
        return all(not self.get(i, i) for i in range(self.n))

    def permuted(self, perm: Sequence[int]) -> BitMatrix:
        """Return P·M·Pᵀ where vertex ``i`` moves to ``perm[i]``."""
        if sorted(perm) != list(range(self.n)):
            raise ValueError("perm must be a permutation of range(n)")
        rows = [0] * self.n
        for i, row in enumerate(self.rows):
            value = 0
            for j in range(self.n):
                if (row >> j) & 1:
                    value |= 1 << perm[j]
            rows[perm[i]] = value
        return BitMatrix(self.n, tuple(rows))

    def to_uint64(self) -> np.ndarray:
        if self.n > BATCH_MAX_DIM:
            raise ValueError(f"uint64 packing needs n <= {BATCH_MAX_DIM}, got {self.n}")
        return np.array(self.rows, dtype=np.uint64)


def _row_reduce_rank(rows: list[int]) -> int:
    """Rank of the rows by XOR elimination; ``rows`` is consumed."""
    rank = 0
    while rows:
        pivot = rows.pop()
        if pivot == 0:
            continue
        rank += 1
        low = pivot & -pivot
        rows = [r ^ pivot if r & low else r for r in rows]
    return rank


def rank_gf2(matrix: BitMatrix) -> int:
    """GF(2) rank; the input is left untouched."""
    return _row_reduce_rank(list(matrix.rows))


def principal_submatrix(matrix: BitMatrix, vertices: Iterable[int]) -> BitMatrix:
    """Rows and columns indexed by ``vertices``, in ascending order."""
    index = sorted(set(vertices))
    for v in index:
        if not 0 <= v < matrix.n:
            raise ValueError(f"index {v} outside [0, {matrix.n})")
    rows = []
    for v in index:
        row = matrix.rows[v]
        value = 0
        for position, u in enumerate(index):
            if (row >> u) & 1:
                value |= 1 << position
        rows.append(value)
    return BitMatrix(len(index), tuple(rows))


def submatrix_rank(matrix: BitMatrix, mask: int) -> int:
    """Rank of the principal submatrix selected by bitmask ``mask``.

    Masking rows and columns in place keeps the zero rows out of the way, so
    no fresh matrix has to be materialized.
    """
    rows = []
    remaining = mask
    while remaining:
        low = remaining & -remaining
        rows.append(matrix.rows[low.bit_length() - 1] & mask)
        remaining ^= low
    return _row_reduce_rank(rows)


def sample_adjacency(n: int, seed: SeedLike) -> BitMatrix:
    """Uniform symmetric zero-diagonal matrix: independent fair bits above the diagonal."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    rng = as_generator(seed)
    bits = rng.integers(0, 2, size=(n, n), dtype=np.uint8)
    upper = np.triu(bits, k=1)
    return BitMatrix.from_dense(upper + upper.T)


def rank_gf2_batch(rows: np.ndarray) -> np.ndarray:
    """Ranks of a batch of square GF(2) matrices.

    ``rows`` has shape ``(B, m)`` with ``m <= 64``; ``rows[b, i]`` packs row ``i``
    of matrix ``b``. Each column step picks one pivot per matrix and XORs it
    into every other row holding that bit, for the whole batch at once.
    """
    work = np.array(rows, dtype=np.uint64, copy=True)
    if work.ndim != 2:
        raise ValueError(f"expected a (batch, rows) array, got shape {work.shape}")
    batch, m = work.shape
    if m > BATCH_MAX_DIM:
        raise ValueError(f"batch rank needs m <= {BATCH_MAX_DIM}, got {m}")
    ranks = np.zeros(batch, dtype=np.int64)
    if batch == 0 or m == 0:
        return ranks
    used = np.zeros((batch, m), dtype=bool)
    index = np.arange(batch)
    one = np.uint64(1)
    for col in range(m):
        bit = ((work >> np.uint64(col)) & one).astype(bool)
        candidates = bit & ~used
        found = candidates.any(axis=1)
        if not found.any():
            continue
        pivot = candidates.argmax(axis=1)
        pivot_rows = work[index, pivot]
        eliminate = bit & found[:, None]
        eliminate[index, pivot] = False
        work ^= np.where(eliminate, pivot_rows[:, None], np.uint64(0))
        used[index[found], pivot[found]] = True
        ranks += found
    return ranks


def sample_adjacency_batch(count: int, n: int, seed: SeedLike) -> np.ndarray:
    """``count`` uniform adjacency matrices as packed ``uint64`` rows, shape ``(count, n)``."""
    if n > BATCH_MAX_DIM:
        raise ValueError(f"batch sampling needs n <= {BATCH_MAX_DIM}, got {n}")
    rng = as_generator(seed)
    bits = rng.integers(0, 2, size=(count, n, n), dtype=np.uint8)
    upper = np.triu(bits, k=1)
    dense = (upper + np.transpose(upper, (0, 2, 1))).astype(np.uint64)
    weights = np.left_shift(np.uint64(1), np.arange(n, dtype=np.uint64))
    return (dense * weights).sum(axis=2, dtype=np.uint64)


def mask_batch_rows(rows: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """Restrict one packed matrix to many principal index sets at once.

    Rows outside a mask are zeroed and surviving rows keep only masked
    columns, which leaves the rank equal to that of the principal submatrix.
    """
    rows = np.asarray(rows, dtype=np.uint64)
    masks = np.asarray(masks, dtype=np.uint64)
    m = rows.shape[0]
    selected = ((masks[:, None] >> np.arange(m, dtype=np.uint64)) & np.uint64(1)).astype(bool)
    restricted = rows[None, :] & masks[:, None]
    return np.where(selected, restricted, np.uint64(0))
