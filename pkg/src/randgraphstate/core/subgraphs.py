"""Induced-subgraph statistics of random regular graphs.

Small pattern graphs are compared by brute force: automorphisms by
permutation scan, isomorphism by degree-filtered backtracking, and density by
subset enumeration. Induced copies in a host are counted by enumerating
connected vertex sets (ESU-style extension). Disconnected patterns are
assembled from their components with a cluster expansion over those sets.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
import os
from collections import Counter
from collections.abc import Iterator
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from randgraphstate.core.errors import BudgetExceededError
from randgraphstate.core.gf2 import BitMatrix
from randgraphstate.core.graphs import (
    MAX_UNIFORM_REGULAR_DEGREE,
    Graph,
    complete_graph,
    cycle_graph,
    empty_graph,
    grid_graph,
    path_graph,
    sample_uniform_regular,
    sparsified_grid_graph,
    star_graph,
)
from randgraphstate.core.montecarlo import DEFAULT_SEED, MomentEstimate, estimate

logger = logging.getLogger(__name__)

MAX_COUNT_PATTERN_V = 6
MAX_AUT_V = 8
MAX_DENSITY_V = 12
MAX_MC_PATTERN_V = 4
MAX_MC_HOST_N = 300


def automorphism_count(pattern: Graph) -> int:
    """Number of vertex permutations preserving the edge set."""
    if pattern.n > MAX_AUT_V:
        raise BudgetExceededError("automorphism scan vertices", pattern.n, MAX_AUT_V)
    rows = pattern.adjacency.rows
    count = 0
    for perm in itertools.permutations(range(pattern.n)):
        if all(_mapped_row(rows[u], perm) == rows[perm[u]] for u in range(pattern.n)):
            count += 1
    return count


def _mapped_row(row: int, perm: tuple[int, ...]) -> int:
    out = 0
    while row:
        low = row & -row
        out |= 1 << perm[low.bit_length() - 1]
        row ^= low
    return out


def graph_density(pattern: Graph) -> Fraction:
    """``max |E(S)| / |S|`` over non-empty vertex sets ``S``."""
    if pattern.n > MAX_DENSITY_V:
        raise BudgetExceededError("density scan vertices", pattern.n, MAX_DENSITY_V)
    rows = pattern.adjacency.rows
    best = Fraction(0)
    for mask in range(1, 1 << pattern.n):
        twice_edges = 0
        remaining = mask
        while remaining:
            low = remaining & -remaining
            twice_edges += (rows[low.bit_length() - 1] & mask).bit_count()
            remaining ^= low
        best = max(best, Fraction(twice_edges // 2, mask.bit_count()))
    return best


def _component_masks(g: Graph) -> list[int]:
    """Vertex masks of the connected components, ordered by smallest vertex."""
    out = []
    left = (1 << g.n) - 1
    while left:
        seen = left & -left
        frontier = seen
        while frontier:
            reach = 0
            remaining = frontier
            while remaining:
                low = remaining & -remaining
                reach |= g.neighbor_mask(low.bit_length() - 1)
                remaining ^= low
            frontier = reach & ~seen
            seen |= frontier
        out.append(seen)
        left &= ~seen
    return out


def is_connected(g: Graph) -> bool:
    return len(_component_masks(g)) <= 1


def is_isomorphic(g: Graph, h: Graph) -> bool:
    """Backtracking isomorphism test with degree-sequence pruning."""
    if g.n != h.n or g.edge_count != h.edge_count:
        return False
    g_deg, h_deg = g.degrees(), h.degrees()
    if sorted(g_deg) != sorted(h_deg):
        return False
    order = sorted(range(g.n), key=lambda v: -g_deg[v])
    mapping: dict[int, int] = {}
    used = 0

    def extend(position: int) -> bool:
        nonlocal used
        if position == len(order):
            return True
        u = order[position]
        for w in range(h.n):
            if (used >> w) & 1 or h_deg[w] != g_deg[u]:
                continue
            if any(g.has_edge(u, x) != h.has_edge(w, y) for x, y in mapping.items()):
                continue
            mapping[u] = w
            used |= 1 << w
            if extend(position + 1):
                return True
            del mapping[u]
            used &= ~(1 << w)
        return False

    return extend(0)


@dataclass(frozen=True)
class PatternGraph:
    """Pattern ``H`` with its size, automorphism count and density.

    ``aut`` and ``density`` are ``None`` when the pattern is too large for the
    brute-force scans.
    """

    graph: Graph = field(repr=False)
    name: str = ""
    v: int = 0
    e: int = 0
    aut: int | None = None
    density: Fraction | None = None
    connected: bool = True

    @classmethod
    def from_graph(cls, graph: Graph, name: str = "") -> PatternGraph:
        return cls(
            graph=graph,
            name=name or f"graph{graph.n}",
            v=graph.n,
            e=graph.edge_count,
            aut=automorphism_count(graph) if graph.n <= MAX_AUT_V else None,
            density=graph_density(graph) if graph.n <= MAX_DENSITY_V else None,
            connected=is_connected(graph),
        )

    def to_dict(self) -> dict:
        """Convert to dictionary for serialization."""
        return {
            "name": self.name,
            "v": self.v,
            "e": self.e,
            "aut": self.aut,
            "density": None if self.density is None else str(self.density),
            "graph": self.graph.to_dict(),
        }


# ------------------ Counting ------------------


def _iter_connected_sets(host: Graph, size: int) -> Iterator[int]:
    """Every connected ``size``-vertex set of ``host`` once, as a bitmask."""
    hoods = [host.neighbor_mask(v) for v in range(host.n)]

    def grow(sub: int, extension: int, closed: int, above: int) -> Iterator[int]:
        if sub.bit_count() == size:
            yield sub
            return
        while extension:
            low = extension & -extension
            extension ^= low
            w = low.bit_length() - 1
            fresh = hoods[w] & ~closed & above
            yield from grow(sub | low, extension | fresh, closed | hoods[w] | low, above)

    for v in range(host.n):
        above = ~((1 << (v + 1)) - 1)
        yield from grow(1 << v, hoods[v] & above, hoods[v] | (1 << v), above)


def _relative_rows(host: Graph, mask: int) -> tuple[int, ...]:
    vertices = _bits(mask)
    rows = []
    for u in vertices:
        hood = host.neighbor_mask(u)
        rows.append(sum(1 << i for i, w in enumerate(vertices) if (hood >> w) & 1))
    return tuple(rows)


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _reach(rows: tuple[int, ...], mask: int) -> int:
    out = 0
    for u in _bits(mask):
        out |= rows[u]
    return out


def _count_connected(host: Graph, pattern: Graph) -> int:
    v = pattern.n
    verdicts: dict[tuple[int, ...], bool] = {}
    count = 0
    for mask in _iter_connected_sets(host, v):
        key = _relative_rows(host, mask)
        verdict = verdicts.get(key)
        if verdict is None:
            candidate = Graph(v, BitMatrix(v, key))
            verdict = candidate.edge_count == pattern.edge_count and is_isomorphic(
                candidate, pattern
            )
            verdicts[key] = verdict
        count += verdict
    return count


@lru_cache(maxsize=None)
def _connected_spanning_sign(m: int, edges: tuple[tuple[int, int], ...]) -> int:
    """Sum of ``(-1)^|F|`` over edge subsets ``F`` connecting all ``m`` vertices."""
    total = 0
    for chosen in range(1 << len(edges)):
        hoods = [0] * m
        for index in _bits(chosen):
            a, b = edges[index]
            hoods[a] |= 1 << b
            hoods[b] |= 1 << a
        if is_connected(Graph(m, BitMatrix(m, tuple(hoods)))):
            total += -1 if chosen.bit_count() % 2 else 1
    return total


def _set_partitions(items: list[int]) -> Iterator[list[list[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in _set_partitions(rest):
        yield [[first], *partition]
        for i, block in enumerate(partition):
            yield [*partition[:i], [first, *block], *partition[i + 1 :]]


class _ComponentCounter:
    """Induced copies of a disconnected pattern, assembled from its components.

    Ordered tuples of component placements that are pairwise disjoint and
    non-adjacent are counted by a cluster expansion over the conflict graph of
    the tuple: every block of mutually conflicting placements covers one
    connected vertex set of the host with at most ``pattern.v`` vertices, so
    only a census of connected sets is needed.
    """

    def __init__(self, host: Graph, pattern: Graph) -> None:
        self.pieces: list[Graph] = []
        kinds = []
        for mask in _component_masks(pattern):
            piece = pattern.induced(_bits(mask))
            for index, known in enumerate(self.pieces):
                if is_isomorphic(piece, known):
                    kinds.append(index)
                    break
            else:
                kinds.append(len(self.pieces))
                self.pieces.append(piece)
        self.kinds = tuple(kinds)
        self.census = {
            size: Counter(_relative_rows(host, mask) for mask in _iter_connected_sets(host, size))
            for size in range(1, pattern.n + 1)
        }
        self._placements: dict[tuple[tuple[int, ...], int], list[int]] = {}
        self._clusters: dict[tuple[int, ...], int] = {}

    def _places(self, rows: tuple[int, ...], kind: int) -> list[int]:
        key = (rows, kind)
        if key not in self._placements:
            piece = self.pieces[kind]
            local = Graph(len(rows), BitMatrix(len(rows), rows))
            self._placements[key] = [
                sum(1 << u for u in combo)
                for combo in itertools.combinations(range(len(rows)), piece.n)
                if is_isomorphic(local.induced(combo), piece)
            ]
        return self._placements[key]

    def _weight(self, rows: tuple[int, ...], block: tuple[int, ...]) -> int:
        full = (1 << len(rows)) - 1
        options = [self._places(rows, kind) for kind in block]
        total = 0
        for chosen in itertools.product(*options):
            union = 0
            for mask in chosen:
                union |= mask
            if union != full:
                continue
            closed = [mask | _reach(rows, mask) for mask in chosen]
            edges = tuple(
                (a, b)
                for a, b in itertools.combinations(range(len(block)), 2)
                if closed[a] & chosen[b]
            )
            total += _connected_spanning_sign(len(block), edges)
        return total

    def cluster(self, block: tuple[int, ...]) -> int:
        if block not in self._clusters:
            sizes = [self.pieces[kind].n for kind in block]
            total = 0
            for size in range(max(sizes), sum(sizes) + 1):
                for rows, multiplicity in self.census[size].items():
                    total += multiplicity * self._weight(rows, block)
            self._clusters[block] = total
        return self._clusters[block]

    def count(self) -> int:
        ordered = 0
        for partition in _set_partitions(list(range(len(self.kinds)))):
            term = 1
            for block in partition:
                term *= self.cluster(tuple(sorted(self.kinds[i] for i in block)))
                if not term:
                    break
            ordered += term
        symmetry = math.prod(math.factorial(m) for m in Counter(self.kinds).values())
        copies, rest = divmod(ordered, symmetry)
        if rest:
            raise RuntimeError(f"placement count {ordered} is not divisible by {symmetry}")
        return copies


def count_induced(host: Graph, pattern: PatternGraph) -> int:
    """Number of vertex sets of ``host`` whose induced subgraph is isomorphic to ``pattern``."""
    v = pattern.v
    if v > MAX_COUNT_PATTERN_V:
        raise BudgetExceededError("pattern vertices", v, MAX_COUNT_PATTERN_V)
    if v > host.n:
        return 0
    if v <= 1:
        return math.comb(host.n, v)
    if v == 2:
        edges = host.edge_count
        return edges if pattern.e == 1 else math.comb(host.n, 2) - edges
    if pattern.connected:
        return _count_connected(host, pattern.graph)
    return _ComponentCounter(host, pattern.graph).count()


# ------------------ Leading-order formulas ------------------


def sparse_overlap_condition(d: int, s: int, s_bar: int) -> bool:
    """Finite-size stand-in for the ``s * s_bar = o(d)`` hypothesis."""
    return s * s_bar < d


def induced_probability_leading(n: int, d: int, s: int, s_bar: int) -> float:
    """Leading term ``(d/n)^s (1 - d/n)^{s_bar}`` for ``s`` edges present and ``s_bar`` absent."""
    if not 0 <= d < n:
        raise ValueError(f"need 0 <= d < n, got n={n}, d={d}")
    if s < 0 or s_bar < 0:
        raise ValueError(f"edge counts must be non-negative, got s={s}, s_bar={s_bar}")
    if (s or s_bar) and not sparse_overlap_condition(d, s, s_bar):
        logger.warning(
            "s*s_bar=%d is not small against d=%d; leading term is advisory", s * s_bar, d
        )
    p = d / n
    return p**s * (1.0 - p) ** s_bar


def expected_induced_count(n: int, d: int, pattern: PatternGraph) -> float:
    """Leading-order count ``C(n,v) v!/aut(H) (d/n)^e (1-d/n)^{C(v,2)-e}``."""
    if not 0 <= d < n:
        raise ValueError(f"need 0 <= d < n, got n={n}, d={d}")
    if pattern.aut is None:
        raise ValueError(f"pattern {pattern.name!r} is too large for an automorphism count")
    labelled = math.comb(n, pattern.v) * math.factorial(pattern.v) / pattern.aut
    p = d / n
    return labelled * p**pattern.e * (1.0 - p) ** (math.comb(pattern.v, 2) - pattern.e)


def cycle_count_limit(d: int, length: int) -> float:
    """Large-``n`` mean number of ``length``-cycles in a random ``d``-regular graph."""
    if length < 3:
        raise ValueError(f"cycle length must be at least 3, got {length}")
    return (d - 1) ** length / (2 * length)


def mc_induced_count(
    n: int,
    d: int,
    pattern: PatternGraph,
    samples: int,
    seed: int = DEFAULT_SEED,
    threads: int = 1,
) -> MomentEstimate:
    """Mean induced-copy count over uniform ``d``-regular graphs on ``n`` vertices."""
    if d > MAX_UNIFORM_REGULAR_DEGREE:
        raise BudgetExceededError("uniform-regular degree", d, MAX_UNIFORM_REGULAR_DEGREE)
    if pattern.v > MAX_MC_PATTERN_V:
        raise BudgetExceededError("Monte Carlo pattern vertices", pattern.v, MAX_MC_PATTERN_V)
    if n > MAX_MC_HOST_N:
        raise BudgetExceededError("Monte Carlo host vertices", n, MAX_MC_HOST_N)

    def one_sample(rng: np.random.Generator) -> float:
        return float(count_induced(sample_uniform_regular(n, d, rng), pattern))

    return estimate(one_sample, samples, seed, threads)


# ------------------ Pattern parsing ------------------


def _sized(text: str, prefix: str) -> int:
    try:
        value = int(text[len(prefix) :])
    except ValueError as exc:
        raise ValueError(f"pattern {text!r} needs an integer after {prefix!r}") from exc
    if value < 1:
        raise ValueError(f"pattern {text!r} needs a positive size")
    return value


def parse_pattern(text: str) -> PatternGraph:
    """Pattern from a short name or a Graph JSON file.

    Names: ``c4``, ``triangle``, ``nonedge``, ``k:N``, ``empty:N``, ``path:N``,
    ``cycle:N``, ``star:N``, ``grid:L``, ``sparsegrid:L``.
    """
    key = text.strip().lower()
    fixed = {
        "c4": lambda: cycle_graph(4),
        "triangle": lambda: complete_graph(3),
        "nonedge": lambda: empty_graph(2),
    }
    sized = {
        "k:": complete_graph,
        "empty:": empty_graph,
        "path:": path_graph,
        "cycle:": cycle_graph,
        "star:": star_graph,
        "grid:": grid_graph,
        "sparsegrid:": sparsified_grid_graph,
    }
    if key in fixed:
        return PatternGraph.from_graph(fixed[key](), key)
    for prefix, build in sized.items():
        if key.startswith(prefix):
            return PatternGraph.from_graph(build(_sized(key, prefix)), key)
    if os.path.isfile(text):
        with open(text, encoding="utf-8") as f:
            data = json.load(f)
        return PatternGraph.from_graph(Graph.from_dict(data), os.path.basename(text))
    raise ValueError(f"unknown pattern {text!r}")
