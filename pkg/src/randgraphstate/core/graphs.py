"""Graphs, multigraphs, random regular ensembles and graph-state rewrite rules.

Vertices are labelled ``0..n-1``. Simple graphs carry a bit-packed adjacency
matrix; multigraphs (the raw output of the pairing and matching models) keep
their edge multiset so that loops and repeated edges survive until
``simplify`` reduces multiplicities mod 2.
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from math import comb, isqrt

import networkx as nx
import numpy as np

from randgraphstate.core.errors import SamplingBudgetExceeded
from randgraphstate.core.gf2 import BitMatrix, principal_submatrix
from randgraphstate.core.montecarlo import (
    DEFAULT_SEED,
    MomentEstimate,
    SeedLike,
    as_generator,
    estimate,
    validate_seed,
)

logger = logging.getLogger(__name__)

MODELS = ("pairing", "matching", "uniform-regular", "erdos-renyi")
MAX_UNIFORM_REGULAR_DEGREE = 4
DEFAULT_MAX_ATTEMPTS = 100_000

Edge = tuple[int, int]


def _normalize_edge(u: int, v: int) -> Edge:
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class Multigraph:
    """Edge multiset on ``n`` vertices; loops and repeated pairs allowed."""

    n: int
    edges: tuple[Edge, ...] = ()

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError(f"vertex count must be non-negative, got {self.n}")
        normalized = []
        for u, v in self.edges:
            u, v = int(u), int(v)
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) outside [0, {self.n})")
            normalized.append(_normalize_edge(u, v))
        object.__setattr__(self, "edges", tuple(sorted(normalized)))

    def multiplicities(self) -> Counter[Edge]:
        return Counter(self.edges)

    def half_edge_degrees(self) -> list[int]:
        """Incident half-edge count per vertex; a loop counts twice."""
        degrees = [0] * self.n
        for u, v in self.edges:
            degrees[u] += 1
            degrees[v] += 1
        return degrees

    def to_dict(self) -> dict:
        """Convert to dictionary for serialization."""
        return {"n": self.n, "edges": [[u, v] for u, v in self.edges]}

    @classmethod
    def from_dict(cls, data: dict) -> Multigraph:
        """Create from dictionary."""
        return cls(int(data["n"]), tuple((int(u), int(v)) for u, v in data.get("edges", [])))


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph backed by a symmetric zero-diagonal BitMatrix."""

    n: int
    adjacency: BitMatrix = field(repr=False)

    def __post_init__(self) -> None:
        if self.adjacency.n != self.n:
            raise ValueError(f"adjacency has dimension {self.adjacency.n}, expected {self.n}")
        if not self.adjacency.has_zero_diagonal():
            raise ValueError("adjacency matrix must have a zero diagonal")
        if not self.adjacency.is_symmetric():
            raise ValueError("adjacency matrix must be symmetric")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Edge]) -> Graph:
        """Build a simple graph; repeated edges and loops are rejected."""
        seen: set[Edge] = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u} is not allowed in a simple graph")
            edge = _normalize_edge(int(u), int(v))
            if edge in seen:
                raise ValueError(f"edge {edge} listed twice")
            seen.add(edge)
        return cls(n, BitMatrix.from_edges(n, seen))

    @property
    def edges(self) -> tuple[Edge, ...]:
        """Edges ``(u, v)`` with ``u < v`` in lexicographic order."""
        out = []
        for u, row in enumerate(self.adjacency.rows):
            upper = row >> (u + 1)
            v = u + 1
            while upper:
                if upper & 1:
                    out.append((u, v))
                upper >>= 1
                v += 1
        return tuple(out)

    @property
    def edge_count(self) -> int:
        return sum(row.bit_count() for row in self.adjacency.rows) // 2

    def neighbor_mask(self, v: int) -> int:
        return self.adjacency.rows[v]

    def neighbors(self, v: int) -> list[int]:
        row = self.adjacency.rows[v]
        return [u for u in range(self.n) if (row >> u) & 1]

    def degree(self, v: int) -> int:
        return self.adjacency.rows[v].bit_count()

    def degrees(self) -> list[int]:
        return [row.bit_count() for row in self.adjacency.rows]

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adjacency.get(u, v))

    def complement(self) -> Graph:
        full = (1 << self.n) - 1
        rows = tuple((~row & full) & ~(1 << i) for i, row in enumerate(self.adjacency.rows))
        return Graph(self.n, BitMatrix(self.n, rows))

    def relabeled(self, perm: Sequence[int]) -> Graph:
        """Move vertex ``i`` to label ``perm[i]``."""
        return Graph(self.n, self.adjacency.permuted(perm))

    def induced(self, vertices: Iterable[int]) -> Graph:
        """Induced subgraph on ``vertices``, relabelled in ascending order."""
        sub = principal_submatrix(self.adjacency, vertices)
        return Graph(sub.n, sub)

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges)
        return graph

    def to_multigraph(self) -> Multigraph:
        return Multigraph(self.n, self.edges)

    def to_dict(self) -> dict:
        """Convert to dictionary for serialization."""
        return {"n": self.n, "edges": [[u, v] for u, v in self.edges]}

    @classmethod
    def from_dict(cls, data: dict) -> Graph:
        """Create from dictionary."""
        return cls.from_edges(int(data["n"]), ((int(u), int(v)) for u, v in data.get("edges", [])))


@dataclass(frozen=True)
class EnsembleSpec:
    """Random-graph ensemble parameters."""

    model: str
    n: int
    d: int | None = None
    p: float | None = None
    seed: int = DEFAULT_SEED

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {', '.join(MODELS)}")
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        validate_seed(self.seed)
        if self.model == "erdos-renyi":
            if self.p is None or not 0.0 <= self.p <= 1.0:
                raise ValueError(f"erdos-renyi needs 0 <= p <= 1, got {self.p}")
            return
        if self.d is None or self.d < 1:
            raise ValueError(f"{self.model} needs a degree d >= 1, got {self.d}")
        if self.model == "pairing" and (self.n * self.d) % 2:
            raise ValueError(f"pairing model needs n*d even, got n={self.n}, d={self.d}")
        if self.model == "matching" and self.n % 2:
            raise ValueError(f"matching model needs n even, got n={self.n}")
        if self.model == "uniform-regular":
            if (self.n * self.d) % 2:
                raise ValueError(f"uniform-regular needs n*d even, got n={self.n}, d={self.d}")
            if self.d >= self.n:
                raise ValueError(f"uniform-regular needs d < n, got n={self.n}, d={self.d}")

    def to_dict(self) -> dict:
        """Convert to dictionary for serialization."""
        return {"model": self.model, "n": self.n, "d": self.d, "p": self.p, "seed": self.seed}


# ------------------ Samplers ------------------


def sample_half_edge_matching(n: int, d: int, seed: SeedLike) -> tuple[Edge, ...]:
    """Uniform perfect matching on the half-edges ``i*d + j`` (vertex ``i``, slot ``j``).

    A uniform permutation paired off in consecutive positions is a uniform
    perfect matching: each matching is hit by exactly ``(m/2)! * 2**(m/2)``
    permutations.
    """
    if d < 1:
        raise ValueError(f"degree must be at least 1, got {d}")
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if (n * d) % 2:
        raise ValueError(f"pairing model needs n*d even, got n={n}, d={d}")
    order = as_generator(seed).permutation(n * d)
    pairs = order.reshape(-1, 2)
    return tuple(sorted(_normalize_edge(int(a), int(b)) for a, b in pairs))


def sample_pairing(n: int, d: int, seed: SeedLike) -> Multigraph:
    """Configuration-model multigraph: every vertex has half-edge degree ``d``."""
    pairing = sample_half_edge_matching(n, d, seed)
    return Multigraph(n, tuple((a // d, b // d) for a, b in pairing))


def _uniform_matching(n: int, rng: np.random.Generator) -> list[Edge]:
    pairs = rng.permutation(n).reshape(-1, 2)
    return [_normalize_edge(int(a), int(b)) for a, b in pairs]


def sample_matching_model(n: int, d: int, seed: SeedLike) -> Multigraph:
    """Union with multiplicity of ``d`` independent uniform perfect matchings."""
    if n < 2 or n % 2:
        raise ValueError(f"matching model needs a positive even n, got {n}")
    if d < 1:
        raise ValueError(f"degree must be at least 1, got {d}")
    rng = as_generator(seed)
    edges: list[Edge] = []
    for _ in range(d):
        edges.extend(_uniform_matching(n, rng))
    return Multigraph(n, tuple(edges))


def simplify(g: Multigraph) -> Graph:
    """Drop loops and reduce every edge multiplicity mod 2."""
    rows = [0] * g.n
    for (u, v), count in g.multiplicities().items():
        if u == v or count % 2 == 0:
            continue
        rows[u] ^= 1 << v
        rows[v] ^= 1 << u
    return Graph(g.n, BitMatrix(g.n, tuple(rows)))


def is_simple(g: Multigraph) -> bool:
    return all(u != v and count == 1 for (u, v), count in g.multiplicities().items())


def sample_uniform_regular(
    n: int,
    d: int,
    seed: SeedLike,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> Graph:
    """Uniform simple ``d``-regular graph by rejection from the pairing model."""
    EnsembleSpec("uniform-regular", n, d)
    if d > MAX_UNIFORM_REGULAR_DEGREE:
        raise ValueError(
            f"rejection sampling is limited to d <= {MAX_UNIFORM_REGULAR_DEGREE}, got {d}"
        )
    if max_attempts < 1:
        raise ValueError(f"max_attempts must be positive, got {max_attempts}")
    rng = as_generator(seed)
    for attempt in range(1, max_attempts + 1):
        candidate = sample_pairing(n, d, rng)
        if is_simple(candidate):
            if attempt > 1:
                logger.debug("Accepted simple %d-regular graph after %d attempts", d, attempt)
            return simplify(candidate)
    raise SamplingBudgetExceeded(max_attempts, f"no simple {d}-regular graph on {n} vertices")


def sample_erdos_renyi(n: int, p: float, seed: SeedLike) -> Graph:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    rng = as_generator(seed)
    present = rng.random((n, n)) < p
    upper = np.triu(present, k=1).astype(np.uint8)
    dense = upper + upper.T
    matrix = BitMatrix.from_dense(dense) if n else BitMatrix.zeros(0)
    return Graph(n, matrix)


def sample_graph(spec: EnsembleSpec, seed: SeedLike | None = None) -> Graph:
    """Draw one simple graph from ``spec``; multigraph models are simplified."""
    rng = as_generator(spec.seed if seed is None else seed)
    if spec.model == "pairing":
        return simplify(sample_pairing(spec.n, spec.d, rng))
    if spec.model == "matching":
        return simplify(sample_matching_model(spec.n, spec.d, rng))
    if spec.model == "uniform-regular":
        return sample_uniform_regular(spec.n, spec.d, rng)
    return sample_erdos_renyi(spec.n, spec.p, rng)


def sample_multigraph(spec: EnsembleSpec, seed: SeedLike | None = None) -> Multigraph:
    """Raw multigraph for the pairing and matching models."""
    rng = as_generator(spec.seed if seed is None else seed)
    if spec.model == "pairing":
        return sample_pairing(spec.n, spec.d, rng)
    if spec.model == "matching":
        return sample_matching_model(spec.n, spec.d, rng)
    return sample_graph(spec, rng).to_multigraph()


def simplicity_frequency(
    model: str,
    n: int,
    d: int,
    samples: int,
    seed: int = DEFAULT_SEED,
    threads: int = 1,
) -> MomentEstimate:
    """Empirical probability that a pairing or matching sample is already simple."""
    if model not in ("pairing", "matching"):
        raise ValueError(f"simplicity is defined for pairing/matching, got {model!r}")
    spec = EnsembleSpec(model, n, d, seed=seed)
    return estimate(
        lambda rng: float(is_simple(sample_multigraph(spec, rng))), samples, seed, threads
    )


def iter_perfect_matchings(points: Sequence[int]) -> Iterator[tuple[Edge, ...]]:
    """All ``(m-1)!!`` perfect matchings of ``points`` (first point paired first)."""
    points = list(points)
    if len(points) % 2:
        raise ValueError(f"need an even number of points, got {len(points)}")
    if not points:
        yield ()
        return
    first, rest = points[0], points[1:]
    for index, partner in enumerate(rest):
        remaining = rest[:index] + rest[index + 1 :]
        for tail in iter_perfect_matchings(remaining):
            yield (_normalize_edge(first, partner),) + tail


# ------------------ Constructors ------------------


def empty_graph(n: int) -> Graph:
    return Graph(n, BitMatrix.zeros(n))


def complete_graph(n: int) -> Graph:
    return empty_graph(n).complement()


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, ((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError(f"a cycle needs at least 3 vertices, got {n}")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(n: int) -> Graph:
    """Vertex 0 joined to leaves ``1..n-1``."""
    return Graph.from_edges(n, ((0, i) for i in range(1, n)))


def grid_graph(L: int) -> Graph:
    """``L x L`` square grid; cell ``(r, c)`` is vertex ``r*L + c``."""
    if L < 1:
        raise ValueError(f"grid side must be at least 1, got {L}")
    return Graph.from_edges(L * L, _grid_edges(L))


def _grid_edges(L: int) -> list[Edge]:
    edges = []
    for r in range(L):
        for c in range(L):
            v = r * L + c
            if c + 1 < L:
                edges.append((v, v + 1))
            if r + 1 < L:
                edges.append((v, v + L))
    return sorted(edges)


def sparsified_grid_graph(L: int) -> Graph:
    """Grid with every edge replaced by a path through ``L - 1`` new vertices.

    Grid vertices keep labels ``0..L*L-1``; the inserted vertices of each grid
    edge (taken in lexicographic edge order) follow consecutively.
    """
    if L < 2:
        raise ValueError(f"sparsified grid side must be at least 2, got {L}")
    grid_edges = _grid_edges(L)
    n = L * L + len(grid_edges) * (L - 1)
    edges: list[Edge] = []
    label = L * L
    for u, v in grid_edges:
        chain = [u, *range(label, label + L - 1), v]
        label += L - 1
        edges.extend(zip(chain, chain[1:]))
    return Graph.from_edges(n, edges)


def grid_edge_counts(L: int) -> tuple[int, int, int]:
    """``(v, e, non-edges)`` of the ``L x L`` grid from the closed forms."""
    v = L * L
    root = isqrt(v)
    e = 2 * v - 2 * root
    non_edges = (v * v - 5 * v) // 2 + 2 * root
    return v, e, non_edges


def sparsified_grid_edge_counts(L: int) -> tuple[int, int, int]:
    v = 2 * L * (L - 1) ** 2 + L * L
    e = 2 * L * L * (L - 1)
    return v, e, comb(v, 2) - e


# ------------------ Measurement rewrites ------------------


def local_complement(g: Graph, v: int) -> Graph:
    """Complement the edges inside the neighbourhood of ``v``."""
    if not 0 <= v < g.n:
        raise ValueError(f"vertex {v} outside [0, {g.n})")
    hood = g.neighbor_mask(v)
    rows = list(g.adjacency.rows)
    for u in range(g.n):
        if (hood >> u) & 1:
            rows[u] ^= hood & ~(1 << u)
    return Graph(g.n, BitMatrix(g.n, tuple(rows)))


@dataclass(frozen=True)
class MeasurementResult:
    """Post-measurement graph with the old-to-new label map."""

    graph: Graph
    label_map: dict[int, int]
    vertex: int
    basis: str

    def to_dict(self) -> dict:
        """Convert to dictionary for serialization."""
        return {
            "graph": self.graph.to_dict(),
            "label_map": {str(k): v for k, v in sorted(self.label_map.items())},
            "vertex": self.vertex,
            "basis": self.basis,
        }


def delete_vertex(g: Graph, v: int) -> MeasurementResult:
    """Remove ``v``; labels above ``v`` shift down by one."""
    keep = [u for u in range(g.n) if u != v]
    return MeasurementResult(
        graph=g.induced(keep),
        label_map={old: new for new, old in enumerate(keep)},
        vertex=v,
        basis="Z",
    )


def measure_pauli(g: Graph, v: int, basis: str) -> MeasurementResult:
    """Graph after measuring qubit ``v`` in the Z or Y basis, up to local unitaries."""
    if not 0 <= v < g.n:
        raise ValueError(f"vertex {v} outside [0, {g.n})")
    basis = basis.upper()
    if basis == "Z":
        return delete_vertex(g, v)
    if basis == "Y":
        result = delete_vertex(local_complement(g, v), v)
        return MeasurementResult(result.graph, result.label_map, v, "Y")
    raise ValueError(f"basis must be 'Y' or 'Z', got {basis!r}")


def y_measurement_reduction(g: Graph, vertices: Iterable[int]) -> tuple[Graph, tuple[int, ...]]:
    """Y-measure ``vertices`` from the highest label down.

    Measuring in descending order means no still-pending vertex is relabelled,
    so the returned sequence names original labels.
    """
    sequence = tuple(sorted(set(vertices), reverse=True))
    current = g
    for v in sequence:
        current = measure_pauli(current, v, "Y").graph
    return current, sequence


def sparsified_grid_reduction(L: int) -> tuple[Graph, tuple[int, ...]]:
    """Y-measure every inserted vertex of ``sparsified_grid_graph(L)``."""
    sparse = sparsified_grid_graph(L)
    return y_measurement_reduction(sparse, range(L * L, sparse.n))
