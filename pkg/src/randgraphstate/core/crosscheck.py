"""Oracle suites: each check compares two independent routes to one quantity.

Exact comparisons pass or fail. Statistical comparisons use a 4-sigma band
and report ``inconclusive`` when the sample count is too small for the band
to mean anything.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import networkx as nx
import numpy as np

from randgraphstate.core import entanglement, moments, subgraphs
from randgraphstate.core.graphs import (
    EnsembleSpec,
    Graph,
    complete_graph,
    cycle_graph,
    empty_graph,
    grid_graph,
    sample_erdos_renyi,
    sparsified_grid_reduction,
)
from randgraphstate.core.montecarlo import MomentEstimate, derive_generator

logger = logging.getLogger(__name__)

SUITES = ("moments", "ranks", "markov", "subgraphs")
MIN_STATISTICAL_SAMPLES = 500
SIGMAS = 4.0
CHI2_FLOOR = 1e-3

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str
    detail: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        """Convert to dictionary for serialization."""
        return {"name": self.name, "status": self.status, **self.detail}


@dataclass(frozen=True)
class CrosscheckReport:
    suite: str
    seed: int
    samples: int
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(check.status != FAIL for check in self.checks)

    def to_dict(self) -> dict:
        """Convert to dictionary for serialization."""
        return {
            "suite": self.suite,
            "seed": self.seed,
            "samples": self.samples,
            "passed": self.passed,
            "checks": [check.to_dict() for check in self.checks],
        }


def _exact(name: str, got: Any, want: Any) -> CheckResult:
    status = PASS if got == want else FAIL
    return CheckResult(name, status, {"got": str(got), "want": str(want)})


def _within(name: str, estimate: MomentEstimate, target: float) -> CheckResult:
    detail = {**estimate.to_dict(), "target": float(target)}
    if estimate.samples < MIN_STATISTICAL_SAMPLES:
        return CheckResult(name, INCONCLUSIVE, detail)
    return CheckResult(name, PASS if estimate.within(float(target), SIGMAS) else FAIL, detail)


def _flag(name: str, ok: bool, **detail: Any) -> CheckResult:
    return CheckResult(name, PASS if ok else FAIL, detail)


def _moments_suite(seed: int, samples: int) -> list[CheckResult]:
    checks = [
        _exact("statmech empty n=1", moments.m2_statmech(empty_graph(1)), Fraction(3, 2)),
        _exact("statmech edge", moments.m2_statmech(complete_graph(2)), Fraction(5, 4)),
        _exact("matching parity (4,1,1)", moments.avg_matching_parity(4, 1, 1), Fraction(1, 3)),
        _exact("matching parity (6,2,2)", moments.avg_matching_parity(6, 2, 2), Fraction(-1, 15)),
        _exact("pairing n=2 d=2", moments.exact_avg_m2_pairing(2, 2), Fraction(9, 4)),
    ]
    for index in range(5):
        g = sample_erdos_renyi(7, 0.5, derive_generator(seed, index))
        checks.append(
            _exact(f"ternary oracle graph {index}", moments.m2_statmech_ternary(g), moments.m2_statmech(g))
        )
    mismatches = [
        (n, a, b)
        for n in range(2, 9, 2)
        for a in range(n + 1)
        for b in range(n - a + 1)
        if moments.avg_matching_parity(n, a, b) != moments.avg_matching_parity_bruteforce(n, a, b)
    ]
    checks.append(_flag("matching parity vs enumeration n<=8", not mismatches, mismatches=mismatches))
    checks.append(
        _within(
            "angle average triangle",
            moments.mc_angle_average(complete_graph(3), samples, seed),
            moments.m2_statmech(complete_graph(3)),
        )
    )
    for model, n, d in (("pairing", 4, 2), ("pairing", 4, 3), ("matching", 4, 2)):
        spec = EnsembleSpec(model, n, d, seed=seed)
        checks.append(
            _within(
                f"ensemble {model} n={n} d={d}",
                moments.mc_avg_m2(spec, samples),
                moments.exact_avg_m2(model, n, d),
            )
        )
    for model in ("pairing", "matching"):
        for d in (3, 4):
            value = moments.avg_m2_float(model, 64, d)
            limit = moments.asymptotic_m2(d)
            checks.append(
                _flag(f"limit {model} d={d}", abs(value - limit) <= 0.25, value=value, limit=limit)
            )
    return checks


def _ranks_suite(seed: int, samples: int) -> list[CheckResult]:
    checks = [
        _exact(
            f"enumerated rank law n={n}",
            entanglement.rank_distribution_enumerated(n).probs,
            entanglement.rank_distribution_exact(n).probs,
        )
        for n in range(1, 6)
    ]
    sandwich = all(
        lower <= float(p) <= upper
        for n in range(1, 31)
        for h, p in entanglement.rank_distribution_exact(n).probs.items()
        for lower, upper in [entanglement.rank_distribution_gaussian_bounds(n, h)]
    )
    checks.append(_flag("gaussian sandwich n<=30", sandwich))
    for n in (4, 8, 16):
        comparison = entanglement.rank_distribution_empirical(n, samples, derive_generator(seed, n))
        detail = comparison.to_dict()
        if samples < MIN_STATISTICAL_SAMPLES:
            checks.append(CheckResult(f"sampled ranks n={n}", INCONCLUSIVE, detail))
        else:
            checks.append(
                CheckResult(f"sampled ranks n={n}", PASS if comparison.p_value > CHI2_FLOOR else FAIL, detail)
            )
    return checks


def _markov_suite(seed: int, samples: int) -> list[CheckResult]:
    checks = [
        _exact(
            "step from 2",
            tuple(entanglement.markov_step(entanglement.RankDeficiencyChain.point_mass(2)).dist[:4]),
            (0.0, 0.75, 0.0, 0.25),
        )
    ]
    for parity in ("even", "odd"):
        pi = entanglement.stationary_deficiency(parity)
        residual = float(np.abs(entanglement.markov_evolve(pi, 2).dist - pi.dist).sum())
        checks.append(_flag(f"stationary {parity} fixed point", residual <= 1e-10, residual=residual))
    marginal = entanglement.rank_distribution_exact(120).deficiency_marginal()
    pi = entanglement.stationary_deficiency("even")
    gap = max(abs(float(p) - pi.dist[j]) for j, p in marginal.items() if j <= pi.cap)
    checks.append(_flag("stationary law vs n=120", gap <= 1e-6, gap=gap))
    if samples < 1000:
        checks.append(CheckResult("chain vs growth", INCONCLUSIVE, {"samples": samples}))
    else:
        comparison = entanglement.markov_evolve_vs_growth(0, 0, 10, samples, seed)
        tolerance = max(0.02, 6.0 / math.sqrt(samples))
        checks.append(
            _flag("chain vs growth", comparison.tv <= tolerance, tv=comparison.tv, tolerance=tolerance)
        )
    return checks


def _subgraphs_suite(seed: int, samples: int) -> list[CheckResult]:
    c4 = subgraphs.PatternGraph.from_graph(cycle_graph(4), "c4")
    checks = [_exact("grid(3) induced C4", subgraphs.count_induced(grid_graph(3), c4), 4)]
    for L in range(2, 6):
        reduced, _ = sparsified_grid_reduction(L)
        target = grid_graph(L)
        oracle = nx.is_isomorphic(reduced.to_networkx(), target.to_networkx())
        checks.append(
            _flag(f"sparsified grid L={L}", oracle and subgraphs.is_isomorphic(reduced, target))
        )
    n, d = 30, 3
    nonedge = subgraphs.parse_pattern("nonedge")
    checks.append(
        _within(
            "non-edge frequency",
            _scaled(subgraphs.mc_induced_count(n, d, nonedge, samples, seed), math.comb(n, 2)),
            1 - d / (n - 1),
        )
    )
    host: Graph = sample_erdos_renyi(16, 0.3, derive_generator(seed, 0))
    empty4 = subgraphs.parse_pattern("empty:4")
    k4 = subgraphs.parse_pattern("k:4")
    checks.append(
        _exact(
            "independent sets vs complement cliques",
            subgraphs.count_induced(host, empty4),
            subgraphs.count_induced(host.complement(), k4),
        )
    )
    return checks


def _scaled(estimate: MomentEstimate, divisor: float) -> MomentEstimate:
    return MomentEstimate(
        estimate.mean / divisor, estimate.stderr / divisor, estimate.samples, estimate.seed
    )


_SUITES: dict[str, Callable[[int, int], list[CheckResult]]] = {
    "moments": _moments_suite,
    "ranks": _ranks_suite,
    "markov": _markov_suite,
    "subgraphs": _subgraphs_suite,
}


def run_suite(suite: str, seed: int, samples: int) -> CrosscheckReport:
    if suite not in _SUITES:
        raise ValueError(f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}")
    if samples < 1:
        raise ValueError(f"samples must be positive, got {samples}")
    checks = tuple(_SUITES[suite](seed, samples))
    report = CrosscheckReport(suite, seed, samples, checks)
    failed = [check.name for check in checks if check.status == FAIL]
    if failed:
        logger.warning("Crosscheck %s failed: %s", suite, ", ".join(failed))
    return report
