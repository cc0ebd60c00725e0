"""Reproducible seeded Monte Carlo harness.

Every sample draws from its own generator derived from ``(master seed, sample
index)``, so results depend only on the seed and the sample count, never on
the number of worker threads or the order in which samples finish.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240611
MAX_SEED = 2**64 - 1

SeedLike = int | np.random.Generator


def validate_seed(seed: int) -> int:
    """Return ``seed`` if it is a valid 64-bit unsigned seed."""
    if isinstance(seed, bool) or not isinstance(seed, int | np.integer):
        raise ValueError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must lie in [0, 2**64), got {seed}")
    return seed


def as_generator(seed: SeedLike) -> np.random.Generator:
    """Accept an integer seed or an existing generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(validate_seed(seed))


def derive_generator(seed: int, index: int) -> np.random.Generator:
    """Independent generator for sample ``index`` under master ``seed``."""
    sequence = np.random.SeedSequence(entropy=validate_seed(seed), spawn_key=(index,))
    return np.random.default_rng(sequence)


@dataclass(frozen=True)
class MomentEstimate:
    """Monte Carlo mean with its standard error."""

    mean: float
    stderr: float
    samples: int
    seed: int

    def to_dict(self) -> dict:
        """Convert to dictionary for serialization."""
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> MomentEstimate:
        """Create from dictionary."""
        return cls(
            mean=float(data["mean"]),
            stderr=float(data["stderr"]),
            samples=int(data["samples"]),
            seed=int(data["seed"]),
        )

    def within(self, value: float, sigmas: float = 4.0) -> bool:
        """Whether ``value`` lies within ``sigmas`` standard errors of the mean."""
        return abs(self.mean - value) <= sigmas * self.stderr + 1e-12


def summarize(values: np.ndarray, seed: int) -> MomentEstimate:
    """Mean and standard error of per-sample values."""
    values = np.asarray(values, dtype=float)
    count = int(values.size)
    if count == 0:
        raise ValueError("cannot summarize zero samples")
    # math.fsum keeps the mean independent of summation order
    mean = math.fsum(values) / count
    if count > 1:
        variance = math.fsum((values - mean) ** 2) / (count - 1)
        stderr = math.sqrt(variance / count)
    else:
        stderr = 0.0
    return MomentEstimate(mean=mean, stderr=stderr, samples=count, seed=seed)


def run_samples(
    sample_fn: Callable[[np.random.Generator], float],
    samples: int,
    seed: int,
    threads: int = 1,
) -> np.ndarray:
    """Evaluate ``sample_fn`` once per sample index, in index order.

    ``sample_fn`` receives the generator derived for its index and returns a
    float. The returned array is ordered by sample index regardless of
    ``threads``.
    """
    if samples < 1:
        raise ValueError(f"samples must be positive, got {samples}")
    if threads < 1:
        raise ValueError(f"threads must be positive, got {threads}")
    seed = validate_seed(seed)

    def _one(index: int) -> float:
        return float(sample_fn(derive_generator(seed, index)))

    if threads == 1:
        values = [_one(i) for i in range(samples)]
    else:
        logger.debug("Running %d samples on %d threads", samples, threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(_one, range(samples)))
    return np.asarray(values, dtype=float)


def estimate(
    sample_fn: Callable[[np.random.Generator], float],
    samples: int,
    seed: int,
    threads: int = 1,
) -> MomentEstimate:
    """Run ``sample_fn`` ``samples`` times and summarize."""
    values = run_samples(sample_fn, samples, seed, threads)
    result = summarize(values, seed)
    logger.info(
        "Monte Carlo estimate %.6g +/- %.2g from %d samples (seed=%d)",
        result.mean,
        result.stderr,
        result.samples,
        seed,
    )
    return result
