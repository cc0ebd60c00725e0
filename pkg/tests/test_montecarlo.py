import numpy as np
import pytest

from randgraphstate.core.montecarlo import (
    DEFAULT_SEED,
    MomentEstimate,
    as_generator,
    derive_generator,
    estimate,
    run_samples,
    summarize,
    validate_seed,
)


class TestSeeds:
    """Seed validation and per-sample generators."""

    def test_validate(self):
        assert validate_seed(0) == 0
        assert validate_seed(np.int64(5)) == 5
        assert validate_seed(2**64 - 1) == 2**64 - 1
        for bad in (-1, 2**64, 1.5, True, "7"):
            with pytest.raises(ValueError):
                validate_seed(bad)

    def test_generator_passthrough(self):
        rng = np.random.default_rng(3)
        assert as_generator(rng) is rng

    def test_derived_streams_are_reproducible(self):
        a = derive_generator(DEFAULT_SEED, 4).random(5)
        b = derive_generator(DEFAULT_SEED, 4).random(5)
        assert np.array_equal(a, b)

    def test_derived_streams_differ_by_index(self):
        a = derive_generator(DEFAULT_SEED, 0).random(5)
        b = derive_generator(DEFAULT_SEED, 1).random(5)
        assert not np.array_equal(a, b)


class TestHarness:
    """Sample loops and summaries."""

    def test_thread_count_does_not_change_values(self, seed):
        def draw(rng):
            return rng.normal()

        serial = run_samples(draw, 64, seed, threads=1)
        pooled = run_samples(draw, 64, seed, threads=4)
        assert np.array_equal(serial, pooled)

    def test_summarize(self):
        result = summarize(np.array([1.0, 2.0, 3.0]), 9)
        assert result.mean == 2.0
        assert result.stderr == pytest.approx(np.sqrt(1.0 / 3.0))
        assert summarize(np.array([4.0]), 9).stderr == 0.0
        with pytest.raises(ValueError):
            summarize(np.array([]), 9)

    def test_rejects_bad_counts(self, seed):
        with pytest.raises(ValueError):
            run_samples(lambda rng: 0.0, 0, seed)
        with pytest.raises(ValueError):
            run_samples(lambda rng: 0.0, 5, seed, threads=0)

    def test_uniform_mean(self, seed):
        result = estimate(lambda rng: rng.random(), 4000, seed)
        assert result.within(0.5)
        assert result.samples == 4000 and result.seed == seed

    def test_estimate_dict_round_trip(self):
        result = MomentEstimate(1.25, 0.01, 100, 3)
        assert MomentEstimate.from_dict(result.to_dict()) == result

    def test_within_band(self):
        result = MomentEstimate(1.0, 0.1, 100, 0)
        assert result.within(1.39)
        assert not result.within(1.41)
        assert MomentEstimate(2.0, 0.0, 10, 0).within(2.0)
