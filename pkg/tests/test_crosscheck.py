import pytest

from randgraphstate.core.crosscheck import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    SUITES,
    CheckResult,
    CrosscheckReport,
    run_suite,
)


def _statuses(report):
    return {check.name: check.status for check in report.checks}


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("spectra", 1, 100)
    with pytest.raises(ValueError):
        run_suite("ranks", 1, 0)


def test_report_passes_unless_a_check_fails():
    ok = CrosscheckReport("x", 1, 10, (CheckResult("a", PASS), CheckResult("b", INCONCLUSIVE)))
    assert ok.passed
    bad = CrosscheckReport("x", 1, 10, (CheckResult("a", PASS), CheckResult("b", FAIL, {"got": "1"})))
    assert not bad.passed
    assert bad.to_dict()["checks"][1] == {"name": "b", "status": FAIL, "got": "1"}


@pytest.mark.parametrize("suite", SUITES)
def test_small_sample_runs_are_inconclusive_not_failed(seed, suite):
    report = run_suite(suite, seed, 20)
    statuses = _statuses(report)
    assert report.passed
    assert FAIL not in statuses.values()
    assert INCONCLUSIVE in statuses.values()


@pytest.mark.integration
def test_ranks_suite(seed):
    report = run_suite("ranks", seed, 20_000)
    assert report.passed
    assert all(status == PASS for status in _statuses(report).values())


@pytest.mark.integration
def test_markov_suite(seed):
    report = run_suite("markov", seed, 20_000)
    assert report.passed
    assert _statuses(report)["chain vs growth"] == PASS


@pytest.mark.integration
def test_subgraphs_suite(seed):
    report = run_suite("subgraphs", seed, 600)
    assert report.passed
    assert _statuses(report)["grid(3) induced C4"] == PASS


@pytest.mark.slow
@pytest.mark.integration
def test_moments_suite(seed):
    report = run_suite("moments", seed, 2000)
    assert report.passed
