import pytest

from opcalc.sampling import Bounds
from opcalc.suites import SUITE_NAMES, run_suites, run_verification_suite

SMOKE = Bounds(cases=5)


@pytest.mark.parametrize("name", SUITE_NAMES)
def test_each_suite_passes_at_smoke_size(name):
    report = run_verification_suite(name, seed=7, bounds=SMOKE)
    assert report.passed, report.failures[:3]
    assert report.cases > 0
    assert report.seed == 7


def test_deterministic_given_seed():
    first = run_verification_suite("filtration", seed=11, bounds=SMOKE)
    second = run_verification_suite("filtration", seed=11, bounds=SMOKE)
    assert first.to_dict()["cases"] == second.to_dict()["cases"]
    assert first.failures == second.failures


def test_all_expands_to_every_suite():
    reports = run_suites(["all"], seed=7, bounds=Bounds(cases=2))
    assert [r.name for r in reports] == list(SUITE_NAMES)


def test_unknown_suite_rejected():
    with pytest.raises(ValueError):
        run_verification_suite("nope", seed=0)


def test_report_dict_shape():
    report = run_verification_suite("nilpotency", seed=3, bounds=SMOKE)
    record = report.to_dict()
    assert record["suite"] == "nilpotency"
    assert record["passed"] is True
    assert record["failures"] == []
    assert record["seconds"] >= 0
