import time

import pytest

from lapdp import verify


def test_quick_passes_under_budget():
    start = time.perf_counter()
    results = verify.run(seed=0, level="quick")
    assert time.perf_counter() - start < 30.0
    failed = [r.name for r in results if not r.passed]
    assert failed == []


def test_deterministic_report():
    a = verify.format_report(verify.run(seed=11, level="quick"))
    b = verify.format_report(verify.run(seed=11, level="quick"))
    assert a == b


@pytest.mark.slow
def test_full_level():
    results = verify.run(seed=1, level="full")
    names = [r.name for r in results]
    assert "bromwich inversion of gaussian" in names
    assert all(r.passed for r in results)
    dom = next(r for r in results if r.name.startswith("profile dominance"))
    assert verify.LEVELS["full"].dominance_pairs >= 1000
    assert "0 violations" in dom.detail


def test_unknown_level():
    with pytest.raises(ValueError):
        verify.run(level="exhaustive")


def test_report_counts_failures():
    rs = [verify.CheckResult("a", True, "ok"), verify.CheckResult("b", False, "bad")]
    report = verify.format_report(rs)
    assert "1/2 checks passed" in report
    assert "FAIL" in report
