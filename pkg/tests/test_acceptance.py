"""One test per acceptance criterion, each printing its pass/fail line.

These run the package at production resolution, so the module is the slow
part of the suite; every other test file covers the same code paths on
small grids.
"""

from nlslab import acceptance


def _check(criterion):
    result = criterion()
    print(result.line())
    assert result.passed, result.line()


def test_criterion_01_linear_oracle():
    _check(acceptance.criterion_1)


def test_criterion_02_seed_remainder_order():
    _check(acceptance.criterion_2)


def test_criterion_03_internal_mode_slope():
    _check(acceptance.criterion_3)


def test_criterion_04_critical_wavenumber():
    _check(acceptance.criterion_4)


def test_criterion_05_mass_defect_scaling():
    _check(acceptance.criterion_5)


def test_criterion_06_critical_exponent():
    _check(acceptance.criterion_6)


def test_criterion_07_coercivity():
    _check(acceptance.criterion_7)


def test_criterion_08_dynamics_growth():
    _check(acceptance.criterion_8)


def test_criterion_09_branch_slopes():
    _check(acceptance.criterion_9)


def test_criterion_10_cross_checks():
    _check(acceptance.criterion_10)


def test_run_all_collects_everything(monkeypatch):
    calls = []
    monkeypatch.setattr(
        acceptance,
        "ALL_CRITERIA",
        tuple(lambda i=i: acceptance.CriterionResult(i, f"c{i}", True, 0.0, "ok") for i in (1, 2)),
    )
    results = acceptance.run_all(echo=calls.append)
    assert [r.number for r in results] == [1, 2]
    assert len(calls) == 2
    assert all("PASS" in line for line in calls)


def test_result_line_format():
    line = acceptance.CriterionResult(3, "slope", False, 1.234, "off by 2x").line()
    assert line.startswith("criterion  3 [FAIL] slope:")
    assert "off by 2x" in line
    assert line.endswith("(1.2s)")
