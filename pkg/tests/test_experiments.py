import math

import numpy as np
import pytest

from diagsum.constants import ConstantQuery, best_constant
from diagsum.errors import CapacityError, DegenerateFormError, InvalidFitError
from diagsum.experiments import (
    LOWER_BOUND_TOLERANCE, ORACLE_TOLERANCE, SearchBudget, fit_exponent, growth_scan,
    ratio, search_best_constant, verify_inequality, violation_tolerance,
)
from diagsum.forms import COMPLEX, MultilinearForm, SpaceSpec, product_form
from diagsum.normest import NormBudget, NormKind

QUICK_SEARCH = SearchBudget(random_trials=4, ascent_steps=4,
                            inner=NormBudget(starts=2, max_sweeps=50),
                            full=NormBudget(starts=8, max_sweeps=200))
QUICK_NORM = NormBudget(starts=8, max_sweeps=200)


def test_tolerance_tiers():
    assert violation_tolerance(NormKind.EXACT_ORACLE) == ORACLE_TOLERANCE == 1e-8
    assert violation_tolerance(NormKind.LOWER_BOUND) == LOWER_BOUND_TOLERANCE == 1e-2


@pytest.mark.parametrize("T, p, s, expected", [
    (product_form(2, 4), "4,4", 1, 2.0),
    (product_form(2, 9), "2,2", 2, 3.0),
    (MultilinearForm(np.array([[1.0, 0.0], [0.0, 0.0]])), "2,2", 1, 1.0),
])
def test_ratio_examples(T, p, s, expected):
    value, estimate = ratio(T, SpaceSpec.parse(p), s, QUICK_NORM)
    assert value == pytest.approx(expected, rel=1e-9)
    assert estimate.value > 0


def test_ratio_of_zero_form():
    with pytest.raises(DegenerateFormError):
        ratio(MultilinearForm(np.zeros((2, 2))), SpaceSpec.parse("1,1"), 1)


@pytest.mark.parametrize("n", [1, 2, 5, 17, 32])
def test_product_form_attains_constant_l1(n):
    q = ConstantQuery(2, n, "1,1", 1)
    value, _ = ratio(product_form(2, n), q.exponents, q.s)
    assert value == pytest.approx(best_constant(q), rel=1e-6)


@pytest.mark.parametrize("n", [1, 2, 3, 6])
@pytest.mark.parametrize("s", [1, 2, 3])
def test_product_form_attains_constant_l2(n, s):
    q = ConstantQuery(2, n, "2,2", s)
    value, _ = ratio(product_form(2, n), q.exponents, q.s)
    assert value == pytest.approx(best_constant(q), rel=1e-6)


@pytest.mark.parametrize("m, n, p", [(2, 2, 4), (2, 4, 3), (3, 3, 6)])
def test_product_form_attains_constant_by_ascent(m, n, p):
    q = ConstantQuery(m, n, SpaceSpec.uniform(m, p), 1)
    value, estimate = ratio(product_form(m, n), q.exponents, q.s)
    assert estimate.kind is NormKind.LOWER_BOUND
    assert value == pytest.approx(best_constant(q), rel=1e-4)


def test_search_examples():
    best, record = search_best_constant(ConstantQuery(2, 4, "1,1", 1), QUICK_SEARCH)
    assert best == pytest.approx(4.0, rel=1e-12)
    assert record.norm["kind"] == "exact-oracle"

    best, _ = search_best_constant(ConstantQuery(2, 2, "2,2", 2), QUICK_SEARCH)
    assert best == pytest.approx(math.sqrt(2), rel=1e-6)

    best, record = search_best_constant(ConstantQuery(2, 1, "4,4", 3), QUICK_SEARCH)
    assert best == pytest.approx(1.0, rel=1e-9)


def test_search_never_below_product_form_and_is_deterministic():
    q = ConstantQuery(2, 3, "3,3", 1)
    product_ratio, _ = ratio(product_form(2, 3), q.exponents, q.s, QUICK_SEARCH.full)
    first = search_best_constant(q, QUICK_SEARCH)
    second = search_best_constant(q, QUICK_SEARCH)
    assert first[0] >= product_ratio
    assert first[0] == second[0]
    assert first[1].to_dict() == second[1].to_dict()


def test_search_complex_mode_is_informational():
    _, record = search_best_constant(ConstantQuery(2, 2, "2,2", 1), QUICK_SEARCH, COMPLEX)
    data = record.to_dict()
    assert data["m"] == 2
    assert data["scalar_mode"] == "complex"
    assert data["informational"] is True


@pytest.mark.parametrize("m, n, p, s, trials", [
    (2, 4, "1,1", 1, 1000),
    (2, 4, "2,2", 2, 1000),
    (3, 3, "1,1,1", "1/2", 1000),
    (2, 3, "2,2", 2, 100),
    (2, 3, "inf,inf", 1, 1000),
    (3, 2, "inf,inf,inf", 1, 1000),
])
def test_verify_oracle_configurations(m, n, p, s, trials):
    report = verify_inequality(ConstantQuery(m, n, p, s), trials, seed=12345)
    assert report.passed
    assert report.violations == []
    assert 0 < report.max_ratio <= report.theoretical_constant * (1 + ORACLE_TOLERANCE)


@pytest.mark.slow
def test_verify_lower_bound_configuration():
    q = ConstantQuery(2, 4, "4,4", 2)
    report = verify_inequality(q, 1000, seed=12345)
    assert report.trials == 1000
    assert report.theoretical_constant == 1.0
    assert report.passed


def test_verify_counts_zero_forms_as_skipped():
    report = verify_inequality(ConstantQuery(2, 3, "1,1", 1), 5, distribution="sparse(0)")
    assert report.skipped == 5
    assert report.passed


def test_verify_report_shape_and_trial_count():
    report = verify_inequality(ConstantQuery(2, 4, "1,1", 1), 3, seed=4)
    for record in report.violations:
        assert record.violates
    assert report.to_dict()["violation_count"] == len(report.violations)
    with pytest.raises(ValueError):
        verify_inequality(ConstantQuery(2, 4, "1,1", 1), 0)


@pytest.mark.parametrize("values, slope", [
    ([(2, 2.0), (4, 4.0), (8, 8.0)], 1.0),
    ([(2, math.sqrt(2)), (4, 2.0), (8, math.sqrt(8))], 0.5),
])
def test_fit_exponent_examples(values, slope):
    fit = fit_exponent(values)
    assert fit.slope == pytest.approx(slope, abs=1e-12)
    assert fit.residual == pytest.approx(0.0, abs=1e-12)


def test_fit_exponent_errors():
    with pytest.raises(InvalidFitError):
        fit_exponent([(2, 1.0), (4, 2.0)])
    with pytest.raises(InvalidFitError):
        fit_exponent([(2, 1.0), (4, 0.0), (8, 3.0)])
    with pytest.raises(InvalidFitError):
        fit_exponent([(2, 1.0), (2, 2.0), (4, 3.0)])


def test_growth_scan_l1():
    scan = growth_scan(2, SpaceSpec.parse("1,1"), 1, (2, 4, 8, 16, 32), QUICK_SEARCH)
    assert abs(scan.fit.slope - 1.0) <= 0.05
    assert scan.predicted_exponent == "1"
    assert [r.query.n for r in scan.records] == [2, 4, 8, 16, 32]
    assert scan.plot_rows[0] == (math.log(2), math.log(scan.records[0].measured_ratio))


@pytest.mark.slow
def test_growth_scan_l4():
    scan = growth_scan(2, SpaceSpec.parse("4,4"), 1, (2, 4, 8, 16), QUICK_SEARCH)
    assert abs(scan.fit.slope - 0.5) <= 0.1
    assert scan.fit.residual >= 0.0


def test_growth_scan_skips_oversized_points():
    with pytest.raises(CapacityError):
        growth_scan(2, SpaceSpec.parse("1,1"), 1, (4000, 5000, 6000), QUICK_SEARCH)


def test_search_budget_from_config():
    budget = SearchBudget.from_config({"random_trials": 3, "inner_starts": 2},
                                      {"starts": 6}, seed=9, distribution="uniform-sign")
    assert (budget.random_trials, budget.seed, budget.distribution) == (3, 9, "uniform-sign")
    assert (budget.inner.starts, budget.full.starts, budget.full.seed) == (2, 6, 9)
    with pytest.raises(ValueError):
        SearchBudget(step_size=0.0)


def test_record_csv_row_columns():
    _, record = search_best_constant(ConstantQuery(2, 2, "1,1", 1), QUICK_SEARCH)
    row = record.csv_row()
    assert row["p_list"] == "1;1"
    assert row["regime"] == "T2a"
    assert float(row["measured_ratio"]) == record.measured_ratio


def test_ratio_is_scale_invariant():
    T = MultilinearForm(np.array([[1.0, -2.0], [0.5, 3.0]]))
    spec = SpaceSpec.parse("2,2")
    base, _ = ratio(T, spec, 1)
    scaled, _ = ratio(T.scaled(-3.5), spec, 1)
    assert scaled == pytest.approx(base, rel=1e-12)


def test_verify_linf_uses_sign_enumeration():
    report = verify_inequality(ConstantQuery(2, 3, "inf,inf", 1), 20, seed=3)
    assert report.theoretical_constant == 1.0
    assert report.passed
    _, estimate = ratio(product_form(2, 3), SpaceSpec.parse("inf,inf"), 1)
    assert estimate.method == "linf-sign-enumeration"


def test_growth_scan_reports_skipped_grid_points():
    scan = growth_scan(3, SpaceSpec.parse("1,1,1"), 1, ngrid=[2, 3, 4, 216], budget=QUICK_SEARCH)
    assert scan.skipped == [216]
    assert [r.query.n for r in scan.records] == [2, 3, 4]
