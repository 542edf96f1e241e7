import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from varlab.engines.sequences import (
    Condition,
    LambdaSeq,
    Verdict,
    check_lambda2,
    check_var,
    classify_condition,
    construct_delta,
    construct_gamma,
    make_lambda,
    parse_condition,
    power_log_pivot,
    series_partial_sums,
    tail_sum,
)
from varlab.exceptions import HorizonError, PreconditionError, UnknownConditionError, ValidationError

MILLION = 1_000_000


@pytest.fixture(scope="module")
def slow_log():
    """lambda_n = n / log^2 n, the Gamma-construction workhorse."""
    return make_lambda("power_log", {"a": 1.0, "b": -2.0}, horizon=200_000)


# --- families ---

def test_explicit_family_must_be_nondecreasing():
    with pytest.raises(ValidationError):
        make_lambda("explicit", {"values": [2, 1, 3]})
    with pytest.raises(ValidationError):
        make_lambda("explicit", {"values": [1, 0, 3]})


def test_unknown_family_and_bad_parameters():
    with pytest.raises(ValidationError):
        make_lambda("geometric")
    with pytest.raises(ValidationError):
        make_lambda("power_log", {"a": 1.5, "b": 0.0}, horizon=16)
    with pytest.raises(ValidationError):
        make_lambda("constant", {"c": -1.0}, horizon=16)


@given(st.floats(0.05, 1.0), st.floats(-3.0, 3.0))
@settings(max_examples=50, deadline=None)
def test_power_log_is_normalized(a, b):
    lam = make_lambda("power_log", {"a": a, "b": b}, horizon=2048)
    values = lam.values(2048)
    assert values[0] == pytest.approx(1.0)
    assert np.all(np.diff(values) >= 0)
    assert power_log_pivot(a, b) >= 2.0


def test_indexing_and_horizon(harmonic):
    assert harmonic[1] == 1.0
    assert harmonic[10] == 10.0
    with pytest.raises(IndexError):
        harmonic[0]
    with pytest.raises(HorizonError):
        harmonic.values(harmonic.horizon + 1)


def test_shifted_view(harmonic):
    tail = harmonic.shifted(5)
    np.testing.assert_array_equal(tail.values(3), [5.0, 6.0, 7.0])
    assert tail.exponents == harmonic.exponents


def test_metadata():
    assert make_lambda("constant", {"c": 2.0}, horizon=8).is_constant
    assert make_lambda("power_log", {"a": 0.0, "b": 0.0}, horizon=8).is_constant
    assert LambdaSeq.from_values([3, 3, 3]).is_constant
    assert make_lambda("harmonic", horizon=8).diverges
    assert not make_lambda("constant", horizon=8).diverges
    assert LambdaSeq.from_values([1, 2, 3]).exponents is None


# --- series ---

def test_series_partial_sums_of_harmonic_grow_like_log(harmonic):
    sums = series_partial_sums(harmonic, 2, 4096)
    assert sums[-1] == pytest.approx(math.log(4096) + 0.5772156649, abs=1e-3)


def test_tail_sum_of_convergent_family(slow_log):
    tail = tail_sum(slow_log, 1, 2)
    assert math.isfinite(tail.value)
    assert not tail.truncated
    assert tail.remainder > 0
    later = tail_sum(slow_log, 1000, 2)
    assert later.value < tail.value


def test_tail_sum_of_divergent_family_is_infinite(harmonic):
    assert math.isinf(tail_sum(harmonic, 1, 2).value)


# --- conditions ---

def test_parse_condition():
    assert parse_condition("lambda2") is Condition.LAMBDA2
    with pytest.raises(UnknownConditionError):
        parse_condition("lambda9")


@pytest.mark.parametrize("a,b,d,expected", [
    (1.0, -1.5, 2, Verdict.HOLDS),
    (1.0, -1.0, 2, Verdict.FAILS),
    (1.0, -2.5, 3, Verdict.HOLDS),
    (1.0, -1.5, 3, Verdict.FAILS),
    (0.5, 3.0, 3, Verdict.HOLDS),
])
def test_lambda1_for_power_log(a, b, d, expected):
    lam = make_lambda("power_log", {"a": a, "b": b}, horizon=4096)
    report = classify_condition(lam, "lambda1", d)
    assert report.verdict is expected
    opposite = classify_condition(lam, "lambda3", d)
    assert (opposite.verdict is Verdict.HOLDS) == (expected is Verdict.FAILS)


def test_harmonic_fails_lambda1(harmonic):
    assert classify_condition(harmonic, Condition.LAMBDA1, 2).verdict is Verdict.FAILS
    assert classify_condition(harmonic, Condition.LAMBDA3, 2).verdict is Verdict.HOLDS


def test_lambda_condition(slow_log, harmonic):
    assert classify_condition(slow_log, Condition.LAMBDA, 2).verdict is Verdict.HOLDS
    assert classify_condition(harmonic, Condition.LAMBDA, 2).verdict is Verdict.FAILS


def test_explicit_sequences_are_inconclusive():
    lam = LambdaSeq.from_values(np.arange(1, 101, dtype=float))
    report = classify_condition(lam, "lambda1", 2)
    assert report.verdict is Verdict.INCONCLUSIVE
    assert "partial_sum" in report.evidence


def test_lambda2_symbolic(harmonic, sqrt_weights):
    assert classify_condition(harmonic, "lambda2", 2, delta=2.0).verdict is Verdict.HOLDS
    assert classify_condition(sqrt_weights, "lambda2", 2, delta=2.0).verdict is Verdict.FAILS


def test_lambda2_numeric_slope():
    harmonic = make_lambda("harmonic", horizon=MILLION)
    sqrt = make_lambda("power_log", {"a": 0.5, "b": 0.0}, horizon=MILLION)
    assert check_lambda2(harmonic, 2.0).verdict is Verdict.HOLDS
    report = check_lambda2(sqrt, 2.0)
    assert report.verdict is Verdict.FAILS
    assert report.evidence["slope"] == pytest.approx(0.5, abs=0.01)


def test_lambda2_needs_a_long_enough_horizon():
    short = make_lambda("harmonic", horizon=10)
    with pytest.raises(HorizonError):
        check_lambda2(short, 2.0)
    with pytest.raises(ValidationError):
        check_lambda2(short, 1.0)


def test_check_var_uses_declared_exponents():
    table = np.sqrt(np.arange(1, 65, dtype=float))
    assert check_var([table], 2, [0.5]).verdict is Verdict.HOLDS
    assert check_var([table], 2, [1.0]).verdict is Verdict.FAILS
    report = check_var([table], 2)
    assert report.verdict is Verdict.INCONCLUSIVE
    assert report.evidence["fitted_exponent_axis0"] == pytest.approx(0.5, abs=1e-9)


# --- constructions ---

def test_gamma_construction_verifies(slow_log):
    construction = construct_gamma(slow_log, 2)
    assert construction.ok, construction.failures
    assert construction.gamma is not None
    assert construction.constant >= construction.constants[1]
    assert construction.weighted_sum <= construction.weighted_bound * (1 + 1e-9)
    # gamma_n / n keeps falling
    assert construction.gamma_over_n(construction.horizon) < construction.gamma_over_n(10)
    assert construction.gamma_over_n(construction.horizon) < 0.7


def test_gamma_construction_flags_truncated_tails(caplog):
    lam = LambdaSeq.from_values(np.sqrt(np.arange(1, 2001, dtype=float)))
    with caplog.at_level("WARNING", logger="varlab.engines.sequences"):
        construction = construct_gamma(lam, 2)
    assert construction.checks["tails_complete"] is False
    assert not construction.ok
    assert any("truncated" in failure for failure in construction.failures)
    assert "failed checks" in caplog.text


def test_gamma_construction_refuses_divergent_series(harmonic):
    with pytest.raises(PreconditionError):
        construct_gamma(harmonic, 2)


def test_gamma_construction_rejects_theta(slow_log):
    with pytest.raises(ValidationError):
        construct_gamma(slow_log, 2, theta=1.0)


def test_delta_construction():
    tables = [np.sqrt(np.arange(1, 65, dtype=float)), np.arange(1, 65, dtype=float) ** 0.25]
    construction = construct_delta(tables, 2)
    assert construction.ok
    assert np.all(np.diff(construction.B) >= 0)
    values = construction.delta.values(construction.delta.horizon)
    n = np.arange(1, values.size + 1)
    assert np.all(np.diff(values / n) <= 1e-12)
    assert construction.B_at(1) == 1.0


def test_delta_construction_on_zero_tables_is_degenerate():
    construction = construct_delta([np.zeros(16)], 2)
    assert construction.degenerate
    assert not construction.ok
    assert construction.delta is None
