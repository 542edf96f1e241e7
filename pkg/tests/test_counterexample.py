import math

import numpy as np
import pytest

from varlab.engines.counterexample import (
    CounterexampleFunction,
    build_spec,
    coefficient_bound_profile,
    eval_fN,
    iter_w,
    lower_bound_at,
    lower_bound_series,
    pv_bound_fN,
    w_size,
)
from varlab.engines.fourier import PartialSumRequest, origin_sum_fN, rectangular_partial_sum
from varlab.engines.sequences import make_lambda
from varlab.exceptions import ValidationError
from varlab.functions import get_function


@pytest.fixture(scope="module")
def log_weights():
    return make_lambda("power_log", {"a": 1.0, "b": -1.0}, horizon=1 << 16)


def test_sizes_for_delta_two(log_weights):
    spec = build_spec(2, 2.0, 512, log_weights)
    assert spec.n_delta == 16
    assert spec.m_j(3) == 9
    assert w_size(spec) == 1480
    assert spec.cell_count == 1025
    assert spec.max_cell_index <= 2 * spec.N


def test_three_dimensional_w(log_weights):
    for N in (8, 9):
        spec = build_spec(3, 2.0, N, log_weights)
        assert spec.n_delta == 2
        members = list(iter_w(spec))
        assert len(members) == w_size(spec) == 9
        assert all(m[-1] == 2 and 2 < m[0] < 6 and 2 < m[1] < 6 for m in members)


def test_t_j_for_harmonic_weights(harmonic):
    spec = build_spec(2, 2.0, 64, harmonic)
    # m_2 = 4: 1 / (1 + 1/2 + 1/3 + 1/4)
    assert spec.t_j(2) == pytest.approx(0.48)


def test_small_n_gives_empty_w(log_weights):
    spec = build_spec(2, 2.0, 3, log_weights)
    assert spec.n_delta == 1
    assert spec.empty
    assert origin_sum_fN(spec).value == 0.0
    assert pv_bound_fN(spec).analytic_upper == 0.0


def test_build_spec_validation(log_weights):
    with pytest.raises(ValidationError):
        build_spec(1, 2.0, 64, log_weights)
    with pytest.raises(ValidationError):
        build_spec(2, 1.0, 64, log_weights)
    with pytest.raises(ValidationError):
        build_spec(2, 2.0, 1, log_weights)


def test_f_n_vanishes_outside_w(log_weights):
    spec = build_spec(2, 2.0, 32, log_weights)
    width = spec.cell_width
    inside = np.array([[3.5 * width, 2.5 * width]])
    outside = np.array([[2.5 * width, 2.5 * width], [3.5 * width, 0.5 * width]])
    assert eval_fN(spec, inside)[0] == pytest.approx(spec.t_j(2) * math.sin(spec.nu * 3.5 * width)
                                                     * math.sin(spec.nu * 2.5 * width))
    np.testing.assert_array_equal(eval_fN(spec, outside), 0.0)


def test_registry_builds_counterexample():
    f = get_function("counterexample(d=2,N=16,family=power_log:1,-1)")
    assert isinstance(f, CounterexampleFunction)
    assert f.spec.N == 16
    assert len(f.breakpoints(0)) == f.spec.cell_count


@pytest.mark.parametrize("d,N", [(2, 8), (2, 20)])
def test_origin_sum_matches_generic_partial_sum(log_weights, d, N):
    spec = build_spec(d, 2.0, N, log_weights)
    fast = origin_sum_fN(spec)
    generic = rectangular_partial_sum(CounterexampleFunction(spec), PartialSumRequest.square(N, [(0.0,) * d], d))
    assert not fast.empty
    assert fast.value > 0
    assert fast.value == pytest.approx(float(generic.values[0]), rel=1e-8, abs=1e-10)


def test_origin_sum_grows_with_n(log_weights):
    values = [origin_sum_fN(build_spec(2, 2.0, N, log_weights)).value for N in (32, 128, 512, 2048)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_pv_bounds_are_ordered(log_weights):
    for N in (32, 128):
        bound = pv_bound_fN(build_spec(2, 2.0, N, log_weights))
        assert 0 < bound.grid_lower <= bound.analytic_upper * (1 + 1e-9)
        assert len(bound.axis_lower) == 2


def test_lower_bound_series(log_weights):
    series = lower_bound_series(log_weights, 2, 64)
    assert series.size == 63
    assert np.all(np.diff(series) > 0)
    assert lower_bound_at(log_weights, 2, 64) == pytest.approx(series[-1])
    assert lower_bound_at(log_weights, 2, 1) == 0.0


def test_coefficient_bound_profile(log_weights):
    profile = coefficient_bound_profile(log_weights, 2.0)
    assert profile.infimum > 0
    assert profile.infimum == pytest.approx(profile.values.min())
    assert 2 <= profile.argmin <= 256
