import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from varlab.engines.fourier import (
    PartialSumRequest,
    cell_integrals,
    coefficient_table,
    dirichlet_kernel,
    fourier_coefficient,
    rectangular_partial_sum,
)
from varlab.engines.quadrature import gauss_rule, panel_edges, periodic_rule
from varlab.exceptions import ValidationError
from varlab.functions import CallableFunction, ProductFunction, get_function
from varlab.functions.product import sine_factor

TWO_PI = 2 * math.pi


# --- quadrature ---

@pytest.mark.parametrize("degree", range(0, 16))
def test_gauss_rule_is_exact_for_polynomials(degree):
    nodes, weights = gauss_rule(8)
    exact = 0.0 if degree % 2 else 2.0 / (degree + 1)
    assert float(weights @ nodes ** degree) == pytest.approx(exact, abs=1e-14)


def test_panel_edges_include_breakpoints():
    edges = panel_edges(4, [1.0, math.pi, 7.0])
    assert 1.0 in edges
    assert np.count_nonzero(np.isclose(edges, math.pi)) == 1
    assert edges[0] == 0.0 and edges[-1] == TWO_PI
    assert np.all(np.diff(edges) > 0)


def test_periodic_rule_integrates_step_exactly():
    nodes, weights = periodic_rule(8, kinks=[-1.0])
    kink = TWO_PI - 1.0
    values = np.where(nodes < kink, 1.0, -2.0)
    assert float(weights.sum()) == pytest.approx(TWO_PI)
    assert float(weights @ values) == pytest.approx(kink - 2.0 * 1.0, abs=1e-12)


def test_cell_integrals_are_positive():
    values = cell_integrals(16, 10)
    assert values.shape == (10,)
    assert np.all(values > 0)


# --- kernel ---

def test_dirichlet_kernel_values():
    assert dirichlet_kernel(5, 0.0) == pytest.approx(5.5)
    assert dirichlet_kernel(1, math.pi) == pytest.approx(-0.5)
    assert dirichlet_kernel(3, TWO_PI) == pytest.approx(3.5)


@given(st.integers(0, 20), st.floats(0.01, 6.27))
@settings(max_examples=100, deadline=None)
def test_dirichlet_kernel_matches_cosine_sum(N, t):
    expected = 0.5 + sum(math.cos(k * t) for k in range(1, N + 1))
    assert dirichlet_kernel(N, t) == pytest.approx(expected, abs=1e-9)


def test_dirichlet_kernel_rejects_negative_degree():
    with pytest.raises(ValidationError):
        dirichlet_kernel(-1, 0.0)


# --- coefficients ---

def test_coefficients_of_sine_product():
    f = ProductFunction([sine_factor(), sine_factor()])
    assert fourier_coefficient(f, (1, 1)).value == pytest.approx(-0.25, abs=1e-14)
    assert fourier_coefficient(f, (1, -1)).value == pytest.approx(0.25, abs=1e-14)
    assert fourier_coefficient(f, (2, 1)).value == pytest.approx(0.0, abs=1e-14)


def test_coefficient_table_of_trig_polynomial():
    f = get_function("trig_poly(dim=2,degree=3,seed=5)")
    table = coefficient_table(f, 4)
    assert table.alias_safe
    for n in [(0, 0), (1, -2), (3, 3), (-2, 0), (4, 1)]:
        assert table[n] == pytest.approx(f.coefficient(n), abs=1e-13)
    with pytest.raises(KeyError):
        table[(5, 0)]


def test_square_wave_coefficients_use_panels():
    table = coefficient_table(get_function("square_wave(dim=1)"), 5)
    assert "gauss" in table.rule
    # odd harmonics 2 / (i pi k), even harmonics vanish
    assert table[(1,)] == pytest.approx(2 / (1j * math.pi), abs=1e-12)
    assert table[(2,)] == pytest.approx(0.0, abs=1e-12)
    assert table[(3,)] == pytest.approx(2 / (3j * math.pi), abs=1e-12)


# --- partial sums ---

def test_request_validation():
    with pytest.raises(ValidationError):
        PartialSumRequest((4, 4), [[0.0, 7.0]])
    with pytest.raises(ValidationError):
        PartialSumRequest((4,), [[0.0, 1.0]])
    with pytest.raises(ValidationError):
        PartialSumRequest((4,), [[0.0]], path="fft")


def test_partial_sum_reproduces_trig_polynomial():
    f = get_function("trig_poly(dim=2,degree=3,seed=1)")
    points = [(0.3, 1.2), (2.0, 5.0)]
    expected = f.evaluate(np.asarray(points))
    coeff = rectangular_partial_sum(f, PartialSumRequest.square(4, points, 2))
    kernel = rectangular_partial_sum(f, PartialSumRequest.square(4, points, 2, path="kernel"))
    np.testing.assert_allclose(coeff.values, expected, atol=1e-12)
    np.testing.assert_allclose(kernel.values, expected, atol=1e-8)
    assert coeff.imag_max < 1e-12


def test_rectangular_degrees_truncate_per_axis():
    f = CallableFunction(2, lambda p: np.cos(3 * p[..., 0]) + np.cos(p[..., 1]))
    request = PartialSumRequest((2, 1), [(0.0, 0.0)])
    assert rectangular_partial_sum(f, request).values[0] == pytest.approx(1.0, abs=1e-12)


def test_square_wave_partial_sums_converge_to_star_value():
    f = get_function("square_wave(dim=1)")
    at_jump = rectangular_partial_sum(f, PartialSumRequest.square(32, [(0.0,)], 1))
    assert at_jump.values[0] == pytest.approx(0.0, abs=1e-12)
    errors = []
    for N in (16, 64):
        result = rectangular_partial_sum(f, PartialSumRequest.square(N, [(math.pi / 2,)], 1, estimate_error=True))
        errors.append(abs(result.values[0] - 1.0))
        assert result.est_error is not None
    assert errors[1] < errors[0]


def test_coefficient_and_kernel_paths_agree_on_jump_line():
    f = get_function("jump_line(dim=2)")
    points = [(0.5, 1.0), (3.0, 0.2)]
    coeff = rectangular_partial_sum(f, PartialSumRequest.square(8, points, 2))
    kernel = rectangular_partial_sum(f, PartialSumRequest.square(8, points, 2, path="kernel"))
    np.testing.assert_allclose(coeff.values, kernel.values, atol=1e-8)
