import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from varlab.engines.model import (
    Box,
    GridFunction,
    UniformGrid,
    format_grid_text,
    line_slice,
    mixed_difference,
    parse_grid_text,
    star_value,
)
from varlab.exceptions import InvalidBoxError, ValidationError
from varlab.functions import CallableFunction, get_function


def mixed_difference_recursive(f, box: Box) -> float:
    """Mixed difference by repeated differencing, one axis at a time."""

    def diff(prefix, axis):
        if axis == box.dim:
            return float(f.evaluate(np.asarray([prefix], dtype=float))[0])
        return diff(prefix + (box.upper[axis],), axis + 1) - diff(prefix + (box.lower[axis],), axis + 1)

    return diff((), 0)


TWO_PI = 2 * math.pi


def _sin_cos():
    return CallableFunction(2, lambda p: np.sin(p[..., 0]) * np.cos(p[..., 1]), label="sin_cos")


def test_grid_rejects_single_point_axis():
    with pytest.raises(ValidationError):
        UniformGrid((1, 4))


def test_degenerate_box_is_rejected():
    with pytest.raises(InvalidBoxError):
        Box((0.0, 1.0), (0.0, 2.0))
    with pytest.raises(InvalidBoxError):
        Box((0.0,), (7.0,))


def test_box_from_indices_accepts_full_period():
    box = Box.from_indices(UniformGrid((4, 4)), (0, 1), (4, 3))
    assert box.upper[0] == pytest.approx(TWO_PI)
    assert box.lower[1] == pytest.approx(math.pi / 2)


interval = st.tuples(st.floats(0.0, 3.0), st.floats(3.1, 6.2))


@given(interval, interval)
@settings(max_examples=100, deadline=None)
def test_mixed_difference_of_product_factorizes(x_range, y_range):
    (a1, b1), (a2, b2) = x_range, y_range
    box = Box((a1, a2), (b1, b2))
    expected = (math.sin(b1) - math.sin(a1)) * (math.cos(b2) - math.cos(a2))
    assert mixed_difference(_sin_cos(), box) == pytest.approx(expected, abs=1e-12)


@given(interval, interval, interval)
@settings(max_examples=50, deadline=None)
def test_corner_sum_matches_recursive_differencing(r1, r2, r3):
    f = CallableFunction(3, lambda p: np.exp(np.sin(p[..., 0] * p[..., 1])) + p[..., 2] ** 2 * p[..., 0])
    box = Box((r1[0], r2[0], r3[0]), (r1[1], r2[1], r3[1]))
    assert mixed_difference(f, box) == pytest.approx(mixed_difference_recursive(f, box), rel=1e-9, abs=1e-9)


def test_grid_function_is_a_right_continuous_step():
    g = GridFunction(UniformGrid((4,)), [0.0, 1.0, 2.0, 3.0])
    assert g.evaluate(np.array([[0.1]]))[0] == 0.0
    assert g.evaluate(np.array([[math.pi / 2]]))[0] == 1.0
    assert g.evaluate_one_sided(np.array([[math.pi / 2]]), np.array([[-1.0]]))[0] == 0.0
    # left limit at 0 wraps to the last sample
    assert g.evaluate_one_sided(np.array([[0.0]]), np.array([[-1.0]]))[0] == 3.0


def test_grid_function_rejects_wrong_sample_count():
    with pytest.raises(ValidationError):
        GridFunction(UniformGrid((3, 3)), np.zeros(8))


def test_line_slice_of_grid_returns_row():
    samples = np.arange(12.0).reshape(3, 4)
    g = GridFunction(UniformGrid((3, 4)), samples)
    row = line_slice(g, 1, [TWO_PI / 3])
    np.testing.assert_array_equal(row.samples, samples[1])
    col = line_slice(g, 0, [0.0])
    np.testing.assert_array_equal(col.samples, samples[:, 0])


def test_line_slice_of_closed_form_fixes_other_coordinates():
    line = line_slice(_sin_cos(), 0, [0.0])
    assert line.dim == 1
    assert line.evaluate(np.array([[math.pi / 2]]))[0] == pytest.approx(1.0)


def test_star_value_at_jumps():
    square = get_function("square_wave(dim=1)")
    assert star_value(square, [0.0]).value == pytest.approx(0.0)
    assert star_value(square, [math.pi / 2]).value == pytest.approx(1.0)
    assert star_value(get_function("sign_product(dim=2)"), [0.0, 0.0]).value == pytest.approx(0.0)


def test_star_value_of_jump_line_averages_both_sides():
    f = get_function("jump_line(dim=2)")
    expected = (math.e + 1.0) / 2.0 * (1.0 + math.cos(1.0) / 2.0)
    exact = star_value(f, [0.0, 1.0])
    assert exact.mode == "exact"
    assert exact.value == pytest.approx(expected, rel=1e-12)
    numeric = star_value(f, [0.0, 1.0], h=None)
    assert numeric.mode == "numeric"
    assert numeric.value == pytest.approx(expected, rel=1e-3)


def test_star_value_rejects_wrong_dimension():
    with pytest.raises(ValidationError):
        star_value(get_function("sine(dim=2)"), [0.0])


def test_grid_text_reads_back():
    g = GridFunction(UniformGrid((2, 3)), [[0.5, -1.25, 3.0], [1e-3, 2.0, 0.0]])
    again = parse_grid_text(format_grid_text(g))
    assert again.grid == g.grid
    np.testing.assert_array_equal(again.samples, g.samples)


def test_grid_text_needs_header():
    with pytest.raises(ValidationError):
        parse_grid_text("sizes 2\n1 2\n")
