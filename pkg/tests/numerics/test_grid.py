import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from gauss_stab.numerics.grid import Grid, GridFunction


def test_grid_points_and_step():
    grid = Grid(lo=-1.0, hi=1.0, n=5)
    assert grid.step == 0.5
    np.testing.assert_allclose(grid.points, [-1.0, -0.5, 0.0, 0.5, 1.0])
    assert grid.offset == 2.0


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(lo=1.0, hi=1.0, n=3),
        dict(lo=2.0, hi=1.0, n=3),
        dict(lo=0.0, hi=1.0, n=1),
        dict(lo=-np.inf, hi=1.0, n=3),
    ],
)
def test_grid_rejects_invalid_bounds(kwargs):
    with pytest.raises(ValidationError):
        Grid(**kwargs)


def test_grid_is_frozen_and_hashable():
    grid = Grid(lo=0.0, hi=1.0, n=3)
    with pytest.raises(TypeError):
        grid.n = 4
    assert {grid: 1}[Grid(lo=0.0, hi=1.0, n=3)] == 1


def test_grid_refine_keeps_the_nodes():
    grid = Grid(lo=-2.0, hi=2.0, n=9)
    fine = grid.refine(2)
    assert fine.n == 17
    np.testing.assert_allclose(fine.points[::2], grid.points)


def test_grid_window_shares_nodes():
    grid = Grid(lo=-8.0, hi=8.0, n=1025)
    window = grid.window(-6.0, 6.0)
    assert window.lo == -6.0
    assert window.hi == 6.0
    assert window.step == pytest.approx(grid.step)
    assert np.all(np.isin(np.round(window.points, 12), np.round(grid.points, 12)))


def test_grid_window_too_small():
    with pytest.raises(ValueError, match="less than two nodes"):
        Grid(lo=0.0, hi=1.0, n=3).window(0.1, 0.2)


@given(
    lo=st.floats(min_value=-50, max_value=0, allow_nan=False),
    width=st.floats(min_value=0.1, max_value=100),
    n=st.integers(min_value=2, max_value=500),
)
def test_grid_contains_its_points(lo, width, n):
    grid = Grid(lo=lo, hi=lo + width, n=n)
    assert grid.points.size == n
    assert grid.points[0] == lo
    assert grid.points[-1] == pytest.approx(lo + width)
    assert np.all(np.diff(grid.points) > 0)


def test_grid_function_checks_its_values():
    grid = Grid(lo=0.0, hi=1.0, n=3)
    with pytest.raises(ValueError, match="shape"):
        GridFunction(grid, np.zeros(4))
    with pytest.raises(ValueError, match="finite"):
        GridFunction(grid, [0.0, np.nan, 1.0])


def test_grid_function_is_read_only():
    grid = Grid(lo=0.0, hi=1.0, n=3)
    source = np.array([0.0, 1.0, 2.0])
    f = GridFunction(grid, source)
    source[0] = 5.0
    assert f.values[0] == 0.0
    with pytest.raises(ValueError):
        f.values[0] = 3.0


def test_grid_function_interpolation():
    grid = Grid(lo=0.0, hi=2.0, n=3)
    f = GridFunction(grid, [0.0, 2.0, 4.0])
    np.testing.assert_allclose(f([0.5, 1.5]), [1.0, 3.0])
    np.testing.assert_allclose(f([-1.0, 3.0], left=-7.0, right=7.0), [-7.0, 7.0])


def test_grid_function_complex_interpolation():
    grid = Grid(lo=0.0, hi=1.0, n=2)
    f = GridFunction(grid, [0.0, 2.0 + 2.0j])
    assert f.is_complex
    assert f(0.5) == pytest.approx(1.0 + 1.0j)
    np.testing.assert_allclose(f.imag.values, [0.0, 2.0])


def test_grid_function_cubic_reproduces_cubics():
    grid = Grid(lo=-1.0, hi=1.0, n=21)
    f = GridFunction.from_callable(grid, lambda x: x**3 - x)
    x = np.array([-0.93, -0.11, 0.37, 0.99])
    np.testing.assert_allclose(f.cubic(x), x**3 - x, atol=1e-12)
    assert f.cubic(2.0) == 0.0


def test_grid_function_norms():
    grid = Grid(lo=-1.0, hi=1.0, n=5)
    f = GridFunction(grid, [0.5, -2.0, 1.0, 0.0, -0.25])
    assert f.sup_norm() == 2.0
    assert f.edge_magnitude() == 0.5
    assert f.map(np.abs).values.min() == 0.0
