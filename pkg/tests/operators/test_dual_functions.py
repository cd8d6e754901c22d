import numpy as np
import pytest

from gauss_stab.numerics.grid import Grid
from gauss_stab.numerics.quadrature import trapezoid_integrate
from gauss_stab.operators.dual_functions import (
    cached_phi,
    calibration_error,
    construct_phi,
    denominator,
    denominator_shape_check,
    fourier_ratio,
    gaussian_moment_integral,
    numerator,
    phi_l1_majorant,
)
from gauss_stab.operators.linearity_operator import OperatorConfig


@pytest.fixture(scope="module")
def config(x_grid, y_grid, omega_grid):
    return OperatorConfig(a=0.5, x_grid=x_grid, y_grid=y_grid, omega_grid=omega_grid)


@pytest.mark.parametrize("n", range(1, 11))
def test_dual_functions_invert_the_adjoint(config, n):
    phi = cached_phi(n, config)
    assert phi.n == n
    assert phi.adjoint_residual < 1e-3
    assert phi.residual_window == pytest.approx(np.sqrt(2 * np.log(1e6)))


@pytest.mark.parametrize("n", [1, 2, 5, 10])
def test_majorant_bounds_the_fourier_norm(config, n):
    phi = cached_phi(n, config)
    assert phi.fourier_l1_norm > 0
    assert phi.fourier_l1_norm <= phi.majorant * (1 + 1e-9)
    assert phi_l1_majorant(n, 0.5) == phi.majorant


def test_cached_phi_shares_instances(config):
    assert cached_phi(3, config) is cached_phi(3, config)


def test_fourier_norm_grows_like_a_quarter_power(omega_grid):
    orders = [4, 8, 16, 32, 64]
    norms = [
        trapezoid_integrate(fourier_ratio(n, 0.5, omega_grid).map(np.abs))
        for n in orders
    ]
    slope = np.polyfit(np.log(orders), np.log(norms), 1)[0]
    assert 0.10 <= slope <= 0.40


@pytest.mark.parametrize("n", [1, 2, 3, 6])
def test_fourier_ratio_parity(omega_grid, n):
    values = fourier_ratio(n, 0.5, omega_grid).values
    np.testing.assert_allclose(
        values[::-1], (-1) ** (n + 1) * values, rtol=1e-10, atol=1e-300
    )


@pytest.mark.parametrize("n", [1, 3, 4])
def test_fourier_ratio_is_the_closed_form_quotient(n):
    # no node within three cells of the origin
    omega_grid = Grid(lo=0.5, hi=1.5, n=11)
    omega = omega_grid.points
    expected = numerator(n, 0.5, omega) / denominator(0.5, omega)
    np.testing.assert_allclose(fourier_ratio(n, 0.5, omega_grid).values, expected, rtol=1e-10)


def test_numerator_parity():
    omega = np.array([0.2, 0.7, 1.1])
    for n in range(1, 6):
        np.testing.assert_allclose(
            numerator(n, 0.5, -omega), (-1) ** n * numerator(n, 0.5, omega)
        )


@pytest.mark.parametrize("a", [0.25, 0.5, 0.8])
def test_closed_forms_agree_with_quadrature(a):
    assert calibration_error(a, 6) < 1e-6


def test_dawson_shape_of_the_denominator():
    report = denominator_shape_check(0.5, np.linspace(0.02, 4.0, 200))
    assert report.bounds_hold
    assert report.max_shape_error < 1e-8
    assert report.min_lower_slack >= 0
    assert report.min_upper_slack >= 0


def test_gaussian_moment_integral():
    assert gaussian_moment_integral(0, 1.0) == pytest.approx(np.sqrt(np.pi))
    assert gaussian_moment_integral(2, 1.0) == pytest.approx(np.sqrt(np.pi) / 2)
    assert gaussian_moment_integral(1, 4.0) == pytest.approx(0.25)
    with pytest.raises(ValueError, match="beta"):
        gaussian_moment_integral(1, 0.0)
    with pytest.raises(ValueError, match="diverges"):
        gaussian_moment_integral(-1, 1.0)


def test_construct_phi_order_range(config):
    with pytest.raises(ValueError, match="n >= 1"):
        construct_phi(0, config)


def test_unweighted_dual_function(y_grid, omega_grid):
    narrow = Grid(lo=-8.0, hi=8.0, n=2049)
    config = OperatorConfig(a=0.5, x_grid=narrow, y_grid=y_grid, omega_grid=omega_grid)
    phi = construct_phi(2, config)
    x = narrow.points
    unweighted = phi.unweighted()
    alive = np.abs(phi.weighted.values) > 1e-13
    np.testing.assert_allclose(
        unweighted.values[alive] * np.exp(-0.25 * x[alive] ** 2),
        phi.weighted.values[alive],
        rtol=1e-12,
    )
