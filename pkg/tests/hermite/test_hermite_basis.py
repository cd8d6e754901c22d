import numpy as np
import pytest

from gauss_stab.hermite.hermite_basis import (
    MAX_ORDER,
    OrderOverflow,
    build_basis,
    hermite_coefficients,
    hermite_values,
    log_normalizers,
)
from gauss_stab.numerics.grid import GridFunction
from gauss_stab.numerics.quadrature import EdgeLeakage, l2_norm


@pytest.fixture(scope="module")
def basis(x_grid):
    return build_basis(0.5, 20, x_grid)


def test_gram_matrix_is_the_identity(basis):
    gram = basis.gram_matrix()
    assert gram.shape == (21, 21)
    assert np.max(np.abs(gram - np.eye(21))) < 1e-8


@pytest.mark.parametrize("a", [0.2, 0.5, 0.8])
def test_scale_follows_the_slope(x_grid, a):
    basis = build_basis(a, 4, x_grid)
    assert basis.sigma2 == pytest.approx(a / (1 - a))


def test_low_orders_match_the_derivative_definition(basis):
    # K_n H_n(x) = e^{x²/2} dⁿ/dxⁿ e^{-x²} for σ = 1
    x = np.array([-1.3, -0.2, 0.7, 2.1])
    gaussian = np.exp(-(x**2) / 2)
    normalizers = basis.normalizers
    np.testing.assert_allclose(
        normalizers[0] * basis.evaluate(0, x), gaussian, rtol=1e-12
    )
    np.testing.assert_allclose(
        normalizers[1] * basis.evaluate(1, x), -2 * x * gaussian, rtol=1e-12
    )
    np.testing.assert_allclose(
        normalizers[2] * basis.evaluate(2, x), (4 * x**2 - 2) * gaussian, rtol=1e-12
    )


def test_odd_orders_carry_the_derivative_sign(basis):
    assert basis.evaluate(1, 1.0) < 0
    assert basis.evaluate(3, 0.1) > 0


def test_parity(basis):
    x = np.linspace(0.1, 5.0, 50)
    for n in range(6):
        np.testing.assert_allclose(
            basis.evaluate(n, -x), (-1) ** n * basis.evaluate(n, x), atol=1e-15
        )


def test_log_normalizers_do_not_overflow():
    logs = log_normalizers(MAX_ORDER, 1.0)
    assert np.all(np.isfinite(logs))
    assert logs[0] == pytest.approx(0.25 * np.log(np.pi))


def test_recurrence_stays_finite_at_high_order():
    values = hermite_values(MAX_ORDER, np.linspace(-40.0, 40.0, 101), 1.0)
    assert np.all(np.isfinite(values))
    assert np.max(np.abs(values)) < 1.0


def test_gaussian_prior_is_its_own_ground_state(gaussian_prior):
    basis = build_basis(gaussian_prior.slope_a, 10, gaussian_prior.grid)
    coefficients = hermite_coefficients(gaussian_prior.density, basis)
    assert np.max(np.abs(coefficients[1:])) < 1e-8
    assert coefficients[0] ** 2 == pytest.approx(l2_norm(gaussian_prior.density) ** 2)


def test_parseval_for_the_bump_prior(bump_prior):
    basis = build_basis(bump_prior.slope_a, 64, bump_prior.grid)
    coefficients = hermite_coefficients(bump_prior.density, basis)
    assert np.sum(coefficients**2) >= 0.999 * l2_norm(bump_prior.density) ** 2


def test_build_basis_errors(x_grid):
    with pytest.raises(ValueError, match="0 < a < 1"):
        build_basis(1.0, 4, x_grid)
    with pytest.raises(ValueError, match="nonnegative"):
        build_basis(0.5, -1, x_grid)
    with pytest.raises(OrderOverflow):
        build_basis(0.5, MAX_ORDER + 1, x_grid)
    with pytest.raises(EdgeLeakage):
        build_basis(0.9, 10, x_grid)


def test_coefficients_need_the_basis_grid(basis, y_grid):
    with pytest.raises(ValueError, match="basis grid"):
        hermite_coefficients(GridFunction(y_grid, np.zeros(y_grid.n)), basis)
