"""Orthogonality residuals of the optimal estimators.

Both residuals vanish for every test function ``g`` exactly when the
field holds the true conditional mean and conditional median.
"""
import numpy as np

from gauss_stab.channel.posterior_field import PosteriorField, posterior_blocks
from gauss_stab.numerics.grid import GridFunction
from gauss_stab.numerics.quadrature import RunningIntegral, trapezoid_weights
from gauss_stab.priors.gridded_density import GriddedDensity


def _check_test_function(field: PosteriorField, g: GridFunction):
    if g.grid != field.y_grid:
        raise ValueError("the test function must be tabulated on the field's y grid")


def orthogonality_residual_l2(
    prior: GriddedDensity, field: PosteriorField, g: GridFunction
) -> float:
    """``E[(X - E[X|Y]) g(Y)]`` by double quadrature."""
    _check_test_function(field, g)
    x = prior.grid.points
    x_weights = trapezoid_weights(prior.grid)
    y_weights = trapezoid_weights(field.y_grid) * g.values
    mean = field.cond_mean.values
    total = 0.0
    for chunk, rows in posterior_blocks(prior, field.y_grid.points):
        inner = rows @ (x_weights * x) - mean[chunk] * (rows @ x_weights)
        total += float(np.dot(y_weights[chunk], inner))
    return total / np.sqrt(2 * np.pi)


def orthogonality_residual_l1(
    prior: GriddedDensity, field: PosteriorField, g: GridFunction
) -> float:
    """``E[sign(X - ψ(Y)) g(Y)]``, the inner integral split at ``x = ψ(y)``."""
    _check_test_function(field, g)
    y_weights = trapezoid_weights(field.y_grid) * g.values
    median = field.cond_median.values
    total = 0.0
    for chunk, rows in posterior_blocks(prior, field.y_grid.points):
        running = RunningIntegral(prior.grid, rows)
        below = running(median[chunk])
        inner = running.totals - 2.0 * below
        total += float(np.dot(y_weights[chunk], inner))
    return total / np.sqrt(2 * np.pi)
