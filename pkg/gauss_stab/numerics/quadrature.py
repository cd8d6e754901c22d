"""Composite trapezoid quadrature on uniform grids.

Every integral in the package goes through this module so that all
tabulated functions share one grid and compose without resampling.
"""
from logging import getLogger
from typing import Callable, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.signal import fftconvolve

from gauss_stab.exceptions import GaussStabError
from gauss_stab.numerics.grid import Grid, GridFunction

LOGGER = getLogger(__name__)

EDGE_TOLERANCE = 1e-8

Kernel = Union[GridFunction, Callable[[np.ndarray], np.ndarray]]


class EdgeLeakage(GaussStabError):
    """A tabulated function is not negligible at the edge of its grid."""


def check_edges(f: GridFunction, name: str, tolerance: float = EDGE_TOLERANCE):
    magnitude = f.edge_magnitude()
    if magnitude > tolerance:
        raise EdgeLeakage(
            f"'{name}' is {magnitude:.3e} at the edge of [{f.grid.lo}, {f.grid.hi}], "
            f"above the {tolerance:.0e} tolerance: widen the grid"
        )


def trapezoid_weights(grid: Grid) -> np.ndarray:
    weights = np.full(grid.n, grid.step)
    weights[0] = weights[-1] = grid.step / 2
    return weights


def trapezoid_integrate(f: GridFunction) -> Union[float, complex]:
    result = trapezoid(f.values, dx=f.grid.step)
    return complex(result) if f.is_complex else float(result)


def inner_product(f: GridFunction, g: GridFunction) -> float:
    """``∫ f g`` without conjugation."""
    if f.grid != g.grid:
        raise ValueError("inner product needs both functions on the same grid")
    return float(trapezoid(f.values * g.values, dx=f.grid.step))


def l2_norm(f: GridFunction) -> float:
    return float(np.sqrt(trapezoid(np.abs(f.values) ** 2, dx=f.grid.step)))


def l1_norm(f: GridFunction) -> float:
    return float(trapezoid(np.abs(f.values), dx=f.grid.step))


def cumulative_integral(f: GridFunction) -> GridFunction:
    return GridFunction(
        f.grid, cumulative_trapezoid(f.values, dx=f.grid.step, initial=0.0)
    )


def _cubic_cell_weights(s: np.ndarray) -> np.ndarray:
    """Integrals over ``[0, s]`` of the cubic Lagrange basis on nodes -1, 0, 1, 2."""
    s2, s3, s4 = s**2, s**3, s**4
    return np.stack(
        [
            -(s4 / 4 - s3 + s2) / 6,
            (s4 / 4 - 2 * s3 / 3 - s2 / 2 + 2 * s) / 2,
            -(s4 / 4 - s3 / 3 - s2) / 2,
            (s4 / 4 - s2 / 2) / 6,
        ],
        axis=-1,
    )


class RunningIntegral:
    """Fourth-order ``∫_{lo}^{b}`` of tabulated rows for off-grid ``b``.

    Each row is integrated up to its own breakpoint: cumulative trapezoid up
    to the last node below the breakpoint, corrected by ``-h² g'/12`` at that
    node, plus the exact integral of the local cubic interpolant over the
    remaining partial cell. Rows must vanish at the left edge.
    """

    def __init__(self, grid: Grid, rows: np.ndarray):
        rows = np.atleast_2d(rows)
        if rows.shape[-1] != grid.n:
            raise ValueError(f"rows must have {grid.n} columns, got {rows.shape[-1]}")
        if grid.n < 4:
            raise ValueError("running integrals need at least four grid nodes")
        h = grid.step
        self._grid = grid
        self._rows = rows
        derivative = np.gradient(rows, h, axis=-1)
        self._base = (
            cumulative_trapezoid(rows, dx=h, axis=-1, initial=0.0)
            - h * h / 12 * derivative
        )

    @property
    def totals(self) -> np.ndarray:
        """Integrals over the whole grid (plain trapezoid)."""
        return trapezoid(self._rows, dx=self._grid.step, axis=-1)

    def __call__(self, upper: np.ndarray) -> np.ndarray:
        grid = self._grid
        n_rows = self._rows.shape[0]
        upper = np.broadcast_to(np.asarray(upper, dtype=float), (n_rows,))
        position = (np.clip(upper, grid.lo, grid.hi) - grid.lo) / grid.step
        k = np.clip(np.floor(position).astype(int), 1, grid.n - 3)
        s = position - k
        rows = np.arange(n_rows)
        stencil = self._rows[rows[:, None], k[:, None] + np.arange(-1, 3)]
        partial = np.sum(_cubic_cell_weights(s) * stencil, axis=-1) * grid.step
        return self._base[rows, k] + partial


def running_integral(f: GridFunction, upper: float) -> float:
    """``∫_{lo}^{upper} f`` to fourth order, ``upper`` anywhere in the grid."""
    return float(RunningIntegral(f.grid, f.values)(np.array([upper]))[0])


def lag_points(grid: Grid) -> np.ndarray:
    """``x_j - x_k = m * step`` for ``m = -(n-1) .. n-1``."""
    return np.arange(-(grid.n - 1), grid.n) * grid.step


def _convolve_on_grid(grid: Grid, f: np.ndarray, at_lags: np.ndarray) -> np.ndarray:
    """``step * Σ_k f_k g((j - k) step)`` from ``g`` sampled at ``lag_points``."""
    full = fftconvolve(f, at_lags, mode="full") * grid.step
    # full[j + n - 1] pairs f_k with the lag (j - k) * step
    return full[grid.n - 1 : 2 * grid.n - 1]


def _sample_at_lags(grid: Grid, g: Kernel) -> np.ndarray:
    lags = lag_points(grid)
    if not isinstance(g, GridFunction):
        return np.asarray(g(lags))
    shift = grid.offset
    if abs(shift - round(shift)) < 1e-9:
        index = np.arange(-(grid.n - 1), grid.n) + int(round(shift))
        inside = (index >= 0) & (index < grid.n)
        sampled = np.zeros(lags.size, dtype=g.values.dtype)
        sampled[inside] = g.values[index[inside]]
        return sampled
    # the origin falls between nodes: the lags are off-grid for g
    return g.cubic(lags)


def fft_convolve(f: GridFunction, g: Kernel) -> GridFunction:
    """``h(x_j) = step * Σ_k f(x_k) g(x_j - x_k)`` on the grid of ``f``.

    ``g`` is either tabulated on the same grid or a callable evaluated at the
    exact lags. A tabulated ``g`` whose grid does not hold the origin is read
    off its cubic spline at the lags.
    """
    grid = f.grid
    if isinstance(g, GridFunction):
        if g.grid != grid:
            raise ValueError("fft_convolve needs both functions on the same grid")
        check_edges(g, "g")
    else:
        check_edges(GridFunction.from_callable(grid, g), "g")
    check_edges(f, "f")
    return GridFunction(grid, _convolve_on_grid(grid, f.values, _sample_at_lags(grid, g)))
