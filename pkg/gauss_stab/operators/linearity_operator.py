"""The operator ``T_a`` whose kernel vanishes exactly for linear medians.

``T_a f(y) = ∫ f(x) sign(x - a y) e^{-(x-y)²/2} dx``

Every integral is split at its breakpoint with the fourth-order running
integral, so the sign discontinuity never costs accuracy.
"""
from logging import getLogger

import numpy as np
from pydantic import BaseModel, confloat
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline
from scipy.special import erfc

from gauss_stab.exceptions import GaussStabError
from gauss_stab.numerics.grid import Grid, GridFunction
from gauss_stab.numerics.quadrature import RunningIntegral, _convolve_on_grid, lag_points

LOGGER = getLogger(__name__)

NEGLIGIBLE = 1e-12
WEIGHT_LIMIT = 1e12
ROW_CHUNK = 128


class BreakpointOutOfRange(GaussStabError):
    """A kernel breakpoint falls outside the grid where the integrand lives."""


class WeightOverflow(GaussStabError):
    """The exponentially tilted density is too large to tabulate."""


class OperatorConfig(BaseModel):
    a: confloat(gt=0, lt=1)
    x_grid: Grid
    y_grid: Grid
    omega_grid: Grid

    class Config:
        extra = "forbid"
        frozen = True


def _check_breakpoints(
    rows: np.ndarray, breakpoints: np.ndarray, grid: Grid, at: str, scale: float
):
    """Breakpoints off the grid are clamped, which is exact only if the
    integrand has already vanished at that edge."""
    below = breakpoints < grid.lo
    above = breakpoints > grid.hi
    if not (np.any(below) or np.any(above)):
        return
    edge = np.where(below, np.abs(rows[:, 0]), np.where(above, np.abs(rows[:, -1]), 0.0))
    leaking = edge > NEGLIGIBLE * scale
    if np.any(leaking):
        where = int(np.argmax(leaking))
        raise BreakpointOutOfRange(
            f"breakpoint {breakpoints[where]:.6g} lies outside [{grid.lo}, {grid.hi}] "
            f"where the integrand is still {edge[where]:.3e}: widen the {at} grid"
        )


def _rows(f: GridFunction, centers: np.ndarray) -> np.ndarray:
    s = f.grid.points
    return f.values * np.exp(-0.5 * (s[None, :] - centers[:, None]) ** 2)


def _split_transform(b: float, f: GridFunction, out_points: np.ndarray, at: str):
    """``∫ f(s) sign(s - b t) e^{-(s-t)²/2} ds`` for each ``t`` in ``out_points``."""
    result = np.empty(out_points.size)
    for start in range(0, out_points.size, ROW_CHUNK):
        t = out_points[start : start + ROW_CHUNK]
        rows = _rows(f, t)
        breakpoints = b * t
        _check_breakpoints(rows, breakpoints, f.grid, at, f.sup_norm())
        running = RunningIntegral(f.grid, rows)
        result[start : start + ROW_CHUNK] = running.totals - 2.0 * running(breakpoints)
    return result


def _check_slope(a: float, allow_zero: bool):
    if not (0 <= a < 1 if allow_zero else 0 < a < 1):
        bound = "0 <= a < 1" if allow_zero else "0 < a < 1"
        raise ValueError(f"the operator slope must satisfy {bound}, got a={a}")


def apply_T(a: float, f: GridFunction, y_grid: Grid) -> GridFunction:
    """``T_a f`` on ``y_grid``; ``f`` lives on the x grid."""
    _check_slope(a, allow_zero=True)
    return GridFunction(y_grid, _split_transform(a, f, y_grid.points, "x"))


def apply_T_adjoint(a: float, g: GridFunction, x_grid: Grid) -> GridFunction:
    """``T*_a g = -T_{1/a} g`` on ``x_grid``; ``g`` lives on the y grid."""
    _check_slope(a, allow_zero=False)
    return GridFunction(x_grid, -_split_transform(1.0 / a, g, x_grid.points, "y"))


def apply_T_adjoint_direct(a: float, g: GridFunction, x_grid: Grid) -> GridFunction:
    """``T*_a g(x) = ∫ g(y) sign(x - a y) e^{-(x-y)²/2} dy`` from the kernel itself.

    The part below ``y = x/a`` is integrated from the left edge and the part
    above it from the right edge, independently of each other.
    """
    _check_slope(a, allow_zero=False)
    grid = g.grid
    mirrored = Grid(lo=-grid.hi, hi=-grid.lo, n=grid.n)
    x = x_grid.points
    result = np.empty(x.size)
    for start in range(0, x.size, ROW_CHUNK):
        chunk = x[start : start + ROW_CHUNK]
        rows = _rows(g, chunk)
        breakpoints = chunk / a
        _check_breakpoints(rows, breakpoints, grid, "y", g.sup_norm())
        lower = RunningIntegral(grid, rows)(breakpoints)
        upper = RunningIntegral(mirrored, rows[:, ::-1])(-breakpoints)
        result[start : start + ROW_CHUNK] = lower - upper
    return GridFunction(x_grid, result)


def _tilt(a: float, x: np.ndarray, values: np.ndarray, rate: float) -> np.ndarray:
    """``e^{rate x²} values`` without overflowing where ``values`` vanish."""
    magnitude = np.abs(values)
    safe = np.where(magnitude > 0, magnitude, 1.0)
    tilted = np.where(
        magnitude > 0, np.sign(values) * np.exp(rate * x**2 + np.log(safe)), 0.0
    )
    peak = float(np.max(np.abs(tilted)))
    if not peak <= WEIGHT_LIMIT:
        raise WeightOverflow(
            f"tilted density reaches {peak:.3e} for a={a:.6g}, above {WEIGHT_LIMIT:.0e}: "
            "the tails decay too slowly for this slope"
        )
    return tilted


def tilted_density(a: float, f: GridFunction) -> GridFunction:
    """``f̃(x) = e^{(1-a) x² / (2a)} f(x)`` on the grid of ``f``."""
    _check_slope(a, allow_zero=False)
    return GridFunction(
        f.grid, _tilt(a, f.grid.points, f.values, (1.0 - a) / (2.0 * a))
    )


def scaled_tilted_density(a: float, f: GridFunction) -> GridFunction:
    """``f̃(a x) = e^{a(1-a) x² / 2} f(a x)`` on the grid of ``f``."""
    _check_slope(a, allow_zero=False)
    x = f.grid.points
    return GridFunction(f.grid, _tilt(a, x, f.cubic(a * x), a * (1.0 - a) / 2.0))


def convolution_form(a: float, f: GridFunction, y_grid: Grid = None) -> GridFunction:
    """``e^{(1-a) y²/2} T_a f(y)`` as a fast convolution of the tilted density.

    With ``z = a y`` the weighted operator reads
    ``G(z) = ∫ f̃(x) sign(x - z) e^{-(x-z)²/(2a)} dx``. The discrete sum
    treats the kernel jump with ``sign(0) = 0``; ``h² f̃'/6`` restores the
    trapezoid's lost order at the jump.
    """
    y_grid = y_grid or f.grid
    grid = f.grid
    if abs(grid.offset - round(grid.offset)) > 1e-9:
        raise ValueError("convolution_form needs a grid with the origin as a node")
    f_tilde = tilted_density(a, f).values
    u = grid.points
    lags = lag_points(grid)
    kernel = -np.sign(lags) * np.exp(-(lags**2) / (2.0 * a))
    h = grid.step
    convolved = _convolve_on_grid(grid, f_tilde, kernel)
    convolved = convolved + h * h / 6.0 * np.gradient(f_tilde, h)
    z = a * y_grid.points
    if not np.all(grid.contains(z)):
        raise BreakpointOutOfRange(
            f"a·y reaches [{z.min():.6g}, {z.max():.6g}], outside [{grid.lo}, {grid.hi}]"
        )
    return GridFunction(y_grid, CubicSpline(u, convolved)(z))


def kernel_antiderivative(a: float, u: np.ndarray) -> np.ndarray:
    """``∫_{-∞}^{u} sign(-t) e^{-a t²/2} dt = √(π/(2a)) erfc(|u| √(a/2))``."""
    u = np.asarray(u, dtype=float)
    return np.sqrt(np.pi / (2.0 * a)) * erfc(np.abs(u) * np.sqrt(a / 2.0))


def growth_estimate(f_tilde_scaled: GridFunction, window: float = 0.5) -> float:
    """``C₀ = sup_y ∫_{y-window}^{y+window} f̃(a x) dx`` over grid-aligned centers."""
    grid = f_tilde_scaled.grid
    if window <= 0:
        raise ValueError(f"window must be positive, got {window}")
    if 2 * window >= grid.hi - grid.lo:
        raise ValueError(f"window {window} does not fit into [{grid.lo}, {grid.hi}]")
    cumulative = cumulative_trapezoid(f_tilde_scaled.values, dx=grid.step, initial=0.0)
    reach = window / grid.step
    if abs(reach - round(reach)) < 1e-9:
        m = int(round(reach))
        sums = cumulative[2 * m :] - cumulative[: -2 * m]
    else:
        x = grid.points
        centers = x[(x - window >= grid.lo) & (x + window <= grid.hi)]
        sums = np.interp(centers + window, x, cumulative) - np.interp(
            centers - window, x, cumulative
        )
    return float(np.max(sums))
