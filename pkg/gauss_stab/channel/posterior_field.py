"""Posterior summaries for the channel ``Y = X + Z`` with ``Z ~ N(0, 1)``."""
from logging import getLogger
from typing import Callable, Iterator, Tuple

import numpy as np
from pydantic import BaseModel

from gauss_stab.exceptions import GaussStabError
from gauss_stab.numerics.grid import Grid, GridFunction
from gauss_stab.numerics.optimize import NoBracket, bisect_roots
from gauss_stab.numerics.quadrature import RunningIntegral, trapezoid_weights
from gauss_stab.priors.gridded_density import GriddedDensity

LOGGER = getLogger(__name__)

MARGINAL_FLOOR = 1e-14
MEDIAN_TOLERANCE = 1e-10
MONOTONICITY_TOLERANCE = 1e-9
# posterior density below which the conditional CDF counts as flat at the median
FLAT_DENSITY = 1e-8
FLAT_LEVEL_OFFSET = 1e-9
ROW_CHUNK = 128


class MarginalUnderflow(GaussStabError):
    """The marginal density of ``Y`` is numerically zero on the y-grid."""


class MedianBracketFailure(GaussStabError):
    """The posterior mass is too degenerate to bracket its median."""


class MonotonicityViolation(GaussStabError):
    """The computed conditional median decreases along the y-grid."""


class PosteriorField:
    def __init__(
        self,
        y_grid: Grid,
        marginal: GridFunction,
        cond_mean: GridFunction,
        cond_median: GridFunction,
        slope_a: float,
    ):
        for name, f in (
            ("marginal", marginal),
            ("cond_mean", cond_mean),
            ("cond_median", cond_median),
        ):
            if f.grid != y_grid:
                raise ValueError(f"'{name}' must be tabulated on the y grid")
        self.y_grid = y_grid
        self.marginal = marginal
        self.cond_mean = cond_mean
        self.cond_median = cond_median
        self.slope_a = slope_a

    def __repr__(self):
        return f"PosteriorField(a={self.slope_a:.6g}, {self.y_grid!r})"


class MonotonicityAudit(BaseModel):
    min_increment: float
    violations: int
    mean_min_increment: float
    mean_violations: int

    class Config:
        extra = "forbid"


def posterior_blocks(
    prior: GriddedDensity, y: np.ndarray
) -> Iterator[Tuple[slice, np.ndarray]]:
    """Rows ``f(x) e^{-(x-y)²/2}`` for chunks of ``y`` values."""
    x = prior.grid.points
    f = prior.density.values
    for start in range(0, y.size, ROW_CHUNK):
        chunk = slice(start, min(start + ROW_CHUNK, y.size))
        yield chunk, f * np.exp(-0.5 * (x[None, :] - y[chunk, None]) ** 2)


def _medians(
    grid: Grid, running: RunningIntegral, totals: np.ndarray
) -> Tuple[np.ndarray, Callable[[float], np.ndarray]]:
    lo = np.full(totals.size, grid.lo)
    hi = np.full(totals.size, grid.hi)

    def at_level(level):
        return bisect_roots(
            lambda b: running(b) / totals - level, lo, hi, MEDIAN_TOLERANCE
        )

    return at_level(0.5), at_level


def _resolve_flat_medians(prior, y_chunk, roots, at_level, totals):
    posterior_density = (
        prior.density(roots) * np.exp(-0.5 * (roots - y_chunk) ** 2) / totals
    )
    flat = posterior_density < FLAT_DENSITY
    if not np.any(flat):
        return roots
    lower = at_level(0.5 - FLAT_LEVEL_OFFSET)
    upper = at_level(0.5 + FLAT_LEVEL_OFFSET)
    LOGGER.info(
        f"Posterior CDF flat at the median for {int(np.sum(flat))} y values, "
        "using interval midpoints"
    )
    return np.where(flat, 0.5 * (lower + upper), roots)


def posterior_field(prior: GriddedDensity, y_grid: Grid) -> PosteriorField:
    """Marginal, conditional mean and conditional median on ``y_grid``."""
    x_grid = prior.grid
    x = x_grid.points
    y = y_grid.points
    weights = trapezoid_weights(x_grid)
    normaliser = np.sqrt(2 * np.pi)

    marginal = np.empty(y.size)
    cond_mean = np.empty(y.size)
    cond_median = np.empty(y.size)
    for chunk, rows in posterior_blocks(prior, y):
        mass = rows @ weights
        if np.any(mass / normaliser < MARGINAL_FLOOR):
            bad = y[chunk][np.argmin(mass)]
            raise MarginalUnderflow(
                f"marginal density is {np.min(mass) / normaliser:.3e} at y={bad:.4g}, "
                f"below {MARGINAL_FLOOR:.0e}: shrink the y grid"
            )
        marginal[chunk] = mass / normaliser
        cond_mean[chunk] = (rows @ (weights * x)) / mass

        running = RunningIntegral(x_grid, rows)
        totals = running.totals
        try:
            roots, at_level = _medians(x_grid, running, totals)
            roots = _resolve_flat_medians(prior, y[chunk], roots, at_level, totals)
        except NoBracket as exc:
            raise MedianBracketFailure(
                f"cannot bracket the posterior median for y in "
                f"[{y[chunk][0]:.4g}, {y[chunk][-1]:.4g}]: {exc}"
            ) from exc
        cond_median[chunk] = roots

    field = PosteriorField(
        y_grid,
        GridFunction(y_grid, marginal),
        GridFunction(y_grid, cond_mean),
        GridFunction(y_grid, cond_median),
        prior.slope_a,
    )
    audit = monotonicity_audit(field)
    if audit.violations:
        raise MonotonicityViolation(
            f"conditional median decreases by {-audit.min_increment:.3e} at "
            f"{audit.violations} places: the x grid does not resolve the posterior"
        )
    if audit.mean_violations:
        LOGGER.warning(
            f"Conditional mean decreases at {audit.mean_violations} places "
            f"(min increment {audit.mean_min_increment:.3e})"
        )
    return field


def monotonicity_audit(field: PosteriorField) -> MonotonicityAudit:
    median_steps = np.diff(field.cond_median.values)
    mean_steps = np.diff(field.cond_mean.values)
    return MonotonicityAudit(
        min_increment=float(np.min(median_steps)),
        violations=int(np.sum(median_steps < -MONOTONICITY_TOLERANCE)),
        mean_min_increment=float(np.min(mean_steps)),
        mean_violations=int(np.sum(mean_steps < -MONOTONICITY_TOLERANCE)),
    )


def posterior_mass_below(prior: GriddedDensity, y: float, x: float) -> float:
    """``P(X <= x | Y = y)`` with the fourth-order partial integral."""
    _, rows = next(posterior_blocks(prior, np.array([y], dtype=float)))
    running = RunningIntegral(prior.grid, rows)
    return float(running(np.array([x]))[0] / running.totals[0])
