from logging import getLogger
from threading import Lock
from typing import Dict, NamedTuple

import numpy as np
from scipy.integrate import cumulative_trapezoid

from gauss_stab.exceptions import GaussStabError
from gauss_stab.numerics.grid import Grid, GridFunction
from gauss_stab.numerics.quadrature import (
    EdgeLeakage,
    trapezoid_integrate,
    trapezoid_weights,
)
from gauss_stab.priors.prior_spec import GaussianBumpPrior, PriorSpec

LOGGER = getLogger(__name__)

PRIOR_EDGE_TOLERANCE = 1e-12
NEGATIVE_TOLERANCE = 1e-15
OSCILLATION_LIMIT = 0.5
_CHUNK = 128


class NegativeDensity(GaussStabError):
    """The prior density is negative beyond the clipping tolerance."""


class UnderresolvedOscillation(GaussStabError):
    """The x-grid is too coarse for the requested characteristic frequencies."""


class CharacteristicFunction(NamedTuple):
    phi: GridFunction
    dphi: GridFunction
    phi_tilde: GridFunction


class GriddedDensity:
    """A normalised prior density tabulated on the working x-grid.

    Moments, CDF and ``slope_a = σ²/(1+σ²)`` are computed once at
    construction. Characteristic functions are cached per t-grid.
    """

    def __init__(self, density: GridFunction, spec: PriorSpec = None):
        self._density = density
        self._spec = spec
        grid = density.grid
        x = grid.points
        self._cdf = GridFunction(
            grid, cumulative_trapezoid(density.values, dx=grid.step, initial=0.0)
        )
        self._mean = trapezoid_integrate(GridFunction(grid, x * density.values))
        self._variance = trapezoid_integrate(
            GridFunction(grid, (x - self._mean) ** 2 * density.values)
        )
        self._char_cache: Dict[Grid, CharacteristicFunction] = {}
        self._lock = Lock()

    @property
    def spec(self) -> PriorSpec:
        return self._spec

    @property
    def grid(self) -> Grid:
        return self._density.grid

    @property
    def density(self) -> GridFunction:
        return self._density

    @property
    def cdf(self) -> GridFunction:
        return self._cdf

    @property
    def mean(self) -> float:
        return self._mean

    @property
    def variance(self) -> float:
        return self._variance

    @property
    def slope_a(self) -> float:
        return self._variance / (1.0 + self._variance)

    @property
    def sup_density(self) -> float:
        """``M``, the largest tabulated density value."""
        return self._density.sup_norm()

    def char_fn(self, t_grid: Grid) -> CharacteristicFunction:
        with self._lock:
            cached = self._char_cache.get(t_grid)
        if cached is None:
            cached = char_fn(self, t_grid)
            with self._lock:
                self._char_cache[t_grid] = cached
        return cached

    def __repr__(self):
        kind = self._spec.kind if self._spec is not None else "custom"
        return (
            f"GriddedDensity({kind}, mean={self._mean:.6g}, "
            f"variance={self._variance:.6g}, {self.grid!r})"
        )


def _tabulate(spec: PriorSpec, grid: Grid) -> np.ndarray:
    values = np.asarray(spec.density(grid.points), dtype=float)
    if isinstance(spec, GaussianBumpPrior):
        lowest = float(np.min(values))
        if lowest < -NEGATIVE_TOLERANCE:
            raise NegativeDensity(
                f"bump of height {spec.bump_height} drives the density to "
                f"{lowest:.3e} at x={grid.points[np.argmin(values)]:.4g}"
            )
    return np.clip(values, 0.0, None)


def _check_prior_edges(values: np.ndarray, grid: Grid, kind: str):
    edge = max(values[0], values[-1])
    if edge > PRIOR_EDGE_TOLERANCE:
        raise EdgeLeakage(
            f"{kind} prior density is {edge:.3e} at the edge of [{grid.lo}, {grid.hi}], "
            f"above {PRIOR_EDGE_TOLERANCE:.0e}: widen the x grid"
        )


def _normalise(values: np.ndarray, grid: Grid) -> np.ndarray:
    total = float(np.dot(trapezoid_weights(grid), values))
    if not total > 0:
        raise NegativeDensity(f"prior density has no mass on [{grid.lo}, {grid.hi}]")
    return values / total


def build_prior(spec: PriorSpec, grid: Grid) -> GriddedDensity:
    """Tabulate ``spec`` on ``grid``, renormalise and, on request, center it."""
    values = _tabulate(spec, grid)
    _check_prior_edges(values, grid, spec.kind)
    values = _normalise(values, grid)

    if spec.center:
        mean = float(np.dot(trapezoid_weights(grid), grid.points * values))
        LOGGER.info(f"Centering {spec.kind} prior, shifting by {-mean:.6g}")
        values = np.interp(grid.points + mean, grid.points, values, left=0.0, right=0.0)
        _check_prior_edges(values, grid, spec.kind)
        values = _normalise(values, grid)

    return GriddedDensity(GridFunction(grid, values), spec)


def characteristic_values(prior: GriddedDensity, t: np.ndarray):
    """``(φ(t), φ'(t))`` at arbitrary frequencies by direct quadrature."""
    grid = prior.grid
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.size and grid.step * float(np.max(np.abs(t))) >= OSCILLATION_LIMIT:
        raise UnderresolvedOscillation(
            f"step·max|t| = {grid.step * np.max(np.abs(t)):.3g} must stay below "
            f"{OSCILLATION_LIMIT}: refine the x grid or shrink the t grid"
        )
    x = grid.points
    weighted = trapezoid_weights(grid) * prior.density.values
    phi = np.empty(t.size, dtype=complex)
    dphi = np.empty(t.size, dtype=complex)
    for start in range(0, t.size, _CHUNK):
        block = np.exp(1j * np.outer(t[start : start + _CHUNK], x))
        phi[start : start + _CHUNK] = block @ weighted
        dphi[start : start + _CHUNK] = block @ (1j * x * weighted)
    return phi, dphi


def char_fn(prior: GriddedDensity, t_grid: Grid) -> CharacteristicFunction:
    """``φ``, ``φ'`` and ``φ̃ = (φ' + σ² t φ) / (1 + σ²)`` on ``t_grid``."""
    t = t_grid.points
    phi, dphi = characteristic_values(prior, t)
    sigma2 = prior.variance
    phi_tilde = (dphi + sigma2 * t * phi) / (1.0 + sigma2)
    return CharacteristicFunction(
        GridFunction(t_grid, phi),
        GridFunction(t_grid, dphi),
        GridFunction(t_grid, phi_tilde),
    )
