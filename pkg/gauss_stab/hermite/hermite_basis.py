"""Orthonormal Hermite functions with scale ``σ² = a / (1 - a)``.

``H_n(x) = K_n⁻¹ e^{x²/(2σ²)} dⁿ/dxⁿ e^{-x²/σ²}`` keeps the ``(-1)ⁿ`` of the
derivative. The functions are generated by the normalised three-term
recurrence and never by differentiation.
"""
from logging import getLogger
from typing import List

import numpy as np
from scipy.special import gammaln

from gauss_stab.exceptions import GaussStabError
from gauss_stab.numerics.grid import Grid, GridFunction
from gauss_stab.numerics.quadrature import check_edges, trapezoid_weights

LOGGER = getLogger(__name__)

MAX_ORDER = 512
REFINEMENT_ORDER = 64
HERMITE_EDGE_TOLERANCE = 1e-10


class OrderOverflow(GaussStabError):
    """The requested Hermite order is beyond the supported range."""


def hermite_values(max_order: int, x: np.ndarray, sigma: float) -> np.ndarray:
    """Rows ``H_0(x) .. H_N(x)`` at arbitrary points."""
    u = np.asarray(x, dtype=float) / sigma
    values = np.empty((max_order + 1,) + u.shape)
    values[0] = np.pi ** (-0.25) * np.exp(-0.5 * u**2)
    if max_order >= 1:
        values[1] = np.sqrt(2.0) * u * values[0]
    for n in range(1, max_order):
        values[n + 1] = (
            np.sqrt(2.0 / (n + 1)) * u * values[n] - np.sqrt(n / (n + 1)) * values[n - 1]
        )
    signs = (-1.0) ** np.arange(max_order + 1)
    return values * signs.reshape((-1,) + (1,) * u.ndim) / np.sqrt(sigma)


def log_normalizers(max_order: int, sigma: float) -> np.ndarray:
    """``log K_n = ¼ log π + (n/2) log 2 + ½ log n! - (n - ½) log σ``."""
    n = np.arange(max_order + 1)
    return (
        0.25 * np.log(np.pi)
        + 0.5 * n * np.log(2.0)
        + 0.5 * gammaln(n + 1)
        - (n - 0.5) * np.log(sigma)
    )


class HermiteBasis:
    def __init__(self, a: float, max_order: int, grid: Grid):
        self.a = a
        self.sigma2 = a / (1.0 - a)
        self.max_order = max_order
        self.grid = grid
        table = hermite_values(max_order, grid.points, self.sigma)
        self.functions: List[GridFunction] = [GridFunction(grid, row) for row in table]
        self.log_normalizers = log_normalizers(max_order, self.sigma)

    @property
    def sigma(self) -> float:
        return float(np.sqrt(self.sigma2))

    @property
    def normalizers(self) -> np.ndarray:
        """``K_n``; overflows to ``inf`` for large orders, use ``log_normalizers``."""
        with np.errstate(over="ignore"):
            return np.exp(self.log_normalizers)

    def evaluate(self, n: int, x: np.ndarray) -> np.ndarray:
        """``H_n`` at arbitrary points, by the same recurrence."""
        if not 0 <= n <= self.max_order:
            raise ValueError(f"order {n} outside the basis range 0..{self.max_order}")
        return hermite_values(n, x, self.sigma)[n]

    def gram_matrix(self) -> np.ndarray:
        table = np.stack([f.values for f in self.functions])
        return (table * trapezoid_weights(self.grid)) @ table.T

    def __repr__(self):
        return f"HermiteBasis(a={self.a:.6g}, max_order={self.max_order}, {self.grid!r})"


def build_basis(a: float, max_order: int, grid: Grid) -> HermiteBasis:
    if not 0 < a < 1:
        raise ValueError(f"Hermite scale needs 0 < a < 1, got a={a}")
    if max_order < 0:
        raise ValueError(f"max_order must be nonnegative, got {max_order}")
    if max_order > MAX_ORDER:
        raise OrderOverflow(
            f"Hermite order {max_order} exceeds the supported maximum {MAX_ORDER}"
        )
    basis = HermiteBasis(a, max_order, grid)
    check_edges(basis.functions[-1], f"H_{max_order}", HERMITE_EDGE_TOLERANCE)
    return basis


def _coefficients(f: GridFunction, basis: HermiteBasis) -> np.ndarray:
    table = np.stack([h.values for h in basis.functions])
    return table @ (trapezoid_weights(basis.grid) * f.values)


def hermite_coefficients(f: GridFunction, basis: HermiteBasis) -> np.ndarray:
    """``c_n = <f, H_n>`` for ``n = 0 .. N``."""
    if f.grid != basis.grid:
        raise ValueError("f must be tabulated on the basis grid")
    coefficients = _coefficients(f, basis)
    if basis.max_order > REFINEMENT_ORDER:
        fine_grid = basis.grid.refine(2)
        fine = HermiteBasis(basis.a, basis.max_order, fine_grid)
        fine_f = GridFunction(fine_grid, f.cubic(fine_grid.points))
        drift = float(np.max(np.abs(_coefficients(fine_f, fine) - coefficients)))
        LOGGER.warning(
            f"Hermite coefficients up to order {basis.max_order} exceed "
            f"{REFINEMENT_ORDER}; 2x refinement moves them by at most {drift:.3e}"
        )
    return coefficients
