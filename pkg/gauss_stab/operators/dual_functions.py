"""Dual functions ``φ_n`` with ``T*_a φ_n = H_n``, built by Fourier division.

Fourier convention: ``F[f](ω) = ∫ f(x) e^{-2πiωx} dx``. The weighted dual
``e^{-(1-a)x²/2} φ_n`` is the inverse transform of ``N_n(ω) / D(ω)`` with

* ``N_n = F[e^{-a(1-a)x²/2} H_n(a x)]
  = √(π/(a(1-a))) K_n⁻¹ (2πi/a)ⁿ ωⁿ e^{-π²ω²/(a(1-a))}``
* ``D = F[sign(x) e^{-a x²/2}] = -2i √(2/a) Daw(π √(2/a) ω)``
"""
from functools import lru_cache
from logging import getLogger

import numpy as np
from pydantic import BaseModel
from scipy.integrate import quad
from scipy.special import gammaln

from gauss_stab.exceptions import GaussStabError
from gauss_stab.hermite.hermite_basis import MAX_ORDER, hermite_values, log_normalizers
from gauss_stab.numerics.grid import Grid, GridFunction
from gauss_stab.numerics.quadrature import (
    RunningIntegral,
    trapezoid_integrate,
    trapezoid_weights,
)
from gauss_stab.numerics.special import dawson, dawson_bounds
from gauss_stab.operators.linearity_operator import OperatorConfig

LOGGER = getLogger(__name__)

UNDERFLOW = 1e-300
RECONSTRUCTION_LIMIT = 1e12
RECONSTRUCTION_FLOOR = 1e-13
# T*φ_n is checked only where the kernel weight e^{(1-a)x²/(2a)} stays below this
RESIDUAL_WEIGHT_LIMIT = 1e6
TAYLOR_CELLS = 3
CALIBRATION_FREQUENCIES = (0.1, 0.5, 1.0, 2.0)
CALIBRATION_ORDER = 6
CALIBRATION_TOLERANCE = 1e-6
ROW_CHUNK = 512


class DenominatorUnderflow(GaussStabError):
    """The Dawson denominator underflows while the numerator is still alive."""


class ReconstructionOverflow(GaussStabError):
    """Unweighting the dual function would overflow."""


def _slope_terms(a: float):
    beta = a * (1.0 - a)
    gamma = np.pi * np.sqrt(2.0 / a)
    return beta, gamma


def numerator(n: int, a: float, omega: np.ndarray) -> np.ndarray:
    """Closed-form ``N_n(ω)``; underflows to zero for large orders and ``|ω|``."""
    beta, _ = _slope_terms(a)
    omega = np.asarray(omega, dtype=float)
    log_k = log_normalizers(n, np.sqrt(a / (1.0 - a)))[n]
    with np.errstate(divide="ignore"):
        log_magnitude = (
            0.5 * np.log(np.pi / beta)
            - log_k
            + n * np.log(2.0 * np.pi / a)
            + n * np.log(np.abs(omega))
            - np.pi**2 * omega**2 / beta
        )
    signs = np.where(omega < 0, (-1.0) ** n, 1.0)
    return (1j) ** n * signs * np.exp(log_magnitude)


def denominator(a: float, omega: np.ndarray) -> np.ndarray:
    _, gamma = _slope_terms(a)
    return -2j * np.sqrt(2.0 / a) * dawson(gamma * np.asarray(omega, dtype=float))


def _log_ratio_constant(n: int, a: float) -> float:
    beta, _ = _slope_terms(a)
    log_k = log_normalizers(n, np.sqrt(a / (1.0 - a)))[n]
    return (
        np.log(0.5)
        + 0.5 * np.log(a / 2.0)
        + 0.5 * np.log(np.pi / beta)
        + n * np.log(2.0 * np.pi / a)
        - log_k
    )


def fourier_ratio(n: int, a: float, omega_grid: Grid) -> GridFunction:
    """``N_n / D`` on ``omega_grid``, with the removable zero at ``ω = 0``
    replaced by ``ω / Daw(γω) ≈ (1 + 2γ²ω²/3) / γ`` on the cells next to it."""
    beta, gamma = _slope_terms(a)
    omega = omega_grid.points
    magnitude_omega = np.abs(omega)
    log_c = _log_ratio_constant(n, a)
    near_zero = magnitude_omega < TAYLOR_CELLS * omega_grid.step

    far = ~near_zero
    log_denominator = np.full(omega.shape, -np.inf)
    log_denominator[far] = np.log(dawson(gamma * magnitude_omega[far]))
    log_numerator = np.full(omega.shape, -np.inf)
    log_numerator[far] = (
        log_c + n * np.log(magnitude_omega[far]) - np.pi**2 * omega[far] ** 2 / beta
    )
    starved = far & (log_denominator < np.log(UNDERFLOW)) & (
        log_numerator > np.log(UNDERFLOW)
    )
    if np.any(starved):
        raise DenominatorUnderflow(
            f"Dawson denominator underflows at |ω| = {magnitude_omega[starved].min():.4g} "
            "while the numerator does not: shrink the omega grid"
        )

    magnitude = np.zeros(omega.shape)
    magnitude[far] = np.exp(log_numerator[far] - log_denominator[far])
    taylor = (1.0 + 2.0 * gamma**2 * omega[near_zero] ** 2 / 3.0) / gamma
    magnitude[near_zero] = (
        np.exp(log_c - np.pi**2 * omega[near_zero] ** 2 / beta)
        * magnitude_omega[near_zero] ** (n - 1)
        * taylor
    )
    signs = np.where(omega < 0, (-1.0) ** (n + 1), 1.0)
    return GridFunction(omega_grid, -((1j) ** (n - 1)) * signs * magnitude)


def gaussian_moment_integral(m: float, beta: float) -> float:
    """``I_m = ∫ |ω|^m e^{-βω²} dω = β^{-(m+1)/2} Γ((m+1)/2)``."""
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if m <= -1:
        raise ValueError(f"the moment integral diverges for m={m}")
    return float(np.exp(gammaln((m + 1) / 2.0) - (m + 1) / 2.0 * np.log(beta)))


def phi_l1_majorant(n: int, a: float) -> float:
    """Upper bound on ``∫ |N_n / D|`` from ``1/Daw(w) <= 2w + 2/w``."""
    beta, gamma = _slope_terms(a)
    quadratic_rate = np.pi**2 / beta
    constant = np.exp(_log_ratio_constant(n, a))
    return float(
        constant
        * (
            2.0 * gamma * gaussian_moment_integral(n + 1, quadratic_rate)
            + 2.0 / gamma * gaussian_moment_integral(n - 1, quadratic_rate)
        )
    )


def _half_line_transform(fn, omega: float, odd: bool) -> float:
    """``∫_0^∞ fn(x) sin|cos(2πωx) dx`` by oscillatory quadrature."""
    value, _ = quad(
        fn,
        0.0,
        np.inf,
        weight="sin" if odd else "cos",
        wvar=2.0 * np.pi * omega,
        epsabs=1e-13,
        epsrel=1e-11,
    )
    return value


def direct_denominator(a: float, omega: float) -> complex:
    return -2j * _half_line_transform(lambda x: np.exp(-a * x * x / 2.0), omega, True)


def direct_numerator(n: int, a: float, omega: float) -> complex:
    sigma = np.sqrt(a / (1.0 - a))

    def profile(x):
        x = np.atleast_1d(x)
        values = np.exp(-a * (1.0 - a) * x * x / 2.0) * hermite_values(n, a * x, sigma)[n]
        return float(values[0])

    if n % 2:
        return -2j * _half_line_transform(profile, omega, True)
    return 2.0 * _half_line_transform(profile, omega, False)


@lru_cache(maxsize=None)
def calibration_error(a: float, order: int) -> float:
    """Largest relative gap between closed forms and direct quadrature."""
    worst = 0.0
    for omega in CALIBRATION_FREQUENCIES:
        closed = complex(denominator(a, omega))
        worst = max(worst, abs(closed - direct_denominator(a, omega)) / abs(closed))
    closed = np.array([complex(numerator(order, a, w)) for w in CALIBRATION_FREQUENCIES])
    direct = np.array([direct_numerator(order, a, w) for w in CALIBRATION_FREQUENCIES])
    worst = max(worst, float(np.max(np.abs(closed - direct)) / np.max(np.abs(closed))))
    return worst


class DawsonShapeReport(BaseModel):
    max_shape_error: float
    min_lower_slack: float
    min_upper_slack: float
    bounds_hold: bool

    class Config:
        extra = "forbid"


def denominator_shape_check(a: float, omega: np.ndarray) -> DawsonShapeReport:
    """``|D(ω)| / (2√(2/a))`` measured by quadrature must be ``Daw(π√(2/a)|ω|)``
    and obey the two-sided Dawson envelope."""
    _, gamma = _slope_terms(a)
    omega = np.abs(np.asarray(omega, dtype=float))
    omega = omega[omega > 0]
    measured = np.array(
        [abs(direct_denominator(a, w)) for w in omega]
    ) / (2.0 * np.sqrt(2.0 / a))
    w = gamma * omega
    lower, upper = dawson_bounds(w)
    lower_slack = measured - lower
    upper_slack = upper - measured
    return DawsonShapeReport(
        max_shape_error=float(np.max(np.abs(measured - dawson(w)))),
        min_lower_slack=float(np.min(lower_slack)),
        min_upper_slack=float(np.min(upper_slack)),
        bounds_hold=bool(np.all(lower_slack >= -1e-12) and np.all(upper_slack >= -1e-12)),
    )


def _inverse_transform(ratio: GridFunction, x_grid: Grid) -> np.ndarray:
    omega = ratio.grid.points
    weighted_ratio = trapezoid_weights(ratio.grid) * ratio.values
    x = x_grid.points
    result = np.empty(x.size)
    for start in range(0, x.size, ROW_CHUNK):
        phases = np.exp(2j * np.pi * np.outer(x[start : start + ROW_CHUNK], omega))
        result[start : start + ROW_CHUNK] = (phases @ weighted_ratio).real
    return result


def _adjoint_of_weighted(a: float, weighted: GridFunction, x: np.ndarray) -> np.ndarray:
    """``T*_a φ(x)`` with ``φ = e^{(1-a)y²/2} weighted``; the exponents are merged
    into ``-a y²/2 + x y - x²/2`` before evaluation."""
    grid = weighted.grid
    y = grid.points
    result = np.empty(x.size)
    for start in range(0, x.size, ROW_CHUNK):
        chunk = x[start : start + ROW_CHUNK]
        exponent = -0.5 * a * y[None, :] ** 2 + chunk[:, None] * y[None, :]
        rows = weighted.values * np.exp(exponent - 0.5 * chunk[:, None] ** 2)
        running = RunningIntegral(grid, rows)
        result[start : start + ROW_CHUNK] = 2.0 * running(chunk / a) - running.totals
    return result


def residual_half_width(a: float) -> float:
    return float(np.sqrt(2.0 * a / (1.0 - a) * np.log(RESIDUAL_WEIGHT_LIMIT)))


class PhiFunction:
    def __init__(
        self,
        n: int,
        a: float,
        weighted: GridFunction,
        ratio: GridFunction,
        fourier_l1_norm: float,
        adjoint_residual: float,
        residual_window: float,
        majorant: float,
        calibration_error: float,
    ):
        self.n = n
        self.a = a
        self.weighted = weighted
        self.ratio = ratio
        self.fourier_l1_norm = fourier_l1_norm
        self.adjoint_residual = adjoint_residual
        self.residual_window = residual_window
        self.majorant = majorant
        self.calibration_error = calibration_error

    def unweighted(self) -> GridFunction:
        """``φ_n = e^{(1-a)x²/2} weighted`` where that is representable."""
        x = self.weighted.grid.points
        values = self.weighted.values
        log_factor = 0.5 * (1.0 - self.a) * x**2
        alive = np.abs(values) > RECONSTRUCTION_FLOOR
        too_large = alive & (log_factor > np.log(RECONSTRUCTION_LIMIT))
        if np.any(too_large):
            raise ReconstructionOverflow(
                f"unweighting φ_{self.n} needs factors above {RECONSTRUCTION_LIMIT:.0e} "
                f"from |x| = {np.abs(x[too_large]).min():.4g}"
            )
        return GridFunction(
            self.weighted.grid,
            np.where(alive, values * np.exp(np.minimum(log_factor, 700.0)), 0.0),
        )

    def __repr__(self):
        return (
            f"PhiFunction(n={self.n}, a={self.a:.6g}, "
            f"l1={self.fourier_l1_norm:.6g}, residual={self.adjoint_residual:.3e})"
        )


def construct_phi(n: int, config: OperatorConfig) -> PhiFunction:
    if n < 1:
        raise ValueError(f"dual functions exist for n >= 1 only, got n={n}")
    if n > MAX_ORDER:
        raise ValueError(f"order {n} exceeds the supported maximum {MAX_ORDER}")
    a = config.a
    calibration = calibration_error(a, min(n, CALIBRATION_ORDER))
    if calibration > CALIBRATION_TOLERANCE:
        LOGGER.warning(
            f"Closed-form transforms disagree with quadrature by {calibration:.3e} at a={a}"
        )

    ratio = fourier_ratio(n, a, config.omega_grid)
    fourier_l1_norm = trapezoid_integrate(ratio.map(np.abs))
    weighted = GridFunction(config.x_grid, _inverse_transform(ratio, config.x_grid))

    half_width = min(residual_half_width(a), a * config.x_grid.hi, -a * config.x_grid.lo)
    window = config.x_grid.window(-half_width, half_width)
    x = window.points
    target = hermite_values(n, x, np.sqrt(a / (1.0 - a)))[n]
    recovered = _adjoint_of_weighted(a, weighted, x)
    weights = trapezoid_weights(window)
    adjoint_residual = float(
        np.sqrt(np.dot(weights, (recovered - target) ** 2) / np.dot(weights, target**2))
    )
    LOGGER.debug(
        f"φ_{n}: ‖F[φ₀φ_n]‖₁={fourier_l1_norm:.6g}, adjoint residual "
        f"{adjoint_residual:.3e} on |x| <= {half_width:.3g}"
    )
    return PhiFunction(
        n=n,
        a=a,
        weighted=weighted,
        ratio=ratio,
        fourier_l1_norm=fourier_l1_norm,
        adjoint_residual=adjoint_residual,
        residual_window=half_width,
        majorant=phi_l1_majorant(n, a),
        calibration_error=calibration,
    )


@lru_cache(maxsize=256)
def cached_phi(n: int, config: OperatorConfig) -> PhiFunction:
    """``construct_phi`` shared between certificates and diagnostics of one run."""
    return construct_phi(n, config)
