"""Stability of the conditional mean: near-linear ``E[X|Y]`` forces a
prior close to ``N(0, σ²)`` in Lévy distance."""
from logging import getLogger
from typing import List, NamedTuple, Optional

import numpy as np
from pydantic import BaseModel
from scipy.integrate import simpson

from gauss_stab.channel.posterior_field import PosteriorField, posterior_field
from gauss_stab.exceptions import GaussStabError
from gauss_stab.numerics.grid import Grid, GridFunction
from gauss_stab.numerics.optimize import golden_minimize
from gauss_stab.numerics.quadrature import trapezoid_integrate, trapezoid_weights
from gauss_stab.numerics.special import gaussian_cdf
from gauss_stab.priors.gridded_density import GriddedDensity, characteristic_values
from gauss_stab.stability.levy import LEVY_TOLERANCE, levy_distance, levy_profile

LOGGER = getLogger(__name__)

DELTA_RANGE = (1e-6, 1e3)
DELTA_TOLERANCE = 1e-10
ESSEEN_SLACK = 1e-9
PROFILE_POINTS = 101
DIFF_CHAR_POINTS = 1025
ROW_CHUNK = 256


class DomainError(GaussStabError):
    """The bound is undefined for this argument."""


class L2Bound(NamedTuple):
    bound: float
    delta_star: float
    saturated: bool


class EsseenReport(BaseModel):
    lhs: float
    rhs: float
    passed: bool

    class Config:
        extra = "forbid"


class IdentityReport(BaseModel):
    lhs: float
    rhs: float
    gap: float

    class Config:
        extra = "forbid"


class L2Certificate(BaseModel):
    epsilon: float
    levy: float
    bound: float
    delta_star: float
    saturated: bool
    passed: bool
    slack: float
    sigma2: float
    smoothing_frequency: Optional[float]
    esseen_lhs: Optional[float]
    esseen_rhs: Optional[float]
    profile_h: List[float]
    profile_violation: List[float]

    class Config:
        extra = "forbid"


def l2_epsilon(prior: GriddedDensity, field: PosteriorField) -> float:
    """``E[(aY - E[X|Y])²]`` over the y grid."""
    a = prior.slope_a
    y = field.y_grid.points
    gap = a * y - field.cond_mean.values
    return trapezoid_integrate(GridFunction(field.y_grid, gap**2 * field.marginal.values))


def l2_objective(delta: float, epsilon: float, sigma2: float) -> float:
    log_inverse = np.log(1.0 / epsilon)
    smoothing = 2.0 * (1.0 + sigma2) / np.pi * epsilon ** (delta / (2.0 * (1.0 + delta)))
    tail = 24.0 / (np.pi * np.sqrt(2.0 * np.pi * sigma2 / (1.0 + delta) * log_inverse))
    return float(smoothing + tail)


def l2_bound(epsilon: float, sigma2: float) -> L2Bound:
    """Minimise the Lévy bound over ``δ`` by golden section in ``log δ``."""
    if sigma2 <= 0:
        raise DomainError(f"sigma2 must be positive, got {sigma2}")
    if epsilon <= 0:
        raise DomainError(
            f"epsilon must be positive, got {epsilon}: an exactly linear estimator "
            "has a zero bound"
        )
    if epsilon >= 1:
        return L2Bound(bound=1.0, delta_star=0.0, saturated=True)
    log_delta, bound = golden_minimize(
        lambda u: l2_objective(np.exp(u), epsilon, sigma2),
        np.log(DELTA_RANGE[0]),
        np.log(DELTA_RANGE[1]),
        DELTA_TOLERANCE,
    )
    return L2Bound(bound=bound, delta_star=float(np.exp(log_delta)), saturated=False)


def smoothing_frequency(epsilon: float, delta: float) -> float:
    """``T = √(log(1/ε) / (1 + δ))``."""
    return float(np.sqrt(np.log(1.0 / epsilon) / (1.0 + delta)))


def _sup_gap(F: GridFunction, G: GridFunction) -> float:
    x = np.union1d(F.grid.points, G.grid.points)
    return float(np.max(np.abs(F(x, 0.0, 1.0) - G(x, 0.0, 1.0))))


def esseen_check(
    phiF: GridFunction,
    phiG: GridFunction,
    f_G_sup: float,
    T: float,
    F: GridFunction,
    G: GridFunction,
) -> EsseenReport:
    """``sup|F - G| <= (1/π) ∫_{-T}^{T} |(φ_F - φ_G)/t| dt + 24 sup f_G / (π T)``."""
    if phiF.grid != phiG.grid:
        raise ValueError("both characteristic functions must share one t grid")
    if T <= 0:
        raise ValueError(f"T must be positive, got {T}")
    t_grid = phiF.grid
    window = t_grid.window(-T, T)
    t = window.points
    difference = phiF(t) - phiG(t)
    integrand = np.empty(t.size)
    nonzero = np.abs(t) > 0.5 * t_grid.step
    integrand[nonzero] = np.abs(difference[nonzero] / t[nonzero])
    if np.any(~nonzero):
        h = t_grid.step
        slope = (phiF(h) - phiG(h) - phiF(-h) + phiG(-h)) / (2.0 * h)
        integrand[~nonzero] = abs(slope)
    rhs = float(np.dot(trapezoid_weights(window), integrand)) / np.pi
    rhs += 24.0 * f_G_sup / (np.pi * T)
    lhs = _sup_gap(F, G)
    return EsseenReport(lhs=lhs, rhs=rhs, passed=lhs <= rhs + ESSEEN_SLACK)


def windowed_exponential(t_grid: Grid, tau: float, sigma2: float) -> GridFunction:
    """``ĝ(t) = e^{(1+σ²)t²/2} e^{-σ²τ²/2}`` on ``[0, τ]``, zero elsewhere."""
    t = t_grid.points
    inside = (t >= min(0.0, tau)) & (t <= max(0.0, tau))
    values = np.where(
        inside, np.exp((1.0 + sigma2) * t**2 / 2.0 - sigma2 * tau**2 / 2.0), 0.0
    )
    return GridFunction(t_grid, values.astype(complex))


def fourier_orthogonality_check(
    prior: GriddedDensity, field: PosteriorField, g_hat: GridFunction
) -> IdentityReport:
    """``E[(X - aY) g(Y)]`` against ``-i ∫ ĝ φ̃ e^{-t²/2} dt`` for
    ``g(y) = ∫ ĝ(t) e^{ity} dt``."""
    t_grid = g_hat.grid
    t = t_grid.points
    a = prior.slope_a
    y = field.y_grid.points
    drift = (field.cond_mean.values - a * y) * field.marginal.values
    drift_weights = trapezoid_weights(field.y_grid) * drift
    moments = np.empty(t.size, dtype=complex)
    for start in range(0, t.size, ROW_CHUNK):
        phases = np.exp(1j * np.outer(t[start : start + ROW_CHUNK], y))
        moments[start : start + ROW_CHUNK] = phases @ drift_weights
    t_weights = trapezoid_weights(t_grid) * g_hat.values
    lhs = complex(np.dot(t_weights, moments))

    phi_tilde = prior.char_fn(t_grid).phi_tilde.values
    rhs = complex(-1j * np.dot(t_weights, phi_tilde * np.exp(-(t**2) / 2.0)))
    return IdentityReport(lhs=abs(lhs), rhs=abs(rhs), gap=abs(lhs - rhs))


def diff_char_check(prior: GriddedDensity, tau: float) -> IdentityReport:
    """``|φ(τ) - e^{-σ²τ²/2}| = e^{-σ²τ²/2} |∫_0^τ e^{σ²t²/2}(φ' + σ² t φ) dt|``."""
    sigma2 = prior.variance
    t = np.linspace(0.0, tau, DIFF_CHAR_POINTS)
    phi, dphi = characteristic_values(prior, t)
    decay = np.exp(-sigma2 * tau**2 / 2.0)
    lhs = float(abs(phi[-1] - decay))
    integrand = np.exp(sigma2 * t**2 / 2.0) * (dphi + sigma2 * t * phi)
    rhs = float(decay * abs(simpson(integrand, x=t)))
    return IdentityReport(lhs=lhs, rhs=rhs, gap=abs(lhs - rhs))


def gaussian_reference(prior: GriddedDensity) -> GridFunction:
    """``N(0, σ²)`` CDF on the prior's grid."""
    return GridFunction.from_callable(
        prior.grid, lambda x: gaussian_cdf(x, 0.0, prior.variance)
    )


def l2_certificate(
    prior: GriddedDensity,
    y_grid: Grid,
    t_grid: Grid,
    field: PosteriorField = None,
) -> L2Certificate:
    field = field or posterior_field(prior, y_grid)
    sigma2 = prior.variance
    epsilon = l2_epsilon(prior, field)
    reference = gaussian_reference(prior)
    levy = levy_distance(prior.cdf, reference)

    frequency = esseen_lhs = esseen_rhs = None
    if epsilon <= 0:
        bound, delta_star, saturated = 0.0, 0.0, False
    else:
        bound, delta_star, saturated = l2_bound(epsilon, sigma2)
        if not saturated:
            frequency = smoothing_frequency(epsilon, delta_star)
            T = min(frequency, t_grid.hi, -t_grid.lo)
            phi = prior.char_fn(t_grid).phi
            phi_reference = GridFunction.from_callable(
                t_grid, lambda t: np.exp(-sigma2 * t**2 / 2.0).astype(complex)
            )
            esseen = esseen_check(
                phi,
                phi_reference,
                1.0 / np.sqrt(2.0 * np.pi * sigma2),
                T,
                prior.cdf,
                reference,
            )
            esseen_lhs, esseen_rhs = esseen.lhs, esseen.rhs

    profile_h = np.linspace(0.0, max(2.0 * levy, 1e-3), PROFILE_POINTS)
    profile = levy_profile(prior.cdf, reference, profile_h)
    passed = levy <= bound + LEVY_TOLERANCE
    if not passed:
        LOGGER.warning(f"Lévy distance {levy:.6g} exceeds the bound {bound:.6g}")
    return L2Certificate(
        epsilon=epsilon,
        levy=levy,
        bound=bound,
        delta_star=delta_star,
        saturated=saturated,
        passed=passed,
        slack=bound - levy,
        sigma2=sigma2,
        smoothing_frequency=frequency,
        esseen_lhs=esseen_lhs,
        esseen_rhs=esseen_rhs,
        profile_h=profile_h.tolist(),
        profile_violation=profile.tolist(),
    )
