"""Stability of the conditional median: a near-linear ``ψ`` forces every
Hermite coefficient ``c_n``, ``n >= 1``, of the prior density to be small.

The certificate walks the chain ``|c_n| = |<T_a f, φ_n>| <=
‖e^{(1-a)y²/2} T_a f‖₁ ‖F[φ₀φ_n]‖₁`` and measures every constant of the
surrounding argument instead of assuming it.
"""
from logging import getLogger
from typing import List, NamedTuple

import numpy as np
from pydantic import BaseModel
from scipy.integrate import cumulative_trapezoid

from gauss_stab.channel.posterior_field import PosteriorField, posterior_field
from gauss_stab.exceptions import GaussStabError
from gauss_stab.hermite.hermite_basis import build_basis, hermite_coefficients
from gauss_stab.numerics.grid import Grid, GridFunction
from gauss_stab.numerics.quadrature import l1_norm, trapezoid_integrate
from gauss_stab.operators.dual_functions import cached_phi
from gauss_stab.operators.linearity_operator import (
    OperatorConfig,
    convolution_form,
    growth_estimate,
    scaled_tilted_density,
    tilted_density,
)
from gauss_stab.priors.gridded_density import GriddedDensity

LOGGER = getLogger(__name__)

UNIFORM_SLACK = 1e-8
COEFFICIENT_SLACK = 1e-9
CHAIN_SLACK = 1e-6
RELIABLE_MARGINAL = 1e-12
TIE_TOLERANCE = 1e-9
MAX_N = 64


class MonotoneInversionFailure(GaussStabError):
    """The tabulated conditional median cannot be inverted monotonically."""


class CoefficientBound(BaseModel):
    n: int
    c_n: float
    phi_l1: float
    bound: float
    passed: bool
    adjoint_residual: float
    majorant: float

    class Config:
        extra = "forbid"


class L1Certificate(BaseModel):
    a: float
    eps_l1: float
    sup_dev: float
    sup_dev_bound: float
    uniform_bound_holds: bool
    B: float
    B_boundary: float
    M: float
    envelope_sum: float
    envelope_lo: int
    envelope_hi: int
    envelope_truncated: bool
    weighted_T_l1: float
    C0: float
    tight_chain: float
    tight_chain_holds: bool
    proof_chain: float
    proof_chain_holds: bool
    per_n: List[CoefficientBound]
    tail_energy: float
    corollary_sum: float
    residual_energy: float
    psi: List[float]
    y: List[float]

    class Config:
        extra = "forbid"

    @property
    def passed(self) -> bool:
        return self.uniform_bound_holds and all(entry.passed for entry in self.per_n)


class DeviationEnvelope(NamedTuple):
    lo: int
    hi: int
    b: np.ndarray
    truncated: bool


def median_inverse(field: PosteriorField):
    """``x ↦ ψ⁻¹(x)`` by linear interpolation of the tabulated median.

    Ties give the generalised inverse ``inf{y : ψ(y) >= x}``.
    """
    psi = field.cond_median.values
    y = field.y_grid.points
    steps = np.diff(psi)
    if np.any(steps < -TIE_TOLERANCE):
        raise MonotoneInversionFailure(
            f"conditional median decreases by {-np.min(steps):.3e}; it has no inverse"
        )
    if np.any(steps <= 0):
        LOGGER.warning(
            f"Conditional median is flat at {int(np.sum(steps <= 0))} places, "
            "inverting it in the generalised sense"
        )
        psi = np.maximum.accumulate(psi)
        psi, first = np.unique(psi, return_index=True)
        y = y[first]
    return lambda x: np.interp(x, psi, y)


def deviation_envelope(
    field: PosteriorField, a: float, inverse=None
) -> DeviationEnvelope:
    """``b_i = sup_{x ∈ [i, i+1)} |ψ⁻¹(x) - x/a|`` on the unit intervals covered
    by the reliable part of the y grid."""
    inverse = inverse or median_inverse(field)
    reliable = field.marginal.values > RELIABLE_MARGINAL
    psi = field.cond_median.values[reliable]
    x_lo, x_hi = float(psi[0]), float(psi[-1])
    lo, hi = int(np.floor(x_lo)), max(int(np.ceil(x_hi)), int(np.floor(x_lo)) + 1)
    b = np.empty(hi - lo)
    for k, i in enumerate(range(lo, hi)):
        inside = psi[(psi >= i) & (psi < i + 1)]
        ends = np.clip([i, i + 1], x_lo, x_hi)
        x = np.concatenate([ends, inside])
        b[k] = np.max(np.abs(inverse(x) - x / a))
    truncated = bool(np.any(~reliable))
    if truncated:
        LOGGER.info(
            f"Deviation envelope limited to the median range [{x_lo:.4g}, {x_hi:.4g}] "
            f"where the marginal exceeds {RELIABLE_MARGINAL:.0e}"
        )
    return DeviationEnvelope(lo=lo, hi=hi, b=b, truncated=truncated)


def assumption_integral(field: PosteriorField, a: float, eps_l1: float):
    """``∫ exp((1-a)y²/2 - min_{|x-ay| <= r} (x-y)²/2) |ay - ψ(y)| dy`` with
    ``r = √(2a ε)``, plus the integrand at the two grid ends."""
    y = field.y_grid.points
    radius = np.sqrt(2.0 * a * eps_l1)
    nearest = np.clip(y, a * y - radius, a * y + radius)
    exponent = (1.0 - a) * y**2 / 2.0 - (nearest - y) ** 2 / 2.0
    integrand = np.exp(exponent) * np.abs(a * y - field.cond_median.values)
    value = trapezoid_integrate(GridFunction(field.y_grid, integrand))
    return value, float(max(integrand[0], integrand[-1]))


def _unit_masses(f_tilde: GridFunction, lo: int, hi: int) -> np.ndarray:
    x = f_tilde.grid.points
    cumulative = cumulative_trapezoid(f_tilde.values, dx=f_tilde.grid.step, initial=0.0)
    edges = np.arange(lo, hi + 1, dtype=float)
    return np.diff(np.interp(edges, x, cumulative))


def l1_certificate(
    prior: GriddedDensity,
    n_max: int,
    y_grid: Grid,
    omega_grid: Grid,
    field: PosteriorField = None,
) -> L1Certificate:
    if not 1 <= n_max <= MAX_N:
        raise ValueError(f"n_max must lie in [1, {MAX_N}], got {n_max}")
    field = field or posterior_field(prior, y_grid)
    a = prior.slope_a
    f = prior.density
    y = y_grid.points

    deviation = GridFunction(y_grid, a * y - field.cond_median.values)
    eps_l1 = l1_norm(deviation)
    sup_dev = deviation.sup_norm()
    sup_dev_bound = float(np.sqrt(2.0 * a * eps_l1))
    uniform_bound_holds = sup_dev <= sup_dev_bound + UNIFORM_SLACK
    if not uniform_bound_holds:
        LOGGER.warning(
            f"sup |ay - ψ(y)| = {sup_dev:.6g} exceeds √(2a ε) = {sup_dev_bound:.6g}"
        )

    B, B_boundary = assumption_integral(field, a, eps_l1)
    envelope = deviation_envelope(field, a)
    envelope_sum = float(np.sum(envelope.b))

    weighted_T_l1 = l1_norm(convolution_form(a, f, y_grid))
    C0 = growth_estimate(scaled_tilted_density(a, f), 0.5)
    masses = _unit_masses(tilted_density(a, f), envelope.lo, envelope.hi)
    tight_chain = float(2.0 * np.dot(envelope.b, masses))
    tight_chain_holds = weighted_T_l1 <= tight_chain + CHAIN_SLACK
    if not tight_chain_holds:
        LOGGER.info(
            f"Sharper chain: ‖e^(1-a)y²/2 T_a f‖₁ = {weighted_T_l1:.6g} above "
            f"2 Σ b_i ∫ f̃ = {tight_chain:.6g}"
        )

    proof_chain = float(2.0 * C0 * envelope_sum)
    proof_chain_holds = weighted_T_l1 <= proof_chain + CHAIN_SLACK
    if not proof_chain_holds:
        LOGGER.info(
            f"Informational chain: ‖e^(1-a)y²/2 T_a f‖₁ = {weighted_T_l1:.6g} above "
            f"2 C0 Σ b_i = {proof_chain:.6g}"
        )

    basis = build_basis(a, n_max, prior.grid)
    coefficients = hermite_coefficients(f, basis)
    config = OperatorConfig(a=a, x_grid=prior.grid, y_grid=y_grid, omega_grid=omega_grid)
    per_n = []
    for n in range(1, n_max + 1):
        phi = cached_phi(n, config)
        bound = weighted_T_l1 * phi.fourier_l1_norm
        c_n = float(coefficients[n])
        per_n.append(
            CoefficientBound(
                n=n,
                c_n=c_n,
                phi_l1=phi.fourier_l1_norm,
                bound=bound,
                passed=abs(c_n) <= bound + COEFFICIENT_SLACK,
                adjoint_residual=phi.adjoint_residual,
                majorant=phi.majorant,
            )
        )

    residual = f.values - coefficients[0] * basis.functions[0].values
    residual_energy = trapezoid_integrate(GridFunction(prior.grid, residual**2))
    return L1Certificate(
        a=a,
        eps_l1=eps_l1,
        sup_dev=sup_dev,
        sup_dev_bound=sup_dev_bound,
        uniform_bound_holds=uniform_bound_holds,
        B=B,
        B_boundary=B_boundary,
        M=prior.sup_density,
        envelope_sum=envelope_sum,
        envelope_lo=envelope.lo,
        envelope_hi=envelope.hi,
        envelope_truncated=envelope.truncated,
        weighted_T_l1=weighted_T_l1,
        C0=C0,
        tight_chain=tight_chain,
        tight_chain_holds=tight_chain_holds,
        proof_chain=proof_chain,
        proof_chain_holds=proof_chain_holds,
        per_n=per_n,
        tail_energy=float(np.sum(coefficients[1:] ** 2)),
        corollary_sum=float(sum(abs(entry.c_n) * entry.bound for entry in per_n)),
        residual_energy=residual_energy,
        psi=field.cond_median.values.tolist(),
        y=y.tolist(),
    )
