"""Node functions of the scenario pipeline.

Every stage except ``collect_result`` is wrapped by ``_stage``: a numerical
error becomes a ``StageFailure`` value that flows through the downstream
nodes instead of stopping the batch.
"""
from functools import wraps
from logging import getLogger
from typing import List, Optional, Union

import numpy as np
from pydantic import BaseModel

from gauss_stab.channel.posterior_field import (
    MonotonicityAudit,
    PosteriorField,
    monotonicity_audit,
    posterior_field,
)
from gauss_stab.config.gauss_stab_config import ScenarioConfig
from gauss_stab.exceptions import GaussStabError
from gauss_stab.hermite.hermite_basis import build_basis, hermite_coefficients
from gauss_stab.numerics.bumps import random_bumps
from gauss_stab.numerics.quadrature import inner_product, l2_norm, trapezoid_integrate
from gauss_stab.operators.dual_functions import (
    CALIBRATION_ORDER,
    DawsonShapeReport,
    cached_phi,
    calibration_error,
    denominator_shape_check,
    fourier_ratio,
)
from gauss_stab.operators.linearity_operator import (
    OperatorConfig,
    apply_T,
    apply_T_adjoint,
    apply_T_adjoint_direct,
    convolution_form,
    growth_estimate,
    kernel_antiderivative,
    scaled_tilted_density,
)
from gauss_stab.priors.gridded_density import GriddedDensity, build_prior
from gauss_stab.stability.l1_certificate import L1Certificate, l1_certificate
from gauss_stab.stability.l2_certificate import L2Certificate, l2_certificate

LOGGER = getLogger(__name__)

TEST_FUNCTIONS = 4
ADJOINT_WINDOW = 6.0
CONVOLUTION_WINDOW = 6.0
PHI_DIAGNOSTIC_ORDERS = 10
GROWTH_ORDERS = (4, 8, 16, 32, 64)
PHI_L1_MAX_ORDER = 64
DAWSON_POINTS = 200
GRAM_DIAGNOSTIC_ORDER = 20

ADJOINT_TOLERANCE = 1e-9
DUALITY_TOLERANCE = 1e-7
CONVOLUTION_TOLERANCE = 1e-6
RESIDUAL_TOLERANCE = 1e-3
GRAM_TOLERANCE = 1e-8

# ValueError covers grid, interpolation and linear algebra checks raised by numpy and scipy
NUMERICAL_ERRORS = (GaussStabError, ValueError, ArithmeticError)


class StageFailure(BaseModel):
    stage: str
    error: str
    message: str

    class Config:
        extra = "forbid"
        frozen = True


class PriorSummary(BaseModel):
    kind: str
    mean: float
    variance: float
    slope_a: float
    sup_density: float

    class Config:
        extra = "forbid"


class PosteriorTable(BaseModel):
    y: List[float]
    marginal: List[float]
    cond_mean: List[float]
    cond_median: List[float]
    audit: MonotonicityAudit

    class Config:
        extra = "forbid"


class PhiDiagnostic(BaseModel):
    n: int
    fourier_l1_norm: float
    majorant: float
    adjoint_residual: float
    residual_window: float

    class Config:
        extra = "forbid"


class OperatorDiagnostics(BaseModel):
    a: float
    adjoint_gap: float
    duality_gap: float
    convolution_gap: float
    growth_c0: float
    kernel_floor: float
    calibration_error: float
    dawson: DawsonShapeReport
    phi: List[PhiDiagnostic]
    phi_l1_orders: List[int]
    phi_l1_norms: List[float]
    growth_slope: float
    passed: bool

    class Config:
        extra = "forbid"


class HermiteDiagnostics(BaseModel):
    a: float
    max_order: int
    gram_deviation: float
    coefficients: List[float]
    parseval_ratio: float
    passed: bool

    class Config:
        extra = "forbid"


class ScenarioResult(BaseModel):
    name: str
    scenario: ScenarioConfig
    prior: Optional[PriorSummary] = None
    posterior: Optional[PosteriorTable] = None
    l2: Optional[L2Certificate] = None
    l1: Optional[L1Certificate] = None
    operators: Optional[OperatorDiagnostics] = None
    hermite: Optional[HermiteDiagnostics] = None
    failures: List[StageFailure] = []

    class Config:
        extra = "forbid"

    @property
    def passed(self) -> bool:
        """True when every certificate that ran passed and no stage failed."""
        if self.failures:
            return False
        return all(
            certificate.passed
            for certificate in (self.l2, self.l1)
            if certificate is not None
        )


def _stage(name: str):
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            for value in (*args, *kwargs.values()):
                if isinstance(value, StageFailure):
                    return value
            try:
                return func(*args, **kwargs)
            except NUMERICAL_ERRORS as error:
                LOGGER.warning(f"Stage '{name}' failed with {type(error).__name__}: {error}")
                return StageFailure(
                    stage=name, error=type(error).__name__, message=str(error)
                )

        return wrapper

    return decorator


@_stage("prepare_prior")
def prepare_prior(scenario: ScenarioConfig) -> GriddedDensity:
    LOGGER.info(f"Scenario '{scenario.name}': building the {scenario.prior.kind} prior")
    return build_prior(scenario.prior, scenario.grids.x)


@_stage("prepare_field")
def prepare_field(prior: GriddedDensity, scenario: ScenarioConfig) -> PosteriorField:
    return posterior_field(prior, scenario.grids.y)


@_stage("certify_l2")
def certify_l2(
    prior: GriddedDensity, field: PosteriorField, scenario: ScenarioConfig
) -> L2Certificate:
    return l2_certificate(prior, scenario.grids.y, scenario.grids.t, field)


@_stage("certify_l1")
def certify_l1(
    prior: GriddedDensity, field: PosteriorField, scenario: ScenarioConfig
) -> L1Certificate:
    return l1_certificate(
        prior, scenario.n_max, scenario.grids.y, scenario.grids.omega, field
    )


def _relative_gap(a: np.ndarray, b: np.ndarray, scale: np.ndarray) -> float:
    return float(np.max(np.abs(a - b) / np.maximum(scale, np.finfo(float).tiny)))


@_stage("diagnose_operators")
def diagnose_operators(
    prior: GriddedDensity, field: PosteriorField, scenario: ScenarioConfig, seed: int
) -> OperatorDiagnostics:
    """Adjoint, duality and convolution identities, the growth constant and
    the dual functions for the prior's slope."""
    grids = scenario.grids
    a = prior.slope_a
    rng = np.random.default_rng(seed)
    f_bumps = random_bumps(grids.x, rng, TEST_FUNCTIONS)
    g_bumps = random_bumps(grids.y, rng, TEST_FUNCTIONS)

    window = grids.x.window(-ADJOINT_WINDOW, ADJOINT_WINDOW)
    adjoint_gap = max(
        float(
            np.max(
                np.abs(
                    apply_T_adjoint(a, g, window).values
                    - apply_T_adjoint_direct(a, g, window).values
                )
            )
        )
        for g in g_bumps
    )
    duality_gap = 0.0
    for f, g in zip(f_bumps, g_bumps):
        forward = inner_product(apply_T(a, f, grids.y), g)
        backward = inner_product(f, apply_T_adjoint(a, g, grids.x))
        duality_gap = max(duality_gap, abs(forward - backward) / (l2_norm(f) * l2_norm(g)))

    y_window = grids.y.window(-CONVOLUTION_WINDOW, CONVOLUTION_WINDOW)
    y = y_window.points
    weight = np.exp((1.0 - a) * y**2 / 2.0)
    direct = weight * apply_T(a, prior.density, y_window).values
    # |T_a| f is √(2π) times the marginal of Y
    scale = np.sqrt(2.0 * np.pi) * weight * field.marginal(y)
    convolution_gap = _relative_gap(
        convolution_form(a, prior.density, y_window).values, direct, scale
    )

    config = OperatorConfig(a=a, x_grid=grids.x, y_grid=grids.y, omega_grid=grids.omega)
    phis = [
        cached_phi(n, config)
        for n in range(1, min(scenario.n_max, PHI_DIAGNOSTIC_ORDERS) + 1)
    ]
    orders = list(range(1, PHI_L1_MAX_ORDER + 1))
    norms = [
        trapezoid_integrate(fourier_ratio(n, a, grids.omega).map(np.abs)) for n in orders
    ]
    growth_slope = float(
        np.polyfit(np.log(GROWTH_ORDERS), np.log([norms[n - 1] for n in GROWTH_ORDERS]), 1)[0]
    )
    dawson = denominator_shape_check(
        a, np.linspace(grids.omega.step, grids.omega.hi, DAWSON_POINTS)
    )

    diagnostics = OperatorDiagnostics(
        a=a,
        adjoint_gap=adjoint_gap,
        duality_gap=duality_gap,
        convolution_gap=convolution_gap,
        growth_c0=growth_estimate(scaled_tilted_density(a, prior.density)),
        kernel_floor=float(kernel_antiderivative(a, 0.5)),
        calibration_error=calibration_error(a, CALIBRATION_ORDER),
        dawson=dawson,
        phi=[
            PhiDiagnostic(
                n=phi.n,
                fourier_l1_norm=phi.fourier_l1_norm,
                majorant=phi.majorant,
                adjoint_residual=phi.adjoint_residual,
                residual_window=phi.residual_window,
            )
            for phi in phis
        ],
        phi_l1_orders=orders,
        phi_l1_norms=norms,
        growth_slope=growth_slope,
        passed=(
            adjoint_gap < ADJOINT_TOLERANCE
            and duality_gap < DUALITY_TOLERANCE
            and convolution_gap < CONVOLUTION_TOLERANCE
            and dawson.bounds_hold
            and all(phi.adjoint_residual < RESIDUAL_TOLERANCE for phi in phis)
        ),
    )
    if not diagnostics.passed:
        LOGGER.warning(
            f"Scenario '{scenario.name}': operator diagnostics outside tolerance "
            f"(adjoint {adjoint_gap:.3e}, duality {duality_gap:.3e}, "
            f"convolution {convolution_gap:.3e})"
        )
    return diagnostics


@_stage("diagnose_hermite")
def diagnose_hermite(prior: GriddedDensity, scenario: ScenarioConfig) -> HermiteDiagnostics:
    a = prior.slope_a
    basis = build_basis(a, scenario.n_max, prior.grid)
    coefficients = hermite_coefficients(prior.density, basis)
    gram = basis.gram_matrix()[: GRAM_DIAGNOSTIC_ORDER + 1, : GRAM_DIAGNOSTIC_ORDER + 1]
    gram_deviation = float(np.max(np.abs(gram - np.eye(gram.shape[0]))))
    energy = l2_norm(prior.density) ** 2
    return HermiteDiagnostics(
        a=a,
        max_order=scenario.n_max,
        gram_deviation=gram_deviation,
        coefficients=coefficients.tolist(),
        parseval_ratio=float(np.sum(coefficients**2) / energy),
        passed=gram_deviation < GRAM_TOLERANCE,
    )


def _summarise_prior(prior: GriddedDensity) -> PriorSummary:
    return PriorSummary(
        kind=prior.spec.kind if prior.spec is not None else "custom",
        mean=prior.mean,
        variance=prior.variance,
        slope_a=prior.slope_a,
        sup_density=prior.sup_density,
    )


def _tabulate_field(field: PosteriorField) -> PosteriorTable:
    return PosteriorTable(
        y=field.y_grid.points.tolist(),
        marginal=field.marginal.values.tolist(),
        cond_mean=field.cond_mean.values.tolist(),
        cond_median=field.cond_median.values.tolist(),
        audit=monotonicity_audit(field),
    )


def collect_result(
    scenario: ScenarioConfig,
    prior: Union[GriddedDensity, StageFailure],
    field: Union[PosteriorField, StageFailure],
    l2: Union[L2Certificate, StageFailure] = None,
    l1: Union[L1Certificate, StageFailure] = None,
    operators: Union[OperatorDiagnostics, StageFailure] = None,
    hermite: Union[HermiteDiagnostics, StageFailure] = None,
) -> ScenarioResult:
    outputs = dict(prior=prior, field=field, l2=l2, l1=l1, operators=operators, hermite=hermite)
    failures = {}
    for value in outputs.values():
        if isinstance(value, StageFailure):
            failures.setdefault(value.stage, value)
    succeeded = {
        key: value
        for key, value in outputs.items()
        if value is not None and not isinstance(value, StageFailure)
    }
    result = ScenarioResult(
        name=scenario.name,
        scenario=scenario,
        prior=_summarise_prior(succeeded["prior"]) if "prior" in succeeded else None,
        posterior=_tabulate_field(succeeded["field"]) if "field" in succeeded else None,
        l2=succeeded.get("l2"),
        l1=succeeded.get("l1"),
        operators=succeeded.get("operators"),
        hermite=succeeded.get("hermite"),
        failures=list(failures.values()),
    )
    LOGGER.info(
        f"Scenario '{scenario.name}' finished: {'passed' if result.passed else 'FAILED'}"
    )
    return result
