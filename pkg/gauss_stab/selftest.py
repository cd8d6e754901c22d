"""In-process invariant checks run by ``gauss-stab selftest``."""
from logging import getLogger
from typing import Callable, List, Tuple

import numpy as np
from pydantic import BaseModel

from gauss_stab.channel.posterior_field import monotonicity_audit, posterior_field
from gauss_stab.exceptions import GaussStabError
from gauss_stab.hermite.hermite_basis import build_basis
from gauss_stab.numerics.bumps import DEFAULT_SEED, random_bumps, resolve_seed
from gauss_stab.numerics.grid import Grid, GridFunction
from gauss_stab.numerics.quadrature import inner_product, l2_norm
from gauss_stab.numerics.special import dawson, dawson_bounds, gaussian_cdf
from gauss_stab.operators.linearity_operator import (
    apply_T,
    apply_T_adjoint,
    apply_T_adjoint_direct,
)
from gauss_stab.priors.gridded_density import build_prior
from gauss_stab.priors.prior_spec import GaussianBumpPrior, GaussianPrior
from gauss_stab.stability.l2_certificate import diff_char_check
from gauss_stab.stability.levy import levy_distance

LOGGER = getLogger(__name__)

X_GRID = Grid(lo=-16.0, hi=16.0, n=8193)
Y_GRID = Grid(lo=-8.0, hi=8.0, n=1025)
BUMP_PRIOR = GaussianBumpPrior(variance=1.0, bump_center=0.5, bump_width=0.5, bump_height=0.05)


class SelfCheck(BaseModel):
    name: str
    passed: bool
    detail: str

    class Config:
        extra = "forbid"


def _exact_linearity(seed: int) -> Tuple[bool, str]:
    prior = build_prior(GaussianPrior(variance=1.0), X_GRID)
    window = Y_GRID.window(-6.0, 6.0)
    field = posterior_field(prior, window)
    ay = prior.slope_a * window.points
    mean_gap = float(np.max(np.abs(field.cond_mean.values - ay)))
    median_gap = float(np.max(np.abs(field.cond_median.values - ay)))
    return (
        mean_gap < 1e-8 and median_gap < 1e-7,
        f"sup|E[X|y] - ay| = {mean_gap:.2e}, sup|med - ay| = {median_gap:.2e}",
    )


def _median_monotonicity(seed: int) -> Tuple[bool, str]:
    audit = monotonicity_audit(posterior_field(build_prior(BUMP_PRIOR, X_GRID), Y_GRID))
    return audit.violations == 0, f"min increment {audit.min_increment:.3e}"


def _hermite_gram(seed: int) -> Tuple[bool, str]:
    gram = build_basis(0.5, 20, X_GRID).gram_matrix()
    deviation = float(np.max(np.abs(gram - np.eye(21))))
    return deviation < 1e-8, f"max |G - I| = {deviation:.2e}"


def _adjoint_identity(seed: int) -> Tuple[bool, str]:
    rng = np.random.default_rng(seed)
    window = X_GRID.window(-6.0, 6.0)
    gap = 0.0
    for g in random_bumps(Y_GRID, rng, 5):
        difference = apply_T_adjoint(0.5, g, window).values - apply_T_adjoint_direct(
            0.5, g, window
        ).values
        gap = max(gap, float(np.max(np.abs(difference))))
    return gap < 1e-9, f"sup |T* - (-T_1/a)| = {gap:.2e}"


def _duality(seed: int) -> Tuple[bool, str]:
    rng = np.random.default_rng(seed)
    gap = 0.0
    for f, g in zip(random_bumps(X_GRID, rng, 5), random_bumps(Y_GRID, rng, 5)):
        forward = inner_product(apply_T(0.5, f, Y_GRID), g)
        backward = inner_product(f, apply_T_adjoint(0.5, g, X_GRID))
        gap = max(gap, abs(forward - backward) / (l2_norm(f) * l2_norm(g)))
    return gap < 1e-7, f"relative duality gap {gap:.2e}"


def _dawson_bounds(seed: int) -> Tuple[bool, str]:
    w = np.linspace(0.01, 20.0, 200)
    lower, upper = dawson_bounds(w)
    values = dawson(w)
    slack = float(min(np.min(values - lower), np.min(upper - values)))
    return slack >= 0.0, f"smallest slack {slack:.3e}"


def _levy_symmetry(seed: int) -> Tuple[bool, str]:
    grid = Grid(lo=-10.0, hi=10.0, n=2001)
    F = GridFunction.from_callable(grid, lambda x: gaussian_cdf(x, 0.0, 1.0))
    G = GridFunction.from_callable(grid, lambda x: gaussian_cdf(x, 0.3, 1.5))
    forward, backward = levy_distance(F, G), levy_distance(G, F)
    return abs(forward - backward) <= 1e-6, f"L(F, G) = {forward:.6f}, L(G, F) = {backward:.6f}"


def _characteristic_identity(seed: int) -> Tuple[bool, str]:
    prior = build_prior(BUMP_PRIOR, X_GRID)
    gap = max(diff_char_check(prior, tau).gap for tau in (0.5, 1.0, 2.0))
    return gap < 1e-7, f"largest gap {gap:.2e}"


CHECKS: List[Tuple[str, Callable[[int], Tuple[bool, str]]]] = [
    ("exact linearity", _exact_linearity),
    ("median monotonicity", _median_monotonicity),
    ("hermite gram matrix", _hermite_gram),
    ("adjoint identity", _adjoint_identity),
    ("adjoint duality", _duality),
    ("dawson bounds", _dawson_bounds),
    ("levy symmetry", _levy_symmetry),
    ("characteristic identity", _characteristic_identity),
]


def run_selftest(seed: int = DEFAULT_SEED) -> List[SelfCheck]:
    seed = resolve_seed(seed)
    outcomes = []
    for name, check in CHECKS:
        try:
            passed, detail = check(seed)
        except GaussStabError as error:
            passed, detail = False, f"{type(error).__name__}: {error}"
        LOGGER.debug(f"Self check '{name}': {detail}")
        outcomes.append(SelfCheck(name=name, passed=passed, detail=detail))
    return outcomes
