import numpy as np
import pytest

from gauss_stab.channel.posterior_field import posterior_field
from gauss_stab.numerics.bumps import DEFAULT_SEED, random_bumps
from gauss_stab.numerics.grid import Grid, GridFunction
from gauss_stab.numerics.special import gaussian_cdf
from gauss_stab.priors.gridded_density import build_prior
from gauss_stab.priors.prior_spec import GaussianBumpPrior
from gauss_stab.stability.l2_certificate import (
    DomainError,
    diff_char_check,
    esseen_check,
    fourier_orthogonality_check,
    gaussian_reference,
    l2_bound,
    l2_certificate,
    l2_epsilon,
    l2_objective,
    smoothing_frequency,
    windowed_exponential,
)


@pytest.mark.parametrize("epsilon", [1e-2, 1e-4, 1e-8])
@pytest.mark.parametrize("sigma2", [1.0, 4.0])
def test_bound_matches_a_dense_scan(epsilon, sigma2):
    deltas = np.logspace(-6, 3, 10_000)
    scan = min(l2_objective(delta, epsilon, sigma2) for delta in deltas)
    result = l2_bound(epsilon, sigma2)
    assert not result.saturated
    assert scan * (1 - 1e-5) <= result.bound <= scan * (1 + 1e-9)
    assert result.bound == pytest.approx(l2_objective(result.delta_star, epsilon, sigma2))


def test_bound_shrinks_with_epsilon():
    bounds = [l2_bound(epsilon, 1.0).bound for epsilon in (1e-2, 1e-4, 1e-8)]
    assert bounds[0] > bounds[1] > bounds[2]


def test_bound_domain():
    with pytest.raises(DomainError, match="epsilon"):
        l2_bound(0.0, 1.0)
    with pytest.raises(DomainError, match="epsilon"):
        l2_bound(-1e-3, 1.0)
    with pytest.raises(DomainError, match="sigma2"):
        l2_bound(1e-3, 0.0)


def test_bound_saturates_for_large_epsilon():
    result = l2_bound(1.5, 1.0)
    assert result.saturated
    assert result.bound == 1.0


def test_smoothing_frequency():
    assert smoothing_frequency(np.exp(-8.0), 1.0) == pytest.approx(2.0)


ESSEEN_PAIRS = ["bump", "shifted", "identical"]


def esseen_pair(name, gaussian_prior, bump_prior, t_grid):
    """(φ_F, φ_G, sup f_G, F, G) for one pair of distributions."""
    if name == "bump":
        sigma2 = bump_prior.variance
        phi_G = GridFunction.from_callable(
            t_grid, lambda t: np.exp(-sigma2 * t**2 / 2).astype(complex)
        )
        return (
            bump_prior.char_fn(t_grid).phi,
            phi_G,
            1 / np.sqrt(2 * np.pi * sigma2),
            bump_prior.cdf,
            gaussian_reference(bump_prior),
        )
    phi = gaussian_prior.char_fn(t_grid).phi
    if name == "identical":
        return phi, phi, 1 / np.sqrt(2 * np.pi), gaussian_prior.cdf, gaussian_prior.cdf
    phi_G = GridFunction.from_callable(
        t_grid, lambda t: np.exp(0.2j * t - t**2 / 2)
    )
    G = GridFunction.from_callable(gaussian_prior.grid, lambda x: gaussian_cdf(x, 0.2))
    return phi, phi_G, 1 / np.sqrt(2 * np.pi), gaussian_prior.cdf, G


@pytest.mark.parametrize("T", [1.0, 2.0, 4.0, 8.0])
@pytest.mark.parametrize("pair", ESSEEN_PAIRS)
def test_esseen_inequality(gaussian_prior, bump_prior, t_grid, pair, T):
    phi_F, phi_G, f_G_sup, F, G = esseen_pair(pair, gaussian_prior, bump_prior, t_grid)
    report = esseen_check(phi_F, phi_G, f_G_sup, T, F, G)
    assert report.passed
    if pair == "identical":
        assert report.lhs == 0.0
    else:
        assert report.lhs > 0


def test_esseen_shifted_gaussians(gaussian_prior, t_grid):
    phi_F, phi_G, f_G_sup, F, G = esseen_pair("shifted", gaussian_prior, None, t_grid)
    report = esseen_check(phi_F, phi_G, f_G_sup, 4.0, F, G)
    # sup |Φ(x) - Φ(x - 0.2)| is reached at x = 0.1
    assert report.lhs == pytest.approx(2 * gaussian_cdf(0.1) - 1, abs=2e-6)
    assert report.lhs <= report.rhs


def test_esseen_checks_its_arguments(gaussian_prior, t_grid):
    phi = gaussian_prior.char_fn(t_grid).phi
    reference = gaussian_reference(gaussian_prior)
    with pytest.raises(ValueError, match="positive"):
        esseen_check(phi, phi, 1.0, 0.0, gaussian_prior.cdf, reference)


@pytest.mark.parametrize("tau", [0.5, 1.0, 2.0, 3.0])
@pytest.mark.parametrize("prior_name", ["gaussian_prior", "bump_prior", "uniform_prior"])
def test_differential_characteristic_identity(request, prior_name, tau):
    report = diff_char_check(request.getfixturevalue(prior_name), tau)
    assert report.gap < 1e-7


@pytest.fixture(scope="module")
def wide_mixture_field(mixture_prior):
    # Y has variance 11 under the mixture, so the y grid reaches further out
    return posterior_field(mixture_prior, Grid(lo=-13.0, hi=13.0, n=1665))


@pytest.fixture
def prior_and_field(request, gaussian_prior, gaussian_field, bump_prior, bump_field):
    if request.param == "gaussian":
        return gaussian_prior, gaussian_field
    if request.param == "bump":
        return bump_prior, bump_field
    return request.getfixturevalue("mixture_prior"), request.getfixturevalue(
        "wide_mixture_field"
    )


@pytest.mark.parametrize("tau", [0.5, 1.0, 2.0])
@pytest.mark.parametrize(
    "prior_and_field", ["gaussian", "bump", "mixture"], indirect=True
)
def test_fourier_orthogonality_identity(prior_and_field, t_grid, tau):
    prior, field = prior_and_field
    g_hat = windowed_exponential(t_grid, tau, prior.variance)
    report = fourier_orthogonality_check(prior, field, g_hat)
    assert report.gap < 1e-6
    if prior.spec.kind == "gaussian":
        assert report.lhs < 1e-7
        assert report.rhs < 1e-7
    else:
        assert report.lhs > 0


@pytest.mark.parametrize(
    "prior_and_field", ["gaussian", "bump", "mixture"], indirect=True
)
def test_fourier_orthogonality_for_seeded_bumps(prior_and_field, t_grid):
    prior, field = prior_and_field
    rng = np.random.default_rng(DEFAULT_SEED)
    for g_hat in random_bumps(t_grid, rng, 10):
        report = fourier_orthogonality_check(prior, field, g_hat)
        assert report.gap < 1e-6


def test_windowed_exponential_support(t_grid):
    g_hat = windowed_exponential(t_grid, -1.0, 1.0)
    t = t_grid.points
    assert np.all(g_hat.values[(t > 0) | (t < -1.0)] == 0)
    assert g_hat(0.0).real == pytest.approx(np.exp(-0.5))


def test_gaussian_prior_certificate(gaussian_prior, gaussian_field, y_grid, t_grid):
    certificate = l2_certificate(gaussian_prior, y_grid, t_grid, gaussian_field)
    assert certificate.epsilon < 1e-12
    assert certificate.levy < 1e-5
    assert certificate.passed


def test_bump_prior_certificate(bump_prior, bump_field, y_grid, t_grid):
    certificate = l2_certificate(bump_prior, y_grid, t_grid, bump_field)
    assert certificate.passed
    assert certificate.slack > 0
    assert not certificate.saturated
    assert certificate.esseen_lhs <= certificate.esseen_rhs
    assert len(certificate.profile_h) == len(certificate.profile_violation)
    assert certificate.epsilon == pytest.approx(l2_epsilon(bump_prior, bump_field))


def test_certificates_tighten_as_the_bump_shrinks(x_grid, y_grid, t_grid):
    certificates = []
    for height in (0.05, 0.02, 0.01, 0.005):
        prior = build_prior(
            GaussianBumpPrior(
                variance=1.0, bump_center=0.5, bump_width=0.5, bump_height=height
            ),
            x_grid,
        )
        certificates.append(l2_certificate(prior, y_grid, t_grid))
    assert all(certificate.passed for certificate in certificates)
    epsilons = [certificate.epsilon for certificate in certificates]
    levys = [certificate.levy for certificate in certificates]
    assert epsilons[0] > epsilons[1] > epsilons[2] > epsilons[3] > 0
    assert levys[0] > levys[1] > levys[2] > levys[3]


def test_certificate_builds_its_own_field(uniform_prior, y_grid, t_grid):
    window = y_grid.window(-6.0, 6.0)
    certificate = l2_certificate(uniform_prior, window, t_grid)
    field = posterior_field(uniform_prior, window)
    assert certificate.epsilon == pytest.approx(l2_epsilon(uniform_prior, field))


def test_mixture_epsilon_matches_monte_carlo(mixture_prior, wide_mixture_field):
    a = mixture_prior.slope_a
    rng = np.random.default_rng(DEFAULT_SEED)
    total = total_squares = 0.0
    draws = 10_000_000
    for _ in range(10):
        size = draws // 10
        x = np.where(rng.uniform(size=size) < 0.5, -3.0, 3.0) + rng.normal(size=size)
        y = x + rng.normal(size=size)
        # the posterior of a unit variance mixture component has mean (μ + y) / 2
        gap = (a * y - (y / 2 + 1.5 * np.tanh(1.5 * y))) ** 2
        total += gap.sum()
        total_squares += (gap**2).sum()
    mean = total / draws
    standard_error = np.sqrt((total_squares / draws - mean**2) / draws)
    assert abs(l2_epsilon(mixture_prior, wide_mixture_field) - mean) < 3 * standard_error
