import numpy as np
import pytest

from gauss_stab.numerics.grid import Grid
from gauss_stab.numerics.quadrature import EdgeLeakage, trapezoid_integrate
from gauss_stab.numerics.special import gaussian_cdf, gaussian_density
from gauss_stab.priors.gridded_density import (
    NegativeDensity,
    UnderresolvedOscillation,
    build_prior,
    characteristic_values,
)
from gauss_stab.priors.prior_spec import (
    GaussianBumpPrior,
    GaussianPrior,
    TabulatedPrior,
    UniformPrior,
)


def test_gaussian_prior_moments(gaussian_prior):
    assert trapezoid_integrate(gaussian_prior.density) == pytest.approx(1.0, abs=1e-12)
    assert gaussian_prior.mean == pytest.approx(0.0, abs=1e-12)
    assert gaussian_prior.variance == pytest.approx(1.0, abs=1e-10)
    assert gaussian_prior.slope_a == pytest.approx(0.5, abs=1e-10)
    assert gaussian_prior.sup_density == pytest.approx(1 / np.sqrt(2 * np.pi), rel=1e-10)


def test_gaussian_prior_cdf(gaussian_prior):
    x = gaussian_prior.grid.points
    np.testing.assert_allclose(gaussian_prior.cdf.values, gaussian_cdf(x), atol=1e-6)
    assert gaussian_prior.cdf.values[0] == 0.0


def test_uniform_prior_variance(uniform_prior):
    assert uniform_prior.mean == pytest.approx(0.0, abs=1e-12)
    assert uniform_prior.variance == pytest.approx(1 / 3, abs=1e-5)
    assert uniform_prior.slope_a == pytest.approx(0.25, abs=1e-5)


def test_mixture_prior_variance(mixture_prior):
    # w v1 + (1-w) v2 + w (1-w) (μ1 - μ2)²
    assert mixture_prior.variance == pytest.approx(10.0, abs=1e-8)


def test_build_prior_renormalises(x_grid):
    prior = build_prior(
        GaussianBumpPrior(variance=1.0, bump_center=0.5, bump_width=0.5, bump_height=0.05),
        x_grid,
    )
    assert trapezoid_integrate(prior.density) == pytest.approx(1.0, abs=1e-12)
    assert prior.spec.kind == "gaussian_bump"


def test_build_prior_centers_on_request(x_grid):
    prior = build_prior(GaussianPrior(variance=1.0, mean=2.0, center=True), x_grid)
    assert prior.mean == pytest.approx(0.0, abs=1e-10)
    assert prior.variance == pytest.approx(1.0, abs=1e-10)


def test_build_prior_refuses_a_negative_density(x_grid):
    spec = GaussianBumpPrior(variance=1.0, bump_center=0.0, bump_width=0.5, bump_height=-1.0)
    with pytest.raises(NegativeDensity, match="bump of height"):
        build_prior(spec, x_grid)


def test_build_prior_refuses_edge_mass(x_grid):
    with pytest.raises(EdgeLeakage, match="widen the x grid"):
        build_prior(GaussianPrior(variance=10.0), x_grid)


def test_build_prior_refuses_an_empty_density(x_grid):
    with pytest.raises(NegativeDensity, match="no mass"):
        build_prior(UniformPrior(lo=30.0, hi=31.0), x_grid)


def test_tabulated_prior(tmp_path):
    table_x = np.linspace(-10.0, 10.0, 2001)
    path = tmp_path / "prior.txt"
    np.savetxt(path, np.column_stack([table_x, 3.0 * gaussian_density(table_x)]))
    prior = build_prior(TabulatedPrior(path=path), Grid(lo=-16.0, hi=16.0, n=4097))
    assert trapezoid_integrate(prior.density) == pytest.approx(1.0, abs=1e-12)
    assert prior.variance == pytest.approx(1.0, abs=1e-4)


def test_gaussian_characteristic_function(gaussian_prior, t_grid):
    char = gaussian_prior.char_fn(t_grid)
    t = t_grid.points
    np.testing.assert_allclose(char.phi.values, np.exp(-(t**2) / 2), atol=1e-10)
    np.testing.assert_allclose(char.dphi.values, -t * np.exp(-(t**2) / 2), atol=1e-10)
    # φ' + σ² t φ vanishes for a Gaussian
    np.testing.assert_allclose(char.phi_tilde.values, 0.0, atol=1e-9)


def test_characteristic_function_is_cached(gaussian_prior, t_grid):
    assert gaussian_prior.char_fn(t_grid) is gaussian_prior.char_fn(t_grid)


def test_characteristic_values_refuse_coarse_grids(gaussian_prior):
    with pytest.raises(UnderresolvedOscillation, match="refine the x grid"):
        characteristic_values(gaussian_prior, np.array([0.0, 200.0]))


@pytest.mark.parametrize(
    "prior_name", ["gaussian_prior", "bump_prior", "mixture_prior", "uniform_prior"]
)
def test_characteristic_function_invariants(request, prior_name, t_grid):
    prior = request.getfixturevalue(prior_name)
    char = prior.char_fn(t_grid)
    origin = int(round(t_grid.offset))
    assert abs(char.phi.values[origin] - 1.0) < 1e-10
    assert np.max(np.abs(char.phi.values)) <= 1.0 + 1e-10
    assert abs(char.dphi.values[origin] - 1j * prior.mean) < 1e-8

    t = np.linspace(0.0, 10.0, 41)
    phi, _ = characteristic_values(prior, t)
    mirrored, _ = characteristic_values(prior, -t)
    np.testing.assert_allclose(mirrored, np.conj(phi), rtol=0, atol=1e-12)


@pytest.mark.parametrize(
    "prior_name", ["gaussian_prior", "bump_prior", "mixture_prior", "uniform_prior"]
)
def test_cdf_differences_recover_the_density(request, prior_name):
    prior = request.getfixturevalue(prior_name)
    step = prior.grid.step
    cdf = prior.cdf.values
    density = prior.density.values
    recovered = (cdf[2:] - cdf[:-2]) / (2 * step)
    slope = np.max(np.abs(np.gradient(density, step)))
    assert np.max(np.abs(recovered - density[1:-1])) < 10 * step * slope


def test_bump_characteristic_function_under_refinement(bump_prior):
    fine = build_prior(bump_prior.spec, bump_prior.grid.refine(4))
    t = np.array([0.5, 1.0, 2.0])
    coarse_phi, _ = characteristic_values(bump_prior, t)
    fine_phi, _ = characteristic_values(fine, t)
    np.testing.assert_allclose(coarse_phi, fine_phi, rtol=0, atol=1e-7)


def test_bump_variance_matches_monte_carlo(bump_prior):
    # inverse transform sampling from the tabulated cdf
    cdf, first = np.unique(bump_prior.cdf.values, return_index=True)
    nodes = bump_prior.grid.points[first]
    rng = np.random.default_rng(20240611)
    samples = np.interp(rng.uniform(size=10_000_000), cdf, nodes)

    centered = samples - samples.mean()
    variance = np.mean(centered**2)
    standard_error = np.sqrt((np.mean(centered**4) - variance**2) / samples.size)
    assert abs(bump_prior.variance - variance) < 3 * standard_error
