import os

import mlflow
import pytest
import yaml

from gauss_stab.channel.posterior_field import posterior_field
from gauss_stab.config.gauss_stab_config import ScenarioConfig
from gauss_stab.numerics.bumps import SEED_ENVIRONMENT_VARIABLE
from gauss_stab.numerics.grid import Grid
from gauss_stab.pipeline.scenario_pipeline import run_scenarios
from gauss_stab.priors.gridded_density import build_prior
from gauss_stab.priors.prior_spec import (
    GaussianBumpPrior,
    GaussianPrior,
    TwoGaussianMixturePrior,
    UniformPrior,
)

# coarser grids keep the pipeline and cli tests fast
SMALL_GRIDS = dict(
    x=dict(lo=-16.0, hi=16.0, n=4097),
    y=dict(lo=-8.0, hi=8.0, n=513),
    t=dict(lo=-12.0, hi=12.0, n=1025),
    omega=dict(lo=-4.0, hi=4.0, n=401),
)


@pytest.fixture(autouse=True)
def cleanup_environment_after_runs():
    # A test function will be run at this point
    yield
    while mlflow.active_run():
        mlflow.end_run()
    for variable in ("MLFLOW_TRACKING_URI", SEED_ENVIRONMENT_VARIABLE):
        if variable in os.environ:
            os.environ.pop(variable)


@pytest.fixture(scope="session")
def x_grid():
    return Grid(lo=-16.0, hi=16.0, n=8193)


@pytest.fixture(scope="session")
def y_grid():
    return Grid(lo=-8.0, hi=8.0, n=1025)


@pytest.fixture(scope="session")
def t_grid():
    return Grid(lo=-12.0, hi=12.0, n=2049)


@pytest.fixture(scope="session")
def omega_grid():
    return Grid(lo=-4.0, hi=4.0, n=801)


@pytest.fixture(scope="session")
def gaussian_prior(x_grid):
    return build_prior(GaussianPrior(variance=1.0), x_grid)


@pytest.fixture(scope="session")
def bump_prior(x_grid):
    return build_prior(
        GaussianBumpPrior(
            variance=1.0, bump_center=0.5, bump_width=0.5, bump_height=0.05
        ),
        x_grid,
    )


@pytest.fixture(scope="session")
def mixture_prior(x_grid):
    return build_prior(
        TwoGaussianMixturePrior(
            weight=0.5, mean1=-3.0, variance1=1.0, mean2=3.0, variance2=1.0
        ),
        x_grid,
    )


@pytest.fixture(scope="session")
def uniform_prior(x_grid):
    return build_prior(UniformPrior(lo=-1.0, hi=1.0), x_grid)


@pytest.fixture(scope="session")
def gaussian_field(gaussian_prior, y_grid):
    return posterior_field(gaussian_prior, y_grid)


@pytest.fixture(scope="session")
def bump_field(bump_prior, y_grid):
    return posterior_field(bump_prior, y_grid)


@pytest.fixture(scope="session")
def mixture_field(mixture_prior, y_grid):
    return posterior_field(mixture_prior, y_grid)


@pytest.fixture(scope="session")
def uniform_field(uniform_prior, y_grid):
    return posterior_field(uniform_prior, y_grid)


@pytest.fixture
def small_config_dict():
    return dict(
        format_version=1,
        run=dict(jobs=1),
        scenarios=[
            dict(
                name="gaussian",
                prior=dict(kind="gaussian", variance=1.0),
                grids=SMALL_GRIDS,
                certificates=["l2"],
            ),
            dict(
                name="bump",
                prior=dict(
                    kind="gaussian_bump",
                    variance=1.0,
                    bump_center=0.5,
                    bump_width=0.5,
                    bump_height=0.05,
                ),
                grids=SMALL_GRIDS,
                certificates=["l2"],
            ),
        ],
    )


@pytest.fixture
def small_config_path(tmp_path, small_config_dict):
    path = tmp_path / "gauss_stab.yml"
    path.write_text(yaml.dump(small_config_dict), encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def small_results():
    """A passing bump scenario with both certificates and one that fails
    while building its prior."""
    bump = dict(
        kind="gaussian_bump",
        variance=1.0,
        bump_center=0.5,
        bump_width=0.5,
        bump_height=0.05,
    )
    instances = [
        ScenarioConfig.parse_obj(
            dict(
                name="bump",
                prior=bump,
                grids=SMALL_GRIDS,
                certificates=["l2", "l1"],
                n_max=3,
            )
        ),
        ScenarioConfig.parse_obj(
            dict(
                name="negative",
                prior=dict(bump, bump_height=-1.0),
                grids=SMALL_GRIDS,
                certificates=["l2"],
            )
        ),
    ]
    return run_scenarios(instances)
