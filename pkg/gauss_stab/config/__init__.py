from .gauss_stab_config import (
    GaussStabConfig,
    GaussStabConfigError,
    GridsConfig,
    RunConfig,
    ScenarioConfig,
    SweepConfig,
    TrackingConfig,
    expand_sweeps,
    get_gauss_stab_config,
)
