from .gridded_density import (
    CharacteristicFunction,
    GriddedDensity,
    NegativeDensity,
    UnderresolvedOscillation,
    build_prior,
    char_fn,
    characteristic_values,
)
from .prior_spec import (
    GaussianBumpPrior,
    GaussianPrior,
    PriorSpec,
    TabulatedPrior,
    TwoGaussianMixturePrior,
    UniformPrior,
    parse_prior_spec,
)
