import os
from typing import List

import numpy as np

from gauss_stab.numerics.grid import Grid, GridFunction

DEFAULT_SEED = 20240229
SEED_ENVIRONMENT_VARIABLE = "GAUSS_STAB_SEED"


def resolve_seed(seed: int = DEFAULT_SEED) -> int:
    """The environment variable wins over the configured seed."""
    override = os.environ.get(SEED_ENVIRONMENT_VARIABLE)
    return int(override) if override else seed


def smooth_bump(x: np.ndarray, center: float, width: float) -> np.ndarray:
    """C-infinity bump ``exp(1 - 1 / (1 - u²))`` supported on ``|u| < 1``."""
    u = (np.asarray(x, dtype=float) - center) / width
    inside = np.abs(u) < 1
    out = np.zeros_like(u)
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return out


def random_bumps(
    grid: Grid,
    rng: np.random.Generator,
    count: int,
    support: float = 3.0,
    min_width: float = 0.75,
    max_width: float = 2.0,
) -> List[GridFunction]:
    """Seeded smooth test functions: sums of two bumps kept inside ``|x| <= support``."""
    functions = []
    for _ in range(count):
        values = np.zeros(grid.n)
        for _ in range(2):
            width = rng.uniform(min_width, max_width)
            center = rng.uniform(-support + width, support - width)
            values += rng.uniform(-1.0, 1.0) * smooth_bump(grid.points, center, width)
        functions.append(GridFunction(grid, values))
    return functions
