import numpy as np

from gauss_stab.numerics.bumps import (
    DEFAULT_SEED,
    SEED_ENVIRONMENT_VARIABLE,
    random_bumps,
    resolve_seed,
    smooth_bump,
)
from gauss_stab.numerics.grid import Grid


def test_smooth_bump_support():
    x = np.array([-2.0, -1.0, 0.0, 0.5, 1.0, 2.0])
    values = smooth_bump(x, center=0.0, width=1.0)
    np.testing.assert_allclose(values[[0, 1, 4, 5]], 0.0)
    assert values[2] == 1.0
    assert 0 < values[3] < 1


def test_random_bumps_are_reproducible():
    grid = Grid(lo=-8.0, hi=8.0, n=257)
    first = random_bumps(grid, np.random.default_rng(3), 4)
    second = random_bumps(grid, np.random.default_rng(3), 4)
    for f, g in zip(first, second):
        np.testing.assert_array_equal(f.values, g.values)


def test_random_bumps_stay_inside_the_support():
    grid = Grid(lo=-8.0, hi=8.0, n=257)
    for f in random_bumps(grid, np.random.default_rng(11), 10, support=3.0):
        assert np.all(f.values[np.abs(grid.points) >= 3.0] == 0.0)


def test_resolve_seed(monkeypatch):
    assert resolve_seed() == DEFAULT_SEED
    assert resolve_seed(7) == 7
    monkeypatch.setenv(SEED_ENVIRONMENT_VARIABLE, "42")
    assert resolve_seed(7) == 42
