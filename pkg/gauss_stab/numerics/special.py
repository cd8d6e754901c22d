"""Special functions.

``erf`` and ``dawson`` wrap ``scipy.special`` and enforce oddness exactly by
evaluating on ``|x|`` and restoring the sign.
"""
from typing import Tuple, Union

import numpy as np
from scipy import special

ArrayLike = Union[float, np.ndarray]


def _odd(fn, x: ArrayLike):
    x = np.asarray(x, dtype=float)
    result = np.sign(x) * fn(np.abs(x))
    return float(result) if result.ndim == 0 else result


def erf(x: ArrayLike):
    return _odd(special.erf, x)


def dawson(w: ArrayLike):
    """``D(w) = exp(-w²) ∫_0^w exp(t²) dt``."""
    return _odd(special.dawsn, w)


def gaussian_cdf(x: ArrayLike, mean: float = 0.0, variance: float = 1.0):
    return 0.5 * (1.0 + erf((np.asarray(x, dtype=float) - mean) / np.sqrt(2 * variance)))


def gaussian_density(x: ArrayLike, mean: float = 0.0, variance: float = 1.0):
    x = np.asarray(x, dtype=float)
    return np.exp(-((x - mean) ** 2) / (2 * variance)) / np.sqrt(2 * np.pi * variance)


def dawson_bounds(w: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """Two-sided envelope ``(1 - e^{-w²}) / (2|w|) <= D(|w|) <= (1 - e^{-w²}) / |w|``."""
    w = np.abs(np.asarray(w, dtype=float))
    numerator = -np.expm1(-(w**2))
    return numerator / (2 * w), numerator / w
