import numpy as np

from gauss_stab.exceptions import GaussStabError
from gauss_stab.numerics.grid import GridFunction

CDF_TOLERANCE = 1e-8
LEVY_TOLERANCE = 1e-6


class NotACdf(GaussStabError):
    """A tabulated function is not a distribution function."""


def check_cdf(F: GridFunction, name: str = "F"):
    values = F.values
    if F.is_complex:
        raise NotACdf(f"'{name}' is complex valued")
    if np.any(np.diff(values) < -CDF_TOLERANCE):
        raise NotACdf(f"'{name}' decreases by {-np.min(np.diff(values)):.3e}")
    if values[0] > CDF_TOLERANCE or values[-1] < 1 - CDF_TOLERANCE:
        raise NotACdf(
            f"'{name}' runs from {values[0]:.3e} to {values[-1]:.6g} instead of 0 to 1"
        )
    if np.min(values) < -CDF_TOLERANCE or np.max(values) > 1 + CDF_TOLERANCE:
        raise NotACdf(f"'{name}' leaves [0, 1]")


def _clamped(F: GridFunction, x: np.ndarray) -> np.ndarray:
    return F(x, left=0.0, right=1.0)


def _violation(F: GridFunction, G: GridFunction, h: float) -> float:
    """Largest breach of ``G(x-h) - h <= F(x) <= G(x+h) + h``.

    Both sides are piecewise linear in ``x``; checking the nodes of ``F`` and
    the shifted nodes of ``G`` covers every kink.
    """
    xf, xg = F.grid.points, G.grid.points
    x = np.concatenate([xf, xg - h, xg + h])
    f = _clamped(F, x)
    above = f - _clamped(G, x + h) - h
    below = _clamped(G, x - h) - h - f
    return float(max(np.max(above), np.max(below)))


def levy_profile(F: GridFunction, G: GridFunction, h_values: np.ndarray) -> np.ndarray:
    """Band violation for each ``h``; it first reaches ``<= 0`` at the Lévy distance."""
    check_cdf(F, "F")
    check_cdf(G, "G")
    return np.array([_violation(F, G, float(h)) for h in np.asarray(h_values)])


def levy_distance(F: GridFunction, G: GridFunction, tol: float = LEVY_TOLERANCE) -> float:
    """Smallest ``h`` with ``G(x-h) - h <= F(x) <= G(x+h) + h`` for all ``x``."""
    check_cdf(F, "F")
    check_cdf(G, "G")
    if _violation(F, G, 0.0) <= 0:
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _violation(F, G, mid) <= 0:
            hi = mid
        else:
            lo = mid
    return hi
