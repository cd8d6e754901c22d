from typing import Callable, Tuple

import numpy as np

from gauss_stab.exceptions import GaussStabError

GOLDEN_RATIO = (np.sqrt(5.0) - 1.0) / 2.0
SEED_POINTS = 64


class NoBracket(GaussStabError):
    """The function has the same strict sign at both ends of the interval."""


def bisect_root(fn: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Midpoint bisection for a monotone ``fn`` with a sign change on ``[lo, hi]``."""
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    f_lo, f_hi = fn(lo), fn(hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if f_lo * f_hi > 0:
        raise NoBracket(
            f"no sign change on [{lo}, {hi}]: fn(lo)={f_lo:.3e}, fn(hi)={f_hi:.3e}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_mid == 0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bisect_roots(
    fn: Callable[[np.ndarray], np.ndarray], lo: np.ndarray, hi: np.ndarray, tol: float
) -> np.ndarray:
    """Vectorised ``bisect_root``: ``fn`` maps an array of abscissae to an
    array of values, one independent monotone problem per entry."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    f_lo, f_hi = fn(lo), fn(hi)
    if np.any(f_lo * f_hi > 0):
        bad = int(np.argmax(f_lo * f_hi > 0))
        raise NoBracket(
            f"no sign change for problem {bad} on [{lo[bad]}, {hi[bad]}]: "
            f"fn(lo)={f_lo[bad]:.3e}, fn(hi)={f_hi[bad]:.3e}"
        )
    increasing = f_hi >= f_lo
    iterations = int(np.ceil(np.log2(max(np.max(hi - lo), tol) / tol))) + 1
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        go_right = (fn(mid) < 0) == increasing
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    return 0.5 * (lo + hi)


def golden_minimize(
    fn: Callable[[float], float], lo: float, hi: float, tol: float
) -> Tuple[float, float]:
    """Golden-section search seeded by a 64-point scan.

    The scan picks the best seed; golden-section then refines inside the
    bracket formed by its neighbours, so non-unimodal functions still
    return a genuine function value.
    """
    if not lo < hi:
        raise ValueError(f"golden_minimize needs lo < hi, got [{lo}, {hi}]")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    seeds = np.linspace(lo, hi, SEED_POINTS)
    values = np.array([fn(x) for x in seeds])
    best = int(np.argmin(values))
    a = seeds[max(best - 1, 0)]
    b = seeds[min(best + 1, SEED_POINTS - 1)]

    c = b - GOLDEN_RATIO * (b - a)
    d = a + GOLDEN_RATIO * (b - a)
    f_c, f_d = fn(c), fn(d)
    while b - a > tol:
        if f_c <= f_d:
            b, d, f_d = d, c, f_c
            c = b - GOLDEN_RATIO * (b - a)
            f_c = fn(c)
        else:
            a, c, f_c = c, d, f_d
            d = a + GOLDEN_RATIO * (b - a)
            f_d = fn(d)

    candidates = [(seeds[best], values[best]), (c, f_c), (d, f_d)]
    argmin, minimum = min(candidates, key=lambda pair: pair[1])
    return float(argmin), float(minimum)
