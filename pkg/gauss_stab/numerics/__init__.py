from .bumps import random_bumps, resolve_seed, smooth_bump
from .grid import Grid, GridFunction
from .optimize import NoBracket, bisect_root, bisect_roots, golden_minimize
from .quadrature import (
    EdgeLeakage,
    RunningIntegral,
    cumulative_integral,
    fft_convolve,
    inner_product,
    l1_norm,
    l2_norm,
    running_integral,
    trapezoid_integrate,
    trapezoid_weights,
)
from .special import dawson, dawson_bounds, erf, gaussian_cdf, gaussian_density
