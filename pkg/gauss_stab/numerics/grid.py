from typing import Callable, Union

import numpy as np
from pydantic import BaseModel, conint, root_validator
from scipy.interpolate import CubicSpline

ArrayLike = Union[float, np.ndarray]


class Grid(BaseModel):
    """Uniform grid ``lo + k * step`` for ``k = 0 .. n-1``.

    The model is frozen so grids can be shared between threads
    and used as cache keys.
    """

    lo: float
    hi: float
    n: conint(ge=2)

    class Config:
        extra = "forbid"
        frozen = True

    @root_validator(skip_on_failure=True)
    def _check_bounds(cls, values):
        lo, hi = values["lo"], values["hi"]
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise ValueError(f"grid bounds must be finite, got lo={lo}, hi={hi}")
        if not lo < hi:
            raise ValueError(f"grid needs lo < hi, got lo={lo}, hi={hi}")
        return values

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.n - 1)

    @property
    def points(self) -> np.ndarray:
        return self.lo + np.arange(self.n) * self.step

    @property
    def offset(self) -> float:
        """Position of the origin in index units (``-lo / step``)."""
        return -self.lo / self.step

    def contains(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x)
        return (x >= self.lo) & (x <= self.hi)

    def refine(self, factor: int = 2) -> "Grid":
        return Grid(lo=self.lo, hi=self.hi, n=(self.n - 1) * factor + 1)

    def window(self, lo: float, hi: float) -> "Grid":
        """Largest sub-grid sharing this grid's nodes inside ``[lo, hi]``."""
        first = int(np.ceil((lo - self.lo) / self.step - 1e-9))
        last = int(np.floor((hi - self.lo) / self.step + 1e-9))
        first, last = max(first, 0), min(last, self.n - 1)
        if last - first < 1:
            raise ValueError(f"window [{lo}, {hi}] holds less than two nodes of {self}")
        return Grid(
            lo=self.lo + first * self.step,
            hi=self.lo + last * self.step,
            n=last - first + 1,
        )


class GridFunction:
    """Real or complex values tabulated on a ``Grid``.

    Values are copied on construction and frozen afterwards.
    """

    def __init__(self, grid: Grid, values: np.ndarray):
        values = np.array(values)
        if values.shape != (grid.n,):
            raise ValueError(
                f"values must have shape ({grid.n},) to match the grid, got {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("GridFunction values must all be finite")
        values.setflags(write=False)
        self._grid = grid
        self._values = values

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]):
        return cls(grid, fn(grid.points))

    @property
    def grid(self) -> Grid:
        return self._grid

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self._values)

    @property
    def real(self) -> "GridFunction":
        return GridFunction(self._grid, self._values.real)

    @property
    def imag(self) -> "GridFunction":
        return GridFunction(self._grid, self._values.imag)

    def __call__(self, x: ArrayLike, left: float = 0.0, right: float = 0.0):
        """Linear interpolation, constant ``left``/``right`` outside the grid."""
        points = self._grid.points
        if self.is_complex:
            return np.interp(x, points, self._values.real, left, right) + 1j * np.interp(
                x, points, self._values.imag, left, right
            )
        return np.interp(x, points, self._values, left, right)

    def cubic(self, x: ArrayLike) -> np.ndarray:
        """Cubic-spline interpolation; zero outside the grid."""
        x = np.asarray(x, dtype=float)
        spline = CubicSpline(self._grid.points, self._values)
        return np.where(self._grid.contains(x), spline(x), 0.0)

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        return GridFunction(self._grid, fn(self._values))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self._values)))

    def edge_magnitude(self) -> float:
        return float(max(abs(self._values[0]), abs(self._values[-1])))

    def __repr__(self):
        kind = "complex" if self.is_complex else "real"
        return f"GridFunction({kind}, {self._grid!r})"
