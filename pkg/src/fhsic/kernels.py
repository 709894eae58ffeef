"""Discretized curves, L2 distances and Gaussian Gram matrices.

Curves live on a shared grid of abscissae in [0, 1]. Squared L2 distances
are approximated with the composite trapezoidal rule, which also covers
non-equispaced grids.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError

DEFAULT_KERNEL_COEFF = 1.0 / 150.0


@dataclass(frozen=True)
class Grid:
    """Strictly increasing sampling points in [0, 1]."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim != 1 or pts.size < 2:
            raise DimensionError(f"grid needs at least 2 points, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise DomainError("grid points must be finite")
        if np.any(np.diff(pts) <= 0):
            raise DomainError("grid points must be strictly increasing")
        if pts[0] < 0.0 or pts[-1] > 1.0:
            raise DomainError("grid points must lie in [0, 1]")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def equispaced(cls, size: int) -> "Grid":
        """Grid t_j = (j - 1) / (size - 1), j = 1..size."""
        if size < 2:
            raise DimensionError(f"grid needs at least 2 points, got {size}")
        return cls(np.arange(size, dtype=np.float64) / (size - 1))

    def __len__(self):
        return self.points.size

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash(self.points.tobytes())

    @property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self)


def trapezoid_weights(grid: Grid) -> np.ndarray:
    """Quadrature weights so that ``weights @ f`` is the composite trapezoid rule."""
    t = grid.points
    h = np.diff(t)
    w = np.zeros_like(t)
    w[:-1] += h / 2.0
    w[1:] += h / 2.0
    return w


@dataclass(frozen=True)
class CurveSet:
    """n curves sampled on a common grid; ``values`` has shape (n, len(grid))."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise DimensionError(f"curve values must be 2-D (n, grid), got shape {vals.shape}")
        if vals.shape[0] < 2:
            raise DimensionError(f"need at least 2 curves, got {vals.shape[0]}")
        if vals.shape[1] != len(self.grid):
            raise DimensionError(
                f"curves have {vals.shape[1]} values but grid has {len(self.grid)} points"
            )
        if not np.all(np.isfinite(vals)):
            raise DomainError("curve values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __len__(self):
        return self.n

    def __getitem__(self, i):
        return self.values[i]

    def permuted(self, order) -> "CurveSet":
        return CurveSet(self.grid, self.values[np.asarray(order)])


@dataclass(frozen=True)
class KernelSpec:
    """Gaussian kernel on L2([0,1]): exp(-coefficient * ||x - y||^2).

    ``bandwidth_coefficient`` is the multiplier applied to the squared
    distance inside the exponential, not a bandwidth to be squared or
    inverted.
    """

    bandwidth_coefficient: float = DEFAULT_KERNEL_COEFF
    family: str = "gaussian-l2"

    def __post_init__(self):
        if self.family != "gaussian-l2":
            raise DomainError(f"unsupported kernel family {self.family!r}")
        c = float(self.bandwidth_coefficient)
        if not np.isfinite(c) or c <= 0:
            raise DomainError(f"bandwidth coefficient must be positive, got {c}")
        object.__setattr__(self, "bandwidth_coefficient", c)


def _check_curve(values, grid: Grid, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size != len(grid):
        raise DimensionError(f"curve {name} has shape {arr.shape}, grid has {len(grid)} points")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"curve {name} has non-finite values")
    return arr


def _row_distances(diff: np.ndarray, weights: np.ndarray) -> np.ndarray:
    # Elementwise product then a row reduction: each entry is summed in the
    # same order whatever the number of rows, so block splits stay bit-identical.
    return (diff * diff * weights).sum(axis=-1)


def l2_squared_distance(a, b, grid: Grid) -> float:
    """Trapezoidal approximation of the integral of (a(t) - b(t))^2 over the grid."""
    a = _check_curve(a, grid, "a")
    b = _check_curve(b, grid, "b")
    return float(_row_distances((b - a)[None, :], grid.weights)[0])


def kernel_eval(spec: KernelSpec, d2: float) -> float:
    if not d2 >= 0:
        raise DomainError(f"squared distance must be nonnegative, got {d2}")
    return float(np.exp(-spec.bandwidth_coefficient * d2))


def _gram_rows(values, weights, coeff, rows, out):
    for i in rows:
        d2 = _row_distances(values[i + 1:] - values[i], weights)
        out[i, i + 1:] = np.exp(-coeff * d2)


def gram_matrix(data: CurveSet, spec: KernelSpec | None = None, workers: int = 1) -> np.ndarray:
    """Gram matrix K[i, j] = exp(-c * ||X_i - X_j||^2) for a curve sample.

    Only the strict upper triangle is computed; it is mirrored and the
    diagonal set to 1. ``workers > 1`` splits rows across threads and gives
    the same bits as the sequential path.
    """
    spec = spec or KernelSpec()
    n = data.n
    values = data.values
    weights = data.grid.weights
    coeff = spec.bandwidth_coefficient
    out = np.zeros((n, n), dtype=np.float64)
    if workers <= 1:
        _gram_rows(values, weights, coeff, range(n), out)
    else:
        chunks = [range(k, n, workers) for k in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda rows: _gram_rows(values, weights, coeff, rows, out), chunks))
    out += out.T
    np.fill_diagonal(out, 1.0)
    return out
