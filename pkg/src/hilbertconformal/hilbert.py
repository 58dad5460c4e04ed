"""Points in the supported separable Hilbert spaces.

Three representations are available:

* ``euclidean`` -- vectors in R^d with the ordinary dot product.
* ``curve`` -- functions on a closed interval stored as values on a strictly
  increasing grid; inner products are trapezoidal approximations of the
  L2 integral.
* ``quantile`` -- univariate distributions stored as their quantile function
  on the midpoint grid p_j = (j - 0.5)/m; the induced metric is the
  2-Wasserstein distance.

Points are immutable after construction.  Two points are comparable (and may
enter a joint computation) only when they have the same kind and an identical
grid.  Arithmetic (``a + b``, ``a - b``, ``c * a``) is pointwise on matching
grids; no interpolation across mismatched grids is attempted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import MismatchError

KINDS = ("euclidean", "curve", "quantile")


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class HilbertPoint:
    """One element of a supported Hilbert space.

    Prefer the factory functions :func:`euclidean_point`,
    :func:`curve_point` and :func:`quantile_point`, which validate the
    representation-specific invariants.
    """

    kind: str
    values: np.ndarray
    grid: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown point kind {self.kind!r}")
        object.__setattr__(self, "values", _freeze(self.values))
        if self.values.ndim != 1 or self.values.size == 0:
            raise ValueError("values must be a nonempty 1-D array")
        if self.kind == "curve":
            if self.grid is None:
                raise ValueError("curve points require a grid")
            object.__setattr__(self, "grid", _freeze(self.grid))
            if self.grid.shape != self.values.shape:
                raise ValueError("grid and values must have equal length")
        elif self.grid is not None:
            raise ValueError(f"{self.kind} points carry no grid")

    @property
    def dim(self) -> int:
        return self.values.size

    def _binary(self, other: "HilbertPoint", op) -> "HilbertPoint":
        ensure_comparable(self, other)
        return HilbertPoint(self.kind, op(self.values, other.values), self.grid)

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, c):
        return HilbertPoint(self.kind, float(c) * self.values, self.grid)

    __rmul__ = __mul__


def euclidean_point(values: Sequence[float]) -> HilbertPoint:
    """Vector in R^d."""
    return HilbertPoint("euclidean", np.asarray(values, dtype=np.float64))


def curve_point(grid: Sequence[float], values: Sequence[float]) -> HilbertPoint:
    """Function on a closed interval, sampled on a strictly increasing grid."""
    g = np.asarray(grid, dtype=np.float64)
    if g.ndim != 1 or g.size < 2:
        raise ValueError("curve grid must hold at least two points")
    if not np.all(np.diff(g) > 0):
        raise ValueError("curve grid must be strictly increasing")
    return HilbertPoint("curve", np.asarray(values, dtype=np.float64), g)


def quantile_point(values: Sequence[float]) -> HilbertPoint:
    """Quantile function evaluated at p_j = (j - 0.5)/m for j = 1..m."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim == 1 and v.size > 1 and np.any(np.diff(v) < 0):
        raise ValueError("quantile values must be nondecreasing")
    return HilbertPoint("quantile", v)


def probability_grid(m: int) -> np.ndarray:
    """Midpoint probability grid (j - 0.5)/m, j = 1..m."""
    if m < 1:
        raise ValueError("m must be at least 1")
    return (np.arange(1, m + 1) - 0.5) / m


def comparable(a: HilbertPoint, b: HilbertPoint) -> bool:
    if a.kind != b.kind or a.dim != b.dim:
        return False
    if a.kind == "curve":
        return np.array_equal(a.grid, b.grid)
    return True


def ensure_comparable(a: HilbertPoint, b: HilbertPoint) -> None:
    if not comparable(a, b):
        raise MismatchError(
            f"points are not comparable: {a.kind}[{a.dim}] vs {b.kind}[{b.dim}]"
        )


def quadrature_weights(kind: str, dim: int, grid: np.ndarray | None = None) -> np.ndarray:
    """Weights w such that <a, b> = sum_k w_k a_k b_k for the given representation."""
    if kind == "euclidean":
        return np.ones(dim)
    if kind == "quantile":
        return np.full(dim, 1.0 / dim)
    if kind == "curve":
        w = np.empty(dim)
        w[0] = (grid[1] - grid[0]) / 2.0
        w[-1] = (grid[-1] - grid[-2]) / 2.0
        if dim > 2:
            w[1:-1] = (grid[2:] - grid[:-2]) / 2.0
        return w
    raise ValueError(f"unknown point kind {kind!r}")


def inner(a: HilbertPoint, b: HilbertPoint) -> float:
    """Inner product of two comparable points."""
    ensure_comparable(a, b)
    w = quadrature_weights(a.kind, a.dim, a.grid)
    return float(np.dot(w * a.values, b.values))


def norm(a: HilbertPoint) -> float:
    return float(np.sqrt(inner(a, a)))


def distance(a: HilbertPoint, b: HilbertPoint) -> float:
    """Metric induced by the inner product; W2 for quantile points."""
    ensure_comparable(a, b)
    w = quadrature_weights(a.kind, a.dim, a.grid)
    d = a.values - b.values
    return float(np.sqrt(np.dot(w * d, d)))


def empirical_quantile_function(samples: Sequence[float], m: int) -> HilbertPoint:
    """Empirical quantile function of a sample on the midpoint m-grid.

    The value at p_j = (j - 0.5)/m is the ceil(p_j * n)-th order statistic.
    """
    s = np.sort(np.asarray(samples, dtype=np.float64))
    n = s.size
    if n == 0:
        raise ValueError("empty sample")
    p = probability_grid(m)
    # nudge guards against float error right at integer boundaries
    idx = np.ceil(p * n - 1e-9).astype(int)
    np.clip(idx, 1, n, out=idx)
    return quantile_point(s[idx - 1])


@dataclass(frozen=True)
class PackedPoints:
    """A sequence of mutually comparable points packed into one matrix.

    ``values`` has one row per point; ``weights`` is the shared quadrature
    weight vector.  All heavy computations work on this layout.
    """

    kind: str
    values: np.ndarray
    weights: np.ndarray
    grid: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        object.__setattr__(self, "weights", _freeze(self.weights))
        if self.grid is not None:
            object.__setattr__(self, "grid", _freeze(self.grid))

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def point(self, i: int) -> HilbertPoint:
        return HilbertPoint(self.kind, self.values[i], self.grid)

    def points(self) -> list[HilbertPoint]:
        return [self.point(i) for i in range(len(self))]

    def take(self, indices) -> "PackedPoints":
        return PackedPoints(self.kind, self.values[np.asarray(indices)], self.weights, self.grid)


def pack_points(points: Sequence[HilbertPoint] | PackedPoints) -> PackedPoints:
    """Pack comparable points into a PackedPoints matrix (no copy if packed)."""
    if isinstance(points, PackedPoints):
        return points
    points = list(points)
    if not points:
        raise ValueError("empty point sequence")
    first = points[0]
    for p in points[1:]:
        ensure_comparable(first, p)
    values = np.vstack([p.values for p in points])
    w = quadrature_weights(first.kind, first.dim, first.grid)
    return PackedPoints(first.kind, values, w, first.grid)


def query_row(packed: PackedPoints, point: HilbertPoint) -> np.ndarray:
    """Validate a query point against a packed set and return it as a 1xN row."""
    ensure_comparable(packed.point(0), point)
    return point.values[None, :]
