"""Positive-definite Gaussian kernels over Hilbert points.

The single shipped family is the Gaussian radial kernel

    k(a, b) = exp(-sigma * d(a, b)^2)

where d is the metric of the point representation (Euclidean, L2, or W2).
``KernelSpec`` carries the family tag so further families can be added
without touching call sites.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import backend
from .errors import FitError, MismatchError
from .hilbert import HilbertPoint, PackedPoints, distance, pack_points, query_row

FAMILIES = ("gaussian",)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family, bandwidth and the point kind it applies to."""

    family: str
    bandwidth: float
    space: str

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if not self.bandwidth > 0:
            raise ValueError("kernel bandwidth must be positive")
        if self.space not in ("euclidean", "curve", "quantile"):
            raise ValueError(f"unknown space tag {self.space!r}")


def gaussian_kernel(bandwidth: float, space: str) -> KernelSpec:
    return KernelSpec("gaussian", float(bandwidth), space)


def _check_space(spec: KernelSpec, packed: PackedPoints) -> None:
    if packed.kind != spec.space:
        raise MismatchError(f"kernel over {spec.space!r} applied to {packed.kind!r} points")


def eval_kernel(spec: KernelSpec, a: HilbertPoint, b: HilbertPoint) -> float:
    """k(a, b) in (0, 1], equal to 1 iff the points coincide."""
    if a.kind != spec.space:
        raise MismatchError(f"kernel over {spec.space!r} applied to {a.kind!r} points")
    d = distance(a, b)
    return float(np.exp(-spec.bandwidth * d * d))


def gram(spec: KernelSpec, points: Sequence[HilbertPoint] | PackedPoints) -> np.ndarray:
    """Symmetric n x n kernel matrix with unit diagonal; PSD up to rounding."""
    packed = pack_points(points)
    _check_space(spec, packed)
    return backend.gram_gaussian(packed.values, packed.weights, spec.bandwidth)


def cross_gram(spec: KernelSpec, points: Sequence[HilbertPoint] | PackedPoints,
               x: HilbertPoint) -> np.ndarray:
    """Vector (k(points[i], x))_i."""
    packed = pack_points(points)
    _check_space(spec, packed)
    row = query_row(packed, x)
    return backend.cross_gaussian(packed.values, row, packed.weights, spec.bandwidth)[:, 0]


def cross_gram_many(spec: KernelSpec, points: PackedPoints, queries: PackedPoints) -> np.ndarray:
    """Kernel matrix (n_points x n_queries) between two packed sets."""
    _check_space(spec, points)
    _check_space(spec, queries)
    if points.dim != queries.dim:
        raise MismatchError("query points have a different dimension than the reference set")
    return backend.cross_gaussian(points.values, queries.values, points.weights, spec.bandwidth)


def pairwise_sq_dists(points: PackedPoints, queries: PackedPoints | None = None) -> np.ndarray:
    """Squared distances between packed sets (within one set when queries is None)."""
    if queries is None:
        queries = points
    return backend.pairwise_sq_dists(points.values, queries.values, points.weights)


def _offdiag_sq_dists(packed: PackedPoints) -> np.ndarray:
    d2 = pairwise_sq_dists(packed)
    iu = np.triu_indices(len(packed), k=1)
    return d2[iu]


def median_heuristic(points: Sequence[HilbertPoint] | PackedPoints) -> float:
    """Bandwidth sigma = 1 / median of pairwise squared distances.

    All distinct (unordered) pairs enter the median, duplicated points
    included; a zero median means the sample is degenerate and raises.
    """
    packed = pack_points(points)
    if len(packed) < 2:
        raise ValueError("median heuristic needs at least two points")
    med = float(np.median(_offdiag_sq_dists(packed)))
    if med <= 0.0:
        raise FitError("degenerate sample: median pairwise squared distance is zero")
    return 1.0 / med


def median_pairwise_distance(points: Sequence[HilbertPoint] | PackedPoints) -> float:
    """Median pairwise distance, used as the conditional-CDF bandwidth default."""
    packed = pack_points(points)
    if len(packed) < 2:
        raise ValueError("need at least two points")
    med = float(np.median(np.sqrt(_offdiag_sq_dists(packed))))
    if med <= 0.0:
        raise FitError("degenerate sample: median pairwise distance is zero")
    return med
