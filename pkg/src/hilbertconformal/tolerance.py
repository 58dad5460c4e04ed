"""Unconditional alpha-expectation tolerance regions from depth spacings.

The region keeps the r_n deepest sample points, r_n = ceil((n+1)*alpha), and
admits any point whose depth reaches the r_n-th largest in-sample depth.
With a sample-independent depth the content of the region is
Beta(r_n, n+1-r_n) distributed with mean r_n/(n+1); with the in-sample KME
depth this holds approximately (the mean is what the tests target).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .depth import EmpiricalKME, depth_unconditional, depth_unconditional_many, fit_kme
from .hilbert import HilbertPoint, PackedPoints
from .kernels import KernelSpec


@dataclass(frozen=True)
class ToleranceRegion:
    kme: EmpiricalKME
    threshold: float
    rank: int
    alpha: float
    sample_depths: np.ndarray  # descending


def tolerance_rank(n: int, alpha: float) -> int:
    """r_n = ceil((n+1)*alpha); raises when the sample is too small."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    # nudge guards against float error right at integer boundaries
    r = math.ceil((n + 1) * alpha - 1e-9)
    if r > n:
        raise ValueError(
            f"sample too small for requested content: r_n = {r} exceeds n = {n}"
        )
    return max(r, 1)


def fit_tolerance(sample: Sequence[HilbertPoint] | PackedPoints, kernel: KernelSpec,
                  alpha: float) -> ToleranceRegion:
    """Fit the depth-spacing tolerance region at content level alpha."""
    kme = fit_kme(sample, kernel)
    n = len(kme.reference)
    r = tolerance_rank(n, alpha)
    depths = depth_unconditional_many(kme, kme.reference)
    depths = np.sort(depths)[::-1]
    return ToleranceRegion(kme, float(depths[r - 1]), r, float(alpha), depths)


def region_contains(region: ToleranceRegion, y: HilbertPoint) -> bool:
    return depth_unconditional(region.kme, y) >= region.threshold


def region_contains_many(region: ToleranceRegion, ys) -> np.ndarray:
    return depth_unconditional_many(region.kme, ys) >= region.threshold


def content_estimate(region: ToleranceRegion, fresh: Sequence[HilbertPoint] | PackedPoints) -> float:
    """Fraction of fresh points inside the region."""
    inside = region_contains_many(region, fresh)
    if inside.size == 0:
        raise ValueError("empty evaluation sample")
    return float(inside.mean())
