"""Kernel-mean-embedding depth, unconditional and conditional.

The unconditional depth of y under a reference sample Y_1..Y_n is the
empirical kernel mean embedding evaluated at y,

    D(y) = (1/n) sum_i k_Y(y, Y_i),

which lies in (0, 1] for the Gaussian kernel.  The conditional version
replaces the uniform 1/n weights by kernel-ridge weights

    w(x) = (K_X + n*lambda*I)^{-1} k_x,       D(x, y) = sum_i w_i(x) k_Y(Y_i, y),

the closed-form conditional mean embedding.  Conditional depths are signed
(weights may be negative) and are deliberately not clamped: downstream
consumers only use their ranks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import FitError
from .hilbert import HilbertPoint, PackedPoints, pack_points
from .kernels import KernelSpec, cross_gram_many, gram


def _pack_queries(reference: PackedPoints, queries) -> PackedPoints:
    if isinstance(queries, HilbertPoint):
        queries = [queries]
    return pack_points(queries)


@dataclass(frozen=True)
class EmpiricalKME:
    """Empirical kernel mean embedding of a response sample."""

    reference: PackedPoints
    kernel: KernelSpec


def fit_kme(sample: Sequence[HilbertPoint] | PackedPoints, kernel: KernelSpec) -> EmpiricalKME:
    return EmpiricalKME(pack_points(sample), kernel)


def depth_unconditional(kme: EmpiricalKME, y: HilbertPoint) -> float:
    """(1/n) sum_i k_Y(y, Y_i)."""
    return float(depth_unconditional_many(kme, [y])[0])


def depth_unconditional_many(kme: EmpiricalKME, ys) -> np.ndarray:
    packed = _pack_queries(kme.reference, ys)
    k = cross_gram_many(kme.kernel, kme.reference, packed)
    return k.mean(axis=0)


@dataclass(frozen=True)
class ConditionalKME:
    """Fitted conditional kernel mean embedding.

    Caches the Cholesky factor of (K_X + n*lambda*I); each weight query is a
    pair of triangular solves (O(n^2)).
    """

    x_train: PackedPoints
    y_train: PackedPoints
    kernel_x: KernelSpec
    kernel_y: KernelSpec
    ridge: float
    chol: np.ndarray
    chol_lower: bool

    def __len__(self) -> int:
        return len(self.x_train)


def fit_cme(x: Sequence[HilbertPoint] | PackedPoints, y: Sequence[HilbertPoint] | PackedPoints,
            kernel_x: KernelSpec, kernel_y: KernelSpec, ridge: float = 1e-3) -> ConditionalKME:
    """Fit the closed-form CME by factorizing (K_X + n*lambda*I)."""
    if not ridge > 0:
        raise ValueError("ridge parameter must be positive")
    xp = pack_points(x)
    yp = pack_points(y)
    if len(xp) != len(yp):
        raise ValueError("predictor and response samples must have equal length")
    n = len(xp)
    system = gram(kernel_x, xp)
    system[np.diag_indices(n)] += n * ridge
    try:
        c, lower = cho_factor(system, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise FitError(f"Cholesky factorization of the ridge system failed: {exc}") from exc
    return ConditionalKME(xp, yp, kernel_x, kernel_y, float(ridge), c, lower)


def cme_weights(cme: ConditionalKME, x: HilbertPoint) -> np.ndarray:
    """Ridge weights w(x) = (K_X + n*lambda*I)^{-1} k_x."""
    return cme_weights_many(cme, [x])[:, 0]


def cme_weights_many(cme: ConditionalKME, xs) -> np.ndarray:
    """Weight matrix (n_train x n_queries) for a batch of query predictors."""
    packed = _pack_queries(cme.x_train, xs)
    kx = cross_gram_many(cme.kernel_x, cme.x_train, packed)
    return cho_solve((cme.chol, cme.chol_lower), kx, check_finite=False)


def depth_conditional(cme: ConditionalKME, x: HilbertPoint, y: HilbertPoint) -> float:
    """sum_i w_i(x) k_Y(Y_i, y); signed, rank-valid."""
    return float(depth_conditional_pairs(cme, [x], [y])[0])


def depth_conditional_pairs(cme: ConditionalKME, xs, ys) -> np.ndarray:
    """Depths of paired queries (x_i, y_i); one value per pair."""
    w = cme_weights_many(cme, xs)
    yq = _pack_queries(cme.y_train, ys)
    ky = cross_gram_many(cme.kernel_y, cme.y_train, yq)
    if w.shape[1] != ky.shape[1]:
        raise ValueError("paired queries require equally many predictors and responses")
    return np.einsum("iq,iq->q", w, ky)


def depth_conditional_profile(cme: ConditionalKME, x: HilbertPoint, ys) -> np.ndarray:
    """Depths of many candidate responses at one fixed predictor."""
    w = cme_weights_many(cme, [x])[:, 0]
    yq = _pack_queries(cme.y_train, ys)
    ky = cross_gram_many(cme.kernel_y, cme.y_train, yq)
    return w @ ky
