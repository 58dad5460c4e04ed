"""Split-conformal prediction regions over Hilbert-space responses.

Two constructions are provided.

``fit_homoscedastic`` (two-way split)
    The conditional depth D(x, y) itself is the conformity score.  The
    region at level alpha keeps every y whose depth reaches the
    floor(alpha*(n_cal+1))-th smallest calibration depth, which gives
    marginal coverage >= 1 - alpha under exchangeability.

``fit_heteroscedastic`` (three-way split)
    Depths are first re-expressed through an estimate of their conditional
    CDF, g(x, r) = P(depth <= r | X = x), fitted by Nadaraya-Watson
    weighting on the predictor distance over a dedicated calibration bank.
    The resulting scores s = g(X, D(X, Y)) are approximate probability
    integral transforms, so a single scalar threshold adapts the region to
    x-dependent noise.

Both fits are deterministic given the seed; fitted models are immutable and
safe for concurrent queries.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import backend
from .depth import (ConditionalKME, cme_weights_many, depth_conditional_pairs, fit_cme)
from .errors import FitError
from .hilbert import HilbertPoint, PackedPoints, pack_points
from .kernels import (KernelSpec, cross_gram_many, median_heuristic,
                      median_pairwise_distance, pairwise_sq_dists)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# splits and thresholds


def split_two(n: int, fraction: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    if not 0.0 < fraction < 1.0:
        raise ValueError("split fraction must lie strictly between 0 and 1")
    n_train = int(round(n * fraction))
    if n_train < 1 or n - n_train < 1:
        raise FitError(f"split of {n} pairs at fraction {fraction} leaves an empty part")
    perm = rng.permutation(n)
    return perm[:n_train], perm[n_train:]


def split_three(n: int, fractions: Sequence[float],
                rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    f = np.asarray(fractions, dtype=float)
    if f.shape != (3,) or np.any(f <= 0) or abs(f.sum() - 1.0) > 1e-8:
        raise ValueError("need three positive split fractions summing to 1")
    n1 = int(round(n * f[0]))
    n2 = int(round(n * f[1]))
    n3 = n - n1 - n2
    if min(n1, n2, n3) < 1:
        raise FitError(f"three-way split of {n} pairs at {tuple(f)} leaves an empty part")
    perm = rng.permutation(n)
    return perm[:n1], perm[n1:n1 + n2], perm[n1 + n2:]


def conformal_threshold(scores: np.ndarray, alpha: float) -> float:
    """Finite-sample conformal threshold on sorted-ascending scores.

    Returns the k-th smallest score with k = floor(alpha * (n + 1)), or -inf
    when k < 1 (the region then contains everything).  Including y whenever
    score(y) >= threshold yields marginal coverage >= 1 - alpha.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    n = len(scores)
    # nudge guards against float error right at integer boundaries
    k = math.floor(alpha * (n + 1) + 1e-9)
    if k < 1:
        return -math.inf
    return float(scores[min(k, n) - 1])


def _resolve_kernel(spec, auto_points: PackedPoints, space: str,
                    sharpen: bool = False) -> KernelSpec:
    """Materialize a kernel argument: spec, explicit bandwidth, or 'auto'.

    Automatic predictor bandwidths are sharpened by n^(2/5) (lengthscale
    ~ n^(-1/5)) so the conditional embedding localizes as training grows;
    the plain median heuristic badly over-smooths strongly nonlinear
    regressions.  Response kernels keep the plain median heuristic: they fix
    the depth geometry and are not an estimator bandwidth.
    """
    if isinstance(spec, KernelSpec):
        return spec
    if spec is None or spec == "auto":
        sigma = median_heuristic(auto_points)
        if sharpen:
            sigma *= len(auto_points) ** 0.4
        return KernelSpec("gaussian", sigma, space)
    if spec == "median":
        return KernelSpec("gaussian", median_heuristic(auto_points), space)
    return KernelSpec("gaussian", float(spec), space)


# ---------------------------------------------------------------------------
# region predicate


@dataclass(frozen=True)
class RegionPredicate:
    """Membership test {y : score(y) >= threshold} for a fixed x and alpha.

    Regions from one fitted model are nested: smaller alpha gives a smaller
    threshold on the same score function, hence a larger region.
    """

    alpha: float
    threshold: float
    score_many: Callable[[Sequence[HilbertPoint] | PackedPoints], np.ndarray]

    def score(self, y: HilbertPoint) -> float:
        return float(self.score_many([y])[0])

    def contains(self, y: HilbertPoint) -> bool:
        return self.score(y) >= self.threshold

    def contains_many(self, ys) -> np.ndarray:
        return self.score_many(ys) >= self.threshold


# ---------------------------------------------------------------------------
# homoscedastic algorithm (two-way split)


@dataclass(frozen=True)
class HomoscedasticModel:
    cme: ConditionalKME
    calibration_scores: np.ndarray  # sorted ascending
    n_train: int
    n_calibration: int

    def threshold(self, alpha: float) -> float:
        return conformal_threshold(self.calibration_scores, alpha)

    def score_pairs(self, xs, ys) -> np.ndarray:
        """Conformity scores (conditional depths) of paired queries."""
        return depth_conditional_pairs(self.cme, xs, ys)


def fit_homoscedastic(x: Sequence[HilbertPoint] | PackedPoints,
                      y: Sequence[HilbertPoint] | PackedPoints,
                      *,
                      split_fraction: float = 0.5,
                      kernel_x: KernelSpec | float | str | None = "auto",
                      kernel_y: KernelSpec | float | str | None = "auto",
                      ridge: float = 1e-3,
                      seed: int = 0) -> HomoscedasticModel:
    """Fit the two-split conformal model.

    Automatic bandwidths use the median heuristic on the training part only,
    so calibration scores stay exchangeable with fresh pairs.
    """
    xp, yp = pack_points(x), pack_points(y)
    if len(xp) != len(yp):
        raise ValueError("predictor and response samples must have equal length")
    rng = np.random.default_rng(seed)
    train_idx, cal_idx = split_two(len(xp), split_fraction, rng)
    x_train, y_train = xp.take(train_idx), yp.take(train_idx)
    kx = _resolve_kernel(kernel_x, x_train, xp.kind, sharpen=True)
    ky = _resolve_kernel(kernel_y, y_train, yp.kind)
    cme = fit_cme(x_train, y_train, kx, ky, ridge)
    scores = depth_conditional_pairs(cme, xp.take(cal_idx), yp.take(cal_idx))
    return HomoscedasticModel(cme, np.sort(scores), len(train_idx), len(cal_idx))


def predict_region_homo(model: HomoscedasticModel, x: HilbertPoint,
                        alpha: float) -> RegionPredicate:
    """Region {y : D(x, y) >= threshold} with the depth weights precomputed."""
    w = cme_weights_many(model.cme, [x])[:, 0]
    cme = model.cme

    def score_many(ys) -> np.ndarray:
        ky = cross_gram_many(cme.kernel_y, cme.y_train, pack_points(_aslist(ys)))
        return w @ ky

    return RegionPredicate(float(alpha), model.threshold(alpha), score_many)


def _aslist(ys):
    if isinstance(ys, (HilbertPoint,)):
        return [ys]
    return ys


# ---------------------------------------------------------------------------
# heteroscedastic algorithm (three-way split)


@dataclass(frozen=True)
class HeteroscedasticModel:
    cme: ConditionalKME
    bank_x: PackedPoints
    bank_scores: np.ndarray  # depth of each bank pair, aligned with bank_x
    cdf_bandwidth: float
    conformity_scores: np.ndarray  # sorted ascending, in [0, 1]
    n_train: int
    n_bank: int
    n_calibration: int

    def threshold(self, alpha: float) -> float:
        return conformal_threshold(self.conformity_scores, alpha)

    def score_pairs(self, xs, ys) -> np.ndarray:
        """Conformity scores g(x_i, D(x_i, y_i)) of paired queries."""
        xq = pack_points(_aslist(xs))
        depths = depth_conditional_pairs(self.cme, xq, ys)
        return conditional_cdf_many(self, xq, depths)


def fit_heteroscedastic(x: Sequence[HilbertPoint] | PackedPoints,
                        y: Sequence[HilbertPoint] | PackedPoints,
                        *,
                        fractions: Sequence[float] = (0.4, 0.3, 0.3),
                        kernel_x: KernelSpec | float | str | None = "auto",
                        kernel_y: KernelSpec | float | str | None = "auto",
                        ridge: float = 1e-3,
                        cdf_bandwidth: float | str | None = "auto",
                        seed: int = 0) -> HeteroscedasticModel:
    """Fit the three-split conformal model with the NW conditional CDF.

    Split 1 fits the CME, split 2 holds the (X_i, depth_i) bank defining the
    conditional CDF, split 3 supplies the conformity scores.  The automatic
    CDF bandwidth is the median pairwise predictor distance within the bank.
    """
    xp, yp = pack_points(x), pack_points(y)
    if len(xp) != len(yp):
        raise ValueError("predictor and response samples must have equal length")
    rng = np.random.default_rng(seed)
    i1, i2, i3 = split_three(len(xp), fractions, rng)
    x_train, y_train = xp.take(i1), yp.take(i1)
    kx = _resolve_kernel(kernel_x, x_train, xp.kind, sharpen=True)
    ky = _resolve_kernel(kernel_y, y_train, yp.kind)
    cme = fit_cme(x_train, y_train, kx, ky, ridge)

    bank_x = xp.take(i2)
    bank_scores = depth_conditional_pairs(cme, bank_x, yp.take(i2))
    if cdf_bandwidth is None or cdf_bandwidth == "auto":
        # median pairwise distance with the canonical CDF-smoothing decay,
        # so the conditional CDF localizes as the bank grows
        h = median_pairwise_distance(bank_x) * len(bank_x) ** (-1.0 / 3.0)
    else:
        h = float(cdf_bandwidth)
    if not h > 0:
        raise FitError("degenerate conditional-CDF bandwidth")

    model = HeteroscedasticModel(cme, bank_x, bank_scores, h,
                                 np.empty(0), len(i1), len(i2), len(i3))
    cal_x = xp.take(i3)
    cal_depths = depth_conditional_pairs(cme, cal_x, yp.take(i3))
    s = conditional_cdf_many(model, cal_x, cal_depths)
    return HeteroscedasticModel(cme, bank_x, bank_scores, h, np.sort(s),
                                len(i1), len(i2), len(i3))


def conditional_cdf(model: HeteroscedasticModel, x: HilbertPoint, r: float) -> float:
    """g(x, r): NW-weighted fraction of bank depths at or below r."""
    xq = pack_points([x])
    return float(conditional_cdf_many(model, xq, np.asarray([r], dtype=float))[0])


def conditional_cdf_many(model: HeteroscedasticModel, xs: PackedPoints,
                         rs: np.ndarray) -> np.ndarray:
    """Vectorized g(x_i, r_i); right-continuous and nondecreasing in r."""
    rs = np.asarray(rs, dtype=float)
    d2 = pairwise_sq_dists(xs, model.bank_x)
    inv_two_h2 = 1.0 / (2.0 * model.cdf_bandwidth ** 2)
    g = backend.nw_cdf(d2, inv_two_h2, model.bank_scores, rs)
    bad = np.isnan(g)
    if bad.any():
        # all NW weights underflowed for these queries
        logger.warning("conditional CDF fell back to the unweighted bank ECDF "
                       "for %d of %d queries", int(bad.sum()), g.size)
        ecdf = np.searchsorted(np.sort(model.bank_scores), rs[bad], side="right")
        g[bad] = ecdf / len(model.bank_scores)
    return g


def predict_region_hetero(model: HeteroscedasticModel, x: HilbertPoint,
                          alpha: float) -> RegionPredicate:
    """Region {y : g(x, D(x, y)) >= threshold} with per-x state precomputed."""
    w = cme_weights_many(model.cme, [x])[:, 0]
    xq = pack_points([x])
    d2 = pairwise_sq_dists(xq, model.bank_x)[0]
    nw = np.exp(-d2 / (2.0 * model.cdf_bandwidth ** 2))
    order = np.argsort(model.bank_scores, kind="stable")
    bank_sorted = model.bank_scores[order]
    cum_w = np.concatenate([[0.0], np.cumsum(nw[order])])
    total = cum_w[-1]
    cme = model.cme

    def score_many(ys) -> np.ndarray:
        ky = cross_gram_many(cme.kernel_y, cme.y_train, pack_points(_aslist(ys)))
        depths = w @ ky
        pos = np.searchsorted(bank_sorted, depths, side="right")
        if total > 0.0:
            return cum_w[pos] / total
        return pos / len(bank_sorted)

    return RegionPredicate(float(alpha), model.threshold(alpha), score_many)
