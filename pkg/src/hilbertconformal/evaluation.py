"""Coverage evaluation and the Monte Carlo study driver.

``run_study`` repeats, with per-replicate derived seeds: generate data, fit
the configured region model, evaluate marginal coverage on fresh pairs and,
for scalar predictors, the L2 conditional-coverage error

    err = integral over the predictor support of (p_hat(x) - nominal)^2 dx,

where p_hat is a Nadaraya-Watson smooth of the coverage indicators and the
nominal level is 1 - alpha for the conformal algorithms (alpha = content for
the tolerance algorithm).  Replicates are independent tasks; assembly is
ordered by replicate index so worker count never changes the report.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ._parallel import ordered_map
from .config import StudyConfig
from .conformal import fit_heteroscedastic, fit_homoscedastic
from .errors import FitError
from .hilbert import pack_points
from .kernels import KernelSpec, median_heuristic
from .simgen import Dataset, make_dataset, predictor_support
from .tolerance import ToleranceRegion, fit_tolerance, region_contains_many

logger = logging.getLogger(__name__)


def derive_seed(master: int, *key: int) -> int:
    """Counter-style derived seed; independent of evaluation order."""
    ss = np.random.SeedSequence([int(master) & 0xFFFFFFFF, *[int(k) for k in key]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


# ---------------------------------------------------------------------------
# coverage metrics


def coverage_indicators(model, fresh: Dataset, alpha: float) -> np.ndarray:
    """Boolean membership indicator of each fresh pair in the level-alpha region."""
    if isinstance(model, ToleranceRegion):
        return region_contains_many(model, fresh.y)
    xs, ys = pack_points(fresh.x), pack_points(fresh.y)
    scores = model.score_pairs(xs, ys)
    return scores >= model.threshold(alpha)


def marginal_coverage(model, fresh: Dataset, alpha: float) -> float:
    """Fraction of fresh pairs whose response falls in the region at its predictor."""
    return float(coverage_indicators(model, fresh, alpha).mean())


def silverman_bandwidth(xs: np.ndarray) -> float:
    return 1.06 * float(np.std(xs)) * len(xs) ** (-0.2)


def conditional_coverage_curve(indicators: np.ndarray, xs: np.ndarray,
                               grid: np.ndarray, bandwidth: float) -> np.ndarray:
    """NW smooth of 0/1 indicators on a scalar predictor grid; values in [0, 1]."""
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    ind = np.asarray(indicators, dtype=np.float64)
    xs = np.asarray(xs, dtype=np.float64)
    diff = grid[:, None] - xs[None, :]
    w = np.exp(-(diff * diff) / (2.0 * bandwidth * bandwidth))
    den = w.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = (w @ ind) / den
    empty = den == 0.0
    if empty.any():
        logger.warning("coverage curve: %d grid points had zero kernel mass; "
                       "using the nearest observation", int(empty.sum()))
        nearest = np.abs(grid[empty, None] - xs[None, :]).argmin(axis=1)
        p[empty] = ind[nearest]
    return p


def l2_coverage_error(grid: np.ndarray, curve: np.ndarray, nominal: float) -> float:
    """Trapezoid integral of (curve - nominal)^2 over the grid's span."""
    dev = np.asarray(curve, dtype=np.float64) - nominal
    return float(np.trapezoid(dev * dev, np.asarray(grid, dtype=np.float64)))


# ---------------------------------------------------------------------------
# study driver


@dataclass
class CoverageReport:
    config: StudyConfig
    alphas: tuple[float, ...]
    nominal: tuple[float, ...]
    coverage: np.ndarray        # (replicates, n_alphas), NaN on failure
    l2_error: np.ndarray | None  # same shape, or None when not computed
    curve_grid: np.ndarray | None
    curves: np.ndarray | None   # (n_alphas, grid) mean over successful replicates
    statuses: list[str]
    seeds: list[int]

    @property
    def n_success(self) -> int:
        return sum(s == "ok" for s in self.statuses)

    def mean_coverage(self) -> np.ndarray:
        return np.nanmean(self.coverage, axis=0)

    def se_coverage(self) -> np.ndarray:
        n = self.n_success
        return np.nanstd(self.coverage, axis=0, ddof=1) / math.sqrt(n) if n > 1 \
            else np.full(len(self.alphas), np.nan)

    def mean_l2(self) -> np.ndarray | None:
        return None if self.l2_error is None else np.nanmean(self.l2_error, axis=0)

    def se_l2(self) -> np.ndarray | None:
        if self.l2_error is None:
            return None
        n = self.n_success
        return np.nanstd(self.l2_error, axis=0, ddof=1) / math.sqrt(n) if n > 1 \
            else np.full(len(self.alphas), np.nan)


def fit_model(config: StudyConfig, data: Dataset, alpha: float | None = None,
              seed: int | None = None):
    """Fit the configured region model on a dataset.

    The tolerance algorithm needs the level at fit time; conformal models are
    level-free until prediction.
    """
    seed = config.seed if seed is None else seed
    if config.algorithm == "tolerance":
        yp = pack_points(data.y)
        kernel = _kernel_from(config.sigma_y, yp)
        return fit_tolerance(yp, kernel, alpha if alpha is not None else config.alphas[0])
    if config.algorithm == "homo":
        return fit_homoscedastic(
            data.x, data.y, split_fraction=config.split,
            kernel_x=config.sigma_x, kernel_y=config.sigma_y,
            ridge=config.ridge, seed=seed)
    if config.algorithm == "hetero":
        return fit_heteroscedastic(
            data.x, data.y, fractions=config.splits,
            kernel_x=config.sigma_x, kernel_y=config.sigma_y,
            ridge=config.ridge, cdf_bandwidth=config.cdf_bandwidth, seed=seed)
    raise FitError(f"run_study does not support algorithm {config.algorithm!r}; "
                   "use the bootstrap interfaces for tolerance-in-probability regions")


def _kernel_from(sigma, packed):
    if isinstance(sigma, str) or sigma is None:
        return KernelSpec("gaussian", median_heuristic(packed), packed.kind)
    return KernelSpec("gaussian", float(sigma), packed.kind)


def _nominal_levels(config: StudyConfig) -> tuple[float, ...]:
    # conformal alpha is a miscoverage level; tolerance alpha is a content level
    if config.algorithm == "tolerance":
        return tuple(config.alphas)
    return tuple(1.0 - a for a in config.alphas)


def _replicate(args):
    config, rep = args
    data_seed = derive_seed(config.seed, rep, 0)
    fit_seed = derive_seed(config.seed, rep, 1)
    eval_seed = derive_seed(config.seed, rep, 2)
    data = make_dataset(config.dgp, config.n, data_seed, config.m)
    fresh = make_dataset(config.dgp, config.n_eval, eval_seed, config.m)

    support = predictor_support(config.dgp)
    want_l2 = support is not None and config.algorithm in ("homo", "hetero")
    grid = np.linspace(support[0], support[1], config.curve_grid) if want_l2 else None

    coverage = np.empty(len(config.alphas))
    l2 = np.full(len(config.alphas), np.nan)
    curves = np.full((len(config.alphas), config.curve_grid), np.nan) if want_l2 else None

    if config.algorithm == "tolerance":
        for j, alpha in enumerate(config.alphas):
            region = fit_model(config, data, alpha=alpha, seed=fit_seed)
            coverage[j] = marginal_coverage(region, fresh, alpha)
        return coverage, l2, curves, data_seed

    model = fit_model(config, data, seed=fit_seed)
    xs_packed, ys_packed = pack_points(fresh.x), pack_points(fresh.y)
    scores = model.score_pairs(xs_packed, ys_packed)
    xs_scalar = xs_packed.values[:, 0] if want_l2 else None
    for j, alpha in enumerate(config.alphas):
        ind = scores >= model.threshold(alpha)
        coverage[j] = float(ind.mean())
        if want_l2:
            h = config.curve_bandwidth
            h = silverman_bandwidth(xs_scalar) if isinstance(h, str) else float(h)
            curve = conditional_coverage_curve(ind, xs_scalar, grid, h)
            curves[j] = curve
            l2[j] = l2_coverage_error(grid, curve, 1.0 - alpha)
    return coverage, l2, curves, data_seed


def run_study(config: StudyConfig) -> CoverageReport:
    """Run the configured Monte Carlo coverage study; fully seed-deterministic."""
    config.validate()
    if config.algorithm == "bootstrap":
        raise FitError("run_study does not support algorithm 'bootstrap'; "
                       "use hilbertconformal.bootstrap.confidence_study")
    n_alphas = len(config.alphas)
    results = ordered_map(_replicate, [(config, rep) for rep in range(config.replicates)],
                          workers=config.effective_workers())

    coverage = np.full((config.replicates, n_alphas), np.nan)
    l2 = np.full((config.replicates, n_alphas), np.nan)
    curve_acc = None
    statuses, seeds, n_ok = [], [], 0
    support = predictor_support(config.dgp)
    want_l2 = support is not None and config.algorithm in ("homo", "hetero")
    grid = np.linspace(support[0], support[1], config.curve_grid) if want_l2 else None

    for rep, res in enumerate(results):
        if isinstance(res, Exception):
            statuses.append(f"failed: {res}")
            seeds.append(derive_seed(config.seed, rep, 0))
            logger.warning("replicate %d failed (seed %d): %s", rep, seeds[-1], res)
            continue
        cov, err, curves, data_seed = res
        coverage[rep] = cov
        l2[rep] = err
        if curves is not None:
            curve_acc = curves if curve_acc is None else curve_acc + curves
        statuses.append("ok")
        seeds.append(data_seed)
        n_ok += 1

    if n_ok < 0.9 * config.replicates:
        raise FitError(f"study failed: only {n_ok} of {config.replicates} replicates succeeded")

    mean_curves = curve_acc / n_ok if curve_acc is not None else None
    return CoverageReport(
        config=config, alphas=tuple(config.alphas), nominal=_nominal_levels(config),
        coverage=coverage, l2_error=l2 if want_l2 else None,
        curve_grid=grid, curves=mean_curves, statuses=statuses, seeds=seeds)
