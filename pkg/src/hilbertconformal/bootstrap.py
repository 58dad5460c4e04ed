"""Conditional tolerance regions in probability via the Efron bootstrap.

Each bootstrap resample of the data refits the configured prediction-region
model and records its conformal threshold; the adjusted threshold is an
order statistic of those bootstrap thresholds.  Two directions are exposed:

``paper-upper``
    the ceil(gamma*B)-th smallest bootstrap threshold (the empirical
    distribution of thresholds evaluates to gamma there); a larger
    threshold shrinks the region.
``conservative-lower``
    the ceil((1-gamma)*B)-th smallest threshold, enlarging the region so
    that the conditional content reaches the target with confidence near
    gamma.  This is the direction the verification harness gates on.

``confidence_study`` measures, over Monte Carlo replicates, how often the
conditional content P(Y in region | X = x) actually reaches the target.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ._parallel import ordered_map
from .config import StudyConfig
from .conformal import (HeteroscedasticModel, HomoscedasticModel, RegionPredicate,
                        conformal_threshold, predict_region_hetero, predict_region_homo)
from .errors import FitError
from .evaluation import derive_seed, fit_model
from .hilbert import HilbertPoint
from .simgen import Dataset, make_dataset, sample_conditional

logger = logging.getLogger(__name__)

DIRECTIONS = ("paper-upper", "conservative-lower")


def adjusted_quantile(thresholds: np.ndarray, gamma: float, direction: str) -> float:
    """Order statistic of the bootstrap thresholds selected by the direction."""
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie strictly between 0 and 1")
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    t = np.sort(np.asarray(thresholds, dtype=float))
    b = len(t)
    level = gamma if direction == "paper-upper" else 1.0 - gamma
    # nudge guards against float error right at integer boundaries
    idx = max(1, min(b, math.ceil(level * b - 1e-9)))
    return float(t[idx - 1])


@dataclass(frozen=True)
class BootstrapToleranceRegion:
    content: float
    gamma: float
    direction: str
    n_boot: int
    thresholds: np.ndarray
    adjusted_threshold: float
    base_threshold: float
    predicate: RegionPredicate

    def score(self, y: HilbertPoint) -> float:
        return self.predicate.score(y)

    def contains(self, y: HilbertPoint) -> bool:
        return self.predicate.score(y) >= self.adjusted_threshold

    def contains_many(self, ys) -> np.ndarray:
        return self.predicate.score_many(ys) >= self.adjusted_threshold


def _base_predicate(model, x: HilbertPoint, miscoverage: float) -> RegionPredicate:
    if isinstance(model, HeteroscedasticModel):
        return predict_region_hetero(model, x, miscoverage)
    if isinstance(model, HomoscedasticModel):
        return predict_region_homo(model, x, miscoverage)
    raise FitError(f"bootstrap tolerance needs a conformal model, got {type(model).__name__}")


def _calibration_scores(model) -> np.ndarray:
    if isinstance(model, HeteroscedasticModel):
        return model.conformity_scores
    return model.calibration_scores


def _bootstrap_thresholds(data: Dataset, config: StudyConfig, miscoverage: float,
                          base_model, seed: int) -> np.ndarray:
    n = len(data.x)
    thresholds = np.empty(config.n_boot)
    for b in range(config.n_boot):
        rng = np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFF, b]))
        try:
            if config.refit == "calibration-only":
                scores = _calibration_scores(base_model)
                resampled = np.sort(rng.choice(scores, size=len(scores), replace=True))
                thresholds[b] = conformal_threshold(resampled, miscoverage)
            else:
                idx = rng.integers(0, n, size=n)
                boot = Dataset([data.x[i] for i in idx], [data.y[i] for i in idx],
                               data.dgp, data.seed, data.meta)
                model = fit_model(config, boot, seed=derive_seed(seed, b, 1))
                thresholds[b] = model.threshold(miscoverage)
        except Exception as exc:
            raise FitError(f"bootstrap replicate {b} failed: {exc}") from exc
    return thresholds


def bootstrap_tolerance(data: Dataset, config: StudyConfig, *, content: float,
                        gamma: float | None = None, x: HilbertPoint,
                        direction: str | None = None,
                        seed: int | None = None) -> BootstrapToleranceRegion:
    """Fit the conditional tolerance-in-probability region at predictor x.

    ``content`` is the target conditional probability mass (the underlying
    prediction regions are fitted at miscoverage 1 - content); ``gamma`` the
    confidence over the sampling of the data.
    """
    if not 0.0 < content < 1.0:
        raise ValueError("content must lie strictly between 0 and 1")
    gamma = config.gamma if gamma is None else gamma
    direction = config.direction if direction is None else direction
    seed = config.seed if seed is None else seed
    if config.n_boot < 50:
        logger.warning("bootstrap replicate count %d is below the recommended 50",
                       config.n_boot)
    miscoverage = 1.0 - content
    base_model = fit_model(config, data, seed=derive_seed(seed, 0))
    thresholds = _bootstrap_thresholds(data, config, miscoverage, base_model,
                                       derive_seed(seed, 1))
    adjusted = adjusted_quantile(thresholds, gamma, direction)
    predicate = _base_predicate(base_model, x, miscoverage)
    return BootstrapToleranceRegion(
        content=float(content), gamma=float(gamma), direction=direction,
        n_boot=config.n_boot, thresholds=thresholds, adjusted_threshold=adjusted,
        base_threshold=predicate.threshold,
        predicate=RegionPredicate(miscoverage, adjusted, predicate.score_many))


# ---------------------------------------------------------------------------
# Monte Carlo verification harness


@dataclass
class BootstrapConfidenceReport:
    content_target: float
    gamma: float
    replicates: int
    contents: dict  # direction -> per-replicate conditional contents

    def achieved(self, direction: str) -> float:
        vals = self.contents[direction]
        return float(np.mean(vals >= self.content_target))


def _confidence_replicate(args):
    config, content, gamma, x, fresh_size, seed, rep = args
    data = make_dataset(config.dgp, config.n, derive_seed(seed, rep, 0), config.m)
    miscoverage = 1.0 - content
    base_model = fit_model(config, data, seed=derive_seed(seed, rep, 1))
    thresholds = _bootstrap_thresholds(data, config, miscoverage, base_model,
                                       derive_seed(seed, rep, 2))
    predicate = _base_predicate(base_model, x, miscoverage)
    fresh = sample_conditional(config.dgp, x, fresh_size, derive_seed(seed, rep, 3),
                               config.m)
    scores = predicate.score_many(fresh)
    out = {}
    for direction in DIRECTIONS:
        adj = adjusted_quantile(thresholds, gamma, direction)
        out[direction] = float(np.mean(scores >= adj))
    return out


def confidence_study(config: StudyConfig, *, content: float, gamma: float | None = None,
                     x: HilbertPoint, replicates: int = 200, fresh_size: int = 2000,
                     seed: int | None = None) -> BootstrapConfidenceReport:
    """Estimate P(conditional content >= target) for both direction modes.

    Both directions share each replicate's bootstrap thresholds, so their
    achieved confidences are directly comparable.
    """
    gamma = config.gamma if gamma is None else gamma
    seed = config.seed if seed is None else seed
    args = [(config, content, gamma, x, fresh_size, seed, rep) for rep in range(replicates)]
    results = ordered_map(_confidence_replicate, args, workers=config.effective_workers())
    contents = {d: np.full(replicates, np.nan) for d in DIRECTIONS}
    failures = 0
    for rep, res in enumerate(results):
        if isinstance(res, Exception):
            failures += 1
            logger.warning("confidence replicate %d failed: %s", rep, res)
            continue
        for d in DIRECTIONS:
            contents[d][rep] = res[d]
    if failures > 0.1 * replicates:
        raise FitError(f"confidence study failed: {failures} of {replicates} replicates errored")
    contents = {d: v[~np.isnan(v)] for d, v in contents.items()}
    return BootstrapConfidenceReport(float(content), float(gamma), replicates, contents)


def achieved_confidence(config: StudyConfig, *, content: float, gamma: float | None = None,
                        x: HilbertPoint, direction: str | None = None,
                        replicates: int = 200, fresh_size: int = 2000,
                        seed: int | None = None) -> float:
    """Fraction of Monte Carlo replicates whose conditional content reaches the target."""
    direction = config.direction if direction is None else direction
    report = confidence_study(config, content=content, gamma=gamma, x=x,
                              replicates=replicates, fresh_size=fresh_size, seed=seed)
    return report.achieved(direction)
