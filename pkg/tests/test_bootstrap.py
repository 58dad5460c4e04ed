import numpy as np
import pytest

from hilbertconformal.bootstrap import (adjusted_quantile, bootstrap_tolerance,
                                        confidence_study)
from hilbertconformal.config import StudyConfig
from hilbertconformal.errors import FitError
from hilbertconformal.hilbert import euclidean_point
from hilbertconformal.simgen import Dataset, gen_setting2


class TestAdjustedQuantile:
    def test_order_statistic_enumeration(self):
        t = np.array([0.1, 0.2, 0.3, 0.4, 0.5])
        assert adjusted_quantile(t, 0.8, "paper-upper") == 0.4  # ceil(4)-th smallest

    def test_single_replicate_any_gamma(self):
        t = np.array([0.37])
        for gamma in (0.1, 0.5, 0.9):
            assert adjusted_quantile(t, gamma, "paper-upper") == 0.37
            assert adjusted_quantile(t, gamma, "conservative-lower") == 0.37

    def test_nondecreasing_in_gamma(self):
        rng = np.random.default_rng(0)
        t = rng.normal(size=40)
        qs = [adjusted_quantile(t, g, "paper-upper") for g in np.linspace(0.05, 0.95, 10)]
        assert all(b >= a for a, b in zip(qs, qs[1:]))

    def test_lower_direction_is_below_upper(self):
        rng = np.random.default_rng(1)
        t = rng.normal(size=40)
        assert adjusted_quantile(t, 0.9, "conservative-lower") <= \
            adjusted_quantile(t, 0.9, "paper-upper")

    def test_validation(self):
        with pytest.raises(ValueError):
            adjusted_quantile(np.array([1.0]), 1.5, "paper-upper")
        with pytest.raises(ValueError):
            adjusted_quantile(np.array([1.0]), 0.5, "both")


def small_config(**kw):
    defaults = dict(dgp="setting2", n=120, algorithm="homo", n_boot=25, seed=3)
    defaults.update(kw)
    return StudyConfig(**defaults)


class TestBootstrapTolerance:
    def test_reproducible_thresholds(self):
        data = gen_setting2(120, 1)
        cfg = small_config()
        x = euclidean_point([2.5])
        r1 = bootstrap_tolerance(data, cfg, content=0.8, x=x, seed=7)
        r2 = bootstrap_tolerance(data, cfg, content=0.8, x=x, seed=7)
        assert np.array_equal(r1.thresholds, r2.thresholds)
        assert r1.adjusted_threshold == r2.adjusted_threshold

    def test_degenerate_thresholds_reduce_to_plain_region(self):
        data = gen_setting2(120, 2)
        cfg = small_config(refit="calibration-only", n_boot=1)
        x = euclidean_point([2.5])
        region = bootstrap_tolerance(data, cfg, content=0.8, x=x, seed=1)
        # with a single bootstrap threshold the adjusted quantile is that value
        assert region.adjusted_threshold == region.thresholds[0]

    def test_directions_order_regions(self):
        data = gen_setting2(160, 3)
        cfg = small_config(n=160)
        x = euclidean_point([2.0])
        lower = bootstrap_tolerance(data, cfg, content=0.8, x=x,
                                    direction="conservative-lower", seed=5)
        upper = bootstrap_tolerance(data, cfg, content=0.8, x=x,
                                    direction="paper-upper", seed=5)
        assert np.array_equal(lower.thresholds, upper.thresholds)
        assert lower.adjusted_threshold <= upper.adjusted_threshold
        ys = gen_setting2(200, 9).y
        assert np.all(lower.contains_many(ys) >= upper.contains_many(ys))

    def test_calibration_only_resamples_base_scores(self):
        data = gen_setting2(120, 4)
        cfg = small_config(refit="calibration-only", n_boot=40)
        x = euclidean_point([2.5])
        region = bootstrap_tolerance(data, cfg, content=0.8, x=x, seed=2)
        from hilbertconformal.evaluation import fit_model, derive_seed
        base = fit_model(cfg, data, seed=derive_seed(2, 0))
        pool = set(np.round(base.calibration_scores, 12)) | {-np.inf}
        assert set(np.round(region.thresholds, 12)) <= pool

    def test_refit_failure_reports_replicate_index(self):
        # mostly-duplicated predictors: resamples eventually lose the distinct
        # values and the automatic bandwidth degenerates mid-loop
        xs = [euclidean_point([0.0])] * 6 + [euclidean_point([1.0]),
                                             euclidean_point([2.0])]
        ys = [euclidean_point([float(v)]) for v in range(8)]
        data = Dataset(xs, ys, "synthetic", 0)
        cfg = small_config(n=8, n_boot=200, split=0.5)
        with pytest.raises(FitError, match="bootstrap replicate"):
            bootstrap_tolerance(data, cfg, content=0.5, x=xs[0], seed=3)

    def test_content_validation(self):
        data = gen_setting2(120, 5)
        with pytest.raises(ValueError):
            bootstrap_tolerance(data, small_config(), content=1.2,
                                x=euclidean_point([1.0]))


class TestConfidenceStudy:
    def test_vanishing_content_target_is_always_met(self):
        # for targets below every realized content the confidence reaches 1
        cfg = small_config(n=100, n_boot=20, refit="calibration-only")
        report = confidence_study(cfg, content=0.8, gamma=0.9,
                                  x=euclidean_point([2.5]), replicates=10,
                                  fresh_size=400, seed=1)
        contents = report.contents["conservative-lower"]
        assert np.all(contents > 0)
        tiny = 0.5 * contents.min()
        assert np.mean(contents >= tiny) == 1.0

    def test_lower_dominates_upper_on_shared_replicates(self):
        cfg = small_config(n=150, n_boot=30, refit="calibration-only")
        report = confidence_study(cfg, content=0.8, gamma=0.8,
                                  x=euclidean_point([2.5]), replicates=12,
                                  fresh_size=500, seed=4)
        lower = report.contents["conservative-lower"]
        upper = report.contents["paper-upper"]
        assert np.all(lower >= upper)
        assert report.achieved("conservative-lower") >= report.achieved("paper-upper")
