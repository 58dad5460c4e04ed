import math

import numpy as np
import pytest
from scipy.stats import kstest

from hilbertconformal.conformal import (HeteroscedasticModel, conditional_cdf,
                                        conformal_threshold, fit_heteroscedastic,
                                        fit_homoscedastic, predict_region_hetero,
                                        predict_region_homo, split_three, split_two)
from hilbertconformal.depth import depth_conditional
from hilbertconformal.errors import FitError
from hilbertconformal.hilbert import euclidean_point, pack_points
from hilbertconformal.simgen import gen_setting1, gen_setting2


class TestThreshold:
    def test_midpoint_enumeration(self):
        # k = floor(0.5 * 5) = 2 -> second smallest
        assert conformal_threshold(np.array([1.0, 2.0, 3.0, 4.0]), 0.5) == 2.0

    def test_small_sample_degenerates_to_all_inclusive(self):
        assert conformal_threshold(np.array([1.0, 2.0, 3.0, 4.0]), 0.05) == -math.inf

    def test_alpha_near_one_keeps_only_top_scores(self):
        assert conformal_threshold(np.array([1.0, 2.0, 3.0, 4.0]), 0.99) == 4.0

    def test_alpha_range(self):
        with pytest.raises(ValueError):
            conformal_threshold(np.array([1.0]), 1.0)

    def test_monotone_transform_commutes(self):
        # the threshold is an order statistic, so region decisions are
        # invariant under increasing transforms applied to all scores
        rng = np.random.default_rng(0)
        scores = np.sort(rng.normal(size=23))
        for alpha in (0.1, 0.5, 0.9):
            tau = conformal_threshold(scores, alpha)
            tau_t = conformal_threshold(np.exp(scores), alpha)
            assert tau_t == pytest.approx(math.exp(tau), rel=1e-12)


class TestSplits:
    def test_two_way_sizes(self):
        rng = np.random.default_rng(1)
        train, cal = split_two(10, 0.5, rng)
        assert len(train) == 5 and len(cal) == 5
        assert sorted(np.concatenate([train, cal])) == list(range(10))

    def test_three_way_sizes(self):
        rng = np.random.default_rng(2)
        a, b, c = split_three(9, (1 / 3, 1 / 3, 1 / 3), rng)
        assert (len(a), len(b), len(c)) == (3, 3, 3)

    def test_empty_split_raises(self):
        rng = np.random.default_rng(3)
        with pytest.raises(FitError):
            split_two(3, 0.01, rng)
        with pytest.raises(FitError):
            split_three(4, (0.5, 0.45, 0.05), rng)

    def test_bad_fractions(self):
        rng = np.random.default_rng(4)
        with pytest.raises(ValueError):
            split_three(30, (0.5, 0.4, 0.3), rng)


class TestHomoscedastic:
    def test_pipeline_smoke(self):
        data = gen_setting2(50, 3)
        model = fit_homoscedastic(data.x, data.y, seed=9)
        assert model.n_train == 25 and model.n_calibration == 25
        assert model.calibration_scores.shape == (25,)
        assert np.all(np.isfinite(model.calibration_scores))
        assert np.all(np.diff(model.calibration_scores) >= 0)

    def test_same_seed_reproduces_scores(self):
        data = gen_setting2(40, 4)
        m1 = fit_homoscedastic(data.x, data.y, seed=5)
        m2 = fit_homoscedastic(data.x, data.y, seed=5)
        assert np.array_equal(m1.calibration_scores, m2.calibration_scores)

    def test_tiny_alpha_accepts_everything(self):
        data = gen_setting2(12, 5)
        model = fit_homoscedastic(data.x, data.y, seed=1)
        region = predict_region_homo(model, data.x[0], 0.01)
        assert region.threshold == -math.inf
        assert all(region.contains(y) for y in data.y)

    def test_membership_monotone_in_score(self):
        data = gen_setting2(60, 6)
        model = fit_homoscedastic(data.x, data.y, seed=2)
        x = data.x[0]
        region = predict_region_homo(model, x, 0.4)
        ys = data.y[:20]
        scores = region.score_many(ys)
        members = region.contains_many(ys)
        for i in range(len(ys)):
            for j in range(len(ys)):
                if scores[i] <= scores[j] and members[i]:
                    assert members[j]

    def test_nested_in_alpha(self):
        data = gen_setting2(80, 7)
        model = fit_homoscedastic(data.x, data.y, seed=3)
        x = data.x[0]
        inner_region = predict_region_homo(model, x, 0.5)
        outer_region = predict_region_homo(model, x, 0.1)
        members_inner = inner_region.contains_many(data.y)
        members_outer = outer_region.contains_many(data.y)
        assert np.all(members_outer >= members_inner)

    def test_region_scores_match_depth(self):
        data = gen_setting2(30, 8)
        model = fit_homoscedastic(data.x, data.y, seed=4)
        x, y = data.x[1], data.y[2]
        region = predict_region_homo(model, x, 0.3)
        assert region.score(y) == pytest.approx(
            depth_conditional(model.cme, x, y), abs=1e-12)


def two_point_bank_model():
    # minimal hand-built model: bank at a single predictor with depths {1, 3}
    xp = pack_points([euclidean_point([0.0])] * 2)
    dummy_cme = None
    return HeteroscedasticModel(
        cme=dummy_cme, bank_x=xp, bank_scores=np.array([1.0, 3.0]),
        cdf_bandwidth=1.0, conformity_scores=np.array([0.5]),
        n_train=0, n_bank=2, n_calibration=1)


class TestConditionalCDF:
    def test_two_point_hand_computation(self):
        model = two_point_bank_model()
        x = euclidean_point([0.0])
        assert conditional_cdf(model, x, 2.0) == pytest.approx(0.5, abs=1e-12)

    def test_below_and_above_bank(self):
        model = two_point_bank_model()
        x = euclidean_point([0.0])
        assert conditional_cdf(model, x, 0.5) == 0.0
        assert conditional_cdf(model, x, 3.0) == 1.0  # right-continuous: <= r
        assert conditional_cdf(model, x, 10.0) == 1.0

    def test_monotone_and_right_continuous(self):
        model = two_point_bank_model()
        x = euclidean_point([0.0])
        rs = np.linspace(0.0, 4.0, 41)
        vals = [conditional_cdf(model, x, r) for r in rs]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        assert conditional_cdf(model, x, 1.0) == 0.5  # jump attained at r = 1

    def test_underflow_falls_back_to_ecdf(self, caplog):
        model = two_point_bank_model()
        x_far = euclidean_point([1e6])  # NW weights underflow to zero
        with caplog.at_level("WARNING"):
            v = conditional_cdf(model, x_far, 2.0)
        assert v == pytest.approx(0.5)
        assert any("fell back" in r.message for r in caplog.records)


class TestHeteroscedastic:
    def test_three_way_split_sizes(self):
        data = gen_setting2(9, 9)
        model = fit_heteroscedastic(data.x, data.y, fractions=(1 / 3, 1 / 3, 1 / 3),
                                    kernel_x=1.0, kernel_y=1.0, seed=1)
        assert (model.n_train, model.n_bank, model.n_calibration) == (3, 3, 3)

    def test_identical_responses_give_degenerate_cdf(self):
        # every response kernel value is exactly 1, so each bank depth is the
        # weight sum at its own predictor and the CDF saturates at their max
        rng = np.random.default_rng(10)
        xs = [euclidean_point([v]) for v in rng.uniform(0, 5, 30)]
        ys = [euclidean_point([2.0])] * 30
        model = fit_heteroscedastic(xs, ys, kernel_x=1.0, kernel_y=1.0, seed=0)
        from hilbertconformal.depth import cme_weights_many
        weight_sums = cme_weights_many(model.cme, model.bank_x).sum(axis=0)
        assert np.allclose(model.bank_scores, weight_sums, atol=1e-12)
        x = xs[0]
        top = float(model.bank_scores.max())
        assert conditional_cdf(model, x, top) == 1.0
        assert conditional_cdf(model, x, float(model.bank_scores.min()) - 1e-9) == 0.0

    def test_conformity_scores_in_unit_interval(self):
        data = gen_setting1(200, 11)
        model = fit_heteroscedastic(data.x, data.y, seed=0)
        s = model.conformity_scores
        assert np.all((s >= 0) & (s <= 1))
        assert np.all(np.diff(s) >= 0)

    def test_conformity_scores_near_uniform(self):
        # probability-integral-transform oracle: with a good conditional CDF
        # the held-out scores are approximately U(0, 1)
        data = gen_setting1(1000, 42)
        model = fit_heteroscedastic(data.x, data.y, seed=0)
        assert kstest(model.conformity_scores, "uniform").statistic <= 0.1

    def test_membership_monotone_in_depth(self):
        data = gen_setting1(150, 12)
        model = fit_heteroscedastic(data.x, data.y, seed=1)
        x = data.x[0]
        region = predict_region_hetero(model, x, 0.2)
        ys = data.y[:30]
        depths = [depth_conditional(model.cme, x, y) for y in ys]
        scores = region.score_many(ys)
        order = np.argsort(depths)
        assert np.all(np.diff(scores[order]) >= -1e-12)

    def test_nested_in_alpha(self):
        data = gen_setting1(150, 13)
        model = fit_heteroscedastic(data.x, data.y, seed=2)
        x = data.x[3]
        wide = predict_region_hetero(model, x, 0.05)
        narrow = predict_region_hetero(model, x, 0.5)
        assert np.all(wide.contains_many(data.y) >= narrow.contains_many(data.y))


class TestConsistency:
    def test_conditional_coverage_error_shrinks_with_n(self):
        # qualitative desk-scale check: the estimated region approaches the
        # population one, so the conditional-coverage error falls in n
        from hilbertconformal.config import StudyConfig
        from hilbertconformal.evaluation import run_study
        medians = []
        for n in (250, 1000, 4000):
            cfg = StudyConfig(dgp="setting2", n=n, algorithm="homo", alphas=(0.2,),
                              replicates=20, n_eval=2000, seed=31, workers=2)
            report = run_study(cfg)
            medians.append(float(np.nanmedian(report.l2_error[:, 0])))
        assert medians[0] > medians[1] > medians[2]


class TestMarginalValidity:
    @pytest.mark.parametrize("fitter,alpha", [(fit_homoscedastic, 0.2),
                                              (fit_heteroscedastic, 0.2)])
    def test_coverage_over_replicates(self, fitter, alpha):
        # one fresh pair per exchangeable replicate
        reps, n = 250, 60
        hits = 0
        for rep in range(reps):
            seed = int(np.random.SeedSequence([77, rep]).generate_state(1)[0])
            data = gen_setting2(n + 1, seed)
            model = fitter(data.x[:n], data.y[:n], seed=rep)
            scores = model.score_pairs(pack_points(data.x[n:]), pack_points(data.y[n:]))
            hits += int(scores[0] >= model.threshold(alpha))
        coverage = hits / reps
        assert coverage >= 1 - alpha - 2 * math.sqrt(alpha * (1 - alpha) / reps)
