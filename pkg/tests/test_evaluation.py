import math

import numpy as np
import pytest

from streamlearn.evaluation import (
    ConfusionTally,
    DdmTrace,
    RegressionTally,
    classification_metrics,
    ddm_update,
    empirical_coverage,
    ichart_fit,
    log_loss_term,
    nelson_rule1,
    regression_metrics,
    roc_auc,
)
from streamlearn.exceptions import (
    DegenerateLabelsError,
    DegenerateTargetError,
    InsufficientDataError,
    InvalidInputError,
)


class TestRegressionMetrics:
    def test_reference_table_values(self):
        tally = RegressionTally.from_components(
            n=395, p=5, sse=0.2716, sum_y=0.0, sum_y2=29.1597
        )
        m = regression_metrics(tally)
        assert m.r2 == pytest.approx(0.9907, abs=1e-4)
        assert m.sigma_hat == pytest.approx(0.0264, abs=1e-4)
        assert m.rmse == pytest.approx(0.0262, abs=1e-4)

    def test_perfect_predictions(self):
        tally = RegressionTally(p=1)
        for y in (1.0, 2.0, 3.0):
            tally.update(y, y)
        m = tally.metrics()
        assert m.r2 == 1.0
        assert m.sse == 0.0

    def test_streaming_matches_batch(self):
        rng = np.random.default_rng(0)
        y = rng.normal(size=1000)
        pred = y + rng.normal(0, 0.3, size=1000)
        tally = RegressionTally(p=3)
        for yt, yp in zip(y, pred):
            tally.update(yt, yp)
        sse = float(((y - pred) ** 2).sum())
        sst = float(((y - y.mean()) ** 2).sum())
        m = tally.metrics()
        assert m.sse == pytest.approx(sse, abs=1e-10 * (1 + sse))
        assert m.sst == pytest.approx(sst, abs=1e-8 * (1 + sst))
        assert m.r2 == pytest.approx(1 - sse / sst, abs=1e-10)
        assert m.r2 == 1.0 - m.sse / m.sst  # exact identity on returned values

    def test_insufficient_data(self):
        tally = RegressionTally(p=5)
        tally.update(1.0, 0.0)
        with pytest.raises(InsufficientDataError):
            tally.metrics()

    def test_degenerate_target(self):
        tally = RegressionTally(p=1)
        for _ in range(5):
            tally.update(2.0, 0.0)
        with pytest.raises(DegenerateTargetError):
            tally.metrics()


class TestClassificationMetrics:
    def test_all_correct(self):
        t = ConfusionTally(tp=3, tn=4)
        m = t.metrics()
        assert m.accuracy == 1.0 and m.f1 == 1.0

    def test_hand_case(self):
        m = classification_metrics(ConfusionTally(tp=1, fp=0, tn=0, fn=1))
        assert m.precision == 1.0
        assert m.tpr == 0.5
        assert m.f1 == pytest.approx(2.0 / 3.0)

    def test_f1_consistency(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            t = ConfusionTally(*rng.integers(1, 50, size=4))
            m = t.metrics()
            want = 2 * m.precision * m.tpr / (m.precision + m.tpr)
            assert m.f1 == pytest.approx(want, abs=1e-12)

    def test_undefined_ratios_are_nan(self):
        m = classification_metrics(ConfusionTally(tn=5))
        assert math.isnan(m.tpr) and math.isnan(m.precision) and math.isnan(m.f1)
        assert m.accuracy == 1.0

    def test_empty_rejected(self):
        with pytest.raises(InsufficientDataError):
            classification_metrics(ConfusionTally())

    def test_streaming_updates(self):
        t = ConfusionTally()
        for yt, yp in [(1, 1), (0, 1), (0, 0), (1, 0)]:
            t.update(yt, yp)
        assert (t.tp, t.fp, t.tn, t.fn) == (1, 1, 1, 1)


class TestRocAuc:
    def test_perfect_separation(self):
        auc, thr = roc_auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1])
        assert auc == 1.0
        assert thr == 0.8  # lowest threshold achieving J = 1

    def test_random_scores_near_half(self):
        rng = np.random.default_rng(2)
        scores = rng.random(10_000)
        labels = (rng.random(10_000) < 0.5).astype(float)
        auc, _ = roc_auc(scores, labels)
        assert abs(auc - 0.5) <= 0.02

    def test_matches_pair_counting(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(5, 40))
            scores = np.round(rng.random(n), 1)  # force ties
            labels = (rng.random(n) < 0.5).astype(float)
            if labels.min() == labels.max():
                continue
            auc, _ = roc_auc(scores, labels)
            pos = scores[labels == 1]
            neg = scores[labels == 0]
            wins = sum((p > q) + 0.5 * (p == q) for p in pos for q in neg)
            assert auc == pytest.approx(wins / (len(pos) * len(neg)), abs=1e-12)

    def test_label_reversal_flips_auc(self):
        rng = np.random.default_rng(4)
        scores = rng.random(200)
        labels = (rng.random(200) < 0.4).astype(float)
        a1, _ = roc_auc(scores, labels)
        a2, _ = roc_auc(scores, 1.0 - labels)
        assert a1 + a2 == pytest.approx(1.0, abs=1e-12)

    def test_youden_threshold_is_optimal(self):
        rng = np.random.default_rng(5)
        scores = rng.random(300)
        labels = (rng.random(300) < scores).astype(float)
        _, thr = roc_auc(scores, labels)
        pos, neg = labels == 1, labels == 0

        def j(tau):
            pred = scores >= tau
            return pred[pos].mean() - pred[neg].mean()

        best = max(j(t) for t in np.unique(scores))
        assert j(thr) == pytest.approx(best, abs=1e-12)

    def test_single_class_rejected(self):
        with pytest.raises(DegenerateLabelsError):
            roc_auc([0.1, 0.9], [1, 1])


class TestIChart:
    def test_constant_residuals(self):
        chart = ichart_fit([0.5, 0.5, 0.5])
        assert chart.center == 0.5
        assert chart.upper == chart.lower == 0.5

    def test_alternating_hand_case(self):
        chart = ichart_fit([1.0, -1.0, 1.0, -1.0, 1.0, -1.0])
        assert chart.center == 0.0
        assert chart.upper == pytest.approx(5.32)
        assert chart.lower == pytest.approx(-5.32)

    def test_report_format_fields(self):
        chart = ichart_fit(np.random.default_rng(6).normal(size=100))
        assert chart.lower < chart.center < chart.upper
        assert chart.basis_n == 100

    def test_too_few(self):
        with pytest.raises(InsufficientDataError):
            ichart_fit([1.0])


class TestNelson:
    def test_center_inside(self):
        chart = ichart_fit([1.0, -1.0, 1.0, -1.0])
        assert not nelson_rule1(chart, 0.0)

    def test_above_upper(self):
        chart = ichart_fit([1.0, -1.0, 1.0, -1.0])
        assert nelson_rule1(chart, chart.upper + 1e-9)

    def test_exactly_at_limit_is_inside(self):
        chart = ichart_fit([1.0, -1.0, 1.0, -1.0])
        assert not nelson_rule1(chart, chart.upper)
        assert not nelson_rule1(chart, chart.lower)

    def test_flags_complement_of_band(self):
        chart = ichart_fit(np.random.default_rng(7).normal(size=50))
        for r in np.linspace(chart.lower - 1, chart.upper + 1, 101):
            assert nelson_rule1(chart, r) == (r > chart.upper or r < chart.lower)


class TestDdm:
    def test_all_correct_is_stable(self):
        trace = DdmTrace()
        for _ in range(100):
            trace, status = ddm_update(trace, 0)
            assert status == "stable"
        assert trace.p_i == 0.0

    def test_error_rate_is_exact_fraction(self):
        trace = DdmTrace()
        errs = [1, 0, 0, 1, 0]
        for e in errs:
            trace, _ = ddm_update(trace, e)
        assert trace.p_i == pytest.approx(2.0 / 5.0)
        assert trace.s_i == pytest.approx(math.sqrt(0.4 * 0.6 / 5))

    def test_step_change_fires_drift(self):
        rng = np.random.default_rng(8)
        trace = DdmTrace()
        for _ in range(500):
            trace, status = ddm_update(trace, int(rng.random() < 0.1))
        fired_at = None
        for k in range(400):
            trace, status = ddm_update(trace, int(rng.random() < 0.5))
            if status == "drift":
                fired_at = k
                break
        assert fired_at is not None and fired_at < 200

    def test_invalid_indicator(self):
        with pytest.raises(InvalidInputError):
            ddm_update(DdmTrace(), 2)


class TestCoverage:
    def test_all_inside(self):
        assert empirical_coverage([(0, 2), (1, 3)], [1.0, 2.0]) == 1.0

    def test_none_inside(self):
        assert empirical_coverage([(0, 1), (0, 1)], [5.0, -1.0]) == 0.0

    def test_reference_ratio(self):
        intervals = [(0.0, 1.0)] * 305
        truths = [0.5] * 294 + [2.0] * 11
        assert empirical_coverage(intervals, truths) == pytest.approx(0.9639, abs=1e-4)

    def test_bounds_inclusive(self):
        assert empirical_coverage([(0.0, 1.0)], [1.0]) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            empirical_coverage([(0, 1)], [0.5, 0.6])


class TestLogLoss:
    def test_half_prob(self):
        assert log_loss_term(0.5, 1) == pytest.approx(math.log(2.0))

    def test_clamped_finite(self):
        assert math.isfinite(log_loss_term(0.0, 1))
