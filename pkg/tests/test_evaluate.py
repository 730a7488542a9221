import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from palmi.errors import (
    BadProba,
    ClassTooSmall,
    DegenerateGroups,
    FoldError,
    LengthMismatch,
    TooSmall,
    ZeroVariance,
)
from palmi.evaluate import (
    anova_one_way,
    auc_ovr,
    betainc,
    classification_metrics,
    cohen_kappa,
    confusion_matrix,
    cross_validate,
    make_fold_plan,
    matthews,
    regression_metrics,
    roc_curve,
    train_test_split,
)
from palmi.models import ModelSpec


def binary_example():
    # TP=50, TN=30, FP=10, FN=10 with class 1 as the positive class
    actual = np.array([1] * 50 + [0] * 30 + [0] * 10 + [1] * 10)
    pred = np.array([1] * 50 + [0] * 30 + [1] * 10 + [0] * 10)
    return pred, actual


class TestSplit:
    def test_reference_sizes(self):
        tr, te = train_test_split(1152, 0.2, seed=0)
        assert (len(tr), len(te)) == (922, 230)

    def test_small(self):
        tr, te = train_test_split(10, 0.2, seed=1)
        assert (len(tr), len(te)) == (8, 2)

    @pytest.mark.parametrize("seed", range(10))
    def test_stratified_bound(self, seed):
        labels = np.array([0] * 8 + [1] * 2)
        tr, te = train_test_split(10, 0.2, labels, seed=seed)
        counts = np.bincount(labels[te], minlength=2)
        assert counts[0] in (1, 2) and counts[1] in (0, 1) and counts.sum() == 2

    @settings(max_examples=40, deadline=None)
    @given(st.integers(5, 400), st.floats(0.05, 0.95), st.integers(0, 2**31), st.booleans())
    def test_partition(self, n, frac, seed, stratify):
        labels = np.random.default_rng(seed).integers(0, 4, n) if stratify else None
        tr, te = train_test_split(n, frac, labels, seed=seed)
        assert len(te) == math.floor(frac * n + 0.5)
        assert np.array_equal(np.sort(np.concatenate([tr, te])), np.arange(n))
        if stratify:
            for c in range(4):
                share = np.sum(labels == c) * len(te) / n
                assert abs(np.sum(labels[te] == c) - share) < 1 + 1e-9

    def test_too_small(self):
        with pytest.raises(TooSmall):
            train_test_split(4)

    def test_deterministic(self):
        assert all(np.array_equal(a, b) for a, b in zip(train_test_split(100, seed=3), train_test_split(100, seed=3)))


class TestFoldPlan:
    def test_reference_plan(self):
        labels = np.repeat([0, 1, 2, 3], [231, 230, 231, 230])
        plan = make_fold_plan(labels, "repeated_stratified_kfold", 10, 3, seed=0)
        assert len(plan) == 30
        assert {len(va) for _, va in plan} <= {92, 93}

    def test_kfold_sizes(self):
        plan = make_fold_plan(922, "kfold", 10, seed=0)
        assert len(plan) == 10 and {len(va) for _, va in plan} == {92, 93}

    def test_leave_one_out(self):
        plan = make_fold_plan(12, "kfold", 12)
        assert sorted(int(va[0]) for _, va in plan) == list(range(12))
        assert all(len(va) == 1 for _, va in plan)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.integers(10, 60), min_size=2, max_size=4), st.integers(2, 10), st.integers(1, 3),
           st.integers(0, 1000))
    def test_stratified_properties(self, counts, k, repeats, seed):
        labels = np.random.default_rng(seed).permutation(np.repeat(np.arange(len(counts)), counts))
        n = len(labels)
        plan = make_fold_plan(labels, "repeated_stratified_kfold", k, repeats, seed)
        assert len(plan) == k * repeats
        for r in range(repeats):
            folds = plan.folds[r * k:(r + 1) * k]
            vals = np.concatenate([va for _, va in folds])
            assert np.array_equal(np.sort(vals), np.arange(n))
            for tr, va in folds:
                assert len(np.intersect1d(tr, va)) == 0 and len(tr) + len(va) == n
                assert len(va) in (n // k, -(-n // k))
                for c, cnt in enumerate(counts):
                    assert abs(np.sum(labels[va] == c) - cnt * len(va) / n) <= 1

    def test_class_too_small(self):
        with pytest.raises(ClassTooSmall):
            make_fold_plan(np.array([0] * 20 + [1] * 5), "stratified_kfold", 10)

    def test_repeats_differ(self):
        plan = make_fold_plan(100, "repeated_kfold", 5, 2, seed=0)
        assert not np.array_equal(plan.folds[0][1], plan.folds[5][1])

    def test_bad_k(self):
        with pytest.raises(ValueError):
            make_fold_plan(10, "kfold", 1)


class TestClassificationMetrics:
    def test_binary_example(self):
        pred, actual = binary_example()
        report, cm = classification_metrics(pred, actual, n_classes=2)
        assert report.acc == pytest.approx(0.8, abs=1e-12)
        pc = report.per_class
        assert pc["rec"][1] == pytest.approx(50 / 60, abs=1e-12)
        assert pc["pre"][1] == pytest.approx(50 / 60, abs=1e-12)
        assert pc["f1"][1] == pytest.approx(0.8333, abs=5e-5)
        assert pc["ji"][1] == pytest.approx(0.7143, abs=5e-5)
        assert cm.tolist() == [[30, 10], [10, 50]]

    def test_perfect(self):
        y = np.array([0, 1, 2, 3] * 5)
        report, _ = classification_metrics(y, y, np.eye(4)[y])
        for name in ("acc", "f1", "rec", "pre", "ji", "auc", "kappa", "mcc"):
            assert getattr(report, name) == 1.0
        assert report.per_class["auc"] == [1.0] * 4

    def test_absent_classes_excluded_from_macro(self):
        actual = np.array([0, 0, 1, 1])
        pred = np.array([0, 1, 1, 1])
        report, _ = classification_metrics(pred, actual)
        assert report.rec == pytest.approx((0.5 + 1.0) / 2)

    def test_trace_over_n_is_acc(self, rng):
        actual = rng.integers(0, 4, 300)
        pred = rng.integers(0, 4, 300)
        report, cm = classification_metrics(pred, actual)
        assert report.acc == np.trace(cm) / cm.sum()
        assert cm.sum() == 300

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            classification_metrics([0, 1], [0])

    @pytest.mark.parametrize("bad", [np.full((2, 4), 0.3), -np.eye(4)[[0, 1]] + np.eye(4)[[1, 2]] * 2, np.ones((2, 3)) / 3])
    def test_bad_proba(self, bad):
        with pytest.raises(BadProba):
            classification_metrics([0, 1], [0, 1], bad)

    def test_matches_sklearn(self, rng):
        skm = pytest.importorskip("sklearn.metrics")
        actual = rng.integers(0, 4, 400)
        pred = np.where(rng.random(400) < 0.6, actual, rng.integers(0, 4, 400))
        proba = rng.dirichlet(np.ones(4), 400)
        proba[np.arange(400), actual] += 0.3
        proba /= proba.sum(axis=1, keepdims=True)
        report, _ = classification_metrics(pred, actual, proba)
        assert report.f1 == pytest.approx(skm.f1_score(actual, pred, average="macro"), abs=1e-12)
        assert report.rec == pytest.approx(skm.recall_score(actual, pred, average="macro"), abs=1e-12)
        assert report.pre == pytest.approx(skm.precision_score(actual, pred, average="macro"), abs=1e-12)
        assert report.ji == pytest.approx(skm.jaccard_score(actual, pred, average="macro"), abs=1e-12)
        assert report.kappa == pytest.approx(skm.cohen_kappa_score(actual, pred), abs=1e-12)
        assert report.mcc == pytest.approx(skm.matthews_corrcoef(actual, pred), abs=1e-12)
        assert report.auc == pytest.approx(skm.roc_auc_score(actual, proba, multi_class="ovr", average="macro"),
                                           abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31))
    def test_kappa_mcc_direct_formulas(self, seed):
        rng = np.random.default_rng(seed)
        cm = rng.integers(0, 30, (4, 4))
        cm[0, 0] += 1
        n = cm.sum()
        po = np.trace(cm) / n
        pe = sum(cm[i].sum() * cm[:, i].sum() for i in range(4)) / n**2
        kappa = (po - pe) / (1 - pe)
        cov_xy = sum(cm[k, k] * n - cm[k].sum() * cm[:, k].sum() for k in range(4))
        cov_xx = n**2 - sum(cm[:, k].sum() ** 2 for k in range(4))
        cov_yy = n**2 - sum(cm[k].sum() ** 2 for k in range(4))
        mcc = cov_xy / math.sqrt(cov_xx * cov_yy)
        assert cohen_kappa(cm) == pytest.approx(kappa, abs=1e-12)
        assert matthews(cm) == pytest.approx(mcc, abs=1e-12)
        assert -1 <= cohen_kappa(cm) <= 1 and -1 <= matthews(cm) <= 1

    def test_confusion_orientation(self):
        cm = confusion_matrix([0, 0, 3], [1, 1, 2])
        assert cm[0, 1] == 2 and cm[3, 2] == 1


class TestAuc:
    def test_roc_starts_at_origin(self):
        thr, fpr, tpr = roc_curve([0.9, 0.8, 0.3], [True, False, True])
        assert thr[0] == np.inf and fpr[0] == 0 and tpr[0] == 0
        assert fpr[-1] == 1 and tpr[-1] == 1

    def test_tied_scores_single_step(self):
        thr, fpr, tpr = roc_curve([0.5, 0.5, 0.5, 0.5], [True, False, True, False])
        assert len(thr) == 2
        assert np.trapezoid(tpr, fpr) == 0.5

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31), st.sampled_from(["exp", "cube", "affine", "logit"]))
    def test_binary_monotone_invariance(self, seed, transform):
        rng = np.random.default_rng(seed)
        actual = rng.integers(0, 2, 60)
        actual[:2] = [0, 1]
        p1 = np.round(rng.random(60), 2)
        f = {"exp": np.exp, "cube": lambda s: s**3, "affine": lambda s: 3 * s - 7,
             "logit": lambda s: np.log((s + 0.01) / (1.01 - s))}[transform]
        _, base = auc_ovr(np.column_stack([1 - p1, p1]), actual, 2)
        per, _ = auc_ovr(np.column_stack([np.zeros(60), f(p1)]), actual, 2)
        assert per[1] == pytest.approx(base, abs=1e-12)

    def test_matches_sklearn_binary(self, rng):
        skm = pytest.importorskip("sklearn.metrics")
        actual = rng.integers(0, 2, 200)
        s = np.round(rng.random(200) + 0.3 * actual, 1)
        per, _ = auc_ovr(np.column_stack([1 - s, s]), actual, 2)
        assert per[1] == pytest.approx(skm.roc_auc_score(actual, s), abs=1e-12)

    def test_class_without_positives_is_undefined(self):
        actual = np.array([0, 1, 0, 1])
        proba = np.tile([0.25, 0.25, 0.25, 0.25], (4, 1))
        per, macro = auc_ovr(proba, actual)
        assert math.isnan(per[2]) and math.isnan(per[3])
        assert macro == 0.5


class TestRegressionMetrics:
    def test_exact(self):
        r = regression_metrics([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert (r.r2, r.mae, r.rmse) == (1.0, 0.0, 0.0)

    def test_mean_prediction(self):
        actual = np.array([1.0, 4.0, 2.0, 8.0])
        r = regression_metrics(np.full(4, actual.mean()), actual)
        assert r.r2 == pytest.approx(0.0, abs=1e-12)

    def test_hand_computed(self):
        r = regression_metrics([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])
        assert r.mae == pytest.approx(2 / 3, abs=1e-12)
        assert r.mse == pytest.approx(2 / 3, abs=1e-12)
        assert r.rmse == pytest.approx(math.sqrt(2 / 3), abs=1e-12)
        assert r.r2 == pytest.approx(0.0, abs=1e-12)
        assert r.max_error == 1.0

    def test_negative_r2_allowed(self):
        assert regression_metrics([3.0, 2.0, 1.0], [1.0, 2.0, 3.0]).r2 == pytest.approx(-3.0)

    def test_zero_variance(self):
        with pytest.raises(ZeroVariance):
            regression_metrics([1.0, 2.0], [5.0, 5.0])

    def test_too_short(self):
        with pytest.raises(LengthMismatch):
            regression_metrics([1.0], [1.0])

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**31), st.integers(2, 100))
    def test_identities(self, seed, n):
        rng = np.random.default_rng(seed)
        actual = rng.normal(size=n) * 10
        pred = actual + rng.normal(size=n) * rng.uniform(0, 20)
        r = regression_metrics(pred, actual)
        assert r.rmse**2 == pytest.approx(r.mse, rel=1e-12)
        assert r.r2 <= 1.0
        assert r.max_error >= r.mae >= 0

    def test_matches_sklearn(self, rng):
        skm = pytest.importorskip("sklearn.metrics")
        actual = rng.normal(size=50)
        pred = actual + rng.normal(size=50)
        r = regression_metrics(pred, actual)
        assert r.r2 == pytest.approx(skm.r2_score(actual, pred), abs=1e-12)
        assert r.mae == pytest.approx(skm.mean_absolute_error(actual, pred), abs=1e-12)
        assert r.explained_variance == pytest.approx(skm.explained_variance_score(actual, pred), abs=1e-12)


class TestCrossValidate:
    def data(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(200, 3))
        y = np.repeat([0, 1, 2, 3], 50)
        X[:, 0] += y
        return X, y

    def test_thirty_fold_reports_and_determinism(self):
        X, y = self.data()
        plan = make_fold_plan(y, "repeated_stratified_kfold", 10, 3, seed=1)
        spec = ModelSpec("dt", params={"max_depth": 3})
        a = cross_validate(spec, X, y, plan)
        b = cross_validate(spec, X, y, plan)
        assert len(a.validation) == len(a.train) == len(a.elapsed) == 30
        assert a.aggregate() == b.aggregate()
        assert a.mean("acc") == pytest.approx(np.mean([r.acc for r in a.validation]))

    def test_constant_model_on_balanced_data(self):
        # a single-leaf tree predicts the training majority class
        X, y = self.data()
        plan = make_fold_plan(y, "stratified_kfold", 10, seed=2)
        cv = cross_validate(ModelSpec("dt", params={"max_depth": 1, "min_samples_split": 1000}), X, y, plan)
        assert cv.mean("acc") == pytest.approx(0.25, abs=0.03)

    def test_regression(self):
        X, y = self.data()
        plan = make_fold_plan(len(y), "kfold", 5, seed=0)
        cv = cross_validate(ModelSpec("ols", "regression"), X, y.astype(float), plan, with_train=False)
        assert len(cv.validation) == 5 and cv.train == []
        assert cv.mean("r2") > 0.3

    def test_fold_errors_tagged(self):
        X = np.zeros((20, 2))
        y = np.array([0] * 18 + [1] * 2)
        plan = make_fold_plan(20, "kfold", 2, seed=0)
        plan = type(plan)(((np.arange(18), np.arange(18, 20)),), "kfold", 2, 1, 0)
        with pytest.raises(FoldError) as exc:
            cross_validate(ModelSpec("dt"), X, y, plan)
        assert exc.value.fold == 0


class TestAnova:
    def test_identical_groups(self):
        F, p = anova_one_way([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]])
        assert F == 0.0 and p == 1.0

    def test_far_apart(self):
        F, p = anova_one_way([[1.0, 2.0, 3.0], [101.0, 102.0, 103.0]])
        assert p < 1e-6

    def test_matches_scipy(self, rng):
        stats = pytest.importorskip("scipy.stats")
        groups = [rng.normal(m, 1, n) for m, n in ((0, 10), (0.5, 12), (1.0, 8))]
        F, p = anova_one_way(groups)
        ref = stats.f_oneway(*groups)
        assert F == pytest.approx(ref.statistic, rel=1e-12)
        assert p == pytest.approx(ref.pvalue, rel=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31), st.integers(2, 15), st.integers(2, 15))
    def test_f_is_t_squared(self, seed, n1, n2):
        stats = pytest.importorskip("scipy.stats")
        rng = np.random.default_rng(seed)
        a, b = rng.normal(size=n1), rng.normal(0.5, 1, n2)
        F, p = anova_one_way([a, b])
        t = stats.ttest_ind(a, b)
        assert F == pytest.approx(t.statistic**2, rel=1e-9)
        assert p == pytest.approx(t.pvalue, rel=1e-8)

    def test_degenerate(self):
        with pytest.raises(DegenerateGroups):
            anova_one_way([[1.0, 1.0], [2.0, 2.0]])

    def test_needs_two_groups(self):
        with pytest.raises(ValueError):
            anova_one_way([[1.0, 2.0]])

    @settings(max_examples=80, deadline=None)
    @given(st.floats(0.1, 60), st.floats(0.1, 60), st.floats(0.0, 1.0, allow_subnormal=False))
    def test_betainc_matches_scipy(self, a, b, x):
        # the oracle itself loses accuracy on subnormal x, checked separately below
        special = pytest.importorskip("scipy.special")
        assert betainc(a, b, x) == pytest.approx(special.betainc(a, b, x), rel=1e-10, abs=1e-300)

    def test_betainc_subnormal(self):
        # 50-digit reference value of I_x(0.5, 2) at the smallest subnormal
        assert betainc(0.5, 2.0, 5e-324) == pytest.approx(3.3341381242276162e-162, rel=1e-12)
