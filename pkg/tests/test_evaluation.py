import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from landmark_ph.evaluation import (
    ConfusionCounts,
    InsufficientClass,
    UndefinedMetric,
    cross_validate,
    sensitivity,
    specificity,
    stratified_kfold,
    train_baseline,
)


def clusters(n_per_class=20, dim=2, gap=10.0, seed=0):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(-gap, 1, (n_per_class, dim)), rng.normal(gap, 1, (n_per_class, dim))])
    y = np.repeat([0, 1], n_per_class)
    return X, y


class TestMetrics:
    @pytest.mark.parametrize("c, value", [
        (ConfusionCounts(tp=5, fn=0), 1.0), (ConfusionCounts(tp=0, fn=5), 0.0), (ConfusionCounts(tp=3, fn=1), 0.75),
    ])
    def test_sensitivity(self, c, value):
        assert sensitivity(c) == value

    @pytest.mark.parametrize("c, value", [
        (ConfusionCounts(tn=5, fp=0), 1.0), (ConfusionCounts(tn=0, fp=5), 0.0), (ConfusionCounts(tn=4, fp=1), 0.8),
    ])
    def test_specificity(self, c, value):
        assert specificity(c) == value

    def test_undefined(self):
        with pytest.raises(UndefinedMetric):
            sensitivity(ConfusionCounts(tn=3, fp=1))
        with pytest.raises(UndefinedMetric):
            specificity(ConfusionCounts(tp=3, fn=1))

    @given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=40))
    def test_class_swap_symmetry(self, rows):
        t = np.array([r[0] for r in rows])
        p = np.array([r[1] for r in rows])
        c = ConfusionCounts.from_predictions(t, p)
        swapped = ConfusionCounts.from_predictions(~t, ~p)
        assert (swapped.tp, swapped.fn, swapped.tn, swapped.fp) == (c.tn, c.fp, c.tp, c.fn)
        if c.tp + c.fn:
            assert specificity(swapped) == sensitivity(c)
        if c.tn + c.fp:
            assert sensitivity(swapped) == specificity(c)


class TestFolds:
    def test_balanced(self):
        folds = stratified_kfold([0] * 10 + [1] * 10, k=5, seed=0)
        for f in range(5):
            assert np.sum((folds == f)[:10]) == 2 and np.sum((folds == f)[10:]) == 2

    def test_deterministic(self):
        y = [0] * 13 + [1] * 7
        assert np.array_equal(stratified_kfold(y, 5, 3), stratified_kfold(y, 5, 3))

    def test_mini_mias_sizes(self):
        y = np.array([0] * 209 + [1] * 113)
        folds = stratified_kfold(y, 5, 0)
        for f in range(5):
            assert np.sum((folds == f) & (y == 0)) in (41, 42)
            assert np.sum((folds == f) & (y == 1)) in (22, 23)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(5, 40), st.integers(5, 40), st.integers(2, 5), st.integers(0, 99))
    def test_partition_and_proportions(self, n0, n1, k, seed):
        y = np.array([0] * n0 + [1] * n1)
        folds = stratified_kfold(y, k, seed)
        assert set(folds.tolist()) == set(range(k))
        for cls, n in ((0, n0), (1, n1)):
            counts = np.bincount(folds[y == cls], minlength=k)
            assert counts.max() - counts.min() <= 1 and counts.sum() == n
        sizes = np.bincount(folds, minlength=k)
        assert sizes.max() - sizes.min() <= 1

    def test_small_class(self):
        with pytest.raises(InsufficientClass):
            stratified_kfold([0] * 10 + [1] * 3, k=5)
        with pytest.raises(InsufficientClass):
            stratified_kfold([1] * 10, k=5)


class TestBaseline:
    def test_separable_training_accuracy(self):
        X, y = clusters()
        model = train_baseline(X, y)
        assert np.array_equal(model.predict(X), y)

    def test_zero_variance_columns(self):
        X, y = clusters()
        X = np.hstack([X, np.full((len(X), 2), 7.0)])
        model = train_baseline(X, y)
        assert np.all(np.isfinite(model.decision_function(X)))
        assert np.array_equal(model.predict(X), y)

    def test_duplicate_columns_same_predictions(self):
        # exact equality of decision values is not expected under L2; labels agree on separable data
        X, y = clusters(dim=3, seed=4)
        probe, _ = clusters(dim=3, seed=11)
        a = train_baseline(X, y).predict(probe)
        b = train_baseline(np.hstack([X, X]), y).predict(np.hstack([probe, probe]))
        assert np.array_equal(a, b)

    def test_rejects(self):
        X, y = clusters()
        with pytest.raises(InsufficientClass):
            train_baseline(X[:21], y[:21])
        X[0, 0] = np.nan
        with pytest.raises(ValueError):
            train_baseline(X, y)


class TestCrossValidate:
    def test_perfectly_separable(self):
        X, y = clusters(n_per_class=25)
        rep = cross_validate(X, y, k=5, seed=0)
        assert rep.sensitivity_mean == 1.0 and rep.specificity_mean == 1.0
        assert rep.sensitivity_std == 0.0

    def test_shuffled_labels_near_chance(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(400, 5))
        y = rng.permutation(np.repeat([0, 1], 200))
        rep = cross_validate(X, y, k=5, seed=1)
        assert abs(rep.sensitivity_mean - 0.5) <= 0.15
        assert abs(rep.specificity_mean - 0.5) <= 0.15

    def test_single_class(self):
        with pytest.raises(InsufficientClass):
            cross_validate(np.zeros((10, 2)), [1] * 10)

    def test_reproducible(self):
        X, y = clusters(gap=1.0, seed=3)
        a = cross_validate(X, y, seed=7)
        b = cross_validate(X, y, seed=7)
        assert a.to_json() == b.to_json()

    def test_schema_stable_across_seeds(self):
        X, y = clusters(gap=1.0, seed=3)
        a = json.loads(cross_validate(X, y, seed=0).to_json())
        b = json.loads(cross_validate(X, y, seed=5).to_json())
        assert set(a) == set(b) == {"k", "seed", "classifier", "folds", "per_fold", "sensitivity", "specificity"}
        assert set(a["per_fold"][0]) == {"fold", "sensitivity", "specificity", "tp", "fn", "tn", "fp"}
        assert "± " in cross_validate(X, y).to_text()

    def test_poisoned_test_folds_do_not_change_training(self):
        X, y = clusters(gap=1.0, seed=2)
        base = cross_validate(X, y, k=5, seed=0)
        folds = np.array(base.folds)
        for f, model in enumerate(base.models):
            poisoned = X.copy()
            poisoned[folds == f] = 1e9
            seen = []

            def featurize(train, test, Xp=poisoned):
                seen.append(test)
                return Xp[train], Xp[test]

            again = cross_validate(featurize, y, k=5, seed=0).models[f]
            assert np.array_equal(again.weights, model.weights) and again.bias == model.bias
            assert np.array_equal(again.mean, model.mean) and np.array_equal(again.scale, model.scale)
