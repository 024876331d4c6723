import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from droughtclass.classification import (
    audit_reference,
    classifier_from_dict,
    confusion_from_predictions,
    dtree_fit,
    evaluate,
    gaussian_density,
    gini,
    gnb_fit,
    gnb_predict,
    knn_fit,
    knn_predict,
    reference_matrix,
    rf_fit,
    weighted_gini,
)
from droughtclass.errors import DimensionError, EmptyInputError, InputError, InsufficientDataError
from droughtclass.preprocess import split_train_test


def _round_trip(model):
    return classifier_from_dict(json.loads(json.dumps(model.to_dict())))


@pytest.fixture(scope="module")
def blobs():
    rng = np.random.default_rng(4)
    x = np.vstack([rng.normal(-3, 0.5, (100, 2)), rng.normal(3, 0.5, (100, 2))])
    y = np.repeat([0, 1], 100)
    split = split_train_test(200, 0.8, seed=1)
    return x[split.train_rows], y[split.train_rows], x[split.test_rows], y[split.test_rows]


# KNN

def test_knn_k1_memorizes(rng):
    x = rng.normal(size=(50, 3))
    y = rng.integers(0, 3, 50)
    assert np.array_equal(knn_fit(x, y, 1).predict(x), y)


def test_knn_k_equals_n_is_majority(rng):
    x = rng.normal(size=(21, 2))
    y = np.array([0] * 5 + [2] * 9 + [1] * 7)
    model = knn_fit(x, y, 21)
    assert set(model.predict(rng.normal(size=(10, 2)))) == {2}


def test_knn_small_examples():
    model = knn_fit([[0.0], [10.0]], [0, 1], 1)
    assert knn_predict(model, [1.0]) == 0
    model = knn_fit([[0.0], [10.0]], [1, 0], 2)
    assert knn_predict(model, [5.0]) == 0  # vote tie: smallest class id


def test_knn_distance_tie_lower_row_index():
    model = knn_fit([[0.0], [2.0], [2.0]], [0, 1, 2], 1)
    assert knn_predict(model, [1.0]) == 0
    model = knn_fit([[2.0], [0.0]], [1, 0], 1)
    assert knn_predict(model, [1.0]) == 1


def test_knn_matches_oracle(rng):
    x = rng.normal(size=(200, 3))
    y = rng.integers(0, 3, 200)
    model = knn_fit(x, y, 5)
    for q in rng.normal(size=(100, 3)):
        assert knn_predict(model, q) == oracles.knn(x.tolist(), y.tolist(), q.tolist(), 5)


def test_knn_oracle_on_integer_grid_with_ties(rng):
    x = rng.integers(0, 4, size=(150, 2)).astype(float)
    y = rng.integers(0, 3, 150)
    model = knn_fit(x, y, 7)
    for q in rng.integers(0, 4, size=(60, 2)).astype(float):
        assert knn_predict(model, q) == oracles.knn(x.tolist(), y.tolist(), q.tolist(), 7)


def test_knn_round_trip_and_errors(rng):
    x, y = rng.normal(size=(30, 2)), rng.integers(0, 2, 30)
    model = knn_fit(x, y, 3)
    again = _round_trip(model)
    q = rng.normal(size=(20, 2))
    assert np.array_equal(model.predict(q), again.predict(q))
    assert again.to_dict() == model.to_dict()
    with pytest.raises(InputError):
        knn_fit(x, y, 31)
    with pytest.raises(DimensionError):
        knn_predict(model, [1.0, 2.0, 3.0])


# Gaussian naive Bayes

def test_gaussian_density_at_mean():
    assert gaussian_density(0.0, 0.0, 1.0) == pytest.approx(0.39894, abs=1e-5)


def test_gnb_two_point_class():
    model = gnb_fit([[0.0], [2.0], [5.0], [7.0]], [0, 0, 1, 1])
    assert model.means[0, 0] == 1.0
    assert model.variances[0, 0] == pytest.approx(1.0 + model.epsilon, abs=0)
    assert model.priors.tolist() == [0.5, 0.5]


def test_gnb_nearest_mean():
    model = gnb_fit([[-1.0], [1.0], [9.0], [11.0]], [0, 0, 1, 1])
    assert gnb_predict(model, [1.0]) == 0


def test_gnb_single_row_class_named():
    with pytest.raises(InsufficientDataError, match="class 2"):
        gnb_fit([[0.0], [1.0], [3.0]], [0, 0, 2])


def test_gnb_parameters_match_oracle(rng):
    x = rng.normal(size=(90, 4)) * [1, 3, 0.2, 8]
    y = rng.integers(0, 3, 90)
    model = gnb_fit(x, y)
    ref = oracles.gnb_fit(x.tolist(), y.tolist())
    for j, c in enumerate(model.classes):
        prior, means, var = ref[int(c)]
        assert model.priors[j] == pytest.approx(prior, abs=1e-12)
        assert np.allclose(model.means[j], means, rtol=0, atol=1e-12)
        assert np.allclose(model.variances[j], var, rtol=1e-12, atol=0)


def test_gnb_posterior_matches_oracle(rng):
    x = rng.normal(size=(60, 2)) + np.repeat([[0, 0], [2, 1], [-1, 3]], 20, axis=0)
    y = np.repeat([0, 1, 2], 20)
    model = gnb_fit(x, y)
    ref = oracles.gnb_fit(x.tolist(), y.tolist())
    queries = rng.normal(size=(30, 2)) * 3
    got = model.predict_log_proba(queries)
    for row, q in zip(got, queries):
        want = oracles.gnb_log_posterior(ref, q.tolist())
        for j in range(3):
            assert oracles.rel_close(row[j], want[j])


def test_gnb_log_space_no_underflow():
    x = np.vstack([np.zeros((5, 11)), np.full((5, 11), 50.0)]) + np.linspace(0, 1, 10)[:, None]
    model = gnb_fit(x, [0] * 5 + [1] * 5)
    # a far query still gets a finite, decisive score
    jll = model.joint_log_likelihood(np.full(11, 1000.0))
    assert np.isfinite(jll).all()
    assert gnb_predict(model, np.full(11, 1000.0)) == 1


# Gini and the decision tree

def test_gini_examples():
    assert gini([10, 10]) == 0.5
    assert gini([20, 0]) == 0.0
    assert gini([1, 1, 1]) == pytest.approx(2 / 3, abs=1e-12)
    with pytest.raises(InputError):
        gini([0, 0])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 1000), min_size=1, max_size=6).filter(lambda c: sum(c) > 0))
def test_gini_matches_oracle(counts):
    assert oracles.rel_close(gini(counts), oracles.gini(counts))
    assert 0.0 <= gini(counts) < 1.0


def test_xor_needs_depth_two():
    x = [[0, 0], [0, 1], [1, 0], [1, 1]]
    y = [0, 1, 1, 0]
    tree = dtree_fit(x, y, max_depth=2)
    assert np.array_equal(tree.predict(x), y)


def test_single_class_is_a_leaf():
    tree = dtree_fit([[1.0], [2.0], [3.0]], [1, 1, 1])
    assert tree.depth == 0 and tree.node_count == 1


def test_six_point_root_split_by_hand():
    # thresholds 1.5..5.5 give weighted Gini .4, .25, .444, .25, .4
    x = np.arange(1.0, 7.0)[:, None]
    y = [0, 0, 1, 0, 1, 1]
    assert weighted_gini([2, 0], [1, 3]) == pytest.approx(0.25, abs=1e-12)
    assert weighted_gini([2, 1], [1, 2]) == pytest.approx(4 / 9, abs=1e-12)
    tree = dtree_fit(x, y, max_depth=1)
    assert tree.feature[0] == 0
    assert tree.threshold[0] == 2.5  # tied with 4.5; the lower threshold wins


def test_tree_split_tie_lowest_feature():
    x = [[0.0, 0.0], [1.0, 1.0]]
    tree = dtree_fit(x, [0, 1])
    assert tree.feature[0] == 0


def test_tree_round_trip(rng):
    x, y = rng.normal(size=(80, 3)), rng.integers(0, 3, 80)
    tree = dtree_fit(x, y, max_depth=4)
    again = _round_trip(tree)
    assert np.array_equal(tree.predict(x), again.predict(x))


def test_tree_depth_monotone(rng):
    x = rng.normal(size=(150, 3))
    y = (x[:, 0] * x[:, 1] > 0).astype(int) + (x[:, 2] > 1)
    acc = [np.mean(dtree_fit(x, y, max_depth=d).predict(x) == y) for d in range(1, 9)]
    assert all(b >= a for a, b in zip(acc, acc[1:]))


def test_tree_empty_input():
    with pytest.raises(EmptyInputError):
        dtree_fit(np.zeros((0, 2)), np.zeros(0, dtype=int))


# random forest

def test_forest_identity_case(rng):
    x, y = rng.normal(size=(100, 3)), rng.integers(0, 3, 100)
    forest = rf_fit(x, y, n_trees=1, bootstrap=False, max_features=3)
    tree = dtree_fit(x, y)
    q = rng.normal(size=(50, 3))
    assert np.array_equal(forest.predict(q), tree.predict(q))


def test_forest_deterministic_across_threads(rng):
    x, y = rng.normal(size=(120, 4)), rng.integers(0, 3, 120)
    a = rf_fit(x, y, n_trees=15, seed=3)
    b = rf_fit(x, y, n_trees=15, seed=3, n_jobs=4)
    q = rng.normal(size=(40, 4))
    assert np.array_equal(a.predict(q), b.predict(q))
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())
    again = _round_trip(a)
    assert np.array_equal(again.predict(q), a.predict(q))


def test_forest_default_max_features(rng):
    forest = rf_fit(rng.normal(size=(30, 11)), rng.integers(0, 2, 30), n_trees=2)
    assert forest.params["max_features"] == 4


def test_forest_vs_single_tree(synthetic_matrix, regime_canonical):
    split = split_train_test(synthetic_matrix.n_rows, 0.8, seed=42)
    tr, te = synthetic_matrix.take(split.train_rows), synthetic_matrix.take(split.test_rows)
    ytr, yte = regime_canonical[split.train_rows], regime_canonical[split.test_rows]
    forest = evaluate(rf_fit(tr, ytr, n_trees=25, seed=42), te, yte).accuracy
    tree = evaluate(dtree_fit(tr, ytr), te, yte).accuracy
    assert forest >= tree - 0.02


# evaluation

def test_perfect_predictor_is_diagonal():
    cm = confusion_from_predictions([0, 1, 2, 2], [0, 1, 2, 2], 3)
    assert cm.accuracy == 1.0
    assert np.count_nonzero(cm.counts - np.diag(np.diag(cm.counts))) == 0


def test_constant_predictor_balanced():
    actual = np.repeat([0, 1, 2], 7)
    cm = confusion_from_predictions(actual, np.zeros(21, dtype=int), 3)
    assert cm.accuracy == 1 / 3
    assert cm.counts.sum(axis=1).tolist() == [7, 7, 7]


def test_reference_forest_matrix():
    cm = reference_matrix("random_forest")
    assert cm.counts.tolist() == [[14819, 639, 423], [247, 9512, 355], [239, 465, 7639]]
    assert (cm.correct, cm.total) == (31970, 34338)
    assert cm.accuracy == pytest.approx(0.93104, abs=1e-4)


def test_reference_audit_flags_divergence():
    audit = audit_reference()
    assert audit["decision_tree"]["computed_accuracy"] == pytest.approx(0.93849, abs=1e-4)
    assert audit["random_forest"]["flagged"] and audit["decision_tree"]["flagged"]


def test_evaluate_rejects_out_of_range():
    with pytest.raises(DimensionError):
        confusion_from_predictions([0, 3], [0, 1], 3)
    with pytest.raises(EmptyInputError):
        confusion_from_predictions([], [], 3)


@pytest.mark.parametrize("fit", [
    lambda x, y: knn_fit(x, y, 5),
    gnb_fit,
    dtree_fit,
    lambda x, y: rf_fit(x, y, n_trees=20, seed=0),
])
def test_separable_blobs_perfect(blobs, fit):
    xtr, ytr, xte, yte = blobs
    cm = evaluate(fit(xtr, ytr), xte, yte)
    assert cm.accuracy == 1.0
    assert cm.counts.sum(axis=1).tolist() == np.bincount(yte).tolist()


@pytest.mark.parametrize("fit", [gnb_fit, dtree_fit])
def test_row_order_does_not_matter(rng, fit):
    x, y = rng.normal(size=(80, 3)), rng.integers(0, 3, 80)
    perm = rng.permutation(80)
    q = rng.normal(size=(40, 3))
    assert np.array_equal(fit(x, y).predict(q), fit(x[perm], y[perm]).predict(q))


def test_predictions_in_class_range(rng):
    x, y = rng.normal(size=(40, 2)), rng.integers(0, 2, 40)
    for model in (knn_fit(x, y, 3, class_count=4), gnb_fit(x, y, class_count=4), dtree_fit(x, y, class_count=4)):
        pred = model.predict(rng.normal(size=(30, 2)))
        assert pred.min() >= 0 and pred.max() < 4


def test_reference_rounding_audit_values():
    audit = audit_reference()
    acc = {k: v["computed_accuracy"] for k, v in audit.items()}
    assert math.isclose(acc["random_forest"], 31970 / 34338)
    assert set(audit) == {"decision_tree", "random_forest", "knn", "gaussian_nb"}
