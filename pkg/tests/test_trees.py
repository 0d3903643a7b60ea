# twocultures/tests/test_trees.py

import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_design
from shared.errors import ValidationError
from trees import (best_split, dump_text, fit_bagging, fit_boosting, fit_random_forest, fit_tree,
                   grow_tree, impurity, importance)


# ── 불순도 ────────────────────────────────────────────────
def test_impurity_formulas():
    assert impurity([0] * 5 + [1] * 5, 'gini') == pytest.approx(2.5)
    assert impurity([0, 0, 1, 1], 'entropy') == pytest.approx(-4 * 0.5 * np.log(0.5))
    assert impurity([1.0, 2.0, 3.0], 'variance') == pytest.approx(2.0)


@pytest.mark.parametrize("kind", ['gini', 'entropy'])
def test_impurity_pure_nodes(kind):
    assert impurity([0, 0, 0], kind) == 0.0
    assert impurity([1, 1, 1], kind) == pytest.approx(0.0, abs=1e-12)


def test_impurity_constant_and_errors():
    assert impurity([4.2] * 6, 'variance') == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValidationError):
        impurity([], 'gini')
    with pytest.raises(ValidationError):
        impurity([0, 1], 'deviance')


# ── 분할 탐색 ─────────────────────────────────────────────
def _brute_force_gain(x, y, kind, min_leaf):
    """모든 (열, 중간점) 쌍을 직접 나눠 본 최대 이득"""
    parent = impurity(y, kind)
    best = -np.inf
    for c in range(x.shape[1]):
        values = np.unique(x[:, c])
        for lo, hi in zip(values[:-1], values[1:]):
            left = x[:, c] <= (lo + hi) / 2.0
            if left.sum() < min_leaf or (~left).sum() < min_leaf:
                continue
            best = max(best, parent - impurity(y[left], kind) - impurity(y[~left], kind))
    return best, parent


@st.composite
def split_problems(draw):
    n = draw(st.integers(2, 30))
    p = draw(st.integers(1, 4))
    kind = draw(st.sampled_from(['gini', 'entropy', 'variance']))
    x = np.array(draw(st.lists(st.integers(0, 5), min_size=n * p, max_size=n * p)), dtype=float).reshape(n, p)
    if kind == 'variance':
        y = draw(st.lists(st.integers(-3, 3), min_size=n, max_size=n))
    else:
        y = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    min_leaf = draw(st.integers(1, 3))
    return x, np.array(y, dtype=float), kind, min_leaf


@settings(max_examples=200, deadline=None)
@given(split_problems())
def test_best_split_matches_brute_force(problem):
    x, y, kind, min_leaf = problem
    split = best_split(x, y, np.arange(len(y)), range(x.shape[1]), kind, min_leaf)
    brute, parent = _brute_force_gain(x, y, kind, min_leaf)
    tol = 1e-9 * max(1.0, abs(parent))
    if split is None:
        assert brute <= tol
        return
    assert split.gain == pytest.approx(brute, abs=tol)
    # 보고된 분할을 직접 적용한 이득도 같아야 한다
    left = x[:, split.column] <= split.threshold
    direct = parent - impurity(y[left], kind) - impurity(y[~left], kind)
    assert direct == pytest.approx(split.gain, abs=tol)


@settings(max_examples=50, deadline=None)
@given(split_problems())
def test_presorted_scan_equals_plain_scan(problem):
    x, y, kind, min_leaf = problem
    rows = np.arange(len(y))
    plain = best_split(x, y, rows, range(x.shape[1]), kind, min_leaf)
    presorted = np.argsort(x, axis=0, kind='stable')
    fast = best_split(x, y, rows, range(x.shape[1]), kind, min_leaf, presorted=presorted)
    assert plain == fast


def test_step_split_at_midpoint():
    x = np.arange(1.0, 7.0)[:, None]
    y = (x[:, 0] > 3).astype(float)
    split = best_split(x, y, np.arange(6), [0], 'gini')
    assert split.column == 0
    assert split.threshold == 3.5
    assert split.gain == pytest.approx(impurity(y, 'gini'))


def test_dominant_column_wins():
    y = np.array([0, 0, 0, 1, 1, 1], dtype=float)
    x = np.column_stack([[1, 2, 4, 3, 5, 6], [1, 2, 3, 4, 5, 6]]).astype(float)
    split = best_split(x, y, np.arange(6), [0, 1], 'gini')
    assert split.column == 1
    assert split.threshold == 3.5


def test_ties_go_to_lowest_column_and_threshold():
    y = np.array([0, 1, 1, 0], dtype=float)
    base = np.array([1.0, 2.0, 3.0, 4.0])
    x = np.column_stack([base, base])
    split = best_split(x, y, np.arange(4), [1, 0], 'gini')
    assert split.column == 0
    assert split.threshold == 1.5


def test_no_positive_gain_returns_none():
    x = np.array([[1.0], [1.0], [2.0], [2.0]])
    y = np.array([0.0, 1.0, 0.0, 1.0])
    assert best_split(x, y, np.arange(4), [0], 'gini') is None
    assert best_split(x, y, np.arange(4), [0], 'gini', min_leaf=3) is None


# ── 단일 트리 ─────────────────────────────────────────────
def test_depth_zero_tree_predicts_mean(linear_design):
    tree = fit_tree(linear_design, max_depth=0)
    assert tree.n_leaves == 1
    np.testing.assert_allclose(tree.predict(linear_design.x), linear_design.y.mean())


def test_unlimited_tree_interpolates(linear_design):
    tree = fit_tree(linear_design, min_leaf=1)
    np.testing.assert_allclose(tree.predict(linear_design.x), linear_design.y, atol=1e-10)


def test_classification_leaves_are_frequencies(logistic_design):
    dm = logistic_design
    tree = fit_tree(dm, max_depth=3, min_leaf=5)
    assert tree.kind == 'gini'
    leaves = tree.apply(dm.x)
    for leaf in np.unique(leaves):
        inside = leaves == leaf
        p = tree.predict(dm.x[inside])
        assert np.all((p >= 0) & (p <= 1))
        np.testing.assert_allclose(p, dm.y[inside].mean())
    assert tree.depth <= 3


def test_min_leaf_respected(linear_design):
    tree = fit_tree(linear_design, min_leaf=15)
    counts = np.bincount(tree.apply(linear_design.x))
    assert counts[counts > 0].min() >= 15


def test_grow_tree_rejects_bad_config():
    x = np.arange(10.0)[:, None]
    with pytest.raises(ValidationError):
        grow_tree(x, x[:, 0], kind='variance', min_leaf=0)
    with pytest.raises(ValidationError):
        grow_tree(x, x[:, 0], kind='variance', mtry=3)


def test_dump_text_and_json():
    dm = make_design(np.arange(1.0, 7.0), [0, 0, 0, 1, 1, 1], binary=True)
    tree = fit_tree(dm)
    text = dump_text(tree)
    lines = text.splitlines()
    assert lines[0] == "root: n=6 value=0.5000"
    assert "  x1 <= 3.5: n=3 value=0.0000 *" in lines
    assert "  x1 > 3.5: n=3 value=1.0000 *" in lines
    payload = json.loads(json.dumps(tree.to_dict()))
    assert payload["tree"]["column"] == 'x1'
    assert payload["tree"]["threshold"] == 3.5


# ── 배깅 / 랜덤 포레스트 ──────────────────────────────────
def test_single_full_sample_bag_equals_tree(linear_design):
    forest = fit_bagging(linear_design, n_trees=1, min_leaf=3, full_sample=True)
    tree = fit_tree(linear_design, min_leaf=3)
    np.testing.assert_array_equal(forest.predict(linear_design.x), tree.predict(linear_design.x))


def test_forest_prediction_is_member_mean(linear_design):
    forest = fit_random_forest(linear_design, n_trees=12, seed=3)
    x = linear_design.x[:20]
    expected = sum(t.predict(x) for t in forest.trees) / forest.n_trees
    np.testing.assert_allclose(forest.predict(x), expected, rtol=1e-12)


def test_forest_deterministic_across_jobs(linear_design):
    a = fit_random_forest(linear_design, n_trees=8, seed=11, jobs=1)
    b = fit_random_forest(linear_design, n_trees=8, seed=11, jobs=2)
    c = fit_random_forest(linear_design, n_trees=8, seed=12, jobs=1)
    np.testing.assert_array_equal(a.predict(linear_design.x), b.predict(linear_design.x))
    assert a.seeds == b.seeds
    assert not np.array_equal(a.predict(linear_design.x), c.predict(linear_design.x))


def test_oob_sets_complement_in_bag(linear_design):
    forest = fit_bagging(linear_design, n_trees=20, seed=5)
    n = linear_design.n
    fractions = []
    for in_bag, oob in zip(forest.in_bags, forest.oob_sets):
        assert not set(in_bag.tolist()) & set(oob.tolist())
        assert set(in_bag.tolist()) | set(oob.tolist()) == set(range(n))
        fractions.append(oob.size / n)
    assert np.mean(fractions) == pytest.approx(np.exp(-1), abs=0.05)
    assert np.isfinite(forest.oob_error)


def test_oob_prediction_averages_out_of_bag_trees(linear_design):
    forest = fit_bagging(linear_design, n_trees=15, seed=8)
    x = forest.train_x
    for row in range(0, linear_design.n, 17):
        members = [t for t, oob in zip(forest.trees, forest.oob_sets) if row in set(oob.tolist())]
        if not members:
            assert np.isnan(forest.oob_prediction[row])
            continue
        expected = np.mean([t.predict(x[row:row + 1])[0] for t in members])
        assert forest.oob_prediction[row] == pytest.approx(expected, rel=1e-12)


def test_default_mtry_and_bounds(linear_design, logistic_design):
    assert fit_random_forest(linear_design, n_trees=2).mtry == 1          # ⌈3/3⌉
    assert fit_random_forest(logistic_design, n_trees=2).mtry == 2        # ⌈√2⌉
    with pytest.raises(ValidationError):
        fit_random_forest(linear_design, n_trees=2, mtry=4)


def test_bagging_beats_single_tree_oob(rng):
    x = rng.normal(size=(150, 3))
    y = np.sin(2 * x[:, 0]) + x[:, 1] ** 2 + 0.3 * rng.normal(size=150)
    dm = make_design(x, y)
    bagged = fit_bagging(dm, n_trees=100, seed=1).oob_error
    singles = [fit_bagging(dm, n_trees=1, seed=s).oob_error for s in range(10)]
    assert bagged <= np.mean(singles)


def test_importance_ranks_signal_first(rng):
    x = rng.normal(size=(200, 3))
    y = 3.0 * x[:, 0] + 0.5 * rng.normal(size=200)
    dm = make_design(x, y)
    table = importance(fit_random_forest(dm, n_trees=50, seed=2))
    assert table.ranking('impurity')[0] == 'x1'
    assert table.ranking('permutation')[0] == 'x1'
    assert [r["variable"] for r in table.rows()] == ['x1', 'x2', 'x3']


def test_importance_single_split_concentrates(linear_design):
    forest = fit_bagging(linear_design, n_trees=1, max_depth=1, seed=7)
    table = importance(forest)
    assert np.count_nonzero(table.impurity) == 1
    col = forest.trees[0].root.column
    assert table.names[int(np.argmax(table.impurity))] == linear_design.column_names[col]


# ── 부스팅 ────────────────────────────────────────────────
def test_boosting_one_stump_hand_oracle():
    x = np.arange(1.0, 7.0)
    y = np.array([1.0, 1.0, 1.0, 5.0, 5.0, 5.0])
    model = fit_boosting(make_design(x, y), n_trees=1, shrinkage=1.0, max_depth=1, min_leaf=1)
    assert model.init == pytest.approx(3.0)
    assert model.multipliers[0] == pytest.approx(1.0)
    np.testing.assert_allclose(model.predict(make_design(x, y).x), y, atol=1e-12)


def test_boosting_squared_risk_non_increasing(linear_design):
    model = fit_boosting(linear_design, n_trees=60, shrinkage=0.3, max_depth=2, min_leaf=5)
    trace = np.array(model.risk_trace)
    assert len(trace) == 61
    assert np.all(np.diff(trace) <= 1e-12)
    assert trace[-1] < 0.5 * trace[0]


def test_boosting_staged_reconstruction(logistic_design):
    dm = logistic_design
    model = fit_boosting(dm, n_trees=30, shrinkage=0.1, max_depth=2, min_leaf=10)
    stages = model.staged_decision(dm.x)
    assert stages.shape == (31, dm.n)
    np.testing.assert_allclose(stages[0], model.init)
    np.testing.assert_allclose(stages[-1], model.decision_function(dm.x), atol=1e-10)
    np.testing.assert_allclose(stages[-1], model.train_scores, atol=1e-10)
    p = model.predict(dm.x)
    assert np.all((p > 0) & (p < 1))
    assert model.init == pytest.approx(np.log(dm.y.mean() / (1 - dm.y.mean())))


def test_boosting_depth_zero_keeps_init(linear_design):
    model = fit_boosting(linear_design, n_trees=10, max_depth=0)
    assert model.n_trees == 0
    np.testing.assert_allclose(model.predict(linear_design.x), linear_design.y.mean())


def test_boosting_subsample_deterministic(linear_design):
    a = fit_boosting(linear_design, n_trees=15, subsample=0.5, seed=4, min_leaf=5)
    b = fit_boosting(linear_design, n_trees=15, subsample=0.5, seed=4, min_leaf=5)
    np.testing.assert_array_equal(a.predict(linear_design.x), b.predict(linear_design.x))


@pytest.mark.parametrize("kwargs", [dict(shrinkage=0.0), dict(shrinkage=1.5), dict(subsample=0.0),
                                    dict(loss='huber'), dict(n_trees=-1)])
def test_boosting_rejects_bad_config(linear_design, kwargs):
    with pytest.raises(ValidationError):
        fit_boosting(linear_design, **kwargs)


def test_logistic_boosting_needs_binary(linear_design):
    with pytest.raises(ValidationError):
        fit_boosting(linear_design, loss='logistic')
