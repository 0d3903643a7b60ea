# twocultures/tests/test_evaluation.py

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from conftest import make_design
from dataframe import make_folds
from evaluation import (ConfusionMatrix, bootstrap_validate, confusion_at, cross_validate, kappa, loss,
                        loss_gradient, mann_whitney_auc, optimal_cutoff, risk, roc, score_risk)
from linmod import fit_ols
from nonparam import KernelSmoother, loocv_risk
from shared.errors import ValidationError


class _Constant:
    def __init__(self, value):
        self.value = value

    def predict(self, x):
        return np.full(len(x), self.value)


def _mean_model(dm):
    return _Constant(dm.y.mean())


def _zero_model(dm):
    return _Constant(0.0)


# ── 손실함수 ──────────────────────────────────────────────
def test_quantile_and_expectile_half_reductions(rng):
    y, yhat = rng.normal(size=20), rng.normal(size=20)
    np.testing.assert_allclose(loss('quantile(0.5)', y, yhat), 0.5 * np.abs(y - yhat))
    np.testing.assert_allclose(loss('expectile', y, yhat, tau=0.5), 0.5 * (y - yhat) ** 2)


def test_quantile_minimizer_is_empirical_quantile():
    sample = np.array([3.1, -0.4, 2.2, 7.5, 0.9, 1.6, -2.3, 4.4, 0.2])
    grid = np.sort(np.concatenate([np.linspace(-3, 8, 1101) + 0.005, sample]))
    objective = [risk('quantile', sample, np.full(9, c), tau=0.25) for c in grid]
    best = grid[int(np.argmin(objective))]
    assert best == np.sort(sample)[2]


@pytest.mark.parametrize("kind", ['quantile(1.5)', 'expectile(0)', 'huber'])
def test_bad_loss_kind(kind):
    with pytest.raises(ValueError):
        loss(kind, [1.0], [0.0])


def test_margin_losses_and_misclass():
    assert loss('hinge', [1.0], [0.0])[0] == 1.0
    assert loss('hinge', [-1.0], [-2.0])[0] == 0.0
    assert loss('logistic', [1.0], [0.0])[0] == pytest.approx(np.log(2.0))
    np.testing.assert_array_equal(loss('misclass', [1, 0, 1], [1, 1, 0]), [0.0, 1.0, 1.0])


@pytest.mark.parametrize("kind", ['squared', 'expectile(0.3)', 'quantile(0.8)', 'logistic', 'hinge'])
def test_loss_gradient_matches_finite_differences(kind):
    y = np.array([1.0, -1.0, 1.0, -1.0])
    yhat = np.array([0.37, 0.21, 1.64, -2.3])
    eps = 1e-6
    numeric = (loss(kind, y, yhat + eps) - loss(kind, y, yhat - eps)) / (2 * eps)
    np.testing.assert_allclose(loss_gradient(kind, y, yhat), numeric, rtol=1e-6, atol=1e-8)


def test_score_risk_maps_probabilities():
    y = np.array([0.0, 1.0, 1.0, 0.0])
    p = np.array([0.2, 0.7, 0.4, 0.5])
    assert score_risk('misclass', y, p) == pytest.approx(0.25)
    assert score_risk('brier', y, p) == pytest.approx(np.mean((y - p) ** 2))


# ── 혼동행렬 / kappa ─────────────────────────────────────
def test_confusion_all_positive():
    cm = confusion_at([0.9, 0.8, 0.7], [1, 1, 1], 0.5)
    assert cm.sensitivity == 1.0
    assert cm.fp == 0 and cm.fn == 0
    assert cm.n == 3


def test_confusion_threshold_is_strict():
    cm = confusion_at([0.5, 0.5], [1, 0], 0.5)
    assert cm.tp == 0 and cm.tn == 1 and cm.fn == 1


def test_kappa_worked_example():
    cm = ConfusionMatrix(0.5, tp=40, tn=45, fp=5, fn=10)
    assert cm.accuracy == pytest.approx(0.85)
    assert cm.random_accuracy == pytest.approx(0.5)
    assert cm.kappa == pytest.approx(0.70)
    np.testing.assert_array_equal(cm.table(), [[45, 5], [10, 40]])


def test_kappa_perfect_and_independent():
    assert kappa(ConfusionMatrix(0.5, tp=30, tn=70, fp=0, fn=0)) == pytest.approx(1.0)
    assert kappa(ConfusionMatrix(0.5, tp=10, tn=10, fp=10, fn=10)) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValidationError):
        kappa(ConfusionMatrix(0.5, tp=0, tn=25, fp=0, fn=0))


def test_confusion_rejects_bad_labels():
    with pytest.raises(ValidationError):
        confusion_at([0.1, 0.2], [0, 2], 0.5)
    with pytest.raises(ValidationError):
        confusion_at([0.1, 0.2, 0.3], [0, 1], 0.5)


# ── ROC / AUC ─────────────────────────────────────────────
def test_roc_worked_example():
    rc = roc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1])
    assert rc.auc == pytest.approx(0.75)
    assert rc.points()[0] == (0.0, 0.0)
    assert rc.points()[-1] == (1.0, 1.0)


def test_roc_perfect_separation():
    assert roc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]).auc == 1.0


def test_roc_requires_both_classes():
    with pytest.raises(ValidationError):
        roc([0.1, 0.2], [1, 1])


@st.composite
def scored_labels(draw):
    n = draw(st.integers(2, 40))
    scores = draw(st.lists(st.integers(0, 8), min_size=n, max_size=n))
    labels = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    assume(0 < sum(labels) < n)
    return np.array(scores, dtype=float) / 8.0, np.array(labels)


@settings(max_examples=1000, deadline=None)
@given(scored_labels())
def test_auc_equals_mann_whitney(data):
    scores, labels = data
    assert roc(scores, labels).auc == pytest.approx(mann_whitney_auc(scores, labels), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(scored_labels())
def test_roc_points_match_confusion_matrices(data):
    scores, labels = data
    rc = roc(scores, labels)
    assert np.all(np.diff(rc.fpr) >= 0) and np.all(np.diff(rc.tpr) >= 0)
    assert np.all(np.diff(rc.thresholds) < 0)
    for s, f, t in rc.to_rows():
        cm = confusion_at(scores, labels, s)
        assert cm.sensitivity == pytest.approx(t)
        assert 1.0 - cm.specificity == pytest.approx(f)


def test_label_swap_duality(rng):
    scores = rng.integers(0, 10, size=60) / 10.0
    labels = (rng.uniform(size=60) < 0.4).astype(int)
    assert roc(1.0 - scores, 1 - labels).auc == pytest.approx(roc(scores, labels).auc, abs=1e-12)
    cm = confusion_at(scores, labels, 0.55)
    mirrored = confusion_at(1.0 - scores, 1 - labels, 0.45)
    assert mirrored.sensitivity == pytest.approx(cm.specificity)
    assert mirrored.specificity == pytest.approx(cm.sensitivity)


def test_optimal_cutoff_separating_scores():
    scores = np.array([0.1, 0.2, 0.3, 0.7, 0.8])
    labels = np.array([0, 0, 0, 1, 1])
    cm = confusion_at(scores, labels, optimal_cutoff(roc(scores, labels)))
    assert cm.sensitivity == 1.0 and cm.specificity == 1.0


def test_optimal_cutoff_ties_pick_smaller_threshold():
    rc = roc([0.1, 0.2, 0.3, 0.4], [0, 1, 0, 1])
    assert optimal_cutoff(rc) == 0.1


# ── 교차검증 ──────────────────────────────────────────────
def test_cv_constant_model_closed_form(linear_design):
    plan = make_folds(linear_design.n, 5, seed=1)
    cv = cross_validate(_zero_model, linear_design, plan)
    assert cv.risk == pytest.approx(np.mean(linear_design.y ** 2), rel=1e-12)
    assert cv.risk == pytest.approx(np.mean(cv.fold_risks), rel=1e-15)
    assert not np.any(np.isnan(cv.pooled_scores))
    assert cv.fold_hash == plan.fold_hash()
    assert cv.roc is None


def test_leave_one_out_matches_shortcut_for_ols(linear_design):
    dm = linear_design
    plan = make_folds(dm.n, dm.n, seed=0)
    cv = cross_validate(fit_ols, dm, plan)
    fit = fit_ols(dm)
    shortcut = np.mean((fit.residuals / (1.0 - fit.hat_diag)) ** 2)
    assert cv.risk == pytest.approx(shortcut, abs=1e-10)


def test_leave_one_out_matches_shortcut_for_kernel(rng):
    x = rng.uniform(0, 1, size=40)
    dm = make_design(x, np.sin(4 * x) + 0.2 * rng.normal(size=40))

    def factory(d):
        return KernelSmoother(d.x[:, 1], d.y, 0.15, columns=(1,))

    cv = cross_validate(factory, dm, make_folds(dm.n, dm.n, seed=0))
    assert cv.risk == pytest.approx(loocv_risk(KernelSmoother(x, dm.y, 0.15)), abs=1e-10)


def test_overfitting_curve(rng):
    x = rng.uniform(-1, 1, size=60)
    y = np.sin(3 * x) + 0.3 * rng.normal(size=60)
    plan = make_folds(60, 10, seed=4)
    outs, ins = [], []
    for degree in range(1, 13):
        dm = make_design(np.column_stack([x ** d for d in range(1, degree + 1)]), y)
        cv = cross_validate(fit_ols, dm, plan, pool=False)
        outs.append(cv.risk)
        ins.append(cv.in_sample_risk)
    assert np.all(np.diff(ins) <= 1e-8)
    assert outs[-1] > min(outs)
    assert ins[-1] < outs[-1]


def test_cv_classification_pools_roc(logistic_design):
    dm = logistic_design
    plan = make_folds(dm.n, 5, seed=2, strata=dm.y)
    cv = cross_validate(_mean_model, dm, plan, risk_kind='misclass', label='prior')
    assert cv.roc is not None
    assert cv.auc == pytest.approx(0.5, abs=0.15)
    payload = cv.to_dict()
    assert payload["label"] == 'prior' and payload["k"] == 5 and "auc" in payload


def test_cv_missing_class_advises_stratification(rng):
    y = np.zeros(30)
    y[7] = 1
    dm = make_design(rng.normal(size=30), y, binary=True)
    with pytest.raises(ValidationError, match="stratified"):
        cross_validate(_mean_model, dm, make_folds(30, 5, seed=0), risk_kind='misclass')


def test_cv_rejects_mismatched_plan(linear_design):
    with pytest.raises(ValidationError):
        cross_validate(fit_ols, linear_design, make_folds(10, 2, seed=0))


def test_cv_parallel_matches_serial(linear_design):
    plan = make_folds(linear_design.n, 4, seed=6)
    serial = cross_validate(fit_ols, linear_design, plan, jobs=1)
    parallel = cross_validate(fit_ols, linear_design, plan, jobs=2)
    assert serial.fold_risks == parallel.fold_risks
    np.testing.assert_array_equal(serial.pooled_scores, parallel.pooled_scores)


# ── 부트스트랩 ────────────────────────────────────────────
def test_bootstrap_close_to_cv_for_mean_model(linear_design):
    dm = linear_design
    boot = bootstrap_validate(_mean_model, dm, B=200, seed=1)
    cv = cross_validate(_mean_model, dm, make_folds(dm.n, 10, seed=1))
    assert boot.risk == pytest.approx(cv.risk, rel=0.1)
    assert len(boot.replicate_risks) == 200
    assert all(s > 0 for s in boot.oob_sizes)


def test_bootstrap_deterministic(linear_design):
    a = bootstrap_validate(fit_ols, linear_design, B=10, seed=5)
    b = bootstrap_validate(fit_ols, linear_design, B=10, seed=5)
    assert a.replicate_risks == b.replicate_risks
    assert a.to_dict()["B"] == 10


def test_bootstrap_without_validation_rows():
    with pytest.raises(ValidationError):
        bootstrap_validate(_mean_model, make_design([1.0], [2.0]), B=1, seed=0)
    with pytest.raises(ValidationError):
        bootstrap_validate(_mean_model, make_design([1.0, 2.0], [2.0, 3.0]), B=0, seed=0)
