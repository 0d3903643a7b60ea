# twocultures/tests/test_nonparam.py

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_design
from linmod import fit_ols, fit_ridge
from nonparam import (KernelSmoother, cv_curve, fit_additive, fit_kernel, fit_knn, fit_knn_design,
                      knn_predict, loocv_refit, loocv_risk, nw_predict, select_bandwidth, smoother_matrix,
                      smoother_trace)
from shared.errors import EmptyNeighborhoodError, NotLinearSmootherError, ValidationError


def _sine_data(seed, n=200):
    r = np.random.default_rng(seed)
    x = r.uniform(0.0, 1.0, size=n)
    return x, np.sin(4.0 * x) + 0.2 * r.normal(size=n)


# ── Nadaraya-Watson ──────────────────────────────────────
def test_nw_constant_response():
    sm = KernelSmoother(np.linspace(0, 1, 20), np.full(20, 3.7), 0.1)
    np.testing.assert_allclose(nw_predict(sm, np.array([0.0, 0.33, 0.9, 2.0])), 3.7)


def test_nw_infinite_bandwidth_is_mean():
    x, y = _sine_data(0, 50)
    sm = KernelSmoother(x, y, 1e6)
    assert nw_predict(sm, 0.5) == pytest.approx(y.mean(), abs=1e-6)


def test_nw_matches_hand_formula():
    x = np.array([0.0, 1.0, 2.0])
    y = np.array([0.0, 1.0, 4.0])
    h = 0.5
    k = np.exp(-0.5 * ((1.0 - x) / h) ** 2)
    expected = float(k @ y / k.sum())
    assert nw_predict(KernelSmoother(x, y, h), 1.0) == pytest.approx(expected, rel=1e-12)


def test_epanechnikov_empty_window():
    sm = KernelSmoother([0.0, 1.0, 2.0], [0.0, 1.0, 4.0], 0.5, kernel='epanechnikov')
    assert nw_predict(sm, 1.2) == pytest.approx(1.0)
    with pytest.raises(EmptyNeighborhoodError):
        nw_predict(sm, 10.0)


def test_smoother_rejects_bad_inputs():
    with pytest.raises(ValidationError):
        KernelSmoother([0.0, 1.0], [1.0, 2.0], 0.0)
    with pytest.raises(ValidationError):
        KernelSmoother([0.0, 1.0], [1.0, 2.0], 0.5, kernel='box')
    with pytest.raises(ValidationError):
        KernelSmoother([0.0, 1.0, 2.0], [1.0, 2.0], 0.5)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 5.0), st.sampled_from(['gaussian', 'epanechnikov']))
def test_weights_form_a_simplex(seed, h, kernel):
    r = np.random.default_rng(seed)
    x = r.uniform(0, 1, size=15)
    sm = KernelSmoother(x, r.normal(size=15), h, kernel)
    s = smoother_matrix(sm)
    assert np.all(s >= 0)
    np.testing.assert_allclose(s.sum(axis=1), 1.0, atol=1e-12)


# ── LOOCV / 대역폭 ───────────────────────────────────────
@pytest.mark.parametrize("kernel,h", [('gaussian', 0.05), ('gaussian', 0.3), ('epanechnikov', 0.5)])
def test_loocv_shortcut_equals_refit(kernel, h):
    x, y = _sine_data(1, 50)
    sm = KernelSmoother(x, y, h, kernel)
    assert loocv_risk(sm) == pytest.approx(loocv_refit(sm), abs=1e-10)


def test_cv_curve_is_u_shaped():
    x, y = _sine_data(2)
    grid = np.geomspace(0.002, 2.0, 61)
    h_star = select_bandwidth(x, y, grid=grid)
    sm = KernelSmoother(x, y, h_star)
    best = loocv_risk(sm)
    assert best < loocv_risk(sm, 10.0 * h_star)
    assert best < loocv_risk(sm, h_star / 10.0)
    assert best == pytest.approx(np.min(cv_curve(x, y, 'gaussian', grid)))


def test_duplicated_data_prefers_smaller_bandwidth():
    grid = np.geomspace(0.002, 1.0, 40)
    smaller = 0
    for seed in range(10):
        x, y = _sine_data(seed, 50)
        h = select_bandwidth(x, y, grid=grid)
        h_dup = select_bandwidth(np.concatenate([x, x]), np.concatenate([y, y]), grid=grid)
        smaller += h_dup < h
    assert smaller >= 9


def test_select_bandwidth_rejects_bad_grid():
    x, y = _sine_data(3, 20)
    with pytest.raises(ValidationError):
        select_bandwidth(x, y, grid=[])
    with pytest.raises(ValidationError):
        select_bandwidth(x, y, grid=[0.1, -1.0])


def test_fit_kernel_on_design():
    x, y = _sine_data(4, 120)
    dm = make_design(x, y)
    sm = fit_kernel(dm)
    pred = sm.predict(dm.x)
    assert np.mean((y - pred) ** 2) < 0.5 * np.var(y)
    assert sm.to_dict()["kernel"] == 'gaussian'


# ── kNN ──────────────────────────────────────────────────
def test_knn_full_neighborhood_is_mean(rng):
    x = rng.normal(size=(30, 2))
    y = rng.normal(size=30)
    model = fit_knn(x, y, 30)
    np.testing.assert_allclose(model.predict(rng.normal(size=(5, 2))), y.mean())


def test_knn_one_neighbor_recovers_training_point(rng):
    x = rng.normal(size=(30, 2))
    y = rng.normal(size=30)
    np.testing.assert_allclose(fit_knn(x, y, 1).predict(x), y)


def test_knn_matches_sort_oracle():
    x = np.array([0.3, 1.7, 0.9, 2.5, 1.1])
    y = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    for q in (0.0, 1.0, 1.4, 3.0):
        order = np.argsort(np.abs(x - q), kind='stable')[:2]
        assert knn_predict((x, y), 2, q) == pytest.approx(y[order].mean())


def test_knn_ties_prefer_lower_row():
    # 평균 0, 표준편차 1이라 표준화 후에도 거리가 정확히 같다
    x = np.array([-1.0, 1.0])
    y = np.array([10.0, 20.0])
    assert knn_predict((x, y), 1, 0.0) == 10.0


def test_knn_rejects_bad_k(rng):
    x = rng.normal(size=(5, 1))
    with pytest.raises(ValidationError):
        fit_knn(x, x[:, 0], 0)
    with pytest.raises(ValidationError):
        fit_knn(x, x[:, 0], 6)


def test_knn_design_uses_feature_columns(linear_design):
    model = fit_knn_design(linear_design, 5)
    assert model.columns == (1, 2, 3)
    pred = model.predict(linear_design.x)
    assert np.mean((linear_design.y - pred) ** 2) < np.var(linear_design.y)


# ── 평활행렬 trace ───────────────────────────────────────
def test_trace_of_ols_is_p(linear_design):
    assert smoother_trace(fit_ols(linear_design)) == pytest.approx(linear_design.p, abs=1e-8)


def test_trace_of_ridge_orthonormal(orthonormal_design):
    dm = orthonormal_design
    for lam in (0.5, 2.0):
        fit = fit_ridge(dm, lam * dm.n)
        assert smoother_trace(fit) == pytest.approx(1.0 + 4.0 / (1.0 + lam), abs=1e-8)


def test_trace_of_nw_interpolation_limit():
    x, y = _sine_data(5, 40)
    assert smoother_trace(KernelSmoother(x, y, 1e-6)) == pytest.approx(40.0, abs=1e-8)
    assert smoother_trace(KernelSmoother(x, y, 1e6)) == pytest.approx(1.0, abs=1e-6)


def test_trace_requires_training_points(rng):
    x, y = _sine_data(5, 20)
    sm = KernelSmoother(x, y, 0.2)
    assert smoother_trace(sm, x) == pytest.approx(smoother_trace(sm), abs=1e-12)
    with pytest.raises(ValidationError):
        smoother_trace(sm, rng.uniform(size=5))


def test_trace_rejects_non_linear_model(rng):
    with pytest.raises(NotLinearSmootherError):
        smoother_trace(fit_knn(rng.normal(size=(10, 1)), rng.normal(size=10), 3))


# ── 가법모형 ─────────────────────────────────────────────
def test_additive_linear_smoothers_reproduce_ols(linear_design):
    dm = linear_design
    fit = fit_additive(dm, ['x1', 'x2'], smoother='linear', tol=1e-12, max_sweeps=200)
    ols = fit_ols(dm)
    assert fit.converged
    np.testing.assert_allclose(fit.fitted, ols.fitted, atol=1e-6)
    slope = fit.component('x1', np.array([0.0, 1.0]))
    assert slope[1] - slope[0] == pytest.approx(ols.beta[1], abs=1e-6)
    assert fit.linear_coef[1] == pytest.approx(ols.beta[3], abs=1e-6)


def test_additive_identifiability_and_fixed_point(rng):
    x = rng.uniform(-1, 1, size=(150, 2))
    y = np.sin(3 * x[:, 0]) + x[:, 1] ** 2 + 0.1 * rng.normal(size=150)
    dm = make_design(x, y)
    fit = fit_additive(dm, ['x1', 'x2'], tol=1e-10, max_sweeps=200, refresh_every=1000)
    assert fit.converged
    assert abs(fit.residuals.mean()) < 1e-10
    for term in fit.smooth_terms:
        assert abs(fit.components[term].mean()) < 1e-10
        partial = fit.residuals + fit.components[term]
        np.testing.assert_allclose(fit.apply_smoother(term, partial), fit.components[term], atol=1e-6)
    np.testing.assert_allclose(fit.predict(dm.x), fit.fitted, atol=1e-10)


def test_additive_on_linear_data(linear_design):
    dm = linear_design
    fit = fit_additive(dm, ['x1', 'x2'])
    x1 = dm.x[:, 1]
    assert np.corrcoef(fit.components['x1'], x1)[0, 1] > 0.98
    assert fit.linear_terms == ('x3',)
    assert fit.linear_coef[1] == pytest.approx(0.5, abs=0.1)
    assert np.mean(fit.residuals ** 2) < 0.2


def test_additive_rejects_bad_terms(linear_design):
    with pytest.raises(ValidationError):
        fit_additive(linear_design, [])
    with pytest.raises(ValidationError):
        fit_additive(linear_design, ['x1'], linear_terms=['x1'])
    with pytest.raises(ValidationError):
        fit_additive(linear_design, ['x1'], smoother='spline')


def test_additive_export_components(linear_design, tmp_path):
    fit = fit_additive(linear_design, ['x1', 'x2'])
    path = fit.export_components(tmp_path / "parts" / "components.csv", n_grid=25)
    frame = pd.read_csv(path)
    assert list(frame.columns) == ['term', 'grid', 'value']
    assert len(frame) == 50
    assert set(frame['term']) == {'x1', 'x2'}
