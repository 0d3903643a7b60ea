# twocultures/nonparam/additive.py
# 가법모형 backfitting
#   y = α + Σ_j m_j(x_j) + Lβ + ε
#   m_j ← Smooth_j(y - Lβ - Σ_{l≠j} m_l), 평균 0으로 재중심화
#   β  ← OLS(L, y - Σ m_l)   (L은 절편 + 선형 항)

from dataclasses import dataclass, field
import os

import numpy as np
import pandas as pd
from scipy.linalg import qr, solve_triangular

from nonparam.kernel import KernelSmoother, cv_curve, weights
from shared.errors import ValidationError
from utils.logger import get_logger

log = get_logger("nonparam.additive")

MAX_SWEEPS = 50
TOL = 1e-6
REFRESH_EVERY = 5
SMOOTHERS = ('nw', 'linear')
_H_GRID = np.geomspace(0.02, 1.0, 25)


@dataclass
class AdditiveFit:
    smooth_terms: tuple
    linear_terms: tuple
    linear_coef: np.ndarray           # [절편, 선형 항...]
    components: dict                  # 항 → 학습점에서의 m̂_j (평균 0)
    partials: dict                    # 항 → 마지막으로 평활한 부분잔차
    offsets: dict                     # 항 → 재중심화 상수
    bandwidths: dict
    train_x: dict                     # 항 → 학습 x_j
    fitted: np.ndarray
    residuals: np.ndarray
    sweeps: int
    converged: bool
    smoother: str = 'nw'
    kernel: str = 'gaussian'
    columns: dict = field(default_factory=dict)     # 항/선형항 → 설계행렬 열 위치
    history: list = field(default_factory=list)

    @property
    def intercept(self):
        return float(self.linear_coef[0])

    def _smooth_at(self, term, x):
        x = np.asarray(x, dtype=float)
        if self.smoother == 'linear':
            xt = self.train_x[term]
            xc = xt - xt.mean()
            slope = (xc @ self.partials[term]) / (xc @ xc)
            return slope * (x - xt.mean()) + self.partials[term].mean() - self.offsets[term]
        sm = KernelSmoother(self.train_x[term], self.partials[term], self.bandwidths[term], self.kernel)
        return weights(sm, x.reshape(-1, 1)) @ sm.y - self.offsets[term]

    def component(self, term, x):
        """m̂_j(x) 평가"""
        return self._smooth_at(term, x)

    def apply_smoother(self, term, values):
        """학습점에서 Smooth_j(values) - 평균 (고정점 검사용)"""
        sm_fit = _make_smoother(self.smoother, self.train_x[term], self.bandwidths[term], self.kernel)
        out = sm_fit @ np.asarray(values, dtype=float)
        return out - out.mean()

    def predict(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape[0], self.intercept)
        for k, term in enumerate(self.linear_terms, start=1):
            out += self.linear_coef[k] * x[:, self.columns[term]]
        for term in self.smooth_terms:
            out += self._smooth_at(term, x[:, self.columns[term]])
        return out

    def export_components(self, path, n_grid=100):
        """항별 (격자, 값) CSV: term,grid,value"""
        rows = []
        for term in self.smooth_terms:
            xt = self.train_x[term]
            grid = np.linspace(xt.min(), xt.max(), n_grid)
            for g, v in zip(grid, self._smooth_at(term, grid)):
                rows.append({"term": term, "grid": float(g), "value": float(v)})
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        pd.DataFrame(rows, columns=["term", "grid", "value"]).to_csv(path, index=False)
        log.info(f"💾 가법모형 성분 저장: {path}")
        return path

    def to_dict(self):
        return {
            "intercept": self.intercept,
            "smooth_terms": list(self.smooth_terms),
            "linear": {t: float(b) for t, b in zip(self.linear_terms, self.linear_coef[1:])},
            "bandwidths": {t: float(h) for t, h in self.bandwidths.items()},
            "sweeps": self.sweeps,
            "converged": self.converged,
        }


def _make_smoother(kind, x, h, kernel):
    """학습점에서의 n×n 평활행렬"""
    if kind == 'linear':
        xc = x - x.mean()
        n = len(x)
        return np.full((n, n), 1.0 / n) + np.outer(xc, xc) / (xc @ xc)
    sm = KernelSmoother(x, np.zeros_like(x), h, kernel)
    return weights(sm, x.reshape(-1, 1))


def _select_h(x, partial, kernel):
    sd = np.std(x)
    grid = _H_GRID * (sd if sd > 0 else 1.0)
    risks = cv_curve(x, partial, kernel, grid)
    if not np.any(np.isfinite(risks)):
        return float(grid[-1])
    return float(grid[int(np.argmin(risks))])


def fit_additive(dm, smooth_terms, linear_terms=None, smoother='nw', kernel='gaussian',
                 max_sweeps=MAX_SWEEPS, tol=TOL, refresh_every=REFRESH_EVERY):
    """backfitting 가법모형

    smooth_terms의 평활 대역폭은 부분잔차에 대한 LOOCV로 고르며
    refresh_every 회마다 다시 고른다. linear_terms=None이면 나머지 특징 열 전부.
    """
    if smoother not in SMOOTHERS:
        raise ValidationError(f"지원하지 않는 평활기: {smoother}")
    smooth_terms = tuple(smooth_terms)
    if not smooth_terms:
        raise ValidationError("평활 항이 하나 이상 필요합니다.")
    if linear_terms is None:
        linear_terms = tuple(c for c in dm.feature_names if c not in smooth_terms)
    linear_terms = tuple(linear_terms)
    overlap = set(smooth_terms) & set(linear_terms)
    if overlap:
        raise ValidationError(f"평활 항과 선형 항이 겹칩니다: {sorted(overlap)}")

    y = dm.y
    n = dm.n
    columns = {t: dm.col(t) for t in smooth_terms + linear_terms}
    xs = {t: dm.x[:, columns[t]].copy() for t in smooth_terms}
    for t, v in xs.items():
        if np.unique(v).size < 2:
            raise ValidationError(f"평활 항 '{t}'의 값이 상수입니다.")

    lin = np.column_stack([np.ones(n)] + [dm.x[:, columns[t]] for t in linear_terms])
    q, r = qr(lin, mode='economic')

    def ols(target):
        return solve_triangular(r, q.T @ target)

    comps = {t: np.zeros(n) for t in smooth_terms}
    partials = {t: np.zeros(n) for t in smooth_terms}
    offsets = {t: 0.0 for t in smooth_terms}
    bandwidths = {t: 0.0 for t in smooth_terms}
    smat = {}
    coef = ols(y)
    lin_fit = lin @ coef

    converged = False
    history = []
    sweep = 0
    for sweep in range(1, max_sweeps + 1):
        refresh = smoother == 'nw' and (sweep - 1) % refresh_every == 0
        delta = 0.0
        for t in smooth_terms:
            others = sum((comps[u] for u in smooth_terms if u != t), np.zeros(n))
            partial = y - lin_fit - others
            if t not in smat or refresh:
                if smoother == 'nw':
                    bandwidths[t] = _select_h(xs[t], partial, kernel)
                smat[t] = _make_smoother(smoother, xs[t], bandwidths[t] or 1.0, kernel)
            raw = smat[t] @ partial
            offsets[t] = float(raw.mean())
            new = raw - offsets[t]
            delta = max(delta, float(np.max(np.abs(new - comps[t]))))
            comps[t] = new
            partials[t] = partial

        coef = ols(y - sum(comps.values()))
        new_lin = lin @ coef
        delta = max(delta, float(np.max(np.abs(new_lin - lin_fit))))
        lin_fit = new_lin
        history.append(delta)
        log.debug(f"backfitting sweep={sweep} max change={delta:.3g}")
        if delta < tol:
            converged = True
            break

    if not converged:
        log.warning(f"⚠️ backfitting {max_sweeps}회 안에 수렴하지 않음 (마지막 변화 {history[-1]:.3g})")

    fitted = lin_fit + sum(comps.values())
    return AdditiveFit(
        smooth_terms=smooth_terms, linear_terms=linear_terms, linear_coef=coef,
        components=comps, partials=partials, offsets=offsets, bandwidths=bandwidths,
        train_x=xs, fitted=fitted, residuals=y - fitted, sweeps=sweep, converged=converged,
        smoother=smoother, kernel=kernel, columns=columns, history=history,
    )
