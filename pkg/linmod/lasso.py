# twocultures/linmod/lasso.py
# Lasso 경로: 좌표하강 + soft-thresholding, λ 격자를 따라 warm start
#
# 목적함수 (표준화된 열, 절편 벌점 없음):
#   gaussian : (1/2n)‖y - β₀ - Xβ‖² + λ‖β‖₁
#   binomial : -(1/n)·logL(β₀, β) + λ‖β‖₁   (IRLS 바깥 루프 + 가중 좌표하강)

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, xlogy

from dataframe.resample import make_folds
from shared.errors import ValidationError
from utils.logger import get_logger

log = get_logger("linmod.lasso")

N_LAMBDA = 100
LAMBDA_RATIO = 1e-3
TOL = 1e-7
MAX_SWEEPS = 100_000
_W_FLOOR = 1e-10


def soft_threshold(z, gamma):
    return np.sign(z) * np.maximum(np.abs(z) - gamma, 0.0)


@dataclass
class LassoPath:
    lambdas: np.ndarray
    betas: np.ndarray             # p × |grid|, 원래 척도 (절편 행 포함)
    active_sets: list
    n_iter: list
    column_names: tuple
    family: str = 'gaussian'
    converged: list = field(default_factory=list)

    @property
    def all_converged(self):
        return all(self.converged)

    def coef(self, i):
        return self.betas[:, i]

    def index_of(self, lam):
        """격자에서 lam에 가장 가까운 위치"""
        return int(np.argmin(np.abs(self.lambdas - lam)))

    def predict(self, x, i):
        eta = np.asarray(x, dtype=float) @ self.betas[:, i]
        return expit(eta) if self.family == 'binomial' else eta

    def to_dict(self):
        return {
            "family": self.family,
            "lambdas": self.lambdas.tolist(),
            "columns": list(self.column_names),
            "betas": self.betas.T.tolist(),
            "active_sets": [list(a) for a in self.active_sets],
            "n_iter": list(self.n_iter),
            "converged": list(self.converged),
        }


def lambda_max(dm):
    """모든 기울기가 0이 되는 최소 λ (표준화 설계 기준)"""
    xs = dm.standardize().x
    pen = dm.penalized_mask()
    y = dm.y
    return float(np.max(np.abs(xs[:, pen].T @ (y - y.mean()))) / dm.n) if pen.any() else 0.0


def lambda_grid(dm, n_lambda=N_LAMBDA, ratio=LAMBDA_RATIO):
    top = lambda_max(dm)
    if top <= 0:
        return np.array([0.0])
    return np.geomspace(top, ratio * top, n_lambda)


def _cd_gaussian(xs, y, lam, b0, beta, col_sq, max_sweeps):
    """가중치 없는 좌표하강 한 λ. (b0, beta, sweeps, converged)"""
    n = len(y)
    r = y - b0 - xs @ beta
    for sweep in range(1, max_sweeps + 1):
        delta = 0.0
        shift = r.mean()
        b0 += shift
        r -= shift
        for j in range(xs.shape[1]):
            if col_sq[j] == 0:
                continue
            xj = xs[:, j]
            old = beta[j]
            new = soft_threshold(xj @ r / n + col_sq[j] * old, lam) / col_sq[j]
            if new != old:
                r -= (new - old) * xj
                beta[j] = new
                delta = max(delta, abs(new - old))
        if delta < TOL:
            return b0, beta, sweep, True
    return b0, beta, max_sweeps, False


def _cd_weighted(xs, z, w, lam, b0, beta, max_sweeps):
    """가중 최소제곱 (1/2n)Σ wᵢ(zᵢ - b0 - xᵢβ)² + λ‖β‖₁ 좌표하강"""
    n = len(z)
    wsum = w.sum()
    col_wsq = (w[:, None] * xs ** 2).sum(axis=0) / n
    r = z - b0 - xs @ beta
    for sweep in range(1, max_sweeps + 1):
        shift = (w @ r) / wsum
        b0 += shift
        r -= shift
        delta = abs(shift)
        for j in range(xs.shape[1]):
            if col_wsq[j] <= 0:
                continue
            xj = xs[:, j]
            old = beta[j]
            new = soft_threshold((w * xj) @ r / n + col_wsq[j] * old, lam) / col_wsq[j]
            if new != old:
                r -= (new - old) * xj
                beta[j] = new
                delta = max(delta, abs(new - old))
        if delta < TOL:
            return b0, beta, sweep, True
    return b0, beta, max_sweeps, False


def _binomial_dev(y, eta):
    mu = expit(eta)
    return -2.0 * float(np.sum(xlogy(y, mu) + xlogy(1 - y, 1 - mu)))


def _cd_binomial(xs, y, lam, b0, beta, max_sweeps, max_outer=50):
    sweeps = 0
    dev_old = _binomial_dev(y, b0 + xs @ beta)
    for _ in range(max_outer):
        eta = b0 + xs @ beta
        mu = expit(eta)
        w = np.maximum(mu * (1 - mu), _W_FLOOR)
        z = eta + (y - mu) / w
        b0, beta, used, ok = _cd_weighted(xs, z, w, lam, b0, beta, max_sweeps)
        sweeps += used
        if not ok:
            return b0, beta, sweeps, False
        dev = _binomial_dev(y, b0 + xs @ beta)
        if abs(dev - dev_old) < 1e-9 * (abs(dev) + 0.1):
            return b0, beta, sweeps, True
        dev_old = dev
    return b0, beta, sweeps, False


def fit_lasso(dm, lambdas=None, family='gaussian', max_sweeps=MAX_SWEEPS):
    """λ 격자(내림차순) 전체의 Lasso 해 경로

    lambdas=None이면 λ_max에서 0.001·λ_max까지 로그 간격 100개.
    계수는 원래 척도로 돌려준다.
    """
    if family not in ('gaussian', 'binomial'):
        raise ValueError(f"지원하지 않는 lasso family: {family}")
    if not dm.has_intercept:
        raise ValidationError("lasso는 절편이 있는 설계행렬이 필요합니다.")
    if family == 'binomial' and not dm.binary:
        raise ValidationError("binomial lasso에는 이진 반응변수가 필요합니다.")

    std = dm.standardize()
    pen = dm.penalized_mask()
    xs = std.x[:, pen]
    y = dm.y
    names = [c for c, keep in zip(dm.column_names, pen) if keep]

    if lambdas is None:
        lambdas = lambda_grid(dm)
    lambdas = np.sort(np.asarray(lambdas, dtype=float))[::-1]
    if np.any(lambdas < 0):
        raise ValidationError("λ는 0 이상이어야 합니다.")

    col_sq = (xs ** 2).sum(axis=0) / dm.n
    if family == 'gaussian':
        b0 = float(y.mean())
    else:
        ybar = np.clip(y.mean(), 1e-10, 1 - 1e-10)
        b0 = float(np.log(ybar / (1 - ybar)))
    beta = np.zeros(xs.shape[1])

    i0 = dm.col('(Intercept)')
    betas = np.zeros((dm.p, len(lambdas)))
    active, n_iter, converged = [], [], []
    for k, lam in enumerate(lambdas):
        if family == 'gaussian':
            b0, beta, sweeps, ok = _cd_gaussian(xs, y, lam, b0, beta, col_sq, max_sweeps)
        else:
            b0, beta, sweeps, ok = _cd_binomial(xs, y, lam, b0, beta, max_sweeps)
        if not ok:
            log.warning(f"⚠️ lasso 수렴 실패 (λ={lam:.4g}, sweeps={sweeps})")
        full = np.zeros(dm.p)
        full[pen] = beta
        full[i0] = b0
        betas[:, k] = std.destandardize_coef(full)
        active.append(tuple(nm for nm, b in zip(names, beta) if b != 0.0))
        n_iter.append(sweeps)
        converged.append(ok)
        log.debug(f"λ={lam:.4g} |A|={len(active[-1])} sweeps={sweeps}")

    return LassoPath(lambdas, betas, active, n_iter, dm.column_names, family, converged)


def entry_order(path):
    """처음 0이 아니게 되는 순서대로 변수 이름 (같은 λ에서는 |계수| 큰 순)"""
    order = []
    for k in range(len(path.lambdas)):
        fresh = [nm for nm in path.active_sets[k] if nm not in order]
        fresh.sort(key=lambda nm: -abs(path.betas[path.column_names.index(nm), k]))
        order.extend(fresh)
    return order


def cv_lambda(dm, family='gaussian', k=10, seed=0, lambdas=None):
    """k-폴드 CV 위험이 최소인 λ (gaussian: 제곱오차, binomial: 이탈도)"""
    if lambdas is None:
        lambdas = lambda_grid(dm)
    lambdas = np.sort(np.asarray(lambdas, dtype=float))[::-1]
    plan = make_folds(dm.n, k, seed)
    total = np.zeros(len(lambdas))
    for j in range(1, k + 1):
        train, test = plan.train_test(j)
        path = fit_lasso(dm.take(train), lambdas, family)
        y = dm.y[test]
        for i in range(len(lambdas)):
            pred = path.predict(dm.x[test], i)
            if family == 'gaussian':
                total[i] += np.sum((y - pred) ** 2)
            else:
                pred = np.clip(pred, 1e-15, 1 - 1e-15)
                total[i] -= 2.0 * np.sum(xlogy(y, pred) + xlogy(1 - y, 1 - pred))
    best = int(np.argmin(total))
    return float(lambdas[best]), total / dm.n
