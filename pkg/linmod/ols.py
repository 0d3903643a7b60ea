# twocultures/linmod/ols.py
# 최소제곱(OLS)과 Ridge 추정, 적합 진단값, 정보기준
# 정규방정식은 직교(QR) 분해로 풀며 (XᵀX)⁻¹을 직접 만들지 않는다.

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import qr, solve_triangular

from shared.errors import RankDeficientError, ValidationError
from utils.logger import get_logger

log = get_logger("linmod")

_LOG_2PI = np.log(2.0 * np.pi)


@dataclass
class LinearFit:
    beta: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    sigma2_hat: float
    vcov: np.ndarray
    df: float
    log_lik: float
    deviance: float
    r2: float
    adj_r2: float
    aic: float
    aicc: float
    bic: float
    cp: float
    column_names: tuple = ()
    method: str = 'ols'
    lam: float = 0.0
    hat_diag: np.ndarray = None        # 평활행렬 대각 s_ii (선형 평활기일 때)
    risk_trace: list = field(default_factory=list)
    converged: bool = True

    @property
    def n(self):
        return len(self.fitted)

    @property
    def rss(self):
        return float(self.residuals @ self.residuals)

    @property
    def std_errors(self):
        if self.vcov is None:
            return None
        return np.sqrt(np.clip(np.diag(self.vcov), 0.0, None))

    @property
    def t_stats(self):
        se = self.std_errors
        if se is None:
            return None
        with np.errstate(divide='ignore', invalid='ignore'):
            return self.beta / se

    def predict(self, x):
        return np.asarray(x, dtype=float) @ self.beta

    def to_dict(self):
        se = self.std_errors
        return {
            "method": self.method,
            "lambda": self.lam,
            "coefficients": {name: float(b) for name, b in zip(self.column_names, self.beta)},
            "std_errors": None if se is None else [float(s) for s in se],
            "sigma2_hat": self.sigma2_hat,
            "df": self.df,
            "log_lik": self.log_lik,
            "deviance": self.deviance,
            "r2": self.r2,
            "adj_r2": self.adj_r2,
            "aic": self.aic,
            "aicc": self.aicc,
            "bic": self.bic,
            "cp": self.cp,
            "converged": self.converged,
        }


def gaussian_log_lik(rss, n):
    """σ²를 최대우도(RSS/n)로 대입한 정규 로그우도"""
    return -0.5 * n * (_LOG_2PI + np.log(max(rss, 1e-300) / n) + 1.0)


def penalized_criteria(m2loglik, k, n):
    aicc = m2loglik + 2.0 * k * n / (n - k - 1) if n > k + 1 else float('nan')
    return m2loglik + 2.0 * k, aicc, m2loglik + np.log(n) * k


def summarize_fit(dm, beta, vcov, df, hat_diag, method, lam=0.0):
    """계수 → LinearFit (잔차, R², 정보기준, Cp)"""
    y = dm.y
    n = dm.n
    fitted = dm.x @ beta
    resid = y - fitted
    rss = float(resid @ resid)
    if dm.has_intercept:
        tss = float(np.sum((y - y.mean()) ** 2))
    else:
        tss = float(y @ y)
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    adj = 1.0 - (1.0 - r2) * (n - 1) / (n - df) if n > df else float('nan')
    sigma2 = rss / (n - df) if n > df else float('nan')
    ll = gaussian_log_lik(rss, n)
    aic, aicc, bic = penalized_criteria(-2.0 * ll, df, n)
    cp = rss / n + 2.0 * sigma2 * df / n
    if vcov is not None:
        vcov = sigma2 * vcov
    return LinearFit(
        beta=beta, fitted=fitted, residuals=resid, sigma2_hat=sigma2, vcov=vcov, df=float(df),
        log_lik=float(ll), deviance=rss, r2=r2, adj_r2=adj, aic=aic, aicc=aicc, bic=bic, cp=cp,
        column_names=dm.column_names, method=method, lam=lam, hat_diag=hat_diag,
    )


def _check_rank(r, piv, names):
    d = np.abs(np.diag(r))
    tol = (d[0] if d.size else 0.0) * max(r.shape) * np.finfo(float).eps * 100
    rank = int(np.sum(d > tol))
    if rank < r.shape[1]:
        raise RankDeficientError(names[piv[rank]])


def qr_solve(x, y, names=None):
    """피벗 QR 최소제곱: (β, (XᵀX)⁻¹, 레버리지 h_ii)"""
    n, p = x.shape
    q, r, piv = qr(x, mode='economic', pivoting=True)
    _check_rank(r, piv, names or [f"x{j}" for j in range(p)])
    beta = np.empty(p)
    beta[piv] = solve_triangular(r, q.T @ y)
    r_inv = solve_triangular(r, np.eye(p))
    xtx_inv = np.empty((p, p))
    xtx_inv[np.ix_(piv, piv)] = r_inv @ r_inv.T
    return beta, xtx_inv, np.sum(q ** 2, axis=1)


def fit_ols(dm):
    """최소제곱 적합 (QR)"""
    if dm.n <= dm.p:
        raise ValidationError(f"관측 수(n={dm.n})가 열 수(p={dm.p})보다 많아야 합니다.")
    beta, xtx_inv, hat = qr_solve(dm.x, dm.y, dm.column_names)
    return summarize_fit(dm, beta, xtx_inv, dm.p, hat, 'ols')


def penalty_scale(dm, standardize=True):
    """열별 벌점 가중치: 절편 0, 나머지는 표준편차(분모 n) 또는 1"""
    pen = dm.penalized_mask().astype(float)
    if not standardize:
        return pen
    sd = dm.x.std(axis=0)
    return pen * np.where(sd > 0, sd, 1.0)


def fit_ridge(dm, lam, standardize=True):
    """Ridge: min ‖y - Xβ‖² + λ Σ_j (s_j β_j)², 절편은 벌점 없음

    s_j는 열의 표준편차(standardize=True)이므로 표준화된 열에서의
    (XᵀX + λI)⁻¹Xᵀy 와 같은 해를 원래 척도로 돌려준다.
    """
    if lam < 0:
        raise ValidationError(f"λ는 0 이상이어야 합니다: {lam}")
    if lam == 0:
        fit = fit_ols(dm)
        fit.method = 'ridge'
        return fit

    n, p = dm.x.shape
    d = penalty_scale(dm, standardize)
    x_aug = np.vstack([dm.x, np.sqrt(lam) * np.diag(d)])
    y_aug = np.concatenate([dm.y, np.zeros(p)])
    q, r = qr(x_aug, mode='economic')
    beta = solve_triangular(r, q.T @ y_aug)

    q1 = q[:n]
    hat = np.sum(q1 ** 2, axis=1)
    r_inv = solve_triangular(r, np.eye(p))
    a_inv = r_inv @ r_inv.T
    xtx = dm.x.T @ dm.x
    sandwich = a_inv @ xtx @ a_inv
    return summarize_fit(dm, beta, sandwich, float(hat.sum()), hat, 'ridge', lam)


def information_criteria(fit):
    """AIC / AICc / BIC / Cp  (Deviance = -2·logL, p = 추정 계수 개수)"""
    n = fit.n
    k = fit.df
    if n <= k + 1:
        raise ValidationError(f"AICc 계산 불가: n({n}) ≤ p({k}) + 1")
    aic, aicc, bic = penalized_criteria(-2.0 * fit.log_lik, k, n)
    cp = None
    if getattr(fit, 'hat_diag', None) is not None:
        rss = float(np.sum(fit.residuals ** 2))
        cp = rss / n + 2.0 * fit.sigma2_hat * float(np.sum(fit.hat_diag)) / n
    return {"aic": aic, "aicc": aicc, "bic": bic, "cp": cp}


def omitted_variable_bias(x1, x2, beta2):
    """X₂를 빠뜨렸을 때 b̂₁의 편의: (X₁ᵀX₁)⁻¹X₁ᵀX₂β₂"""
    coef, _, _ = qr_solve(np.asarray(x1, float), np.asarray(x2, float) @ np.asarray(beta2, float))
    return coef
