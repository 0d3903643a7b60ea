# twocultures/linmod/glm.py
# 일반화 선형모형 (IRLS)
#   z = η + (y - μ)·g'(μ),  W = (dμ/dη)² / V(μ)
#   β ← (XᵀWX)⁻¹XᵀWz  (가중 QR로 풀이)

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, gammaln, log_ndtr, ndtr, ndtri, xlogy

from linmod.ols import gaussian_log_lik, qr_solve, penalized_criteria
from shared.errors import ValidationError
from utils.logger import get_logger

log = get_logger("linmod.glm")

MAX_ITER = 50
DEV_TOL = 1e-9
W_FLOOR = 1e-10
SEPARATION_NORM = 1e4
_MU_EPS = 1e-15
POISSON_MU_FLOOR = 1e-8
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)

FAMILIES = {
    'gaussian': 'gaussian-identity',
    'gaussian-identity': 'gaussian-identity',
    'ols': 'gaussian-identity',
    'logit': 'binomial-logit',
    'binomial': 'binomial-logit',
    'binomial-logit': 'binomial-logit',
    'probit': 'binomial-probit',
    'binomial-probit': 'binomial-probit',
    'poisson': 'poisson-log',
    'poisson-log': 'poisson-log',
}


def resolve_family(name):
    try:
        return FAMILIES[name]
    except KeyError:
        raise ValueError(f"지원하지 않는 family: {name} (가능: {', '.join(sorted(set(FAMILIES.values())))})") from None


# ── 링크별 (μ, 가중치, 작업반응) ─────────────────────────
def _inverse_link(family, eta):
    if family == 'gaussian-identity':
        return eta.copy()
    if family == 'binomial-logit':
        return np.clip(expit(eta), _MU_EPS, 1 - _MU_EPS)
    if family == 'binomial-probit':
        return np.clip(ndtr(eta), _MU_EPS, 1 - _MU_EPS)
    return np.exp(np.clip(eta, -700, 700))


def _link(family, mu):
    if family == 'gaussian-identity':
        return mu.copy()
    if family == 'binomial-logit':
        return np.log(mu / (1 - mu))
    if family == 'binomial-probit':
        return ndtri(mu)
    return np.log(mu)


def _working(family, y, eta, mu):
    """IRLS 가중치 w와 작업반응 z"""
    if family == 'gaussian-identity':
        return np.ones_like(y), y.copy()
    if family == 'binomial-logit':
        w = np.maximum(mu * (1 - mu), W_FLOOR)
        return w, eta + (y - mu) / w
    if family == 'binomial-probit':
        # |η|가 크면 φ(η), Φ(η)가 모두 0/1로 붙으므로 로그 공간에서 비율 계산
        e = np.clip(eta, -37.0, 37.0)
        log_phi = -0.5 * e ** 2 - _HALF_LOG_2PI
        w = np.exp(2 * log_phi - log_ndtr(e) - log_ndtr(-e))
        w = np.maximum(w, W_FLOOR)
        return w, eta + (y - mu) * np.exp(-log_phi)
    w = np.maximum(mu, W_FLOOR)
    return w, eta + (y - mu) / mu


def deviance(family, y, mu):
    if family == 'gaussian-identity':
        return float(np.sum((y - mu) ** 2))
    if family.startswith('binomial'):
        return -2.0 * float(np.sum(xlogy(y, mu) + xlogy(1 - y, 1 - mu)))
    return 2.0 * float(np.sum(xlogy(y, y / mu) - (y - mu)))


def log_likelihood(family, y, mu):
    if family == 'gaussian-identity':
        return float(gaussian_log_lik(np.sum((y - mu) ** 2), len(y)))
    if family.startswith('binomial'):
        return -0.5 * deviance(family, y, mu)
    return float(np.sum(xlogy(y, mu) - mu - gammaln(y + 1)))


@dataclass
class GlmFit:
    family: str
    beta: np.ndarray
    linear_predictor: np.ndarray
    mu: np.ndarray
    deviance: float
    null_deviance: float
    aic: float
    iterations: int
    converged: bool
    column_names: tuple = ()
    vcov: np.ndarray = None
    log_lik: float = 0.0
    bic: float = 0.0
    aicc: float = 0.0

    @property
    def n(self):
        return len(self.mu)

    @property
    def df(self):
        return len(self.beta)

    @property
    def std_errors(self):
        return None if self.vcov is None else np.sqrt(np.clip(np.diag(self.vcov), 0, None))

    def predict_link(self, x):
        return np.asarray(x, dtype=float) @ self.beta

    def predict(self, x):
        """평균 척도 예측 μ̂ (분류에서는 P(Y=1|x))"""
        return _inverse_link(self.family, self.predict_link(x))

    def to_dict(self):
        se = self.std_errors
        return {
            "family": self.family,
            "coefficients": {nm: float(b) for nm, b in zip(self.column_names, self.beta)},
            "std_errors": None if se is None else [float(s) for s in se],
            "deviance": self.deviance,
            "null_deviance": self.null_deviance,
            "aic": self.aic,
            "bic": self.bic,
            "log_lik": self.log_lik,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def _check_response(family, y):
    if family.startswith('binomial') and not np.all((y == 0) | (y == 1)):
        raise ValidationError("binomial family는 y ∈ {0,1} 이어야 합니다.")
    if family == 'poisson-log' and np.any(y < 0):
        raise ValidationError("poisson family는 y ≥ 0 이어야 합니다.")


def _start_mu(family, y):
    if family.startswith('binomial'):
        return (y + 0.5) / 2.0
    if family == 'poisson-log':
        return y + 0.1
    return y.copy()


def fit_glm(dm, family='logit', max_iter=MAX_ITER):
    """IRLS 적합. 상대 이탈도 변화 < 1e-9 또는 max_iter회에서 멈춘다."""
    family = resolve_family(family)
    y = dm.y
    _check_response(family, y)
    if dm.n <= dm.p:
        raise ValidationError(f"관측 수(n={dm.n})가 열 수(p={dm.p})보다 많아야 합니다.")

    mu = _start_mu(family, y)
    eta = _link(family, mu)
    dev_old = np.inf
    beta = np.zeros(dm.p)
    converged = False
    xtwx_inv = None
    it = 0
    for it in range(1, max_iter + 1):
        w, z = _working(family, y, eta, mu)
        sw = np.sqrt(w)
        beta, xtwx_inv, _ = qr_solve(dm.x * sw[:, None], z * sw, dm.column_names)
        eta = dm.x @ beta
        mu = _inverse_link(family, eta)
        dev = deviance(family, y, mu)
        log.debug(f"IRLS {family} iter={it} deviance={dev:.10g}")

        if np.linalg.norm(beta) > SEPARATION_NORM:
            log.warning(f"⚠️ {family}: 계수 발산 (‖β‖ > {SEPARATION_NORM:g}), 완전 분리 의심")
            converged = False
            break
        if family == 'gaussian-identity' or abs(dev - dev_old) / (abs(dev) + 0.1) < DEV_TOL:
            converged = True
            break
        dev_old = dev
    else:
        log.warning(f"⚠️ {family}: IRLS {max_iter}회 안에 수렴하지 않음")

    # 적합 확률이 0/1에 붙으면 β가 더 자라지 않는다 (완전 분리)
    if converged and family.startswith('binomial') and np.any(np.minimum(mu, 1 - mu) <= 10 * _MU_EPS):
        log.warning(f"⚠️ {family}: 적합 확률이 0 또는 1에 도달, 완전 분리 의심")
        converged = False
    # 적합 평균이 0에 붙으면 MLE가 경계 밖에 있다
    if converged and family == 'poisson-log' and np.any(mu < POISSON_MU_FLOOR):
        log.warning(f"⚠️ {family}: 적합 평균이 0에 도달, 유한한 MLE 없음")
        converged = False

    if dm.has_intercept:
        mu0 = np.full_like(y, y.mean())
        if family == 'poisson-log':
            mu0 = np.maximum(mu0, _MU_EPS)
        elif family.startswith('binomial'):
            mu0 = np.clip(mu0, _MU_EPS, 1 - _MU_EPS)
    else:
        mu0 = _inverse_link(family, np.zeros_like(y))
    null_dev = deviance(family, y, mu0)

    ll = log_likelihood(family, y, mu)
    aic, aicc, bic = penalized_criteria(-2.0 * ll, dm.p, dm.n)
    dispersion = 1.0
    if family == 'gaussian-identity':
        dispersion = dev / (dm.n - dm.p)
    return GlmFit(
        family=family, beta=beta, linear_predictor=eta, mu=mu, deviance=dev,
        null_deviance=null_dev, aic=aic, iterations=it, converged=converged,
        column_names=dm.column_names, vcov=dispersion * xtwx_inv,
        log_lik=ll, bic=bic, aicc=aicc,
    )
