# twocultures/evaluation/losses.py
# 손실함수와 (부분)기울기
#   ℓ(y, ŷ): y는 관측값, ŷ는 예측값(점수)
#   quantile  : |y-ŷ|·|τ - 1{y≤ŷ}|   (최소화 상수 = τ-분위수)
#   expectile : (y-ŷ)²·|τ - 1{y≤ŷ}|
#   hinge / logistic 은 ±1 라벨, misclass 는 라벨 비교

import re

import numpy as np
from scipy.special import expit

KINDS = ('squared', 'absolute', 'quantile', 'expectile', 'hinge', 'logistic', 'misclass', 'logloss')
_TAU_KINDS = ('quantile', 'expectile')
_PARAM = re.compile(r'^\s*(\w+)\s*\(\s*([0-9.eE+-]+)\s*\)\s*$')


def parse_kind(kind, tau=None):
    """'quantile(0.9)' → ('quantile', 0.9)"""
    m = _PARAM.match(kind)
    if m:
        kind, tau = m.group(1), float(m.group(2))
    if kind not in KINDS:
        raise ValueError(f"알 수 없는 손실 종류: {kind} (가능: {', '.join(KINDS)})")
    if kind in _TAU_KINDS:
        tau = 0.5 if tau is None else float(tau)
        if not 0.0 < tau < 1.0:
            raise ValueError(f"τ는 (0,1) 구간이어야 합니다: τ={tau}")
    return kind, tau


def loss(kind, y, yhat, tau=None):
    """점별 손실 벡터"""
    kind, tau = parse_kind(kind, tau)
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    r = y - yhat
    if kind == 'squared':
        return r ** 2
    if kind == 'absolute':
        return np.abs(r)
    if kind == 'quantile':
        return np.abs(r) * np.abs(tau - (y <= yhat))
    if kind == 'expectile':
        return r ** 2 * np.abs(tau - (y <= yhat))
    if kind == 'hinge':
        return np.maximum(0.0, 1.0 - y * yhat)
    if kind == 'logistic':
        return np.logaddexp(0.0, -y * yhat)
    if kind == 'misclass':
        return (y != yhat).astype(float)
    # logloss: y ∈ {0,1}, ŷ = 확률
    p = np.clip(yhat, 1e-15, 1 - 1e-15)
    return -(y * np.log(p) + (1 - y) * np.log1p(-p))


def gradient_fn(kind, tau=None):
    """(y, ŷ) → ∂ℓ/∂ŷ 함수 (미분 불가능한 점에서는 부분기울기 하나)"""
    kind, tau = parse_kind(kind, tau)
    if kind == 'squared':
        return lambda y, yhat: -2.0 * (y - yhat)
    if kind == 'absolute':
        return lambda y, yhat: -np.sign(y - yhat)
    if kind == 'quantile':
        return lambda y, yhat: np.where(y > yhat, -tau, 1.0 - tau)
    if kind == 'expectile':
        return lambda y, yhat: -2.0 * (y - yhat) * np.abs(tau - (y <= yhat))
    if kind == 'hinge':
        return lambda y, yhat: np.where(y * yhat < 1.0, -y, 0.0)
    if kind == 'logistic':
        return lambda y, yhat: -y * expit(-y * yhat)
    if kind == 'logloss':
        def _logloss(y, yhat):
            p = np.clip(yhat, 1e-15, 1 - 1e-15)
            return (p - y) / (p * (1 - p))
        return _logloss
    raise ValueError(f"{kind} 손실은 기울기가 정의되지 않습니다.")


def loss_gradient(kind, y, yhat, tau=None):
    grad = gradient_fn(kind, tau)
    return grad(np.asarray(y, dtype=float), np.asarray(yhat, dtype=float))


def risk(kind, y, yhat, tau=None):
    """경험적 위험 = 평균 손실"""
    return float(np.mean(loss(kind, y, yhat, tau)))
