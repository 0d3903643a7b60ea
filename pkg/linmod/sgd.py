# twocultures/linmod/sgd.py
# 확률적 경사하강(SGD) 선형모형, 손실함수 교체 가능
#   매 epoch 데이터 순서를 섞고, 관측치마다 β ← β - γ_t·∂ℓ(yᵢ, xᵢᵀβ)/∂β
#   γ_t = γ₀ / (1 + λ₀·t),  t = epoch 번호(0부터)

import numpy as np

from evaluation.losses import gradient_fn, parse_kind, risk
from linmod.ols import summarize_fit
from shared.errors import DivergenceError, ValidationError
from shared.rng import child_rng
from utils.logger import get_logger

log = get_logger("linmod.sgd")

SGD_LOSSES = ('squared', 'absolute', 'quantile', 'expectile', 'logistic', 'hinge')


def learning_rate(gamma0, decay, t):
    return gamma0 / (1.0 + decay * t)


def fit_sgd(dm, loss='squared', epochs=100, gamma0=0.01, decay=1.0, seed=0,
            tau=None, average=False):
    """SGD 적합 → LinearFit (risk_trace = epoch별 학습 위험)

    average=True이면 뒤쪽 절반 epoch의 반복값 평균(꼬리 평균)을 돌려준다.
    """
    kind, tau = parse_kind(loss, tau)
    if kind not in SGD_LOSSES:
        raise ValidationError(f"SGD에서 지원하지 않는 손실: {kind}")
    if epochs < 1 or gamma0 <= 0:
        raise ValidationError("epochs ≥ 1, γ₀ > 0 이어야 합니다.")

    x = dm.x
    if kind in ('logistic', 'hinge'):
        y = dm.pm_view()
    else:
        y = dm.y
    grad = gradient_fn(kind, tau)
    rng = child_rng(seed, 0)

    n, p = x.shape
    beta = np.zeros(p)
    avg = np.zeros(p)
    n_avg = 0
    tail_start = epochs // 2
    trace = []
    for t in range(epochs):
        gamma = learning_rate(gamma0, decay, t)
        for i in rng.permutation(n):
            xi = x[i]
            beta -= gamma * grad(y[i], xi @ beta) * xi
            if average and t >= tail_start:
                n_avg += 1
                avg += (beta - avg) / n_avg
        if not np.all(np.isfinite(beta)):
            raise DivergenceError(f"SGD 계수가 발산했습니다 (epoch {t}, γ={gamma:.3g}). 학습률을 낮추세요.")
        trace.append(risk(kind, y, x @ beta, tau))
        log.debug(f"SGD epoch={t} γ={gamma:.4g} risk={trace[-1]:.6f}")

    if average:
        beta = avg
    fit = summarize_fit(dm, beta.copy(), None, p, None, f"sgd-{kind}")
    fit.risk_trace = trace
    return fit
