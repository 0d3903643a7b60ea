# twocultures/bench/models.py
# 설정 파일의 모델 kind → 팩토리 (DesignMatrix → predict(x)를 가진 적합 모델)
#   회귀는 예측값, 분류는 P(Y=1|x) 또는 0.5를 경계로 하는 단조 점수를 돌려준다.

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from linmod import cv_lambda, fit_glm, fit_lasso, fit_ols, fit_ridge, fit_sgd
from mlp import build_network, train
from nonparam import fit_additive, fit_kernel, fit_knn_design
from shared.errors import ConfigError
from svm import fit_svm
from trees import fit_bagging, fit_boosting, fit_random_forest

INF = float('inf')


@dataclass(frozen=True)
class Param:
    kind: type                  # int, float, bool, str, list
    default: object = None
    lo: float = -INF
    hi: float = INF
    choices: tuple = ()


def _forest_params():
    return {
        'n_trees': Param(int, 500, 1, 100_000),
        'mtry': Param(int, None, 1, 10_000),
        'min_leaf': Param(int, None, 1, 100_000),
        'max_depth': Param(int, None, 0, 1_000),
        'seed': Param(int, None, 0, 2 ** 31 - 1),
        'importance': Param(bool, False),
    }


PARAMS = {
    'ols': {},
    'ridge': {'lam': Param(float, 1.0, 0.0)},
    'lasso': {'lam': Param(float, None, 0.0), 'cv_k': Param(int, 10, 2, 1_000),
              'seed': Param(int, None, 0, 2 ** 31 - 1)},
    'logit': {},
    'probit': {},
    'poisson': {},
    'glm': {'family': Param(str, 'gaussian', choices=('gaussian', 'binomial', 'logit', 'probit', 'poisson'))},
    'bagging': {k: v for k, v in _forest_params().items() if k != 'mtry'},
    'random_forest': _forest_params(),
    'boosting': {
        'n_trees': Param(int, 100, 0, 100_000),
        'shrinkage': Param(float, 0.1, 1e-6, 1.0),
        'max_depth': Param(int, 3, 0, 100),
        'min_leaf': Param(int, 10, 1, 100_000),
        'subsample': Param(float, 1.0, 1e-3, 1.0),
        'seed': Param(int, None, 0, 2 ** 31 - 1),
    },
    'additive': {
        'smooth': Param(list, None),
        'smoother': Param(str, 'nw', choices=('nw', 'linear')),
        'kernel': Param(str, 'gaussian', choices=('gaussian', 'epanechnikov')),
        'max_sweeps': Param(int, 50, 1, 10_000),
        'min_distinct': Param(int, 10, 2, 100_000),
    },
    'knn': {'k': Param(int, 10, 1, 100_000)},
    'nw': {'bandwidth': Param(float, None, 1e-12),
           'kernel': Param(str, 'gaussian', choices=('gaussian', 'epanechnikov'))},
    'svm': {
        'C': Param(float, 1.0, 1e-12),
        'kernel': Param(str, 'linear', choices=('linear', 'rbf')),
        'gamma': Param(float, None, 1e-12),
        'tol': Param(float, 1e-3, 1e-12, 1.0),
        'seed': Param(int, None, 0, 2 ** 31 - 1),
    },
    'mlp': {
        'hidden': Param(list, [5]),
        'activation': Param(str, 'tanh', choices=('tanh', 'sigmoid', 'identity')),
        'epochs': Param(int, 100, 0, 1_000_000),
        'gamma0': Param(float, 0.05, 1e-12, 10.0),
        'decay': Param(float, 0.0, 0.0),
        'standardize': Param(bool, True),
        'seed': Param(int, None, 0, 2 ** 31 - 1),
    },
    'sgd': {
        'loss': Param(str, None, choices=('squared', 'absolute', 'quantile', 'expectile', 'logistic', 'hinge')),
        'tau': Param(float, None, 1e-6, 1 - 1e-6),
        'epochs': Param(int, 100, 1, 1_000_000),
        'gamma0': Param(float, 0.01, 1e-12, 10.0),
        'decay': Param(float, 1.0, 0.0),
        'average': Param(bool, False),
        'seed': Param(int, None, 0, 2 ** 31 - 1),
    },
}

KINDS = tuple(PARAMS)
_TRUE = ('1', 'yes', 'true', 'on')
_FALSE = ('0', 'no', 'false', 'off')


def _coerce(spec, raw, field):
    if raw is None or (isinstance(raw, str) and raw.strip().lower() in ('', 'none')):
        return None
    try:
        if spec.kind is bool:
            if isinstance(raw, bool):
                return raw
            text = str(raw).strip().lower()
            if text not in _TRUE + _FALSE:
                raise ValueError(raw)
            return text in _TRUE
        if spec.kind is list:
            items = raw if isinstance(raw, (list, tuple)) else [s.strip() for s in str(raw).split(',') if s.strip()]
            return [int(v) if str(v).lstrip('-').isdigit() else str(v) for v in items]
        if spec.kind is int:
            value = float(raw)
            if value != int(value):
                raise ValueError(raw)
            value = int(value)
        elif spec.kind is float:
            value = float(raw)
        else:
            value = str(raw).strip()
    except (TypeError, ValueError):
        raise ConfigError(field, f"{spec.kind.__name__} 값이 아닙니다: {raw!r}") from None
    if spec.choices and value not in spec.choices:
        raise ConfigError(field, f"{value!r}은(는) {', '.join(spec.choices)} 중 하나여야 합니다.")
    if spec.kind in (int, float) and not spec.lo <= value <= spec.hi:
        raise ConfigError(field, f"{value}은(는) [{spec.lo}, {spec.hi}] 범위를 벗어납니다.")
    return value


def validate_params(kind, raw, where):
    """문자열/JSON 값을 형 변환하고 범위를 검사한 하이퍼파라미터 dict (기본값 포함)"""
    if kind not in PARAMS:
        raise ConfigError(f"{where}.kind", f"알 수 없는 모델 종류: {kind} (가능: {', '.join(KINDS)})")
    spec = PARAMS[kind]
    unknown = sorted(set(raw) - set(spec))
    if unknown:
        raise ConfigError(f"{where}.{unknown[0]}", f"{kind} 모델에 없는 하이퍼파라미터입니다.")
    params = {}
    for name, p in spec.items():
        value = _coerce(p, raw[name], f"{where}.{name}") if name in raw else None
        params[name] = p.default if value is None else value
    if kind == 'mlp' and not all(isinstance(h, int) and h >= 1 for h in params['hidden']):
        raise ConfigError(f"{where}.hidden", "은닉층 크기는 1 이상의 정수 목록이어야 합니다.")
    return params


class ScoredModel:
    """결정값 f(x)를 expit(f)로 감싼 분류 점수 (f > 0 ⇔ 점수 > 0.5)"""

    def __init__(self, model, decision):
        self.model = model
        self._decision = decision

    def predict(self, x):
        return expit(self._decision(x))

    def to_dict(self):
        return self.model.to_dict()


class LassoModel:
    """경로에서 고른 λ 한 점의 예측"""

    def __init__(self, path, index):
        self.path = path
        self.index = index

    @property
    def lam(self):
        return float(self.path.lambdas[self.index])

    def predict(self, x):
        return self.path.predict(x, self.index)

    def to_dict(self):
        return {"lambda": self.lam, "coef": dict(zip(self.path.column_names, self.path.coef(self.index).tolist()))}


def _smooth_terms(dm, params):
    if params['smooth']:
        return [str(t) for t in params['smooth']]
    return [c for c in dm.feature_names if np.unique(dm.x[:, dm.col(c)]).size >= params['min_distinct']]


def make_factory(kind, params, seed=0):
    """kind + 검증된 하이퍼파라미터 → factory(dm). seed는 모델 seed가 없을 때 쓰는 실험 시드"""
    p = dict(params)
    if 'seed' in p and p['seed'] is None:
        p['seed'] = seed

    if kind == 'ols':
        return fit_ols
    if kind == 'ridge':
        return lambda dm: fit_ridge(dm, p['lam'])
    if kind == 'lasso':
        def lasso(dm):
            family = 'binomial' if dm.binary else 'gaussian'
            if p['lam'] is not None:
                return LassoModel(fit_lasso(dm, lambdas=[p['lam']], family=family), 0)
            lam, _ = cv_lambda(dm, family, k=p['cv_k'], seed=p['seed'])
            path = fit_lasso(dm, family=family)
            return LassoModel(path, path.index_of(lam))
        return lasso
    if kind in ('logit', 'probit', 'poisson'):
        return lambda dm: fit_glm(dm, kind)
    if kind == 'glm':
        return lambda dm: fit_glm(dm, p['family'])
    if kind == 'bagging':
        return lambda dm: fit_bagging(dm, p['n_trees'], p['min_leaf'], p['max_depth'], p['seed'])
    if kind == 'random_forest':
        return lambda dm: fit_random_forest(dm, p['n_trees'], p['mtry'], p['min_leaf'], p['max_depth'], p['seed'])
    if kind == 'boosting':
        return lambda dm: fit_boosting(dm, None, p['n_trees'], p['shrinkage'], p['max_depth'],
                                       p['min_leaf'], p['subsample'], p['seed'])
    if kind == 'additive':
        return lambda dm: fit_additive(dm, _smooth_terms(dm, p), smoother=p['smoother'],
                                       kernel=p['kernel'], max_sweeps=p['max_sweeps'])
    if kind == 'knn':
        return lambda dm: fit_knn_design(dm, p['k'])
    if kind == 'nw':
        return lambda dm: fit_kernel(dm, p['bandwidth'], p['kernel'])
    if kind == 'svm':
        def svm(dm):
            model = fit_svm(dm, p['C'], p['kernel'], p['gamma'], p['tol'], p['seed'])
            return ScoredModel(model, model.decision_value)
        return svm
    if kind == 'mlp':
        def mlp(dm):
            loss = 'logistic' if dm.binary else 'squared'
            net = build_network(len(dm.feature_names), p['hidden'], p['activation'], loss)
            return train(net, dm, p['epochs'], p['gamma0'], p['decay'], p['seed'], p['standardize'])
        return mlp
    if kind == 'sgd':
        def sgd(dm):
            loss = p['loss'] or ('logistic' if dm.binary else 'squared')
            fit = fit_sgd(dm, loss, p['epochs'], p['gamma0'], p['decay'], p['seed'], p['tau'], p['average'])
            return ScoredModel(fit, fit.predict) if loss in ('logistic', 'hinge') else fit
        return sgd
    raise ConfigError("model.kind", f"알 수 없는 모델 종류: {kind}")
