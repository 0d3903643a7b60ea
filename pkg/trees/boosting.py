# twocultures/trees/boosting.py
# 그래디언트 부스팅 (회귀 트리 약학습기)
#   m⁰ = argmin_m Σℓ(yᵢ, m)                 (평균 / 로그오즈)
#   rᵢ = -∂ℓ/∂m  (squared: y - m, logistic: y - p)
#   h_k = 깊이 제한 회귀 트리(rᵢ)
#   squared : γ_k = Σ r h / Σ h²    (직선 탐색)
#   logistic: 잎마다 Newton 단계 Σr / Σp(1-p)
#   m^(k) = m^(k-1) + ν·γ_k·h_k

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from shared.errors import ValidationError
from shared.rng import child_rng
from trees.cart import grow_tree
from utils.logger import get_logger

log = get_logger("trees.boosting")

LOSSES = ('squared', 'logistic')
_HESS_FLOOR = 1e-10


@dataclass
class BoostedModel:
    init: float
    trees: list
    multipliers: list
    shrinkage: float
    loss: str
    column_names: tuple = ()
    risk_trace: list = field(default_factory=list)
    train_scores: np.ndarray = field(default=None, repr=False)

    @property
    def n_trees(self):
        return len(self.trees)

    def decision_function(self, x):
        """가법 점수 m(x) (logistic이면 로그오즈)"""
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape[0], self.init)
        for tree, g in zip(self.trees, self.multipliers):
            out += self.shrinkage * g * tree.predict(x)
        return out

    def staged_decision(self, x):
        """단계별 점수 (n_trees+1) × m, 0행은 m⁰"""
        x = np.asarray(x, dtype=float)
        cur = np.full(x.shape[0], self.init)
        stages = [cur.copy()]
        for tree, g in zip(self.trees, self.multipliers):
            cur = cur + self.shrinkage * g * tree.predict(x)
            stages.append(cur.copy())
        return np.vstack(stages)

    def predict(self, x):
        """회귀: m(x), 분류: P(Y=1|x)"""
        f = self.decision_function(x)
        return expit(f) if self.loss == 'logistic' else f

    def to_dict(self):
        return {
            "loss": self.loss,
            "init": self.init,
            "shrinkage": self.shrinkage,
            "n_trees": self.n_trees,
            "multipliers": [float(g) for g in self.multipliers],
            "final_train_risk": self.risk_trace[-1] if self.risk_trace else None,
        }


def _train_risk(loss, y, f):
    if loss == 'squared':
        return float(np.mean((y - f) ** 2))
    return float(np.mean(np.logaddexp(0.0, f) - y * f))


def fit_boosting(dm, loss=None, n_trees=100, shrinkage=0.1, max_depth=3, min_leaf=10,
                 subsample=1.0, seed=0):
    """단계마다 의사잔차에 트리를 맞추고 ν만큼 줄여 더한다.

    subsample < 1 이면 단계마다 비복원 부분표본으로 트리를 키운다.
    """
    loss = loss or ('logistic' if dm.binary else 'squared')
    if loss not in LOSSES:
        raise ValidationError(f"부스팅 손실은 {LOSSES} 중 하나: {loss}")
    if not 0.0 < shrinkage <= 1.0:
        raise ValidationError(f"shrinkage ν는 (0,1] 구간이어야 합니다: {shrinkage}")
    if not 0.0 < subsample <= 1.0:
        raise ValidationError(f"subsample은 (0,1] 구간이어야 합니다: {subsample}")
    if n_trees < 0 or max_depth < 0:
        raise ValidationError("n_trees, max_depth는 0 이상이어야 합니다.")

    x, y = dm.x, dm.y
    n = dm.n
    if loss == 'logistic':
        if not dm.binary:
            raise ValidationError("logistic 부스팅에는 이진 반응변수가 필요합니다.")
        ybar = float(np.clip(y.mean(), 1e-10, 1 - 1e-10))
        init = float(np.log(ybar / (1 - ybar)))
    else:
        init = float(y.mean())

    features = [dm.col(c) for c in dm.feature_names]
    f = np.full(n, init)
    model = BoostedModel(init, [], [], float(shrinkage), loss, dm.column_names)
    model.risk_trace.append(_train_risk(loss, y, f))
    if max_depth == 0:
        log.info("max_depth=0: 트리 없이 m⁰만 사용")
        n_trees = 0

    presorted = np.argsort(x, axis=0, kind='stable') if subsample == 1.0 else None
    rng = child_rng(seed, 0)
    n_sub = max(2 * min_leaf, int(round(subsample * n)))
    for k in range(n_trees):
        if subsample < 1.0:
            rows = np.sort(rng.choice(n, size=min(n, n_sub), replace=False))
        else:
            rows = np.arange(n)
        p = expit(f) if loss == 'logistic' else None
        r = y - p if loss == 'logistic' else y - f

        tree = grow_tree(x[rows], r[rows], 'variance', min_leaf, max_depth,
                         columns=features, column_names=dm.column_names,
                         presorted=presorted)
        if loss == 'squared':
            h = tree.predict(x[rows])
            hh = float(h @ h)
            gamma = float(r[rows] @ h) / hh if hh > 0 else 0.0
        else:
            leaves = tree.apply(x[rows])
            rs, ps = r[rows], p[rows]
            steps = {}
            for leaf in np.unique(leaves):
                inside = leaves == leaf
                steps[int(leaf)] = float(rs[inside].sum() / max(np.sum(ps[inside] * (1 - ps[inside])), _HESS_FLOOR))
            tree = tree.with_leaf_values(steps)
            gamma = 1.0

        f = f + shrinkage * gamma * tree.predict(x)
        model.trees.append(tree)
        model.multipliers.append(gamma)
        model.risk_trace.append(_train_risk(loss, y, f))
        if (k + 1) % 100 == 0:
            log.debug(f"boosting stage {k + 1}/{n_trees} risk={model.risk_trace[-1]:.6g}")

    model.train_scores = f
    return model
