# twocultures/mlp/perceptron.py
# 퍼셉트론: 순서대로 관측치를 보며 틀린 경우에만 갱신
#   ŷ = sign(xᵀβ),  β ← β + η(y - ŷ)x

from dataclasses import dataclass, field

import numpy as np

from shared.errors import ValidationError
from utils.logger import get_logger

log = get_logger("mlp.perceptron")


@dataclass
class PerceptronFit:
    weights: np.ndarray
    epochs: int
    converged: bool
    column_names: tuple = ()
    mistakes: list = field(default_factory=list)    # epoch별 오분류 수

    def decision_value(self, x):
        return np.asarray(x, dtype=float) @ self.weights

    def predict(self, x):
        """±1 라벨 (xᵀβ > 0 이면 +1)"""
        return np.where(self.decision_value(x) > 0, 1.0, -1.0)

    def to_dict(self):
        return {
            "weights": dict(zip(self.column_names, self.weights.tolist())),
            "epochs": self.epochs,
            "converged": self.converged,
            "mistakes": self.mistakes,
        }


def fit_perceptron(dm, eta=1.0, max_epochs=100):
    """학습 오분류가 0이 되거나 max_epochs에 도달하면 멈춘다.

    편향은 설계행렬의 절편 열이 맡는다.
    """
    if eta <= 0:
        raise ValidationError(f"η는 양수여야 합니다: {eta}")
    x, y = dm.x, dm.pm_view()
    w = np.zeros(dm.p)
    mistakes = []
    converged = False
    epoch = 0
    for epoch in range(1, max_epochs + 1):
        errors = 0
        for i in range(dm.n):
            yhat = 1.0 if x[i] @ w > 0 else -1.0
            if yhat != y[i]:
                w += eta * (y[i] - yhat) * x[i]
                errors += 1
        mistakes.append(errors)
        if errors == 0:
            converged = True
            break
    if not converged:
        log.warning(f"⚠️ 퍼셉트론이 {max_epochs} epoch 안에 수렴하지 않았습니다 (마지막 오분류 {mistakes[-1]}개).")
    return PerceptronFit(w, epoch, converged, dm.column_names, mistakes)
