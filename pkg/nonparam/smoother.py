# twocultures/nonparam/smoother.py
# 선형 평활기 진단: trace(S) (유효 자유도, Mallows Cp 입력)

import numpy as np

from nonparam.kernel import KernelSmoother, smoother_matrix
from shared.errors import NotLinearSmootherError, ValidationError


def smoother_trace(model, xs=None):
    """Σ_i s_{x_i, i}

    KernelSmoother는 학습점에서 S를 만들고, OLS/Ridge 적합은
    저장된 대각 s_ii(레버리지)를 합한다. xs는 학습점과 행 수가 같아야 한다.
    """
    if isinstance(model, KernelSmoother):
        if xs is not None and len(np.asarray(xs)) != model.x.shape[0]:
            raise ValidationError(f"trace(S)는 학습점에서만 정의됩니다 (xs {len(np.asarray(xs))}행 ≠ 학습 {model.x.shape[0]}행)")
        return float(np.trace(smoother_matrix(model, xs)))
    hat = getattr(model, 'hat_diag', None)
    if hat is None:
        raise NotLinearSmootherError(f"{type(model).__name__}은(는) 선형 평활기가 아닙니다.")
    return float(np.sum(hat))
