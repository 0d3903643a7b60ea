# twocultures/svm/dual.py
# 소프트 마진 SVM, 쌍대 문제를 좌표쌍(SMO) 갱신으로 푼다.
#
#   min_α  ½ αᵀQα - Σα,   Q_ij = y_i y_j K(x_i, x_j)
#   s.t.   0 ≤ α_i ≤ C,   Σ α_i y_i = 0
#   f(x) = Σ α_i y_i K(x_i, x) + b
#
# 작업쌍은 KKT 위반이 최대인 (i, j)를 고르고, 방향 d_i = y_i, d_j = -y_j 로
# 등식 제약을 유지한 채 상자 제약 안에서 최적 보폭만큼 움직인다.

from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from shared.errors import ValidationError
from shared.rng import child_rng
from utils.logger import get_logger

log = get_logger("svm")

KERNELS = ('linear', 'rbf')
TOL = 1e-3
_CURVATURE_FLOOR = 1e-12
_CACHE_MB = 200


@dataclass(frozen=True)
class SvmKernel:
    name: str = 'linear'
    gamma: float = None

    def __post_init__(self):
        if self.name not in KERNELS:
            raise ValidationError(f"지원하지 않는 커널: {self.name} (가능: {', '.join(KERNELS)})")
        if self.name == 'rbf' and not (self.gamma and self.gamma > 0):
            raise ValidationError(f"rbf 커널의 γ는 양수여야 합니다: {self.gamma}")

    def to_dict(self):
        out = {"name": self.name}
        if self.name == 'rbf':
            out["gamma"] = self.gamma
        return out


def kernel_matrix(kernel, a, b):
    """K(a_i, b_j) 행렬"""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    inner = a @ b.T
    if kernel.name == 'linear':
        return inner
    sq = np.sum(a ** 2, axis=1)[:, None] + np.sum(b ** 2, axis=1)[None, :] - 2.0 * inner
    return np.exp(-kernel.gamma * np.maximum(sq, 0.0))


def default_gamma(x):
    """1 / (p · var(x))"""
    x = np.asarray(x, dtype=float)
    var = float(np.var(x))
    return 1.0 / (x.shape[1] * (var if var > 0 else 1.0))


class KernelCache:
    """K의 행을 필요할 때 계산하고 LRU로 보관한다."""

    def __init__(self, kernel, x, cache_mb=_CACHE_MB):
        self.kernel = kernel
        self.x = x
        n = x.shape[0]
        self.capacity = max(2, int(cache_mb * 2 ** 20 // (8 * max(n, 1))))
        self._rows = OrderedDict()
        self.hits = 0
        self.misses = 0
        self.diag = (np.sum(x ** 2, axis=1) if kernel.name == 'linear' else np.ones(n))

    def row(self, i):
        cached = self._rows.get(i)
        if cached is not None:
            self._rows.move_to_end(i)
            self.hits += 1
            return cached
        self.misses += 1
        values = kernel_matrix(self.kernel, self.x[i:i + 1], self.x)[0]
        self._rows[i] = values
        if len(self._rows) > self.capacity:
            self._rows.popitem(last=False)
        return values


@dataclass
class SvmModel:
    alpha: np.ndarray                 # 학습 행 순서의 전체 α
    bias: float
    kernel: SvmKernel
    C: float
    support_x: np.ndarray = field(repr=False)
    support_y: np.ndarray = field(repr=False)
    support_alpha: np.ndarray = field(repr=False)
    support_index: np.ndarray = field(repr=False)
    columns: list = field(default_factory=list)     # 사용한 설계행렬 열 번호
    column_names: tuple = ()
    iterations: int = 0
    converged: bool = True
    seed: int = 0

    @property
    def n_support(self):
        return int(self.support_index.size)

    def _features(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return x[:, self.columns] if self.columns else x

    def decision_value(self, x):
        """f(x) = Σ α_i y_i K(x_i, x) + b"""
        q = self._features(x)
        if self.n_support == 0:
            return np.full(q.shape[0], self.bias)
        k = kernel_matrix(self.kernel, q, self.support_x)
        return k @ (self.support_alpha * self.support_y) + self.bias

    def predict(self, x):
        """부호 라벨 ±1 (f = 0 이면 +1)"""
        return np.where(self.decision_value(x) >= 0, 1.0, -1.0)

    def primal_weights(self):
        """선형 커널에서 w = Σ α_i y_i x_i"""
        if self.kernel.name != 'linear':
            raise ValidationError("primal 가중치는 선형 커널에서만 정의됩니다.")
        return (self.support_alpha * self.support_y) @ self.support_x

    def to_dict(self):
        out = {
            "kernel": self.kernel.to_dict(),
            "C": self.C,
            "bias": self.bias,
            "n_support": self.n_support,
            "support_index": self.support_index.tolist(),
            "support_alpha": self.support_alpha.tolist(),
            "support_y": self.support_y.tolist(),
            "support_x": self.support_x.tolist(),
            "columns": [self.column_names[c] for c in self.columns] if self.column_names else self.columns,
            "iterations": self.iterations,
            "converged": self.converged,
        }
        if self.kernel.name == 'linear':
            out["w"] = self.primal_weights().tolist()
        return out


def _bias(alpha, grad, y, C, up, low):
    """자유 SV가 있으면 -y_t G_t 평균, 없으면 위반 구간의 중점"""
    free = (alpha > 0) & (alpha < C)
    if free.any():
        return float(np.mean(-y[free] * grad[free]))
    score = -y * grad
    hi = float(np.max(score[up])) if up.any() else 0.0
    lo = float(np.min(score[low])) if low.any() else 0.0
    return (hi + lo) / 2.0


def smo(x, y, kernel, C, tol=TOL, max_iter=None, cache_mb=_CACHE_MB):
    """±1 라벨 y에 대한 쌍대 해 (alpha, bias, iterations, converged)"""
    n = x.shape[0]
    max_iter = max_iter or max(1_000_000, 100 * n)
    cache = KernelCache(kernel, x, cache_mb)
    alpha = np.zeros(n)
    grad = -np.ones(n)              # G = Qα - e
    pos = y > 0

    converged = False
    it = 0
    up = low = None
    while it < max_iter:
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        score = -y * grad
        i = int(np.argmax(np.where(up, score, -np.inf)))
        j = int(np.argmin(np.where(low, score, np.inf)))
        gap = score[i] - score[j]
        if not (up[i] and low[j]) or gap < tol:
            converged = True
            break

        ki, kj = cache.row(i), cache.row(j)
        curvature = max(cache.diag[i] + cache.diag[j] - 2.0 * ki[j], _CURVATURE_FLOOR)
        room_i = C - alpha[i] if y[i] > 0 else alpha[i]
        room_j = alpha[j] if y[j] > 0 else C - alpha[j]
        step = min(gap / curvature, room_i, room_j)

        alpha[i] += y[i] * step
        alpha[j] -= y[j] * step
        # 수치 오차로 상자를 벗어나지 않도록
        alpha[i] = min(max(alpha[i], 0.0), C)
        alpha[j] = min(max(alpha[j], 0.0), C)
        grad += step * y * (ki - kj)
        it += 1
        if it % 10000 == 0:
            log.debug(f"SMO iter={it} gap={gap:.3g} cache hit={cache.hits} miss={cache.misses}")

    if not converged:
        log.warning(f"⚠️ SMO가 {max_iter}회 안에 수렴하지 않았습니다 (tol={tol}).")
    return alpha, _bias(alpha, grad, y, C, up, low), it, converged


def fit_svm(dm, C=1.0, kernel='linear', gamma=None, tol=TOL, seed=0, max_iter=None,
            cache_mb=_CACHE_MB):
    """이진 반응 설계행렬(±1 표현)로 소프트 마진 SVM 적합

    절편 열은 쓰지 않는다(b는 등식 제약으로 결정). rbf의 γ 기본값은 1/(p·var(x)).
    seed는 학습 행 순서를 섞어 동률 위반쌍의 선택 순서를 정한다.
    """
    if C <= 0:
        raise ValidationError(f"C는 양수여야 합니다: {C}")
    y = dm.pm_view()
    if np.unique(y).size < 2:
        raise ValidationError("SVM 학습에는 두 클래스가 모두 필요합니다.")
    columns = [dm.col(c) for c in dm.feature_names]
    x = dm.x[:, columns]
    if isinstance(kernel, SvmKernel):
        kern = kernel
    elif kernel == 'rbf':
        kern = SvmKernel('rbf', gamma if gamma is not None else default_gamma(x))
    else:
        kern = SvmKernel(kernel)

    order = child_rng(seed, 0).permutation(dm.n)
    alpha_s, bias, it, converged = smo(x[order], y[order], kern, float(C), tol, max_iter, cache_mb)
    alpha = np.empty(dm.n)
    alpha[order] = alpha_s

    sv = np.flatnonzero(alpha > 0)
    log.debug(f"SVM C={C} kernel={kern.name} iter={it} SV={sv.size}/{dm.n}")
    return SvmModel(alpha=alpha, bias=bias, kernel=kern, C=float(C),
                    support_x=x[sv], support_y=y[sv], support_alpha=alpha[sv], support_index=sv,
                    columns=columns, column_names=dm.column_names, iterations=it,
                    converged=converged, seed=seed)


def decision_value(model, query):
    return model.decision_value(query)


def hinge_risk(model, dm):
    """mean max(0, 1 - y·f(x))"""
    y = dm.pm_view()
    return float(np.mean(np.maximum(0.0, 1.0 - y * model.decision_value(dm.x))))


def dual_objective(model):
    """Σα - ½ Σ_ij α_i α_j y_i y_j K_ij (최대화하는 쪽의 부호)"""
    ay = model.support_alpha * model.support_y
    k = kernel_matrix(model.kernel, model.support_x, model.support_x)
    return float(np.sum(model.support_alpha) - 0.5 * ay @ k @ ay)
