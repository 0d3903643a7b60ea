# twocultures/nonparam/kernel.py
# Nadaraya-Watson 국소 상수 평활기와 LOOCV 대역폭 선택
#   m̂_h(x) = Σ s_{x,i}·y_i,   s_{x,i} = K_h(x - x_i) / Σ_j K_h(x - x_j)

from dataclasses import dataclass

import numpy as np

from shared.errors import EmptyNeighborhoodError, ValidationError
from utils.logger import get_logger

log = get_logger("nonparam")

KERNELS = ('gaussian', 'epanechnikov')


@dataclass(frozen=True)
class KernelSmoother:
    """학습 (x, y)와 커널/대역폭. columns는 설계행렬 행에서 사용할 열 위치"""
    x: np.ndarray
    y: np.ndarray
    bandwidth: object
    kernel: str = 'gaussian'
    columns: tuple = None

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        y = np.array(self.y, dtype=float)
        if x.shape[0] != y.shape[0]:
            raise ValidationError("x와 y의 행 수가 다릅니다.")
        if self.kernel not in KERNELS:
            raise ValidationError(f"지원하지 않는 커널: {self.kernel} (가능: {', '.join(KERNELS)})")
        h = np.broadcast_to(np.asarray(self.bandwidth, dtype=float), (x.shape[1],)).copy()
        if np.any(h <= 0) or not np.all(np.isfinite(h) | np.isposinf(h)):
            raise ValidationError(f"대역폭은 양수여야 합니다: {self.bandwidth}")
        for arr in (x, y, h):
            arr.setflags(write=False)
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 'y', y)
        object.__setattr__(self, 'bandwidth', h)

    @property
    def n(self):
        return self.x.shape[0]

    def with_bandwidth(self, h):
        return KernelSmoother(self.x, self.y, h, self.kernel, self.columns)

    def predict(self, x):
        """설계행렬 행(절편 포함 가능) → 예측"""
        x = np.asarray(x, dtype=float)
        if self.columns is not None:
            x = x[:, list(self.columns)]
        return nw_predict(self, x)

    def to_dict(self):
        return {"kernel": self.kernel, "bandwidth": self.bandwidth.tolist(), "n": self.n}


_CHUNK_CELLS = 2_000_000


def _log_kernel(sm, query):
    """query(m×d) × 학습(n×d) 로그 커널값. 창 밖은 -inf"""
    h = sm.bandwidth
    if sm.kernel == 'gaussian':
        q = query / h
        t = sm.x / h
        d2 = np.sum(q ** 2, axis=1)[:, None] + np.sum(t ** 2, axis=1)[None, :] - 2.0 * q @ t.T
        return -0.5 * np.maximum(d2, 0.0)

    n, d = sm.x.shape
    step = max(1, _CHUNK_CELLS // max(1, n * d))
    out = np.empty((query.shape[0], n))
    for start in range(0, query.shape[0], step):
        u = (query[start:start + step, None, :] - sm.x[None, :, :]) / h
        inside = np.all(np.abs(u) < 1.0, axis=2)
        logk = np.sum(np.log(np.clip(1.0 - u ** 2, 1e-300, None)), axis=2)
        out[start:start + step] = np.where(inside, logk, -np.inf)
    return out


def weights(sm, query):
    """정규화된 가중치 행렬 (m×n), 각 행의 합 = 1"""
    query = np.asarray(query, dtype=float)
    if query.ndim == 1:
        query = query.reshape(-1, sm.x.shape[1])
    logk = _log_kernel(sm, query)
    top = np.max(logk, axis=1, keepdims=True)
    if np.any(~np.isfinite(top)):
        raise EmptyNeighborhoodError()
    # 행별 최댓값을 빼고 지수화: 작은 h에서도 언더플로 없이 최근접점으로 수렴
    k = np.exp(logk - top)
    return k / k.sum(axis=1, keepdims=True)


def nw_predict(sm, query):
    """단일 점이면 스칼라, 여러 점(2차원)이면 배열"""
    q = np.asarray(query, dtype=float)
    single = q.ndim == 0 or (q.ndim == 1 and sm.x.shape[1] > 1 and q.size == sm.x.shape[1])
    if q.ndim == 0:
        q = q.reshape(1, 1)
    elif q.ndim == 1:
        q = q.reshape(1, -1) if single else q.reshape(-1, 1)
    out = weights(sm, q) @ sm.y
    return float(out[0]) if single else out


def smoother_matrix(sm, xs=None):
    """S[i, j] = s_{x_i, j}  (기본: 학습점에서)"""
    return weights(sm, sm.x if xs is None else xs)


def loocv_risk(sm, h=None):
    """leave-one-out 제곱 위험, 선형 평활기 단축식 (yᵢ - ŷᵢ)/(1 - s_ii)"""
    if h is not None:
        sm = sm.with_bandwidth(h)
    s = smoother_matrix(sm)
    resid = sm.y - s @ sm.y
    denom = 1.0 - np.diag(s)
    if np.any(denom <= 1e-12):
        return float('inf')
    return float(np.mean((resid / denom) ** 2))


def loocv_refit(sm, h=None):
    """i번째 점을 빼고 다시 적합하는 그대로의 LOOCV"""
    if h is not None:
        sm = sm.with_bandwidth(h)
    errs = np.empty(sm.n)
    keep = np.ones(sm.n, dtype=bool)
    for i in range(sm.n):
        keep[i] = False
        sub = KernelSmoother(sm.x[keep], sm.y[keep], sm.bandwidth, sm.kernel)
        errs[i] = sm.y[i] - weights(sub, sm.x[i:i + 1]) @ sub.y
        keep[i] = True
    return float(np.mean(errs ** 2))


def cv_curve(x, y, kernel, grid):
    sm = KernelSmoother(x, y, grid[0], kernel)
    risks = []
    for h in grid:
        try:
            risks.append(loocv_risk(sm, h))
        except EmptyNeighborhoodError:
            risks.append(float('inf'))
    return np.asarray(risks)


def select_bandwidth(x, y, kernel='gaussian', grid=None):
    """격자에서 LOOCV 제곱 위험이 최소인 h*"""
    if grid is None:
        scale = np.std(np.asarray(x, dtype=float))
        grid = np.geomspace(0.02, 2.0, 30) * (scale if scale > 0 else 1.0)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0) or not np.all(np.isfinite(grid)):
        raise ValidationError("대역폭 격자는 비어 있지 않은 양수 배열이어야 합니다.")
    risks = cv_curve(x, y, kernel, grid)
    if not np.any(np.isfinite(risks)):
        raise ValidationError("모든 격자점에서 LOOCV 위험을 계산할 수 없습니다.")
    best = int(np.argmin(risks))
    log.debug(f"bandwidth h*={grid[best]:.4g} (LOOCV={risks[best]:.6g})")
    return float(grid[best])


def fit_kernel(dm, bandwidth=None, kernel='gaussian', grid=None):
    """설계행렬 특징 열(절편 제외)로 NW 평활기. 대역폭은 열 표준편차 단위"""
    cols = tuple(dm.col(c) for c in dm.feature_names)
    x = dm.x[:, list(cols)]
    sd = x.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    if bandwidth is None:
        z = x / sd
        grid = np.geomspace(0.05, 2.0, 25) if grid is None else np.asarray(grid, dtype=float)
        risks = cv_curve(z, dm.y, kernel, grid)
        if not np.any(np.isfinite(risks)):
            raise ValidationError("대역폭을 선택할 수 없습니다.")
        bandwidth = float(grid[int(np.argmin(risks))])
    return KernelSmoother(x, dm.y, bandwidth * sd, kernel, cols)
