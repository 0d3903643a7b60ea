# twocultures/nonparam/knn.py
# k-최근접 이웃 평균 (표준화된 열의 유클리드 거리)

from dataclasses import dataclass

import numpy as np

from shared.errors import ValidationError

_CHUNK_CELLS = 2_000_000


@dataclass(frozen=True)
class KnnModel:
    x: np.ndarray          # 표준화된 학습 특징
    y: np.ndarray
    k: int
    center: np.ndarray
    scale: np.ndarray
    columns: tuple = None

    def predict(self, x):
        x = np.asarray(x, dtype=float)
        if self.columns is not None:
            x = x[:, list(self.columns)]
        return knn_predict(self, self.k, x)


def fit_knn(x, y, k, columns=None):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValidationError(f"k는 1 이상 n({n}) 이하여야 합니다: k={k}")
    center = x.mean(axis=0)
    scale = x.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    return KnnModel((x - center) / scale, y, int(k), center, scale, columns)


def fit_knn_design(dm, k):
    """설계행렬(절편 제외 열) 기반 kNN"""
    cols = tuple(dm.col(c) for c in dm.feature_names)
    return fit_knn(dm.x[:, list(cols)], dm.y, k, cols)


def knn_predict(training, k, query):
    """k개 최근접 학습 행의 y 평균. 거리 동률이면 행 번호가 작은 쪽 우선

    training은 KnnModel 또는 (x, y) 튜플.
    """
    if not isinstance(training, KnnModel):
        training = fit_knn(training[0], training[1], k)
    n = training.x.shape[0]
    if not 1 <= k <= n:
        raise ValidationError(f"k는 1 이상 n({n}) 이하여야 합니다: k={k}")
    q = np.asarray(query, dtype=float)
    single = q.ndim == 0 or (q.ndim == 1 and q.size == training.x.shape[1] and training.x.shape[1] > 1)
    if q.ndim == 0:
        q = q.reshape(1, 1)
    elif q.ndim == 1:
        q = q.reshape(1, -1) if single else q.reshape(-1, 1)
    z = (q - training.center) / training.scale

    d = training.x.shape[1]
    step = max(1, _CHUNK_CELLS // max(1, n * d))
    out = np.empty(z.shape[0])
    for start in range(0, z.shape[0], step):
        block = z[start:start + step]
        d2 = np.sum((block[:, None, :] - training.x[None, :, :]) ** 2, axis=2)
        nearest = np.argsort(d2, axis=1, kind='stable')[:, :k]
        out[start:start + step] = training.y[nearest].mean(axis=1)
    return float(out[0]) if single else out
