# twocultures/evaluation/metrics.py
# 분류 성능 지표: 혼동행렬, kappa, ROC/AUC, 최적 임계값
# 양성 판정은 항상 엄격 부등호 score > s

from dataclasses import dataclass

import numpy as np

from shared.errors import ValidationError


def _ratio(a, b):
    return a / b if b > 0 else float('nan')


@dataclass(frozen=True)
class ConfusionMatrix:
    threshold: float
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def n(self):
        return self.tp + self.tn + self.fp + self.fn

    @property
    def sensitivity(self):
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def specificity(self):
        return _ratio(self.tn, self.tn + self.fp)

    @property
    def precision(self):
        return _ratio(self.tp, self.tp + self.fp)

    @property
    def accuracy(self):
        return (self.tp + self.tn) / self.n

    @property
    def random_accuracy(self):
        """행·열 주변합의 곱으로 계산한 우연 일치 확률"""
        n2 = float(self.n) ** 2
        pos = (self.tp + self.fn) * (self.tp + self.fp)
        neg = (self.tn + self.fp) * (self.tn + self.fn)
        return (pos + neg) / n2

    @property
    def kappa(self):
        return kappa(self)

    def table(self):
        """[[TN, FP], [FN, TP]] (행: 실제 0/1, 열: 예측 0/1)"""
        return np.array([[self.tn, self.fp], [self.fn, self.tp]])

    def to_dict(self):
        return {
            "threshold": self.threshold,
            "tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "accuracy": self.accuracy,
        }


def _binary_labels(labels):
    labels = np.asarray(labels)
    if labels.dtype == bool:
        return labels
    uniq = set(np.unique(labels).tolist())
    if not uniq <= {0, 1}:
        raise ValidationError(f"라벨은 0/1 이어야 합니다: {sorted(uniq)}")
    return labels == 1


def confusion_at(scores, labels, s):
    """ŷ = 1[score > s]"""
    scores = np.asarray(scores, dtype=float)
    pos = _binary_labels(labels)
    if scores.shape != pos.shape:
        raise ValidationError("scores와 labels 길이가 다릅니다.")
    pred = scores > s
    return ConfusionMatrix(
        threshold=float(s),
        tp=int(np.sum(pred & pos)),
        tn=int(np.sum(~pred & ~pos)),
        fp=int(np.sum(pred & ~pos)),
        fn=int(np.sum(~pred & pos)),
    )


def kappa(cm):
    """(정확도 - 우연 정확도) / (1 - 우연 정확도)"""
    pe = cm.random_accuracy
    if pe >= 1.0:
        raise ValidationError("우연 정확도가 1입니다 (한 칸에 모든 관측치). kappa 정의 불가")
    return (cm.accuracy - pe) / (1.0 - pe)


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray            # 1 - specificity, 비감소
    tpr: np.ndarray            # sensitivity
    thresholds: np.ndarray     # 각 점을 만드는 s (첫 점은 최대 점수, 마지막은 -inf)
    auc: float

    def points(self):
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    def to_rows(self):
        return [(float(s), float(f), float(t)) for s, f, t in zip(self.thresholds, self.fpr, self.tpr)]


def roc(scores, labels):
    """서로 다른 점수마다 임계값을 두고 (FPR, TPR)을 계산, AUC는 사다리꼴 적분"""
    scores = np.asarray(scores, dtype=float)
    pos = _binary_labels(labels)
    n_pos = int(pos.sum())
    n_neg = len(pos) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("ROC에는 두 클래스가 모두 필요합니다.")

    # 점수 내림차순 누적: 임계값 s = u_k 에서는 u_k보다 큰 점수만 양성
    distinct = np.unique(scores)[::-1]
    order = np.argsort(-scores, kind='mergesort')
    s_sorted = scores[order]
    tp_cum = np.cumsum(pos[order])
    fp_cum = np.cumsum(~pos[order])
    # u_k보다 큰 점수의 개수 = u_k가 처음 나오는 위치
    first = np.searchsorted(-s_sorted, -distinct, side='left')
    tp = np.concatenate([[0], tp_cum[first[1:] - 1], [n_pos]])
    fp = np.concatenate([[0], fp_cum[first[1:] - 1], [n_neg]])
    thresholds = np.concatenate([distinct, [-np.inf]])

    fpr = fp / n_neg
    tpr = tp / n_pos
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocCurve(fpr, tpr, thresholds, auc)


def mann_whitney_auc(scores, labels):
    """(일치 쌍 + ½·동점 쌍) / (n₊·n₋)"""
    scores = np.asarray(scores, dtype=float)
    pos = _binary_labels(labels)
    sp, sn = scores[pos], scores[~pos]
    if sp.size == 0 or sn.size == 0:
        raise ValidationError("두 클래스가 모두 필요합니다.")
    diff = sp[:, None] - sn[None, :]
    return float((np.sum(diff > 0) + 0.5 * np.sum(diff == 0)) / (sp.size * sn.size))


def optimal_cutoff(rc):
    """(특이도, 민감도)가 (1,1)에 가장 가까운 임계값. 동률이면 작은 s"""
    dist = rc.fpr ** 2 + (1.0 - rc.tpr) ** 2
    best = np.flatnonzero(dist <= dist.min() + 1e-15)
    return float(np.min(rc.thresholds[best]))
