# twocultures/evaluation/validation.py
# k-블록 교차검증과 부트스트랩 out-of-bag 검증
#
# 모델 팩토리 계약: factory(DesignMatrix) → predict(x)를 가진 적합 모델
#   회귀: predict = 예측값, 분류: predict = P(Y=1|x) 점수

from dataclasses import dataclass, field
import time

import numpy as np
from joblib import Parallel, delayed

from dataframe.resample import bootstrap
from evaluation.losses import parse_kind, risk
from evaluation.metrics import roc
from shared.errors import ValidationError
from shared.rng import child_seed
from utils.logger import get_logger

log = get_logger("evaluation")

CLASSIFICATION_KINDS = ('misclass', 'logloss', 'brier', 'hinge', 'logistic')


@dataclass
class CvReport:
    label: str
    risk_kind: str
    fold_risks: list
    in_sample_risks: list
    seed: int
    k: int
    fold_hash: str
    pooled_scores: np.ndarray = None
    roc: object = None
    elapsed: float = 0.0
    extras: dict = field(default_factory=dict)

    @property
    def risk(self):
        return float(np.mean(self.fold_risks))

    @property
    def in_sample_risk(self):
        return float(np.mean(self.in_sample_risks))

    @property
    def auc(self):
        return None if self.roc is None else self.roc.auc

    def to_dict(self):
        out = {
            "label": self.label,
            "risk_kind": self.risk_kind,
            "risk": self.risk,
            "fold_risks": [float(r) for r in self.fold_risks],
            "in_sample_risk": self.in_sample_risk,
            "seed": self.seed,
            "k": self.k,
            "fold_hash": self.fold_hash,
            "elapsed_sec": round(self.elapsed, 3),
        }
        if self.roc is not None:
            out["auc"] = self.roc.auc
        out.update(self.extras)
        return out


def score_risk(kind, y, scores):
    """점수 기반 위험. 분류 점수(확률)는 종류에 맞게 변환한다."""
    if kind == 'misclass':
        return risk('misclass', y, (np.asarray(scores) > 0.5).astype(float))
    if kind == 'brier':
        return risk('squared', y, scores)
    if kind in ('hinge', 'logistic'):
        return risk(kind, 2.0 * np.asarray(y) - 1.0, scores)
    return risk(kind, y, scores)


def _check_kind(kind):
    if kind != 'brier':
        parse_kind(kind)


def _check_classes(dm, rows, where, j):
    present = np.unique(dm.y[rows])
    if present.size < 2:
        raise ValidationError(
            f"폴드 {j}의 {where} 데이터에 클래스가 하나뿐입니다 ({present.tolist()}). "
            f"stratified 폴드를 사용하세요.")


def _run_fold(factory, dm, plan, j, kind):
    train, test = plan.train_test(j)
    model = factory(dm.take(train))
    in_scores = model.predict(dm.x[train])
    out_scores = model.predict(dm.x[test])
    return (j, test, np.asarray(out_scores, dtype=float),
            score_risk(kind, dm.y[train], in_scores),
            score_risk(kind, dm.y[test], out_scores))


def cross_validate(factory, dm, plan, risk_kind='squared', label='model', pool=True, jobs=1):
    """폴드마다 여집합으로 적합하고 폴드에서 평가. R̂ = (1/k)ΣR_j

    분류(이진 반응)에서는 학습/검증 폴드 모두 두 클래스를 가져야 한다
    (k = n 인 leave-one-out 검증 폴드는 예외).
    """
    _check_kind(risk_kind)
    if plan.n != dm.n:
        raise ValidationError(f"폴드 분할 크기({plan.n})와 데이터 행 수({dm.n})가 다릅니다.")
    if dm.binary:
        for j in range(1, plan.k + 1):
            train, test = plan.train_test(j)
            _check_classes(dm, train, "학습", j)
            if plan.k < plan.n:
                _check_classes(dm, test, "검증", j)

    started = time.perf_counter()
    if jobs == 1:
        results = [_run_fold(factory, dm, plan, j, risk_kind) for j in range(1, plan.k + 1)]
    else:
        results = Parallel(n_jobs=jobs)(
            delayed(_run_fold)(factory, dm, plan, j, risk_kind) for j in range(1, plan.k + 1))

    pooled = np.full(dm.n, np.nan)
    fold_risks, in_risks = [], []
    for j, test, scores, r_in, r_out in sorted(results, key=lambda r: r[0]):
        pooled[test] = scores
        fold_risks.append(r_out)
        in_risks.append(r_in)
        log.debug(f"{label} fold {j}: out={r_out:.6g} in={r_in:.6g}")

    report = CvReport(label, risk_kind, fold_risks, in_risks, plan.seed, plan.k, plan.fold_hash(),
                      elapsed=time.perf_counter() - started)
    if pool:
        report.pooled_scores = pooled
        if dm.binary:
            report.roc = roc(pooled, dm.y.astype(int))
    log.info(f"📊 {label}: CV {risk_kind} = {report.risk:.6g}"
             + (f", AUC = {report.auc:.4f}" if report.roc is not None else ""))
    return report


@dataclass
class BootstrapReport:
    risk: float
    replicate_risks: list
    oob_sizes: list
    seed: int

    def to_dict(self):
        return {"risk": self.risk, "B": len(self.replicate_risks), "seed": self.seed,
                "replicate_risks": [float(r) for r in self.replicate_risks]}


def bootstrap_validate(factory, dm, B, seed, risk_kind='squared'):
    """부트스트랩 out-of-bag 위험: OOB 크기로 가중한 반복별 OOB 평균 손실의 평균"""
    _check_kind(risk_kind)
    if B < 1:
        raise ValidationError("B는 1 이상이어야 합니다.")
    risks, sizes = [], []
    for b in range(B):
        sample = bootstrap(dm.n, child_seed(seed, b))
        oob = sample.out_of_bag
        if oob.size == 0:
            log.debug(f"bootstrap {b}: OOB가 비어 건너뜀")
            continue
        model = factory(dm.take(sample.in_bag))
        risks.append(score_risk(risk_kind, dm.y[oob], model.predict(dm.x[oob])))
        sizes.append(oob.size)
    if not risks:
        raise ValidationError("모든 부트스트랩 표본의 OOB가 비어 있습니다 (검증 행 없음).")
    w = np.asarray(sizes, dtype=float)
    total = float(np.sum(w * np.asarray(risks)) / w.sum())
    return BootstrapReport(total, risks, sizes, seed)
