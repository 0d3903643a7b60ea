# twocultures/bench/report.py
# 실험 결과 묶음과 파일 출력 (Markdown 표, ROC CSV, report.json)
# 같은 설정과 seed면 바이트 단위로 같은 파일이 나온다. 소요시간은 timings.json에만 기록한다.

from dataclasses import dataclass, field
import json
import os
import platform

import numpy as np
import pandas as pd

from config.settings import VERSION
from utils.logger import get_logger

log = get_logger("bench.report")


def environment_stamp(seed):
    return {
        "seed": seed,
        "version": VERSION,
        "numpy": np.__version__,
        "python": platform.python_version(),
    }


@dataclass
class VariableStudy:
    name: str
    stepwise: object                  # StepwiseTrace
    forest_ranking: list              # [(변수, 불순도 중요도)]
    lasso_order: list
    criterion: str = 'aic'

    @property
    def stepwise_order(self):
        return self.stepwise.selected

    @property
    def agree(self):
        """stepwise 첫 변수 = lasso 첫 진입 변수"""
        return bool(self.stepwise_order and self.lasso_order
                    and self.stepwise_order[0] == self.lasso_order[0])

    def to_dict(self):
        return {
            "name": self.name,
            "stepwise": self.stepwise.to_dict(),
            "forest": [{"variable": v, "importance": float(s)} for v, s in self.forest_ranking],
            "lasso": list(self.lasso_order),
            "agree": self.agree,
        }


@dataclass
class ExperimentReport:
    name: str
    task: str
    risk_kind: str
    seed: int
    k: int
    fold_hash: str
    reports: dict = field(default_factory=dict)         # 라벨 → CvReport (설정 순서)
    kinds: dict = field(default_factory=dict)
    importance: dict = field(default_factory=dict)      # 라벨 → ImportanceTable
    timings: dict = field(default_factory=dict)
    environment: dict = field(default_factory=dict)

    @property
    def labels(self):
        return list(self.reports)

    def best(self):
        """분류는 AUC 최대, 회귀는 CV 위험 최소"""
        if self.task == 'classification':
            return max(self.labels, key=lambda lb: (self.reports[lb].auc, -self.labels.index(lb)))
        return min(self.labels, key=lambda lb: (self.reports[lb].risk, self.labels.index(lb)))

    def to_dict(self):
        models = []
        for label, cv in self.reports.items():
            entry = cv.to_dict()
            entry.pop("elapsed_sec", None)
            entry["kind"] = self.kinds.get(label)
            if label in self.importance:
                entry["importance"] = self.importance[label].rows()
            models.append(entry)
        return {
            "name": self.name,
            "task": self.task,
            "risk_kind": self.risk_kind,
            "seed": self.seed,
            "k": self.k,
            "fold_hash": self.fold_hash,
            "models": models,
            "environment": self.environment,
        }


def _ensure_dir(path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)


def _fmt(value, digits=4):
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return "-"
    return f"{value:.{digits}f}"


def emit_table(report, path):
    """GitHub Markdown 표: 모델, 위험, in-sample 위험, AUC, seed"""
    classification = report.task == 'classification'
    head = ["model", "kind", f"CV {report.risk_kind}", f"in-sample {report.risk_kind}"]
    if classification:
        head += ["AUC", "optimal cutoff", "sensitivity", "specificity"]
    head += ["seed", "k"]
    lines = ["| " + " | ".join(head) + " |",
             "|" + "|".join(["---", "---"] + ["---:"] * (len(head) - 2)) + "|"]
    for label, cv in report.reports.items():
        row = [label, report.kinds.get(label, ""), _fmt(cv.risk), _fmt(cv.in_sample_risk)]
        if classification:
            opt = cv.extras.get("cutoff_optimal", {})
            row += [_fmt(cv.auc), _fmt(opt.get("threshold")), _fmt(opt.get("sensitivity")),
                    _fmt(opt.get("specificity"))]
        row += [str(cv.seed), str(cv.k)]
        lines.append("| " + " | ".join(row) + " |")
    _ensure_dir(path)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write("\n".join(lines) + "\n")
    log.info(f"💾 표 저장: {path}")
    return path


def roc_path(template, label):
    """'{label}' 자리 표시자가 없으면 확장자 앞에 _<label>을 붙인다."""
    template = str(template)
    if "{label}" in template:
        return template.replace("{label}", label)
    stem, ext = os.path.splitext(template)
    return f"{stem}_{label}{ext or '.csv'}"


def emit_roc(report, path):
    """분류 모델마다 threshold,fpr,tpr CSV (끝점 (0,0), (1,1) 포함)"""
    written = []
    for label, cv in report.reports.items():
        if cv.roc is None:
            continue
        out = roc_path(path, label)
        frame = pd.DataFrame(cv.roc.to_rows(), columns=["threshold", "fpr", "tpr"])
        _ensure_dir(out)
        frame.to_csv(out, index=False, float_format='%.10g', lineterminator='\n')
        written.append(out)
    if written:
        log.info(f"💾 ROC 저장: {len(written)}개 파일")
    return written


def write_json(data, path):
    _ensure_dir(path)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        json.dump(data, f, ensure_ascii=False, indent=2)
        f.write("\n")
    log.info(f"💾 JSON 저장: {path}")
    return path


def write_timings(report, path):
    return write_json({"name": report.name, "seconds": {k: round(v, 3) for k, v in report.timings.items()}},
                      path)


def emit_varstudy(study, path):
    """stepwise / forest 중요도 / lasso 진입 순서 세 열 Markdown 표"""
    steps = study.stepwise.steps
    rows = max(len(steps), len(study.forest_ranking), len(study.lasso_order))
    crit = study.criterion.upper()
    lines = [f"| Stepwise | {crit} | Random Forest | Gini | Lasso |",
             "|---|---:|---|---:|---|"]
    for i in range(rows):
        sv, sc = steps[i] if i < len(steps) else ("", None)
        fv, fs = study.forest_ranking[i] if i < len(study.forest_ranking) else ("", None)
        lv = study.lasso_order[i] if i < len(study.lasso_order) else ""
        lines.append(f"| {sv} | {_fmt(sc)} | {fv} | {_fmt(fs, 6)} | {lv} |")
    _ensure_dir(path)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write("\n".join(lines) + "\n")
    log.info(f"💾 변수 선택 비교표 저장: {path}")
    return path
