# twocultures/evaluation/__init__.py
# 손실함수, 분류 지표, 교차검증

from evaluation.losses import loss, loss_gradient, risk, parse_kind, KINDS
from evaluation.metrics import (ConfusionMatrix, RocCurve, confusion_at, kappa, roc,
                                mann_whitney_auc, optimal_cutoff)
from evaluation.validation import CvReport, BootstrapReport, cross_validate, bootstrap_validate, score_risk
