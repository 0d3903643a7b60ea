# twocultures/linmod/subset.py
# 변수 선택: 전역 탐색(best subset), 전진 경로, 단계적(AIC/BIC) 선택

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from linmod.glm import fit_glm, resolve_family
from linmod.ols import fit_ols
from shared.errors import RankDeficientError, ValidationError
from utils.logger import get_logger

log = get_logger("linmod.subset")

MAX_EXHAUSTIVE = 15


@dataclass(frozen=True)
class SubsetChoice:
    columns: tuple
    rss: float


@dataclass
class StepwiseTrace:
    direction: str
    criterion: str
    start_value: float
    steps: list = field(default_factory=list)       # [(변수, 이동 후 기준값)]
    final_model: tuple = ()

    @property
    def selected(self):
        return [v for v, _ in self.steps]

    def to_dict(self):
        return {
            "direction": self.direction,
            "criterion": self.criterion,
            "start_value": self.start_value,
            "steps": [{"variable": v, "value": c} for v, c in self.steps],
            "final_model": list(self.final_model),
        }


def _rss(x, y):
    if x.shape[1] == 0:
        return float(y @ y)
    beta, *_ = np.linalg.lstsq(x, y, rcond=None)
    r = y - x @ beta
    return float(r @ r)


def best_subset(dm, max_p=MAX_EXHAUSTIVE):
    """크기 s별로 RSS가 가장 작은 열 집합 {s: SubsetChoice}

    절편은 항상 포함하며 s는 절편을 뺀 열 개수.
    """
    features = dm.feature_names
    if len(features) > max_p:
        raise ValidationError(
            f"전역 탐색은 p ≤ {max_p}만 지원합니다 (p={len(features)}). stepwise 또는 lasso를 사용하세요.")
    base = [dm.col('(Intercept)')] if dm.has_intercept else []
    idx = {nm: dm.col(nm) for nm in features}
    out = {}
    for s in range(len(features) + 1):
        best = None
        for combo in combinations(features, s):
            cols = base + [idx[nm] for nm in combo]
            rss = _rss(dm.x[:, cols], dm.y)
            # combinations는 열 순서대로 나오므로 동률이면 앞선 조합이 남는다
            if best is None or rss < best.rss - 1e-12 * max(1.0, best.rss):
                best = SubsetChoice(combo, rss)
        out[s] = best
    return out


def forward_path(dm):
    """RSS 기준 전진 선택 전체 순서 [(변수, RSS)] (멈춤 규칙 없음)"""
    chosen = []
    base = [dm.col('(Intercept)')] if dm.has_intercept else []
    remaining = list(dm.feature_names)
    path = []
    while remaining:
        scores = [_rss(dm.x[:, base + [dm.col(c) for c in chosen + [nm]]], dm.y) for nm in remaining]
        k = int(np.argmin(scores))
        chosen.append(remaining.pop(k))
        path.append((chosen[-1], scores[k]))
    return path


def _score(dm, columns, family, criterion):
    sub = dm.select(columns)
    if family == 'gaussian-identity':
        fit = fit_ols(sub)
    else:
        fit = fit_glm(sub, family)
    return float(getattr(fit, criterion))


def stepwise(dm, family='gaussian', direction='forward', criterion='aic', candidates=None):
    """기준값을 가장 많이 줄이는 변수 하나씩 추가/제거, 개선이 없으면 멈춘다

    동률이면 열 번호가 가장 작은 변수를 택한다.
    """
    family = resolve_family(family)
    if direction not in ('forward', 'backward'):
        raise ValueError(f"direction은 forward 또는 backward: {direction}")
    if criterion not in ('aic', 'bic'):
        raise ValueError(f"criterion은 aic 또는 bic: {criterion}")
    pool = list(candidates) if candidates is not None else list(dm.feature_names)

    current = [] if direction == 'forward' else list(pool)
    value = _score(dm, current, family, criterion)
    trace = StepwiseTrace(direction, criterion, value)
    log.info(f"📊 stepwise {direction} {criterion.upper()} 시작값 {value:.2f}")

    while True:
        if direction == 'forward':
            moves = [nm for nm in pool if nm not in current]
        else:
            moves = list(current)
        moves.sort(key=dm.col)
        best_nm, best_val = None, value
        for nm in moves:
            trial = current + [nm] if direction == 'forward' else [c for c in current if c != nm]
            trial = sorted(trial, key=dm.col)
            try:
                v = _score(dm, trial, family, criterion)
            except RankDeficientError:
                continue
            if v < best_val:
                best_nm, best_val = nm, v
        if best_nm is None:
            break
        if direction == 'forward':
            current.append(best_nm)
        else:
            current.remove(best_nm)
        value = best_val
        trace.steps.append((best_nm, value))
        log.debug(f"{'+' if direction == 'forward' else '-'} {best_nm}: {criterion}={value:.4f}")

    trace.final_model = tuple(sorted(current, key=dm.col))
    return trace
