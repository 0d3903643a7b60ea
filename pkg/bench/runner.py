# twocultures/bench/runner.py
# 실험 실행: 모든 모델을 같은 FoldPlan으로 교차검증하고 결과 파일을 쓴다.

from pathlib import Path
import time

from bench.config import is_registered, load_config
from bench.models import make_factory
from bench.report import (ExperimentReport, VariableStudy, emit_roc, emit_table, emit_varstudy,
                          environment_stamp, write_json, write_timings)
from config.datasets import dataset_path
from config.settings import out_dir as default_out_dir
from dataframe import encode, load_csv, load_schema, make_folds, sort_levels
from evaluation import confusion_at, cross_validate, optimal_cutoff
from linmod import entry_order, fit_lasso, stepwise
from shared.errors import ConfigError, DatasetMissingError, ValidationError
from trees import fit_random_forest, importance
from utils.logger import get_logger
from utils.telegram import MSG_RUN_DONE, MSG_RUN_FAILED, MSG_RUN_START, send_telegram_message

log = get_logger("bench.runner")

FOREST_KINDS = ('bagging', 'random_forest')


def load_dataset(cfg):
    """등록된 데이터셋 키 또는 CSV 경로 → Dataset"""
    if is_registered(cfg.dataset):
        path = dataset_path(cfg.dataset)
    else:
        path = cfg.resolve(cfg.dataset)
    if not Path(path).exists():
        raise DatasetMissingError(cfg.dataset, path)
    schema = load_schema(cfg.resolve(cfg.schema)) if cfg.schema else None
    ds = load_csv(path, schema, name=cfg.dataset)
    if cfg.levels == 'sorted':
        ds = sort_levels(ds)
    return ds


def build_design(cfg, ds, terms=None, where="experiment.terms"):
    dm = encode(ds, cfg.response, terms or cfg.terms, positive=cfg.positive, exclude=cfg.exclude)
    if cfg.classification and not dm.binary:
        raise ConfigError("experiment.response", f"분류 실험에는 이진 반응변수가 필요합니다: {cfg.response}")
    if not cfg.classification and dm.binary:
        log.warning(f"⚠️ 회귀 실험의 반응변수 {cfg.response}가 이진입니다 ({where}).")
    return dm


def make_plan(cfg, dm):
    strata = dm.y if (cfg.stratified and cfg.classification) else None
    return make_folds(dm.n, cfg.k, cfg.seed, strata=strata)


def _cutoff_extras(cv, y):
    """0.5 임계값과 ROC 최적 임계값에서의 혼동행렬"""
    s_opt = optimal_cutoff(cv.roc)
    return {
        "cutoff_0.5": confusion_at(cv.pooled_scores, y.astype(int), 0.5).to_dict(),
        "cutoff_optimal": confusion_at(cv.pooled_scores, y.astype(int), s_opt).to_dict(),
    }


def _notify(enabled, template, **kwargs):
    if enabled:
        send_telegram_message(template.format(**kwargs))


def run_config(cfg, out_dir=None, jobs=1, notify=True, write=True):
    """설정의 모든 모델을 공유 폴드로 검증 → ExperimentReport (+ 파일)"""
    started = time.perf_counter()
    _notify(notify, MSG_RUN_START, name=cfg.name, n_models=len(cfg.models), k=cfg.k, seed=cfg.seed)
    try:
        report = _run(cfg, jobs)
    except Exception as e:
        _notify(notify, MSG_RUN_FAILED, name=cfg.name, error=e)
        raise
    elapsed = time.perf_counter() - started
    best = report.best()
    best_value = report.reports[best].auc if cfg.classification else report.reports[best].risk
    _notify(notify, MSG_RUN_DONE, name=cfg.name, best=best, best_risk=best_value, elapsed=elapsed)

    if write:
        write_outputs(cfg, report, out_dir)
    return report


def _run(cfg, jobs):
    ds = load_dataset(cfg)
    designs = {}

    def design_for(terms):
        key = terms or cfg.terms
        if key not in designs:
            designs[key] = build_design(cfg, ds, key)
        return designs[key]

    base = design_for(None)
    plan = make_plan(cfg, base)
    report = ExperimentReport(cfg.name, cfg.task, cfg.risk_kind, cfg.seed, cfg.k, plan.fold_hash(),
                              environment=environment_stamp(cfg.seed))
    log.info(f"🚀 실험 {cfg.name}: n={base.n}, 모델 {len(cfg.models)}개, {cfg.k}-폴드 (seed={cfg.seed})")

    for spec in cfg.models:
        dm = design_for(spec.terms)
        factory = make_factory(spec.kind, spec.params, cfg.seed)
        t0 = time.perf_counter()
        cv = cross_validate(factory, dm, plan, cfg.risk_kind, spec.label, jobs=jobs)
        if cv.fold_hash != report.fold_hash:
            raise ValidationError(f"{spec.label}: 폴드 해시가 실험 폴드와 다릅니다.")
        if cv.roc is not None:
            cv.extras.update(_cutoff_extras(cv, dm.y))
        if spec.kind in FOREST_KINDS and spec.params.get('importance'):
            report.importance[spec.label] = importance(factory(dm))
        report.reports[spec.label] = cv
        report.kinds[spec.label] = spec.kind
        report.timings[spec.label] = time.perf_counter() - t0
    return report


def write_outputs(cfg, report, out_dir=None):
    """표, ROC CSV, report.json, timings.json"""
    target = Path(out_dir or default_out_dir())
    paths = {
        "table": emit_table(report, target / cfg.output_name('table')),
        "json": write_json(report.to_dict(), target / cfg.output_name('json')),
        "timings": write_timings(report, target / f"{cfg.name}_timings.json"),
    }
    if cfg.classification:
        paths["roc"] = emit_roc(report, target / cfg.output_name('roc'))
    return paths


def run(path, seed=None, folds=None, out_dir=None, jobs=1, notify=True):
    """설정 파일 경로로 실행 (명령줄 덮어쓰기 적용)"""
    from bench.config import apply_overrides
    cfg = apply_overrides(load_config(path), seed, folds)
    return run_config(cfg, out_dir, jobs, notify)


def variable_study_config(cfg, jobs=1):
    """stepwise(AIC) / forest 불순도 중요도 / lasso 진입 순서"""
    ds = load_dataset(cfg)
    dm = build_design(cfg, ds)
    family = 'logit' if cfg.classification else 'gaussian'
    trace = stepwise(dm, family=family, direction='forward', criterion=cfg.varstudy.get('criterion', 'aic'))

    forest = fit_random_forest(dm, n_trees=cfg.varstudy.get('n_trees', 500), seed=cfg.seed, jobs=jobs)
    table = importance(forest)
    scores = dict(zip(table.names, table.impurity))
    ranking = [(nm, float(scores[nm])) for nm in table.ranking('impurity')]

    lasso_family = cfg.varstudy.get('lasso_family', 'auto')
    if lasso_family == 'auto':
        lasso_family = 'binomial' if cfg.classification else 'gaussian'
    order = entry_order(fit_lasso(dm, family=lasso_family))

    study = VariableStudy(cfg.name, trace, ranking, order, cfg.varstudy.get('criterion', 'aic'))
    if study.agree:
        log.info(f"✅ stepwise와 lasso의 첫 변수가 같습니다: {order[0]}")
    else:
        log.warning(f"⚠️ stepwise 첫 변수 {study.stepwise_order[:1]}와 lasso 첫 진입 {order[:1]}가 다릅니다.")
    return study


def variable_study(path, seed=None, out_dir=None, jobs=1, write=True):
    from bench.config import apply_overrides
    cfg = apply_overrides(load_config(path), seed)
    study = variable_study_config(cfg, jobs)
    if write:
        target = Path(out_dir or default_out_dir())
        emit_varstudy(study, target / f"{cfg.name}_varstudy.md")
        write_json(study.to_dict(), target / f"{cfg.name}_varstudy.json")
    return study
