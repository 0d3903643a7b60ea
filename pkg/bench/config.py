# twocultures/bench/config.py
# 실험 설정 로드/검증 (.cfg INI 또는 .json)
#
# [experiment]   name, task, dataset, schema, response, positive, terms, exclude, levels, risk
# [validation]   k, seed, stratified
# [model:<이름>] kind, terms(선택) + 하이퍼파라미터
# [outputs]      table, roc, json
# [varstudy]     n_trees, lasso_family, criterion

import configparser
from dataclasses import dataclass, field, replace
import json
from pathlib import Path

from bench.models import validate_params
from config.datasets import DATASETS
from config.settings import BUNDLED_DATA_DIR
from evaluation.losses import parse_kind
from shared.errors import ConfigError
from utils.logger import get_logger

log = get_logger("bench.config")

TASKS = ('classification', 'regression')
_EXPERIMENT_KEYS = ('name', 'task', 'dataset', 'schema', 'response', 'positive', 'terms', 'exclude',
                    'levels', 'risk')
_VALIDATION_KEYS = ('k', 'seed', 'stratified')
_OUTPUT_KEYS = ('table', 'roc', 'json')
_VARSTUDY_KEYS = ('n_trees', 'lasso_family', 'criterion')


@dataclass(frozen=True)
class ModelSpec:
    label: str
    kind: str
    params: dict
    terms: str = None


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    task: str
    dataset: str
    response: str
    terms: str = 'all'
    exclude: tuple = ()
    positive: str = None
    schema: str = None
    levels: str = 'appearance'
    risk: str = None
    k: int = 10
    seed: int = 0
    stratified: bool = False
    models: tuple = ()
    outputs: dict = field(default_factory=dict)
    varstudy: dict = field(default_factory=dict)
    base_dir: str = '.'

    @property
    def classification(self):
        return self.task == 'classification'

    @property
    def risk_kind(self):
        return self.risk or ('misclass' if self.classification else 'squared')

    def output_name(self, key):
        defaults = {'table': f"{self.name}_table.md", 'roc': f"{self.name}_roc_{{label}}.csv",
                    'json': f"{self.name}_report.json"}
        return self.outputs.get(key) or defaults[key]

    def resolve(self, path):
        """설정 파일 기준 상대 경로 → 절대 경로 (없으면 번들 데이터 디렉터리)"""
        p = Path(path)
        if p.is_absolute():
            return p
        local = Path(self.base_dir) / p
        if local.exists():
            return local
        bundled = BUNDLED_DATA_DIR / p
        return bundled if bundled.exists() else local

    def to_dict(self):
        return {
            "name": self.name, "task": self.task, "dataset": self.dataset, "response": self.response,
            "terms": self.terms, "exclude": list(self.exclude), "positive": self.positive,
            "levels": self.levels, "risk": self.risk_kind, "k": self.k, "seed": self.seed,
            "stratified": self.stratified,
            "models": [{"label": m.label, "kind": m.kind, "terms": m.terms, "params": m.params}
                       for m in self.models],
        }


def _bool(value, field):
    text = str(value).strip().lower()
    if text in ('1', 'yes', 'true', 'on'):
        return True
    if text in ('0', 'no', 'false', 'off'):
        return False
    raise ConfigError(field, f"yes/no 값이 아닙니다: {value!r}")


def _int(value, field, lo=None):
    try:
        out = int(str(value).strip())
    except ValueError:
        raise ConfigError(field, f"정수가 아닙니다: {value!r}") from None
    if lo is not None and out < lo:
        raise ConfigError(field, f"{lo} 이상이어야 합니다: {out}")
    return out


def _unknown(section, data, allowed):
    extra = sorted(set(data) - set(allowed))
    if extra:
        raise ConfigError(f"{section}.{extra[0]}", "알 수 없는 키입니다.")


def _read_sections(path):
    """파일 → {'experiment': {...}, 'validation': {...}, 'models': {label: {...}}, ...}"""
    path = Path(path)
    if not path.exists():
        raise ConfigError("file", f"설정 파일이 없습니다: {path}")
    if path.suffix.lower() == '.json':
        with open(path, 'r', encoding='utf-8') as f:
            try:
                raw = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError("file", f"JSON 파싱 실패: {e}") from None
        sections = {k: v for k, v in raw.items() if not k.startswith('model:')}
        models = dict(sections.pop('models', {}))
        models.update({k.split(':', 1)[1]: v for k, v in raw.items() if k.startswith('model:')})
        sections['models'] = models
        return sections

    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=('#', ';'))
    parser.optionxform = str
    try:
        parser.read(path, encoding='utf-8')
    except configparser.Error as e:
        raise ConfigError("file", f"설정 파싱 실패: {e}") from None
    sections = {'models': {}}
    for name in parser.sections():
        body = dict(parser.items(name))
        if name.startswith('model:'):
            sections['models'][name.split(':', 1)[1].strip()] = body
        else:
            sections[name] = body
    return sections


def parse_config(sections, base_dir='.'):
    unknown = sorted(set(sections) - {'experiment', 'validation', 'models', 'outputs', 'varstudy'})
    if unknown:
        raise ConfigError(unknown[0], "알 수 없는 섹션입니다.")
    exp = dict(sections.get('experiment') or {})
    _unknown('experiment', exp, _EXPERIMENT_KEYS)
    for key in ('name', 'task', 'dataset', 'response'):
        if not str(exp.get(key, '')).strip():
            raise ConfigError(f"experiment.{key}", "필수 항목입니다.")
    task = str(exp['task']).strip()
    if task not in TASKS:
        raise ConfigError("experiment.task", f"classification 또는 regression 이어야 합니다: {task}")
    levels = str(exp.get('levels', 'appearance')).strip()
    if levels not in ('appearance', 'sorted'):
        raise ConfigError("experiment.levels", f"appearance 또는 sorted: {levels}")
    risk = exp.get('risk')
    if risk:
        try:
            if risk != 'brier':
                parse_kind(risk)
        except ValueError as e:
            raise ConfigError("experiment.risk", str(e)) from None
    exclude = exp.get('exclude') or ()
    if isinstance(exclude, str):
        exclude = [s.strip() for s in exclude.split(',') if s.strip()]

    val = dict(sections.get('validation') or {})
    _unknown('validation', val, _VALIDATION_KEYS)
    k = _int(val.get('k', 10), "validation.k", lo=2)
    seed = _int(val.get('seed', 0), "validation.seed", lo=0)
    stratified = _bool(val.get('stratified', 'no'), "validation.stratified")

    models = []
    raw_models = sections.get('models') or {}
    if not raw_models:
        raise ConfigError("model", "[model:<이름>] 섹션이 하나 이상 필요합니다.")
    for label, body in raw_models.items():
        body = dict(body)
        where = f"model:{label}"
        kind = str(body.pop('kind', '')).strip()
        if not kind:
            raise ConfigError(f"{where}.kind", "필수 항목입니다.")
        terms = body.pop('terms', None)
        params = validate_params(kind, body, where)
        models.append(ModelSpec(label, kind, params, terms))

    outputs = dict(sections.get('outputs') or {})
    _unknown('outputs', outputs, _OUTPUT_KEYS)
    var = dict(sections.get('varstudy') or {})
    _unknown('varstudy', var, _VARSTUDY_KEYS)
    varstudy = {
        'n_trees': _int(var.get('n_trees', 500), "varstudy.n_trees", lo=1),
        'lasso_family': str(var.get('lasso_family', 'auto')).strip(),
        'criterion': str(var.get('criterion', 'aic')).strip(),
    }
    if varstudy['lasso_family'] not in ('auto', 'gaussian', 'binomial'):
        raise ConfigError("varstudy.lasso_family", "auto, gaussian, binomial 중 하나여야 합니다.")
    if varstudy['criterion'] not in ('aic', 'bic'):
        raise ConfigError("varstudy.criterion", "aic 또는 bic 이어야 합니다.")

    return ExperimentConfig(
        name=str(exp['name']).strip(), task=task, dataset=str(exp['dataset']).strip(),
        response=str(exp['response']).strip(), terms=exp.get('terms') or 'all',
        exclude=tuple(exclude), positive=exp.get('positive') or None, schema=exp.get('schema') or None,
        levels=levels, risk=risk or None, k=k, seed=seed, stratified=stratified, models=tuple(models),
        outputs=outputs, varstudy=varstudy, base_dir=str(base_dir),
    )


def load_config(path):
    """설정 파일(.cfg/.json) → ExperimentConfig (검증 실패 시 ConfigError)"""
    cfg = parse_config(_read_sections(path), Path(path).parent)
    log.debug(f"설정 로드: {path} ({len(cfg.models)}개 모델, k={cfg.k}, seed={cfg.seed})")
    return cfg


def apply_overrides(cfg, seed=None, folds=None):
    """명령줄 인자로 seed, k 덮어쓰기"""
    changes = {}
    if seed is not None:
        changes['seed'] = _int(seed, "--seed", lo=0)
    if folds is not None:
        changes['k'] = _int(folds, "--folds", lo=2)
    return replace(cfg, **changes) if changes else cfg


def is_registered(dataset):
    return dataset in DATASETS
