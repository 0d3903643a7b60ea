# twocultures/bench/__init__.py
# 선언적 실험 설정 → 공유 폴드 교차검증 → 표/ROC/JSON

from bench.config import ExperimentConfig, ModelSpec, load_config, parse_config, apply_overrides
from bench.models import KINDS, PARAMS, make_factory, validate_params
from bench.report import ExperimentReport, VariableStudy, emit_roc, emit_table, emit_varstudy
from bench.runner import load_dataset, build_design, make_plan, run, run_config, variable_study, variable_study_config
from bench.fetch import fetch
