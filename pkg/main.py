# twocultures/main.py
# 명령줄 엔트리 포인트: run / fetch / varstudy
#
#   python main.py run config/experiments/carseats.cfg --seed 1 --folds 10
#   python main.py fetch credit
#   python main.py varstudy config/experiments/credit.cfg
#
# 종료 코드: 0 성공, 2 데이터셋 없음, 3 설정 오류, 1 그 밖의 실패

import sys
import argparse
from pathlib import Path

# 프로젝트 루트를 sys.path에 추가
if getattr(sys, 'frozen', False):
    base_path = Path(sys.executable).parent
else:
    base_path = Path(__file__).parent

if str(base_path) not in sys.path:
    sys.path.insert(0, str(base_path))

from shared.errors import ConfigError, DatasetMissingError
from utils.logger import get_logger, setup_logging

log = get_logger("main")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_DATASET_MISSING = 2
EXIT_CONFIG = 3


def build_parser():
    parser = argparse.ArgumentParser(prog='twocultures', description='두 모델링 문화 비교 벤치마크')
    parser.add_argument('--log-level', default=None, help='로그 레벨 (기본값: INFO 또는 TWOCULTURES_LOG_LEVEL)')
    parser.add_argument('--log-file', default=None, help='로그 파일 경로')
    sub = parser.add_subparsers(dest='command', required=True)

    p_run = sub.add_parser('run', help='설정 파일의 모든 모델을 같은 폴드로 교차검증')
    p_run.add_argument('config', help='실험 설정 파일 (.cfg 또는 .json)')
    p_run.add_argument('--seed', type=int, help='폴드/모델 시드 덮어쓰기')
    p_run.add_argument('--folds', type=int, help='폴드 수 k 덮어쓰기')
    p_run.add_argument('--out-dir', help='출력 디렉터리 (기본값: reports/ 또는 TWOCULTURES_OUT_DIR)')
    p_run.add_argument('--jobs', type=int, default=1, help='폴드 병렬 작업 수 (기본값: 1)')
    p_run.add_argument('--no-notify', action='store_true', help='텔레그램 알림 끄기')

    p_fetch = sub.add_parser('fetch', help='공개 출처에서 데이터셋 내려받기')
    p_fetch.add_argument('dataset', help='carseats, caravan, credit, wage, boston')
    p_fetch.add_argument('--out-dir', help='저장 디렉터리 (기본값: data/ 또는 TWOCULTURES_DATA_DIR)')

    p_var = sub.add_parser('varstudy', help='stepwise / forest 중요도 / lasso 진입 순서 비교')
    p_var.add_argument('config', help='실험 설정 파일')
    p_var.add_argument('--seed', type=int, help='forest 시드 덮어쓰기')
    p_var.add_argument('--out-dir', help='출력 디렉터리')
    p_var.add_argument('--jobs', type=int, default=1, help='트리 병렬 작업 수')
    return parser


def _print_report(report):
    print(f"\n📊 [{report.name}] {report.k}-폴드, seed={report.seed}, fold_hash={report.fold_hash[:12]}")
    for label, cv in report.reports.items():
        line = f"  - {label:<20} CV {report.risk_kind}={cv.risk:.6g}  in-sample={cv.in_sample_risk:.6g}"
        if cv.auc is not None:
            line += f"  AUC={cv.auc:.4f}"
        print(line)
    print(f"🏆 best: {report.best()}")


def _print_study(study):
    print(f"\n📊 [{study.name}] 변수 선택 비교")
    print(f"  stepwise: {', '.join(study.stepwise_order[:5])}")
    print(f"  forest  : {', '.join(v for v, _ in study.forest_ranking[:5])}")
    print(f"  lasso   : {', '.join(study.lasso_order[:5])}")
    print(f"  첫 변수 일치: {'✅' if study.agree else '❌'}")


def dispatch(args):
    if args.command == 'run':
        from bench.runner import run
        report = run(args.config, seed=args.seed, folds=args.folds, out_dir=args.out_dir,
                     jobs=args.jobs, notify=not args.no_notify)
        _print_report(report)
    elif args.command == 'fetch':
        from bench.fetch import fetch
        from config.datasets import dataset_entry
        try:
            dataset_entry(args.dataset)
        except ValueError as e:
            raise ConfigError("dataset", str(e)) from None
        path = fetch(args.dataset, dest=Path(args.out_dir) / dataset_entry(args.dataset)['file'] if args.out_dir else None)
        print(f"✅ 저장 완료: {path}")
    elif args.command == 'varstudy':
        from bench.runner import variable_study
        study = variable_study(args.config, seed=args.seed, out_dir=args.out_dir, jobs=args.jobs)
        _print_study(study)
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level, args.log_file)
    try:
        return dispatch(args)
    except DatasetMissingError as e:
        log.error(f"❌ {e}")
        return EXIT_DATASET_MISSING
    except ConfigError as e:
        log.error(f"❌ 설정 오류 {e}")
        return EXIT_CONFIG
    except KeyboardInterrupt:
        log.warning("🛑 사용자에 의해 중단되었습니다.")
        return EXIT_FAILED
    except Exception as e:
        log.exception(f"❌ 실행 실패: {e}")
        return EXIT_FAILED


if __name__ == '__main__':
    sys.exit(main())
