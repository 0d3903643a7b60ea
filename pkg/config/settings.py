# twocultures/config/settings.py
# 환경 변수(.env) 기반 경로 설정

import os
import sys
from pathlib import Path

from dotenv import load_dotenv

# 프로젝트 루트 (PyInstaller 실행 파일 포함)
if getattr(sys, 'frozen', False):
    BASE_PATH = Path(sys.executable).parent
else:
    BASE_PATH = Path(__file__).parent.parent

# .env 파일 로드
load_dotenv()

VERSION = "0.3.0"

EXPERIMENTS_DIR = BASE_PATH / 'config' / 'experiments'
BUNDLED_DATA_DIR = BASE_PATH / 'config' / 'data'


def data_dir():
    """데이터셋 디렉터리 (TWOCULTURES_DATA_DIR 우선)"""
    return Path(os.getenv("TWOCULTURES_DATA_DIR") or BASE_PATH / 'data')


def out_dir():
    """리포트 출력 디렉터리 (TWOCULTURES_OUT_DIR 우선)"""
    return Path(os.getenv("TWOCULTURES_OUT_DIR") or BASE_PATH / 'reports')
