# twocultures/utils/logger.py
# 로그 설정 (콘솔 + 선택적 파일)

import logging
import os

_FORMAT = "[%(asctime)s] %(levelname)s %(name)s - %(message)s"
_configured = False


def setup_logging(level=None, log_file=None):
    """루트 로거에 핸들러를 한 번만 붙인다."""
    global _configured
    level = level or os.getenv("TWOCULTURES_LOG_LEVEL", "INFO")
    root = logging.getLogger("twocultures")
    root.setLevel(level.upper() if isinstance(level, str) else level)

    if not _configured:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_FORMAT, "%H:%M:%S"))
        root.addHandler(handler)
        root.propagate = False
        _configured = True

    if log_file:
        os.makedirs(os.path.dirname(os.path.abspath(log_file)), exist_ok=True)
        fh = logging.FileHandler(log_file, encoding="utf-8")
        fh.setFormatter(logging.Formatter(_FORMAT))
        root.addHandler(fh)
    return root


def get_logger(name):
    """모듈별 로거: twocultures.<name>"""
    return logging.getLogger(f"twocultures.{name}")
