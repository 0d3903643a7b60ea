# twocultures/bench/fetch.py
# 공개 출처에서 데이터셋을 내려받아 CSV로 저장

import io
import os
import time

import pandas as pd
import requests
from requests.exceptions import RequestException

from config.datasets import dataset_entry, dataset_path
from shared.errors import DatasetMissingError
from utils.logger import get_logger

log = get_logger("bench.fetch")

_ROWNAME_HEADERS = ('', 'rownames', 'Unnamed: 0')


def download(url, retries=3, delay=1, backoff=2, timeout=30):
    """GET 요청, 실패하면 delay·backoff^k 간격으로 재시도. 마지막 실패는 예외 그대로"""
    cur_delay = delay
    for attempt in range(1, retries + 1):
        try:
            resp = requests.get(url, timeout=timeout)
            resp.raise_for_status()
            return resp.text
        except RequestException as e:
            if attempt == retries:
                raise
            log.warning(f"⚠️ 다운로드 실패({attempt}/{retries}) {url}: {e}")
            time.sleep(cur_delay)
            cur_delay *= backoff


def convert_raw(text, entry):
    """원본 텍스트 → DataFrame (행 이름 열 제거, UCI 형식 변환)"""
    if entry['format'] == 'uci':
        frame = pd.read_csv(io.StringIO(text), sep=r'\s+', header=None,
                            names=list(entry['columns']), dtype=str)
    else:
        frame = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False)
        first = frame.columns[0]
        if first in _ROWNAME_HEADERS or first.startswith('Unnamed'):
            frame = frame.drop(columns=first)
    for col, mapping in entry.get('recode', {}).items():
        frame[col] = frame[col].map(lambda v: mapping.get(v, v))
    return frame


def fetch(dataset, dest=None, retries=3, delay=1, backoff=2):
    """데이터셋을 받아 dest(기본: TWOCULTURES_DATA_DIR/<file>)에 CSV로 저장"""
    entry = dataset_entry(dataset)
    path = dest or dataset_path(dataset)
    try:
        text = download(entry['url'], retries, delay, backoff)
    except RequestException as e:
        log.error(f"❌ {dataset} 다운로드 실패: {e}")
        raise DatasetMissingError(dataset, path) from e

    frame = convert_raw(text, entry)
    expected = entry.get('n_rows')
    if expected and len(frame) != expected:
        log.warning(f"⚠️ {dataset}: 행 수 {len(frame)} (예상 {expected})")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    frame.to_csv(path, index=False, lineterminator='\n')
    log.info(f"💾 {dataset} 저장: {path} ({len(frame)}행 × {frame.shape[1]}열)")
    return path
