# twocultures/shared/rng.py
# 시드 스트림: 마스터 시드 + 작업 인덱스 → 독립 난수 생성기
# 병렬 실행 순서와 무관하게 같은 결과를 내기 위해 모든 앙상블/폴드가 이 함수를 사용한다.

import hashlib

import numpy as np


def child_rng(seed, *keys):
    """(seed, keys...) 조합마다 고정된 Generator를 돌려준다."""
    entropy = [int(seed) & 0xFFFFFFFF] + [int(k) & 0xFFFFFFFF for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def child_seed(seed, *keys):
    """하위 작업에 넘길 정수 시드"""
    return int(child_rng(seed, *keys).integers(0, 2**31 - 1))


def array_hash(values):
    """정수 배열의 SHA-256 (폴드 공유 검사용)"""
    arr = np.ascontiguousarray(np.asarray(values, dtype=np.int64))
    return hashlib.sha256(arr.tobytes()).hexdigest()
