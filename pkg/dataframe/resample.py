# twocultures/dataframe/resample.py
# k-블록 폴드 분할 및 부트스트랩 표본 (시드 고정 시 재현 가능)

from dataclasses import dataclass

import numpy as np

from shared.errors import ValidationError
from shared.rng import array_hash


@dataclass(frozen=True)
class FoldPlan:
    """assignment[i] ∈ 1..k : i번째 행이 속한 폴드"""
    k: int
    assignment: np.ndarray
    seed: int
    stratified: bool = False

    def __post_init__(self):
        a = np.array(self.assignment, dtype=np.int64)
        a.setflags(write=False)
        object.__setattr__(self, 'assignment', a)

    @property
    def n(self):
        return len(self.assignment)

    def sizes(self):
        return np.bincount(self.assignment, minlength=self.k + 1)[1:]

    def test_rows(self, j):
        return np.flatnonzero(self.assignment == j)

    def train_test(self, j):
        """폴드 j(1..k)를 검증용으로 남긴 (학습 행, 검증 행)"""
        mask = self.assignment == j
        return np.flatnonzero(~mask), np.flatnonzero(mask)

    def fold_hash(self):
        return array_hash(self.assignment)

    def to_dict(self):
        return {"k": self.k, "seed": self.seed, "stratified": self.stratified,
                "sizes": self.sizes().tolist(), "hash": self.fold_hash()}


@dataclass(frozen=True)
class BootstrapSample:
    """in_bag: 복원추출된 n개 행 인덱스(0부터), out_of_bag: 한 번도 뽑히지 않은 행"""
    in_bag: np.ndarray
    out_of_bag: np.ndarray
    seed: int

    @property
    def oob_fraction(self):
        return len(self.out_of_bag) / len(self.in_bag)


def make_folds(n, k, seed, strata=None):
    """균형 잡힌 무작위 k-블록 분할 (폴드 크기 차이 ≤ 1)

    strata가 주어지면 클래스별로 섞은 뒤 이어 붙여 순환 배정하므로
    전체 폴드 크기도 균형을 유지하면서 각 클래스가 폴드에 고르게 퍼진다.
    """
    n, k = int(n), int(k)
    if k < 2:
        raise ValidationError(f"k는 2 이상이어야 합니다: k={k}")
    if k > n:
        raise ValidationError(f"k({k})가 행 수 n({n})보다 큽니다.")
    rng = np.random.default_rng(seed)

    if strata is None:
        order = rng.permutation(n)
    else:
        strata = np.asarray(strata)
        if len(strata) != n:
            raise ValidationError("strata 길이가 n과 다릅니다.")
        blocks = []
        for level in np.unique(strata):
            rows = np.flatnonzero(strata == level)
            blocks.append(rows[rng.permutation(len(rows))])
        order = np.concatenate(blocks)

    # 폴드 번호 자체도 섞어서 나머지 행이 항상 앞쪽 폴드에 몰리지 않게 한다
    labels = rng.permutation(k) + 1
    assignment = np.empty(n, dtype=np.int64)
    assignment[order] = labels[np.arange(n) % k]
    return FoldPlan(k, assignment, seed, strata is not None)


def bootstrap(n, seed):
    """n개 복원추출 + out-of-bag 여집합"""
    n = int(n)
    if n < 1:
        raise ValidationError("n은 1 이상이어야 합니다.")
    rng = np.random.default_rng(seed)
    in_bag = rng.integers(0, n, size=n)
    seen = np.zeros(n, dtype=bool)
    seen[in_bag] = True
    return BootstrapSample(in_bag, np.flatnonzero(~seen), seed)
