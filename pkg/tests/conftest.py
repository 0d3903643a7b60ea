# twocultures/tests/conftest.py
# 공용 픽스처: 무작위 설계행렬, 직교 설계, 번들 합성 데이터

import sys
from pathlib import Path

import numpy as np
import pytest

# 프로젝트 루트를 sys.path에 추가
base_path = Path(__file__).parent.parent
if str(base_path) not in sys.path:
    sys.path.insert(0, str(base_path))

from config.settings import BUNDLED_DATA_DIR, EXPERIMENTS_DIR
from dataframe import DesignMatrix


def pytest_configure(config):
    config.addinivalue_line("markers", "reproduction: 원본 데이터셋이 있어야 하는 재현 테스트")


def make_design(x, y, names=None, intercept=True, binary=False):
    """행렬 → DesignMatrix (intercept=True면 첫 열에 1을 붙인다)"""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    names = list(names or [f"x{j + 1}" for j in range(x.shape[1])])
    if intercept:
        x = np.column_stack([np.ones(len(x)), x])
        names = ['(Intercept)'] + names
    return DesignMatrix(x, np.asarray(y, dtype=float), tuple(names), intercept, binary=binary)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def linear_design(rng):
    """y = 1 + 2x1 - x2 + 0.5x3 + 잡음 (n=200)"""
    x = rng.normal(size=(200, 3))
    y = 1.0 + x @ np.array([2.0, -1.0, 0.5]) + 0.3 * rng.normal(size=200)
    return make_design(x, y)


@pytest.fixture
def logistic_design(rng):
    """P(Y=1) = expit(-0.5 + 1.5x1 - x2) (n=300)"""
    x = rng.normal(size=(300, 2))
    eta = -0.5 + 1.5 * x[:, 0] - x[:, 1]
    y = (rng.uniform(size=300) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
    return make_design(x, y, binary=True)


@pytest.fixture
def orthonormal_design(rng):
    """중심화된 직교 열 (XᵀX = nI) + 절편"""
    n, p = 64, 4
    z = rng.normal(size=(n, p))
    z -= z.mean(axis=0)
    q, _ = np.linalg.qr(z)
    x = q * np.sqrt(n)
    beta = np.array([3.0, -1.5, 0.4, 0.0])
    y = 2.0 + x @ beta + 0.2 * rng.normal(size=n)
    return make_design(x, y)


@pytest.fixture
def synthetic_csv():
    return BUNDLED_DATA_DIR / 'synthetic.csv'


@pytest.fixture
def synthetic_cfg():
    return EXPERIMENTS_DIR / 'synthetic.cfg'


@pytest.fixture
def synthetic_regression_cfg():
    return EXPERIMENTS_DIR / 'synthetic_regression.cfg'
