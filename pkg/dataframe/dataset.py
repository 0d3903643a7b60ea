# twocultures/dataframe/dataset.py
# CSV 로드 및 열 타입 판별 (numeric / categorical)

from dataclasses import dataclass, field
import re

import numpy as np
import pandas as pd
from pandas.errors import EmptyDataError, ParserError

from shared.errors import CsvParseError, SchemaError
from utils.logger import get_logger

log = get_logger("dataframe")

NUMERIC = 'numeric'
CATEGORICAL = 'categorical'
_MISSING = {'', 'NA', 'NaN', 'nan'}


def _frozen(arr):
    arr = np.array(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Column:
    """한 열: numeric이면 실수 값, categorical이면 수준 인덱스(codes)"""
    name: str
    kind: str
    values: np.ndarray
    levels: tuple = ()

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise SchemaError(f"알 수 없는 열 종류: {self.kind}")
        if self.kind == CATEGORICAL:
            if len(set(self.levels)) != len(self.levels):
                raise SchemaError(f"{self.name}: 수준 목록에 중복이 있습니다.")
            codes = np.asarray(self.values)
            if codes.size and (codes.min() < 0 or codes.max() >= len(self.levels)):
                raise SchemaError(f"{self.name}: 수준 인덱스가 범위를 벗어났습니다.")
            object.__setattr__(self, 'values', _frozen(codes.astype(np.int64)))
        else:
            object.__setattr__(self, 'values', _frozen(np.asarray(self.values, dtype=float)))

    @classmethod
    def categorical(cls, name, labels, levels=None):
        """문자열 라벨 → 첫 등장 순서의 수준 목록 + 코드"""
        labels = [str(v) for v in labels]
        if levels is None:
            levels = list(dict.fromkeys(labels))
        index = {lv: i for i, lv in enumerate(levels)}
        try:
            codes = [index[v] for v in labels]
        except KeyError as e:
            raise SchemaError(f"{name}: 수준 목록에 없는 값 {e}") from None
        return cls(name, CATEGORICAL, np.array(codes, dtype=np.int64), tuple(levels))

    def labels(self):
        if self.kind == NUMERIC:
            return [repr(float(v)) for v in self.values]
        return [self.levels[c] for c in self.values]

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class Dataset:
    """이름이 붙은 열 목록. 생성 후 변경 불가."""
    name: str
    columns: tuple
    n_rows: int = field(default=0)

    def __post_init__(self):
        cols = tuple(self.columns)
        object.__setattr__(self, 'columns', cols)
        if not cols:
            raise SchemaError("열이 하나도 없습니다.")
        names = [c.name for c in cols]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise SchemaError(f"열 이름이 중복됩니다: {dup}")
        lengths = {len(c) for c in cols}
        if len(lengths) != 1:
            raise SchemaError(f"열 길이가 서로 다릅니다: {sorted(lengths)}")
        n = lengths.pop()
        if n == 0:
            raise SchemaError("행이 없습니다.")
        object.__setattr__(self, 'n_rows', n)

    @property
    def names(self):
        return [c.name for c in self.columns]

    def __contains__(self, name):
        return name in self.names

    def column(self, name):
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(name)

    def with_column(self, col):
        """열 추가(같은 이름이면 교체)한 새 Dataset"""
        cols = [c for c in self.columns if c.name != col.name] + [col]
        return Dataset(self.name, tuple(cols))

    def take(self, rows):
        rows = np.asarray(rows)
        return Dataset(self.name, tuple(
            Column(c.name, c.kind, c.values[rows], c.levels) for c in self.columns
        ))

    def summary(self):
        kinds = [c.kind for c in self.columns]
        return {
            "name": self.name,
            "n_rows": self.n_rows,
            "numeric": kinds.count(NUMERIC),
            "categorical": kinds.count(CATEGORICAL),
        }


def load_schema(path):
    """`column=numeric|categorical` 형식의 스키마 파일 파싱"""
    schema = {}
    with open(path, 'r', encoding='utf-8') as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise SchemaError(f"{path}:{lineno} 'column=kind' 형식이 아닙니다: {raw.strip()}")
            name, kind = (s.strip() for s in line.split('=', 1))
            if kind not in (NUMERIC, CATEGORICAL):
                raise SchemaError(f"{path}:{lineno} 종류는 numeric 또는 categorical 이어야 합니다: {kind}")
            schema[name] = kind
    return schema


def _ragged_row(err):
    m = re.search(r'line (\d+)', str(err))
    return int(m.group(1)) if m else None


def load_csv(path, schema=None, name=None):
    """헤더가 있는 CSV를 읽어 Dataset으로 변환

    숫자로 모두 변환되는 열은 numeric, 그 외는 categorical(첫 등장 순서 수준).
    결측값은 허용하지 않는다.
    """
    schema = dict(schema or {})
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except EmptyDataError:
        raise CsvParseError(f"빈 파일입니다: {path}") from None
    except ParserError as e:
        raise CsvParseError("필드 개수가 헤더와 다릅니다.", row=_ragged_row(e)) from None

    if frame.shape[0] == 0:
        raise CsvParseError(f"데이터 행이 없습니다: {path}")

    unknown = set(schema) - set(frame.columns)
    if unknown:
        raise SchemaError(f"스키마에 있는 열이 파일에 없습니다: {sorted(unknown)}")

    columns = []
    for col in frame.columns:
        raw = frame[col]
        # 짧은 행은 NaN으로 채워지므로 결측과 함께 행 번호로 보고한다
        bad = raw.isna() | raw.str.strip().isin(_MISSING)
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0]) + 2
            raise CsvParseError(f"'{col}' 열에 결측값 또는 누락된 필드가 있습니다.", row=row)
        text = raw.str.strip()
        kind = schema.get(col)
        numeric = pd.to_numeric(text, errors='coerce')
        if kind is None:
            kind = NUMERIC if not numeric.isna().any() else CATEGORICAL
        if kind == NUMERIC:
            if numeric.isna().any():
                row = int(np.flatnonzero(numeric.isna().to_numpy())[0]) + 2
                raise CsvParseError(f"'{col}' 열을 숫자로 변환할 수 없습니다.", row=row)
            columns.append(Column(col, NUMERIC, numeric.to_numpy(dtype=float)))
        else:
            columns.append(Column.categorical(col, text.tolist()))

    ds = Dataset(name or str(path), tuple(columns))
    log.debug(f"📂 {path} 로드: {ds.summary()}")
    return ds


def sort_levels(ds, columns=None):
    """범주형 열의 수준을 사전순으로 다시 매긴 Dataset (기준수준 = 사전순 첫 수준)"""
    targets = set(columns) if columns is not None else None
    cols = []
    for c in ds.columns:
        if c.kind == CATEGORICAL and (targets is None or c.name in targets):
            c = Column.categorical(c.name, c.labels(), sorted(c.levels))
        cols.append(c)
    return Dataset(ds.name, tuple(cols))
