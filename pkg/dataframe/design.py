# twocultures/dataframe/design.py
# 수식(terms) → 수치 설계행렬 X, 반응변수 y 인코딩
#
# 지원하는 항:
#   a               numeric 그대로 / categorical → 기준수준(첫 수준) 제외 더미
#   a:b             이미 인코딩된 열끼리의 원소별 곱
#   square(a)       a²
#   hinge(a, c)     max(a - c, 0)
#   log(a)          자연로그
#   cut(a, b0, .., bk)  (b_i, b_{i+1}] 구간 범주화 → 더미
#   all             반응변수/제외 열을 뺀 모든 열
# 반응변수: 열 이름, log(a), gt(a, c)

from dataclasses import dataclass, field, replace
import re

import numpy as np

from dataframe.dataset import Column, CATEGORICAL, NUMERIC
from shared.errors import FormulaError

_CALL = re.compile(r'^\s*(\w+)\s*\((.*)\)\s*$')


@dataclass(frozen=True)
class EncodedFactor:
    """범주형 열 하나의 더미 인코딩 정보"""
    column: str
    levels: tuple
    reference: str
    dummies: tuple


@dataclass(frozen=True)
class DesignMatrix:
    x: np.ndarray
    y: np.ndarray
    column_names: tuple
    has_intercept: bool = True
    encoding_map: dict = field(default_factory=dict)
    response: str = 'y'
    binary: bool = False
    positive_label: str = None
    scaling: tuple = None      # (mean, sd), standardize() 결과일 때만

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        y = np.array(self.y, dtype=float)
        if x.ndim != 2:
            raise FormulaError("X는 2차원 행렬이어야 합니다.")
        if x.shape[0] != y.shape[0]:
            raise FormulaError(f"X 행 수({x.shape[0]})와 y 길이({y.shape[0]})가 다릅니다.")
        if x.shape[1] != len(self.column_names):
            raise FormulaError("열 이름 개수가 X의 열 수와 다릅니다.")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise FormulaError("설계행렬에 결측/비유한 값이 있습니다.")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 'y', y)
        object.__setattr__(self, 'column_names', tuple(self.column_names))

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def p(self):
        return self.x.shape[1]

    def col(self, name):
        try:
            return self.column_names.index(name)
        except ValueError:
            raise FormulaError(f"설계행렬에 없는 열: {name}") from None

    @property
    def feature_names(self):
        """절편을 제외한 열 이름"""
        return [c for c in self.column_names if c != '(Intercept)']

    def pm_view(self):
        """분류 반응 {0,1} → {-1,+1}"""
        if not self.binary:
            raise FormulaError("±1 표현은 이진 반응에서만 가능합니다.")
        return 2.0 * self.y - 1.0

    def take(self, rows):
        rows = np.asarray(rows)
        return replace(self, x=self.x[rows], y=self.y[rows])

    def select(self, names, intercept=None):
        """열 부분집합. intercept=None이면 현재 절편 여부 유지"""
        keep = [n for n in names if n != '(Intercept)']
        if intercept is None:
            intercept = self.has_intercept
        if intercept:
            if not self.has_intercept:
                raise FormulaError("원래 설계에 절편이 없습니다.")
            keep = ['(Intercept)'] + keep
        idx = [self.col(n) for n in keep]
        return replace(self, x=self.x[:, idx], column_names=tuple(keep),
                       has_intercept=bool(intercept), scaling=None)

    def with_response(self, y):
        return replace(self, y=np.asarray(y, dtype=float))

    # ── 표준화 ────────────────────────────────────────
    def penalized_mask(self):
        """절편이 아닌 열 = True"""
        return np.array([n != '(Intercept)' for n in self.column_names])

    def standardize(self):
        """절편이 아닌 열을 평균 0, 표준편차 1(분모 n)로 변환"""
        pen = self.penalized_mask()
        mean = np.where(pen, self.x.mean(axis=0), 0.0)
        sd = np.where(pen, self.x.std(axis=0), 1.0)
        sd = np.where(sd > 0, sd, 1.0)
        xs = (self.x - mean) / sd
        return replace(self, x=xs, scaling=(mean, sd))

    def unstandardize(self):
        if self.scaling is None:
            return self
        mean, sd = self.scaling
        return replace(self, x=self.x * sd + mean, scaling=None)

    def destandardize_coef(self, beta_std):
        """표준화 좌표의 계수 → 원래 척도 계수 (절편 보정 포함)"""
        mean, sd = self.scaling
        beta = np.asarray(beta_std, dtype=float) / sd
        if self.has_intercept:
            i0 = self.col('(Intercept)')
            beta[i0] = beta_std[i0] - np.sum(beta * mean)
        return beta

    def to_dict(self):
        return {
            "n": self.n,
            "p": self.p,
            "columns": list(self.column_names),
            "response": self.response,
            "has_intercept": self.has_intercept,
            "encoding": {k: {"reference": v.reference, "dummies": list(v.dummies)}
                         for k, v in self.encoding_map.items()},
        }


# ── 수식 파싱 ────────────────────────────────────────────
def split_terms(text):
    """괄호 밖의 쉼표로만 분리: 'a, hinge(b, 2), c' → ['a', 'hinge(b, 2)', 'c']"""
    if isinstance(text, (list, tuple)):
        return [t.strip() for t in text if t.strip()]
    out, depth, cur = [], 0, ''
    for ch in text:
        if ch == '(':
            depth += 1
        elif ch == ')':
            depth -= 1
        if ch == ',' and depth == 0:
            out.append(cur.strip())
            cur = ''
        else:
            cur += ch
    if cur.strip():
        out.append(cur.strip())
    return out


def _parse_call(term):
    m = _CALL.match(term)
    if not m:
        return None, None
    args = [a.strip() for a in split_terms(m.group(2))]
    return m.group(1), args


def _number(text, term):
    try:
        return float(text)
    except ValueError:
        if text.lower() in ('inf', '+inf'):
            return np.inf
        if text.lower() == '-inf':
            return -np.inf
        raise FormulaError(f"{term}: 숫자가 아닙니다: {text}") from None


def _fmt_break(b):
    """R cut() 라벨 숫자 형식 (유효숫자 3자리, 4000 → 4e+03)"""
    if np.isinf(b):
        return 'Inf' if b > 0 else '-Inf'
    return f"{b:.3g}"


def cut_column(col, breaks):
    """(b_i, b_{i+1}] 구간으로 범주화한 Column"""
    breaks = sorted(breaks)
    labels = [f"({_fmt_break(lo)},{_fmt_break(hi)}]" for lo, hi in zip(breaks[:-1], breaks[1:])]
    codes = np.searchsorted(np.asarray(breaks[1:]), col.values, side='left')
    if np.any(col.values <= breaks[0]) or np.any(codes >= len(labels)):
        raise FormulaError(f"cut({col.name}): 구간 밖의 값이 있습니다.")
    return Column(col.name, CATEGORICAL, codes, tuple(labels))


def _numeric(ds, name, term):
    if name not in ds:
        raise FormulaError(f"알 수 없는 열: {name} ({term})")
    col = ds.column(name)
    if col.kind != NUMERIC:
        raise FormulaError(f"{term}: '{name}' 열은 numeric 이어야 합니다.")
    return col.values


def _encode_factor(col, prefix=None):
    """기준수준(첫 수준) 제외 더미 (이름 = 열이름 + 수준)"""
    prefix = col.name if prefix is None else prefix
    names, mats = [], []
    for li, level in enumerate(col.levels[1:], start=1):
        names.append(f"{prefix}{level}")
        mats.append((col.values == li).astype(float))
    factor = EncodedFactor(col.name, col.levels, col.levels[0], tuple(names))
    return names, mats, factor


def _split_interaction(term):
    """괄호 밖의 ':'로 분리"""
    parts, depth, cur = [], 0, ''
    for ch in term:
        if ch == '(':
            depth += 1
        elif ch == ')':
            depth -= 1
        if ch == ':' and depth == 0:
            parts.append(cur.strip())
            cur = ''
        else:
            cur += ch
    parts.append(cur.strip())
    return parts


def _encode_term(ds, term, response, encoding_map):
    """항 하나 → (열 이름 목록, 열 벡터 목록)"""
    parts = _split_interaction(term)
    if len(parts) > 1:
        if response in parts:
            raise FormulaError(f"반응변수와의 상호작용은 허용되지 않습니다: {term}")
        left_names, left_cols = _encode_term(ds, parts[0], response, encoding_map)
        for part in parts[1:]:
            right_names, right_cols = _encode_term(ds, part, response, encoding_map)
            names, cols = [], []
            for ln, lc in zip(left_names, left_cols):
                for rn, rc in zip(right_names, right_cols):
                    names.append(f"{ln}:{rn}")
                    cols.append(lc * rc)
            left_names, left_cols = names, cols
        return left_names, left_cols

    fn, args = _parse_call(term)
    if fn is None:
        if term == response:
            raise FormulaError(f"반응변수를 설명변수로 사용할 수 없습니다: {term}")
        if term not in ds:
            raise FormulaError(f"알 수 없는 열: {term}")
        col = ds.column(term)
        if col.kind == NUMERIC:
            return [term], [col.values.astype(float)]
        names, mats, factor = _encode_factor(col)
        encoding_map[term] = factor
        return names, mats

    if fn in ('square', 'log'):
        if len(args) != 1:
            raise FormulaError(f"{fn}()는 인자 하나가 필요합니다: {term}")
        if args[0] == response:
            raise FormulaError(f"반응변수는 설명변수 항에 쓸 수 없습니다: {term}")
        v = _numeric(ds, args[0], term)
        if fn == 'square':
            return [f"square({args[0]})"], [v ** 2]
        if np.any(v <= 0):
            raise FormulaError(f"{term}: 양수가 아닌 값의 로그")
        return [f"log({args[0]})"], [np.log(v)]

    if fn == 'hinge':
        if len(args) != 2:
            raise FormulaError(f"hinge(a, c) 형식이어야 합니다: {term}")
        v = _numeric(ds, args[0], term)
        knot = _number(args[1], term)
        return [f"hinge({args[0]},{args[1]})"], [np.maximum(v - knot, 0.0)]

    if fn == 'cut':
        if len(args) < 3:
            raise FormulaError(f"cut(a, b0, b1, ...)에는 경계가 2개 이상 필요합니다: {term}")
        if args[0] == response:
            raise FormulaError(f"반응변수는 설명변수 항에 쓸 수 없습니다: {term}")
        _numeric(ds, args[0], term)
        binned = cut_column(ds.column(args[0]), [_number(a, term) for a in args[1:]])
        names, mats, factor = _encode_factor(binned)
        encoding_map[args[0]] = factor
        return names, mats

    raise FormulaError(f"지원하지 않는 변환: {fn}() ({term})")


def _encode_response(ds, response, positive):
    """반응변수 → (y, 이름, binary 여부, 양성 라벨, 사용한 원본 열)"""
    fn, args = _parse_call(response)
    if fn == 'log':
        v = _numeric(ds, args[0], response)
        if np.any(v <= 0):
            raise FormulaError(f"{response}: 양수가 아닌 값의 로그")
        return np.log(v), response, False, None, args[0]
    if fn == 'gt':
        if len(args) != 2:
            raise FormulaError(f"gt(a, c) 형식이어야 합니다: {response}")
        v = _numeric(ds, args[0], response)
        c = _number(args[1], response)
        return (v > c).astype(float), response, True, 'TRUE', args[0]
    if fn is not None:
        raise FormulaError(f"지원하지 않는 반응변수 변환: {response}")

    if response not in ds:
        raise FormulaError(f"반응변수 열이 없습니다: {response}")
    col = ds.column(response)
    if col.kind == NUMERIC:
        return col.values.astype(float), response, False, None, response
    if len(col.levels) != 2:
        raise FormulaError(f"범주형 반응변수는 수준이 2개여야 합니다: {response} {col.levels}")
    positive = positive if positive is not None else col.levels[1]
    if positive not in col.levels:
        raise FormulaError(f"양성 수준 '{positive}'이(가) {response}에 없습니다.")
    pos_code = col.levels.index(positive)
    return (col.values == pos_code).astype(float), response, True, positive, response


def encode(ds, response, formula, intercept=True, positive=None, exclude=()):
    """Dataset + 반응변수 + 항 목록 → DesignMatrix"""
    y, rname, binary, pos_label, source = _encode_response(ds, response, positive)
    excluded = set(exclude) | {source, response}

    terms = []
    for term in split_terms(formula):
        if term == 'all':
            terms.extend(n for n in ds.names if n not in excluded)
        else:
            terms.append(term)

    names, cols = [], []
    encoding_map = {}
    for term in terms:
        if term in excluded and term != response:
            raise FormulaError(f"제외된 열을 항에 사용했습니다: {term}")
        t_names, t_cols = _encode_term(ds, term, source, encoding_map)
        for nm, c in zip(t_names, t_cols):
            if nm in names:
                raise FormulaError(f"같은 열이 두 번 생성되었습니다: {nm}")
            names.append(nm)
            cols.append(np.asarray(c, dtype=float))

    n = ds.n_rows
    if intercept:
        names.insert(0, '(Intercept)')
        cols.insert(0, np.ones(n))
    x = np.column_stack(cols) if cols else np.empty((n, 0))
    return DesignMatrix(x, y, tuple(names), bool(intercept), encoding_map, rname, binary, pos_label)


def decode(dm, column, rows=None):
    """더미 열 → 원래 수준 라벨 (인코딩 역변환)"""
    if column not in dm.encoding_map:
        raise FormulaError(f"범주형으로 인코딩된 열이 아닙니다: {column}")
    factor = dm.encoding_map[column]
    idx = [dm.col(d) for d in factor.dummies]
    block = dm.x[:, idx] if rows is None else dm.x[np.asarray(rows)][:, idx]
    out = []
    for row in block:
        hit = np.flatnonzero(row > 0.5)
        out.append(factor.levels[hit[0] + 1] if hit.size else factor.reference)
    return out
