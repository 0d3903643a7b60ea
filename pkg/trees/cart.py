# twocultures/trees/cart.py
# CART 이진 분할 트리 (분류: gini/entropy, 회귀: variance)
#
# 불순도는 노드 전체 합으로 정의:
#   gini     = n·p(1-p)
#   entropy  = -n·p·log p   (p=0 이면 0)
#   variance = Σ(y - ȳ)²
# 분할 x ≤ t 가 왼쪽, t는 정렬된 서로 다른 값 사이의 중점.
# 범주형 열은 더미로 인코딩되어 있으므로 0.5 분할이 한 수준 대 나머지 분할이 된다.

from dataclasses import dataclass, field

import numpy as np

from shared.errors import ValidationError
from shared.rng import child_rng
from utils.logger import get_logger

log = get_logger("trees")

KINDS = ('gini', 'entropy', 'variance')
_GAIN_EPS = 1e-12
_TIE_RTOL = 1e-10


# ── 불순도 ────────────────────────────────────────────────
def impurity_from_stats(n, s1, s2, kind):
    """노드 통계(n, Σy, Σy²)로 불순도 계산 (배열 연산 가능)"""
    n = np.asarray(n, dtype=float)
    if kind == 'variance':
        return np.maximum(s2 - s1 ** 2 / n, 0.0)
    p = s1 / n
    if kind == 'gini':
        return n * p * (1.0 - p)
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.where(p > 0, -n * p * np.log(np.where(p > 0, p, 1.0)), 0.0)


def impurity(values, kind):
    """라벨(0/1) 또는 수치 y 벡터의 불순도"""
    if kind not in KINDS:
        raise ValidationError(f"알 수 없는 불순도: {kind} (가능: {', '.join(KINDS)})")
    y = np.asarray(values, dtype=float)
    if y.size < 1:
        raise ValidationError("불순도 계산에는 관측치가 1개 이상 필요합니다.")
    return float(impurity_from_stats(y.size, y.sum(), (y ** 2).sum(), kind))


# ── 분할 탐색 ─────────────────────────────────────────────
@dataclass(frozen=True)
class Split:
    column: int
    threshold: float
    gain: float


def _sorted_rows(x, rows, c, presorted, in_node):
    if presorted is None:
        return rows[np.argsort(x[rows, c], kind='stable')]
    order = presorted[:, c]
    return order[in_node[order]]


def best_split(x, y, rows, columns, kind, min_leaf=1, presorted=None, in_node=None):
    """후보 열 전체를 훑어 이득이 최대인 (열, 임계값, 이득). 양의 이득이 없으면 None

    동률이면 열 번호가 작은 쪽, 같은 열에서는 임계값이 작은 쪽.
    presorted는 학습 전체 행을 열별로 정렬한 인덱스(부스팅/포레스트 재사용용).
    """
    rows = np.asarray(rows)
    m = rows.size
    if m < 2 * min_leaf:
        return None
    if presorted is not None and in_node is None:
        in_node = np.zeros(x.shape[0], dtype=bool)
        in_node[rows] = True

    yr = y[rows]
    parent = float(impurity_from_stats(m, yr.sum(), (yr ** 2).sum(), kind))
    best = None
    n_left = np.arange(1, m)
    n_right = m - n_left
    size_ok = (n_left >= min_leaf) & (n_right >= min_leaf)

    for c in sorted(columns):
        srt = _sorted_rows(x, rows, c, presorted, in_node)
        xs = x[srt, c]
        distinct = xs[1:] > xs[:-1]
        valid = distinct & size_ok
        if not valid.any():
            continue
        ys = y[srt]
        c1 = np.cumsum(ys)
        c2 = np.cumsum(ys ** 2) if kind == 'variance' else None
        s1_left = c1[:-1]
        s1_right = c1[-1] - s1_left
        if kind == 'variance':
            s2_left = c2[:-1]
            s2_right = c2[-1] - s2_left
        else:
            s2_left = s2_right = None
        child = (impurity_from_stats(n_left, s1_left, s2_left, kind)
                 + impurity_from_stats(n_right, s1_right, s2_right, kind))
        gain = np.where(valid, parent - child, -np.inf)
        i = int(np.argmax(gain))
        g = float(gain[i])
        if g <= _GAIN_EPS * max(1.0, abs(parent)):
            continue
        if best is None or g > best.gain + _TIE_RTOL * max(1.0, abs(best.gain)):
            best = Split(int(c), float((xs[i] + xs[i + 1]) / 2.0), g)
    return best


# ── 트리 ─────────────────────────────────────────────────
@dataclass
class TreeNode:
    value: float
    n: int
    impurity: float
    depth: int
    column: int = None
    threshold: float = None
    gain: float = 0.0
    left: 'TreeNode' = None
    right: 'TreeNode' = None

    @property
    def is_leaf(self):
        return self.column is None

    def to_dict(self, names=None):
        out = {"n": self.n, "value": self.value, "impurity": self.impurity, "depth": self.depth}
        if not self.is_leaf:
            out.update({
                "column": names[self.column] if names else self.column,
                "threshold": self.threshold,
                "gain": self.gain,
                "left": self.left.to_dict(names),
                "right": self.right.to_dict(names),
            })
        return out


@dataclass
class DecisionTree:
    """성장한 트리 + 예측용 평탄화 배열"""
    root: TreeNode
    kind: str
    column_names: tuple = ()
    n_columns: int = 0
    feature: np.ndarray = None      # 내부 노드: 열 번호, 잎: -1
    threshold: np.ndarray = None
    left: np.ndarray = None
    right: np.ndarray = None
    value: np.ndarray = None
    split_gain: dict = field(default_factory=dict)   # 열 → 이득 합

    def __post_init__(self):
        if self.feature is None:
            self._compile()

    def _compile(self):
        nodes = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            nodes.append(node)
            if not node.is_leaf:
                stack.append(node.right)
                stack.append(node.left)
        index = {id(nd): i for i, nd in enumerate(nodes)}
        k = len(nodes)
        self.feature = np.full(k, -1, dtype=np.int64)
        self.threshold = np.zeros(k)
        self.left = np.full(k, -1, dtype=np.int64)
        self.right = np.full(k, -1, dtype=np.int64)
        self.value = np.zeros(k)
        gains = {}
        for i, nd in enumerate(nodes):
            self.value[i] = nd.value
            if not nd.is_leaf:
                self.feature[i] = nd.column
                self.threshold[i] = nd.threshold
                self.left[i] = index[id(nd.left)]
                self.right[i] = index[id(nd.right)]
                gains[nd.column] = gains.get(nd.column, 0.0) + nd.gain
        self.split_gain = gains

    @property
    def n_leaves(self):
        return int(np.sum(self.feature < 0))

    @property
    def depth(self):
        def walk(nd):
            return 0 if nd.is_leaf else 1 + max(walk(nd.left), walk(nd.right))
        return walk(self.root)

    def apply(self, x):
        """행별 도착 잎의 노드 번호"""
        x = np.asarray(x, dtype=float)
        idx = np.zeros(x.shape[0], dtype=np.int64)
        active = self.feature[idx] >= 0
        while active.any():
            at = idx[active]
            go_left = x[np.flatnonzero(active), self.feature[at]] <= self.threshold[at]
            idx[active] = np.where(go_left, self.left[at], self.right[at])
            active = self.feature[idx] >= 0
        return idx

    def predict(self, x):
        return self.value[self.apply(x)]

    def with_leaf_values(self, values):
        """잎 값을 바꾼 복사본 (values: 노드 번호 → 값)"""
        new = DecisionTree(self.root, self.kind, self.column_names, self.n_columns,
                           self.feature, self.threshold, self.left, self.right,
                           self.value.copy(), dict(self.split_gain))
        for node, v in values.items():
            new.value[node] = v
        return new

    def to_dict(self):
        return {"kind": self.kind, "tree": self.root.to_dict(list(self.column_names) or None)}


def grow_tree(x, y, kind='variance', min_leaf=1, max_depth=None, mtry=None, seed=0,
              columns=None, column_names=(), presorted=None):
    """재귀 분할(깊이/최소 잎/양의 이득 조건에서 멈춤)

    columns: 분할 후보 열 번호(기본: 상수가 아닌 모든 열)
    mtry: 노드마다 후보 열에서 무작위로 뽑는 개수(None이면 전부)
    """
    if kind not in KINDS:
        raise ValidationError(f"알 수 없는 불순도: {kind}")
    if min_leaf < 1:
        raise ValidationError("min_leaf는 1 이상이어야 합니다.")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    if columns is None:
        columns = [c for c in range(x.shape[1]) if np.ptp(x[:, c]) > 0]
    columns = list(columns)
    if mtry is not None and not 1 <= mtry <= max(1, len(columns)):
        raise ValidationError(f"mtry({mtry})는 1 이상 후보 열 수({len(columns)}) 이하여야 합니다.")
    rng = child_rng(seed, 0) if mtry is not None else None

    def make_node(rows, depth):
        yr = y[rows]
        imp = float(impurity_from_stats(rows.size, yr.sum(), (yr ** 2).sum(), kind))
        return TreeNode(float(yr.mean()), int(rows.size), imp, depth)

    root_rows = np.arange(n)
    root = make_node(root_rows, 0)
    in_node = np.zeros(n, dtype=bool)
    stack = [(root, root_rows)]
    while stack:
        node, rows = stack.pop()
        if max_depth is not None and node.depth >= max_depth:
            continue
        if node.impurity <= 0 or rows.size < 2 * min_leaf or not columns:
            continue
        cand = columns
        if mtry is not None and mtry < len(columns):
            cand = sorted(rng.choice(columns, size=mtry, replace=False).tolist())
        if presorted is not None:
            in_node[:] = False
            in_node[rows] = True
        split = best_split(x, y, rows, cand, kind, min_leaf, presorted, in_node if presorted is not None else None)
        if split is None:
            continue
        go_left = x[rows, split.column] <= split.threshold
        left_rows, right_rows = rows[go_left], rows[~go_left]
        node.column, node.threshold, node.gain = split.column, split.threshold, split.gain
        node.left = make_node(left_rows, node.depth + 1)
        node.right = make_node(right_rows, node.depth + 1)
        stack.append((node.right, right_rows))
        stack.append((node.left, left_rows))

    return DecisionTree(root, kind, tuple(column_names), x.shape[1])


def fit_tree(dm, kind=None, min_leaf=1, max_depth=None, mtry=None, seed=0):
    """설계행렬(절편 제외)로 트리 성장. kind 기본값: 이진 반응 gini, 그 외 variance"""
    kind = kind or ('gini' if dm.binary else 'variance')
    cols = [dm.col(c) for c in dm.feature_names]
    return grow_tree(dm.x, dm.y, kind, min_leaf, max_depth, mtry, seed,
                     columns=cols, column_names=dm.column_names)


def dump_text(tree, names=None):
    """들여쓰기 규칙 덤프"""
    names = list(names or tree.column_names) or None
    lines = []

    def walk(nd, indent, label):
        pad = "  " * indent
        head = f"{pad}{label}n={nd.n} value={nd.value:.4f}"
        if nd.is_leaf:
            lines.append(head + " *")
            return
        col = names[nd.column] if names else f"x{nd.column}"
        lines.append(head)
        walk(nd.left, indent + 1, f"{col} <= {nd.threshold:.6g}: ")
        walk(nd.right, indent + 1, f"{col} > {nd.threshold:.6g}: ")

    walk(tree.root, 0, "root: ")
    return "\n".join(lines)
