# twocultures/trees/forest.py
# Bagging / Random Forest, OOB 오차, 변수 중요도
#   트리 t의 부트스트랩 표본과 분할 후보 추출은 (master seed, t) 스트림만 사용하므로
#   병렬 실행 순서와 무관하게 같은 숲이 만들어진다.

from dataclasses import dataclass, field
import math

import numpy as np
from joblib import Parallel, delayed

from shared.errors import ValidationError
from shared.rng import child_rng, child_seed
from trees.cart import grow_tree
from utils.logger import get_logger

log = get_logger("trees.forest")


@dataclass
class ImportanceTable:
    names: list
    impurity: np.ndarray
    permutation: np.ndarray
    permutation_se: np.ndarray

    def ranking(self, by='impurity'):
        score = self.impurity if by == 'impurity' else self.permutation
        order = sorted(range(len(self.names)), key=lambda j: (-score[j], j))
        return [self.names[j] for j in order]

    def rows(self):
        return [
            {"variable": nm, "impurity_importance": float(a),
             "permutation_importance": float(b), "permutation_se": float(s)}
            for nm, a, b, s in zip(self.names, self.impurity, self.permutation, self.permutation_se)
        ]

    def to_dict(self):
        return {"rows": self.rows(), "ranking_impurity": self.ranking('impurity'),
                "ranking_permutation": self.ranking('permutation')}


@dataclass
class Forest:
    trees: list
    seeds: list
    in_bags: list
    oob_sets: list
    mtry: int
    kind: str
    features: list                  # 분할 후보 열 번호
    column_names: tuple
    classification: bool
    oob_prediction: np.ndarray = None
    oob_error: float = float('nan')
    train_x: np.ndarray = field(default=None, repr=False)
    train_y: np.ndarray = field(default=None, repr=False)
    _importance: ImportanceTable = field(default=None, repr=False)

    @property
    def n_trees(self):
        return len(self.trees)

    def member_predictions(self, x):
        return np.vstack([t.predict(x) for t in self.trees])

    def predict(self, x):
        """회귀: 평균, 분류: 평균 확률"""
        return np.mean(self.member_predictions(np.asarray(x, dtype=float)), axis=0)

    def to_dict(self):
        out = {"n_trees": self.n_trees, "mtry": self.mtry, "kind": self.kind,
               "oob_error": self.oob_error, "seeds": list(self.seeds)}
        if self._importance is not None:
            out["importance"] = self._importance.rows()
        return out


def default_mtry(p, classification):
    """회귀 ⌈p/3⌉, 분류 ⌈√p⌉"""
    return max(1, math.ceil(math.sqrt(p)) if classification else math.ceil(p / 3))


def _grow_member(x, y, t, seed, kind, mtry, min_leaf, max_depth, features, names, full_sample):
    n = x.shape[0]
    rng = child_rng(seed, t)
    in_bag = np.arange(n) if full_sample else rng.integers(0, n, size=n)
    seen = np.zeros(n, dtype=bool)
    seen[in_bag] = True
    tree_seed = child_seed(seed, t, 1)
    tree = grow_tree(x[in_bag], y[in_bag], kind, min_leaf, max_depth,
                     None if mtry >= len(features) else mtry, tree_seed,
                     columns=features, column_names=names)
    return tree, tree_seed, in_bag, np.flatnonzero(~seen)


def fit_random_forest(dm, n_trees=500, mtry=None, min_leaf=None, max_depth=None, seed=0,
                      kind=None, jobs=1, full_sample=False):
    """부트스트랩 표본마다 트리를 키우고, 노드마다 mtry개 후보 열을 무작위로 뽑는다."""
    if n_trees < 1:
        raise ValidationError("n_trees는 1 이상이어야 합니다.")
    classification = dm.binary
    kind = kind or ('gini' if classification else 'variance')
    features = [dm.col(c) for c in dm.feature_names]
    p = len(features)
    if mtry is None:
        mtry = default_mtry(p, classification)
    if not 1 <= mtry <= p:
        raise ValidationError(f"mtry({mtry})는 1 이상 p({p}) 이하여야 합니다.")
    if min_leaf is None:
        min_leaf = 1 if classification else 5

    x, y = dm.x, dm.y
    args = (seed, kind, mtry, min_leaf, max_depth, features, dm.column_names, full_sample)
    if jobs == 1:
        members = [_grow_member(x, y, t, *args) for t in range(n_trees)]
    else:
        members = Parallel(n_jobs=jobs)(delayed(_grow_member)(x, y, t, *args) for t in range(n_trees))

    trees = [m[0] for m in members]
    forest = Forest(trees, [m[1] for m in members], [m[2] for m in members], [m[3] for m in members],
                    mtry, kind, features, dm.column_names, classification, train_x=x, train_y=y)
    _oob(forest)
    log.debug(f"forest n_trees={n_trees} mtry={mtry} OOB={forest.oob_error:.6g}")
    return forest


def fit_bagging(dm, n_trees=500, min_leaf=None, max_depth=None, seed=0, kind=None, jobs=1,
                full_sample=False):
    """모든 열을 후보로 쓰는 부트스트랩 집계(mtry = p)"""
    p = len(dm.feature_names)
    return fit_random_forest(dm, n_trees, p, min_leaf, max_depth, seed, kind, jobs, full_sample)


def _oob(forest):
    x, y = forest.train_x, forest.train_y
    total = np.zeros(len(y))
    count = np.zeros(len(y))
    for tree, oob in zip(forest.trees, forest.oob_sets):
        if oob.size:
            total[oob] += tree.predict(x[oob])
            count[oob] += 1
    with np.errstate(invalid='ignore', divide='ignore'):
        pred = np.where(count > 0, total / np.maximum(count, 1), np.nan)
    forest.oob_prediction = pred
    seen = count > 0
    if not seen.any():
        return
    if forest.classification:
        forest.oob_error = float(np.mean((pred[seen] > 0.5) != (y[seen] > 0.5)))
    else:
        forest.oob_error = float(np.mean((y[seen] - pred[seen]) ** 2))


def importance(forest, seed=None):
    """(1) 불순도 감소: (1/T)Σ_t Σ_{분할 j on k} 이득_j / n_t
    (2) 순열: 100·mean_t(R_t^perm - R_t) / mean_t R_t, OOB 행에서 열 k를 섞어 측정
    """
    if forest._importance is not None and seed is None:
        return forest._importance
    x, y = forest.train_x, forest.train_y
    cols = forest.features
    names = [forest.column_names[c] for c in cols]
    T = forest.n_trees
    n = len(y)
    seed = forest.seeds[0] if seed is None else seed

    imp = np.zeros(len(cols))
    for tree in forest.trees:
        for k, c in enumerate(cols):
            imp[k] += tree.split_gain.get(c, 0.0) / n
    imp /= T

    deltas = np.zeros((T, len(cols)))
    base = np.zeros(T)
    used = np.zeros(T, dtype=bool)
    for t, (tree, oob) in enumerate(zip(forest.trees, forest.oob_sets)):
        if oob.size == 0:
            continue
        used[t] = True
        xo = x[oob].copy()
        yo = y[oob]
        base[t] = np.mean((yo - tree.predict(xo)) ** 2)
        for k, c in enumerate(cols):
            if c not in tree.split_gain:
                continue            # 분할에 쓰이지 않은 열은 섞어도 예측이 같다
            rng = child_rng(seed, t, 2, k)
            saved = xo[:, c].copy()
            xo[:, c] = saved[rng.permutation(oob.size)]
            deltas[t, k] = np.mean((yo - tree.predict(xo)) ** 2) - base[t]
            xo[:, c] = saved
    if not used.any():
        raise ValidationError("OOB 행이 있는 트리가 없어 순열 중요도를 계산할 수 없습니다.")
    d = deltas[used]
    scale = float(np.mean(base[used]))
    scale = scale if scale > 0 else 1.0
    perm = 100.0 * d.mean(axis=0) / scale
    se = 100.0 * (d.std(axis=0, ddof=1) / np.sqrt(d.shape[0]) if d.shape[0] > 1 else np.zeros(len(cols))) / scale
    table = ImportanceTable(names, imp, perm, se)
    forest._importance = table
    return table
