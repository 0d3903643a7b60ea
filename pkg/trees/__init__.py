# twocultures/trees/__init__.py
# CART 트리와 앙상블 (bagging, random forest, boosting)

from trees.cart import (TreeNode, DecisionTree, Split, impurity, best_split, grow_tree, fit_tree,
                        dump_text, KINDS)
from trees.forest import Forest, ImportanceTable, fit_bagging, fit_random_forest, importance, default_mtry
from trees.boosting import BoostedModel, fit_boosting
