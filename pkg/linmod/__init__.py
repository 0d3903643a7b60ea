# twocultures/linmod/__init__.py
# 계량경제 쪽 모수 추정기

from linmod.ols import LinearFit, fit_ols, fit_ridge, information_criteria, omitted_variable_bias
from linmod.lasso import LassoPath, fit_lasso, entry_order, cv_lambda, lambda_max, soft_threshold
from linmod.glm import GlmFit, fit_glm
from linmod.subset import StepwiseTrace, SubsetChoice, best_subset, forward_path, stepwise
from linmod.sgd import fit_sgd
