# twocultures/nonparam/__init__.py
# 커널/이웃 평활기와 가법모형

from nonparam.kernel import (KernelSmoother, nw_predict, smoother_matrix, loocv_risk, loocv_refit,
                             select_bandwidth, fit_kernel, cv_curve)
from nonparam.knn import KnnModel, fit_knn, fit_knn_design, knn_predict
from nonparam.smoother import smoother_trace
from nonparam.additive import AdditiveFit, fit_additive
