# twocultures/svm/__init__.py
# 소프트 마진 SVM (선형 / RBF 커널)

from svm.dual import (SvmKernel, SvmModel, KernelCache, kernel_matrix, default_gamma, smo, fit_svm,
                      decision_value, hinge_risk, dual_objective, KERNELS)
