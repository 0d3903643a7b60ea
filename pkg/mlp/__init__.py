# twocultures/mlp/__init__.py
# 퍼셉트론과 소규모 전방향 신경망

from mlp.network import (NetworkSpec, ACTIVATIONS, LOSSES, build_network, forward, gradient, risk,
                         predict, targets, train)
from mlp.perceptron import PerceptronFit, fit_perceptron
