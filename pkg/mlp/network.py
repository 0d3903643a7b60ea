# twocultures/mlp/network.py
# 전방향 신경망 F = F^K ∘ … ∘ F^1, 층마다 a_k = φ_k(W_k [a_{k-1}, 1])
# 역전파로 경험적 위험 R̂ = (1/n)Σℓ(y_i, F(x_i))의 정확한 기울기를 구하고 SGD로 학습한다.
#
# 손실 (출력은 1차원):
#   squared  : (y - ŷ)²
#   logistic : 교차엔트로피, y ∈ {0,1}, ŷ = 확률 (출력층 sigmoid)
#   hinge    : max(0, 1 - y·ŷ), y ∈ {-1,+1}

from dataclasses import dataclass, field
import copy

import numpy as np
from scipy.special import expit

from evaluation.losses import gradient_fn, loss
from linmod.sgd import learning_rate
from shared.errors import DivergenceError, ValidationError
from shared.rng import child_rng
from utils.logger import get_logger

log = get_logger("mlp")

ACTIVATIONS = ('tanh', 'sigmoid', 'identity')
LOSSES = {'squared': 'squared', 'logistic': 'logloss', 'hinge': 'hinge'}


def _activate(name, z):
    if name == 'tanh':
        return np.tanh(z)
    if name == 'sigmoid':
        return expit(z)
    return z


def _derivative(name, a):
    """φ'(z)를 출력 a = φ(z)로 표현"""
    if name == 'tanh':
        return 1.0 - a ** 2
    if name == 'sigmoid':
        return a * (1.0 - a)
    return np.ones_like(a)


def _with_bias(a):
    return np.hstack([a, np.ones((a.shape[0], 1))])


@dataclass
class NetworkSpec:
    sizes: tuple                        # (p₀, p₁, …, p_K), p_K = 1
    activations: tuple                  # 층 1..K
    loss: str = 'squared'
    weights: list = None                # W_k: p_k × (p_{k-1} + 1), 마지막 열이 편향
    columns: list = field(default_factory=list)     # 입력으로 쓰는 설계행렬 열
    center: np.ndarray = None
    scale: np.ndarray = None
    risk_trace: list = field(default_factory=list)

    def __post_init__(self):
        self.sizes = tuple(int(s) for s in self.sizes)
        self.activations = tuple(self.activations)
        if len(self.sizes) < 2 or min(self.sizes) < 1:
            raise ValidationError(f"층 크기가 올바르지 않습니다: {self.sizes}")
        if self.sizes[-1] != 1:
            raise ValidationError("출력층은 뉴런 1개여야 합니다.")
        if len(self.activations) != len(self.sizes) - 1:
            raise ValidationError("활성함수 개수는 층 수(K)와 같아야 합니다.")
        bad = [a for a in self.activations if a not in ACTIVATIONS]
        if bad:
            raise ValidationError(f"지원하지 않는 활성함수: {bad}")
        if self.loss not in LOSSES:
            raise ValidationError(f"지원하지 않는 손실: {self.loss} (가능: {', '.join(LOSSES)})")
        if self.loss == 'logistic' and self.activations[-1] != 'sigmoid':
            raise ValidationError("logistic 손실은 출력층 sigmoid가 필요합니다.")
        if self.weights is None:
            self.weights = [np.zeros((b, a + 1)) for a, b in zip(self.sizes[:-1], self.sizes[1:])]
        for k, w in enumerate(self.weights):
            if w.shape != (self.sizes[k + 1], self.sizes[k] + 1):
                raise ValidationError(f"W_{k + 1} 모양 {w.shape}이 층 크기와 맞지 않습니다.")

    @property
    def depth(self):
        return len(self.weights)

    @property
    def n_params(self):
        return sum(w.size for w in self.weights)

    def init(self, seed=0):
        """균등분포 [-1/√fan_in, 1/√fan_in] 초기화 (fan_in은 편향 포함)"""
        rng = child_rng(seed, 0)
        self.weights = []
        for a, b in zip(self.sizes[:-1], self.sizes[1:]):
            bound = 1.0 / np.sqrt(a + 1)
            self.weights.append(rng.uniform(-bound, bound, size=(b, a + 1)))
        return self

    def copy(self):
        return copy.deepcopy(self)

    def flat(self):
        return np.concatenate([w.ravel() for w in self.weights])

    def set_flat(self, theta):
        theta = np.asarray(theta, dtype=float)
        at = 0
        for k, w in enumerate(self.weights):
            self.weights[k] = theta[at:at + w.size].reshape(w.shape).copy()
            at += w.size
        return self

    def inputs(self, x):
        """설계행렬 행 → 신경망 입력 (열 선택 + 표준화)"""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.columns:
            x = x[:, self.columns]
        if self.center is not None:
            x = (x - self.center) / self.scale
        return x

    def predict(self, x):
        return predict(self, x)

    def to_dict(self):
        return {
            "sizes": list(self.sizes),
            "activations": list(self.activations),
            "loss": self.loss,
            "weights": [w.tolist() for w in self.weights],
            "center": None if self.center is None else self.center.tolist(),
            "scale": None if self.scale is None else self.scale.tolist(),
            "final_train_risk": self.risk_trace[-1] if self.risk_trace else None,
        }


def build_network(p, hidden=(), activation='tanh', loss='squared', output=None):
    """입력 p, 은닉층 크기 hidden → NetworkSpec (가중치 0)"""
    hidden = tuple(hidden)
    if output is None:
        output = 'sigmoid' if loss == 'logistic' else 'identity'
    return NetworkSpec((p,) + hidden + (1,), (activation,) * len(hidden) + (output,), loss)


def forward(net, x):
    """층별 출력 [a₀ = x, a₁, …, a_K]"""
    a = np.atleast_2d(np.asarray(x, dtype=float))
    if a.shape[1] != net.sizes[0]:
        raise ValidationError(f"입력 차원 {a.shape[1]} ≠ p₀ = {net.sizes[0]}")
    outs = [a]
    for w, act in zip(net.weights, net.activations):
        a = _activate(act, _with_bias(a) @ w.T)
        outs.append(a)
    return outs


def _output_delta(net, y, out):
    """∂R̂/∂z_K (출력층 선형결합에 대한 기울기)"""
    m = out.shape[0]
    if net.loss == 'logistic':
        return (out - y[:, None]) / m
    dl = gradient_fn(LOSSES[net.loss])(y, out[:, 0])[:, None] / m
    return dl * _derivative(net.activations[-1], out)


def gradient(net, x, y):
    """역전파: W_k마다 ∂R̂/∂W_k"""
    y = np.asarray(y, dtype=float).ravel()
    outs = forward(net, x)
    delta = _output_delta(net, y, outs[-1])
    grads = [None] * net.depth
    for k in range(net.depth - 1, -1, -1):
        grads[k] = delta.T @ _with_bias(outs[k])
        if k > 0:
            delta = (delta @ net.weights[k][:, :-1]) * _derivative(net.activations[k - 1], outs[k])
    return grads


def risk(net, x, y):
    """경험적 위험 (1/n)Σℓ(y_i, F(x_i))"""
    out = forward(net, x)[-1][:, 0]
    return float(np.mean(loss(LOSSES[net.loss], np.asarray(y, dtype=float), out)))


def predict(net, x):
    """설계행렬 행의 출력 (logistic이면 P(Y=1|x))"""
    return forward(net, net.inputs(x))[-1][:, 0]


def targets(net, dm):
    """손실에 맞는 라벨: hinge는 ±1, 나머지는 y 그대로"""
    if net.loss == 'hinge':
        return dm.pm_view()
    if net.loss == 'logistic' and not dm.binary:
        raise ValidationError("logistic 손실에는 이진 반응변수가 필요합니다.")
    return dm.y


def train(net, dm, epochs=100, gamma0=0.1, decay=0.0, seed=0, standardize=False):
    """관측치 단위 SGD. 매 epoch 행 순서를 섞고 학습 위험을 기록한다.

    net은 제자리에서 갱신되며, 가중치가 비어 있으면 init(seed)로 초기화한다.
    epochs=0이면 가중치를 건드리지 않는다.
    """
    if epochs < 0 or gamma0 <= 0:
        raise ValidationError("epochs ≥ 0, γ₀ > 0 이어야 합니다.")
    net.columns = [dm.col(c) for c in dm.feature_names]
    if len(net.columns) != net.sizes[0]:
        raise ValidationError(f"특징 열 {len(net.columns)}개 ≠ 입력층 크기 {net.sizes[0]}")
    if epochs == 0:
        net.risk_trace = []
        return net
    if all(not np.any(w) for w in net.weights):
        net.init(seed)
    raw = dm.x[:, net.columns]
    if standardize:
        sd = raw.std(axis=0)
        net.center, net.scale = raw.mean(axis=0), np.where(sd > 0, sd, 1.0)
    x = net.inputs(dm.x)
    y = targets(net, dm)

    rng = child_rng(seed, 1)
    net.risk_trace = []
    for t in range(epochs):
        gamma = learning_rate(gamma0, decay, t)
        for i in rng.permutation(dm.n):
            for w, g in zip(net.weights, gradient(net, x[i:i + 1], y[i:i + 1])):
                w -= gamma * g
        if not all(np.all(np.isfinite(w)) for w in net.weights):
            raise DivergenceError(f"신경망 가중치가 발산했습니다 (epoch {t}, γ={gamma:.3g}). 학습률을 낮추세요.")
        net.risk_trace.append(risk(net, x, y))
        log.debug(f"MLP epoch={t} γ={gamma:.4g} risk={net.risk_trace[-1]:.6f}")
    return net
