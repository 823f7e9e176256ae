"""Fully connected ReLU generator with hand-written backprop and Adam."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numkit import RngStream, as_matrix


@dataclass(frozen=True)
class NetArch:
    input_dim: int
    hidden_widths: tuple
    output_dim: int
    theory_guard: bool = False

    def __post_init__(self):
        widths = tuple(int(w) for w in self.hidden_widths)
        object.__setattr__(self, "hidden_widths", widths)
        if self.input_dim < 1 or self.output_dim < 1 or any(w < 1 for w in widths):
            raise ValueError(f"layer sizes must be positive: {self}")
        if self.theory_guard:
            need = 7 * self.output_dim + 1
            if len(widths) < 2 or any(w < need for w in widths):
                raise ValueError(
                    f"theory_guard requires depth >= 2 and every hidden width >= 7d+1 = {need}, "
                    f"got widths {list(widths)}"
                )

    @classmethod
    def default(cls, d: int, widths=(300, 50)) -> "NetArch":
        return cls(2 * d, tuple(widths), d)

    @property
    def sizes(self) -> list[int]:
        return [self.input_dim, *self.hidden_widths, self.output_dim]

    @property
    def shapes(self) -> list[tuple[int, int]]:
        s = self.sizes
        return [(s[k], s[k + 1]) for k in range(len(s) - 1)]

    @property
    def n_params(self) -> int:
        return sum(a * b + b for a, b in self.shapes)

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "hidden_widths": list(self.hidden_widths),
            "output_dim": self.output_dim,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "NetArch":
        return cls(int(doc["input_dim"]), tuple(doc["hidden_widths"]), int(doc["output_dim"]))


class MlpParams:
    """Flat parameter vector with per-layer ``(weight, bias)`` views.

    Weights are stored ``fan_in x fan_out`` so a layer computes ``X @ W + b``.
    Instances are treated as immutable; optimizer steps return new ones.
    """

    def __init__(self, arch: NetArch, theta: np.ndarray):
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (arch.n_params,):
            raise ValueError(f"expected {arch.n_params} parameters, got shape {theta.shape}")
        self.arch = arch
        self.theta = theta
        self.layers = []
        pos = 0
        for a, b in arch.shapes:
            Wv = theta[pos : pos + a * b].reshape(a, b)
            pos += a * b
            bv = theta[pos : pos + b]
            pos += b
            self.layers.append((Wv, bv))

    def copy(self) -> "MlpParams":
        return MlpParams(self.arch, self.theta.copy())


def init_mlp(arch: NetArch, stream: RngStream) -> MlpParams:
    """He initialisation: weights ``N(0, 2/fan_in)``, biases zero."""
    theta = np.zeros(arch.n_params)
    params = MlpParams(arch, theta)
    for k, (Wv, _) in enumerate(params.layers):
        fan_in = Wv.shape[0]
        Wv[...] = np.sqrt(2.0 / fan_in) * stream.split(f"layer{k}").normal(Wv.shape)
    return params


@dataclass
class ForwardCache:
    params: MlpParams
    inputs: list  # activations entering each layer
    pre: list  # pre-activations of the hidden layers


def forward(params: MlpParams, Z) -> tuple[np.ndarray, ForwardCache]:
    Z = as_matrix(Z, cols=params.arch.input_dim, name="latent input")
    inputs, pre = [], []
    h = Z
    last = len(params.layers) - 1
    for k, (Wv, bv) in enumerate(params.layers):
        inputs.append(h)
        a = h @ Wv + bv
        if k < last:
            pre.append(a)
            h = np.maximum(a, 0.0)
        else:
            h = a
    return h, ForwardCache(params, inputs, pre)


def backward(params: MlpParams, cache: ForwardCache, dL_dY) -> np.ndarray:
    """Gradient of the loss w.r.t. the flat parameter vector.

    ReLU'(0) is taken as 0.
    """
    if cache.params is not params:
        raise ValueError("forward cache does not belong to these parameters")
    n = cache.inputs[0].shape[0]
    delta = as_matrix(dL_dY, cols=params.arch.output_dim, name="dL/dY")
    if delta.shape[0] != n:
        raise ValueError(f"dL/dY has {delta.shape[0]} rows, forward batch had {n}")
    grad = np.empty_like(params.theta)
    grads = MlpParams(params.arch, grad)
    for k in range(len(params.layers) - 1, -1, -1):
        gW, gb = grads.layers[k]
        gW[...] = cache.inputs[k].T @ delta
        gb[...] = delta.sum(axis=0)
        if k > 0:
            delta = (delta @ params.layers[k][0].T) * (cache.pre[k - 1] > 0.0)
    return grad


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, n: int, beta1=0.9, beta2=0.999, eps=1e-8) -> "AdamState":
        return cls(np.zeros(n), np.zeros(n), 0, beta1, beta2, eps)

    def copy(self) -> "AdamState":
        return AdamState(self.m.copy(), self.v.copy(), self.t, self.beta1, self.beta2, self.eps)


class NonFiniteGradient(FloatingPointError):
    pass


def adam_step(params: MlpParams, state: AdamState, grad, lr: float) -> tuple[MlpParams, AdamState]:
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != params.theta.shape or state.m.shape != grad.shape:
        raise ValueError("gradient, parameters and Adam moments must have equal length")
    if not np.all(np.isfinite(grad)):
        raise NonFiniteGradient(f"non-finite gradient at Adam step {state.t + 1}")
    t = state.t + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    theta = params.theta - lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return MlpParams(params.arch, theta), AdamState(m, v, t, state.beta1, state.beta2, state.eps)


def clip_by_norm(grad: np.ndarray, max_norm: float | None) -> np.ndarray:
    if max_norm is None:
        return grad
    norm = float(np.linalg.norm(grad))
    if norm > max_norm:
        return grad * (max_norm / norm)
    return grad
