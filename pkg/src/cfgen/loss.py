"""Random-feature MMD training objective and its gradient w.r.t. generator outputs.

With ``theta_il = W_l . Y_i``, ``C_l = sum_i cos theta_il`` and
``S_l = sum_i sin theta_il`` the objective is

    L = sum_l (C_l^2 + S_l^2 - n) / (m n (n-1))
        - 2/(n m) sum_l (Re Phi(W_l) C_l + Im Phi(W_l) S_l)

which costs O(nm) instead of the O(n^2 m) pairwise form.  Adding the
``C_P`` estimate turns it into an MMD^2 estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .charfn import eval_batch
from .kernel import FrequencyBatch
from .numkit import as_matrix


@dataclass(frozen=True)
class LossReport:
    loss: float
    cp_hat: float

    @property
    def interpretable(self) -> float:
        return self.loss + self.cp_hat


class TargetValues:
    """Frequencies together with the target CF evaluated on them.

    The trainer builds one of these per frequency refresh so ``Phi_P`` is
    evaluated once per batch of frequencies rather than once per step.
    """

    def __init__(self, freqs: FrequencyBatch, phi=None, values=None):
        self.freqs = freqs
        if values is None:
            values = eval_batch(phi, freqs.W)
        values = np.asarray(values, dtype=np.complex128)
        if not np.all(np.isfinite(values)):
            raise FloatingPointError("target characteristic function returned non-finite values")
        self.re = np.ascontiguousarray(values.real)
        self.im = np.ascontiguousarray(values.imag)
        self.cp_hat = float(np.mean(self.re**2 + self.im**2))

    @property
    def W(self):
        return self.freqs.W


def _prepare(Y, target: TargetValues):
    Y = as_matrix(Y, cols=target.freqs.dim, name="generator output")
    if Y.shape[0] < 2:
        raise ValueError("loss needs at least 2 generator outputs")
    return Y


def _value_from_sums(C, S, n, target):
    m = C.shape[0]
    first = (np.sum(C * C + S * S) - n * m) / (m * n * (n - 1))
    cross = np.sum(target.re * C + target.im * S) / (n * m)
    return float(first - 2.0 * cross)


def loss_and_grad(Y, target: TargetValues, with_grad: bool = True):
    """Objective value and, optionally, ``dL/dY`` (n x d)."""
    Y = _prepare(Y, target)
    n, m = Y.shape[0], target.freqs.m
    C, S = _backend.feature_sums(Y, target.W)
    value = _value_from_sums(C, S, n, target)
    if not with_grad:
        return value, None
    pair = 2.0 / (m * n * (n - 1))
    cross = 2.0 / (n * m)
    A = pair * S - cross * target.im
    B = cross * target.re - pair * C
    return value, _backend.feature_grad(Y, target.W, A, B)


def _target(freqs, phi):
    return phi if isinstance(phi, TargetValues) else TargetValues(freqs, phi)


def loss_value(Y, freqs: FrequencyBatch, phi) -> float:
    return loss_and_grad(Y, _target(freqs, phi), with_grad=False)[0]


def loss_grad_outputs(Y, freqs: FrequencyBatch, phi) -> np.ndarray:
    return loss_and_grad(Y, _target(freqs, phi))[1]


def loss_report(Y, freqs: FrequencyBatch, phi) -> LossReport:
    target = _target(freqs, phi)
    return LossReport(loss_and_grad(Y, target, with_grad=False)[0], target.cp_hat)


def loss_value_bruteforce(Y, freqs: FrequencyBatch, phi) -> float:
    """O(n^2 m) evaluation straight from the pairwise definition (reference only)."""
    target = _target(freqs, phi)
    Y = _prepare(Y, target)
    n, m = Y.shape[0], freqs.m
    W = freqs.W
    pair = 0.0
    for i in range(n):
        diff = Y[i] - Y  # n x d
        cosines = np.cos(diff @ W.T)  # n x m
        cosines[i] = 0.0
        pair += cosines.sum()
    theta = Y @ W.T
    cross = np.sum(np.cos(theta) * target.re + np.sin(theta) * target.im)
    return float(pair / (m * n * (n - 1)) - 2.0 * cross / (n * m))
