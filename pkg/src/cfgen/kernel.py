"""Translation-invariant kernels, their frequency laws and MMD estimators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .charfn import eval_batch
from .numkit import RngStream, as_matrix, as_vector

FAMILIES = ("gaussian", "laplace")
DEFAULT_BANDWIDTHS = (0.02, 0.5, 1.0, 5.0, 100.0)


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Mixture over ``bandwidths`` of Gaussian ``exp(-|x-y|_2^2 / s)`` or
    Laplace ``exp(-|x-y|_1 / s)`` kernels, with weights uniform unless given."""

    family: str = "gaussian"
    bandwidths: tuple = DEFAULT_BANDWIDTHS
    weights: tuple | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"kernel family must be one of {FAMILIES}, got {self.family!r}")
        bw = tuple(float(b) for b in self.bandwidths)
        if not bw:
            raise ValueError("bandwidths must be a nonempty list")
        if any(not np.isfinite(b) or b <= 0 for b in bw):
            raise ValueError(f"bandwidths must be positive, got {list(bw)}")
        object.__setattr__(self, "bandwidths", bw)
        if self.weights is None:
            w = (1.0 / len(bw),) * len(bw)
        else:
            w = tuple(float(x) for x in self.weights)
            if len(w) != len(bw) or any(x < 0 for x in w) or abs(sum(w) - 1.0) > 1e-12:
                raise ValueError("bandwidth weights must be nonnegative, one per bandwidth, summing to 1")
        object.__setattr__(self, "weights", w)

    def to_dict(self) -> dict:
        return {"family": self.family, "bandwidths": list(self.bandwidths), "weights": list(self.weights)}

    @classmethod
    def from_dict(cls, doc: dict) -> "KernelSpec":
        return cls(
            family=doc.get("family", "gaussian"),
            bandwidths=tuple(doc.get("bandwidths", DEFAULT_BANDWIDTHS)),
            weights=None if doc.get("weights") is None else tuple(doc["weights"]),
        )


@dataclass(frozen=True, eq=False)
class FrequencyBatch:
    W: np.ndarray
    spec: KernelSpec

    @property
    def m(self) -> int:
        return self.W.shape[0]

    @property
    def dim(self) -> int:
        return self.W.shape[1]


def sample_frequencies(spec: KernelSpec, stream: RngStream, m: int, d: int) -> FrequencyBatch:
    """i.i.d. draws of the frequency vector whose CF is the kernel mixture.

    Each row picks a bandwidth ``s`` from the mixture, then scales a
    standard normal vector by ``sqrt(2/s)`` (Gaussian) or a standard
    Cauchy vector by ``1/s`` (Laplace).
    """
    if m < 1 or d < 1:
        raise ValueError(f"need m >= 1 and d >= 1, got m={m}, d={d}")
    bw = np.asarray(spec.bandwidths)
    idx = stream.split("bandwidth").choice(len(bw), m, p=np.asarray(spec.weights))
    eta = bw[idx][:, None]
    base = stream.split("base")
    if spec.family == "gaussian":
        W = np.sqrt(2.0 / eta) * base.normal((m, d))
    else:
        W = base.cauchy((m, d)) / eta
    return FrequencyBatch(W, spec)


def closed_form_kernel(spec: KernelSpec, x, y) -> float:
    x = as_vector(x, name="x")
    y = as_vector(y, x.shape[0], name="y")
    diff = x - y
    dist = diff @ diff if spec.family == "gaussian" else np.abs(diff).sum()
    return float(sum(w * np.exp(-dist / b) for b, w in zip(spec.bandwidths, spec.weights)))


def random_feature_kernel(freqs: FrequencyBatch, x, y) -> float:
    """``k_m(x, y) = mean_l cos(W_l . (x - y))``."""
    delta = as_vector(x, freqs.dim) - as_vector(y, freqs.dim)
    return float(np.cos(freqs.W @ delta).mean())


def estimate_cp(phi, freqs: FrequencyBatch) -> float:
    """Monte-Carlo estimate of ``E|Phi_P(W)|^2``."""
    vals = eval_batch(phi, freqs.W)
    return float(np.mean(vals.real**2 + vals.imag**2))


def mmd2_u_cf(sample, phi, freqs: FrequencyBatch, tile: int = 256) -> float:
    """Unbiased MMD^2 between a sample and ``P`` under the random-feature kernel.

    Built from the explicit Gram matrix of ``k_m`` (diagonal excluded), the
    complex cross term and the ``C_P`` estimate.  It is a separate code
    path from :func:`cfgen.loss.loss_value` and is used to cross-check it.
    """
    Y = as_matrix(sample, cols=freqs.dim, name="sample")
    n, m = Y.shape[0], freqs.m
    if n < 2:
        raise ValueError("mmd2_u_cf needs at least 2 sample rows")
    E = np.exp(1j * (Y @ freqs.W.T))  # n x m feature matrix
    gram_sum = 0.0
    for a in range(0, n, tile):
        K = (E[a : a + tile] @ E.conj().T).real / m
        rows = np.arange(a, min(a + tile, n))
        gram_sum += K.sum() - K[rows - a, rows].sum()
    first = gram_sum / (n * (n - 1))
    phis = eval_batch(phi, freqs.W)
    cross = (E.conj() @ phis).real.sum() / (n * m)
    return float(first - 2.0 * cross + estimate_cp(phi, freqs))


def _pair_sum(spec: KernelSpec, X, Y, symmetric):
    inv_bw = 1.0 / np.asarray(spec.bandwidths)
    return _backend.pair_kernel_sum(X, Y, inv_bw, np.asarray(spec.weights), spec.family == "laplace", symmetric)


def mmd2_u_twosample(X, Y, spec: KernelSpec) -> float:
    """Unbiased U-statistic MMD^2 with the closed-form kernel mixture."""
    X = as_matrix(X, name="X")
    Y = as_matrix(Y, cols=X.shape[1], name="Y")
    n, n2 = X.shape[0], Y.shape[0]
    if n < 2 or n2 < 2:
        raise ValueError("both samples need at least 2 rows")
    kxx = _pair_sum(spec, X, X, True) / (n * (n - 1))
    kyy = _pair_sum(spec, Y, Y, True) / (n2 * (n2 - 1))
    kxy = _pair_sum(spec, X, Y, False) / (n * n2)
    return float(kxx + kyy - 2.0 * kxy)


def gram_matrix(spec: KernelSpec, X, Y=None) -> np.ndarray:
    """Dense closed-form kernel matrix (small inputs only)."""
    X = as_matrix(X, name="X")
    Y = X if Y is None else as_matrix(Y, cols=X.shape[1], name="Y")
    diff = X[:, None, :] - Y[None, :, :]
    dist = (diff**2).sum(axis=2) if spec.family == "gaussian" else np.abs(diff).sum(axis=2)
    K = np.zeros_like(dist)
    for b, w in zip(spec.bandwidths, spec.weights):
        K += w * np.exp(-dist / b)
    return K
