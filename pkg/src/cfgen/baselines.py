"""Reference samplers used to check trained generators.

Stable laws use the parameterisation whose characteristic function is

    exp(i mu z - sigma^a |z|^a (1 - i beta tan(pi a / 2) sign z))       a != 1
    exp(i mu z - sigma |z| (1 + i beta (2/pi) sign z log|z|))              a == 1

which is the one the multivariate CF in :mod:`cfgen.charfn` reduces to
along a single spectral atom.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .charfn import GaussianMixtureSpec, StableSpec
from .numkit import RngStream, as_vector

_ALPHA_ONE_TOL = 1e-9
# stable draws held in memory at once by the spectral sampler
_CHUNK = 1 << 22


@dataclass(frozen=True)
class UnivStableParams:
    alpha: float
    beta: float = 0.0
    scale: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not -1.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [-1, 1], got {self.beta}")
        if not self.scale > 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    def cf(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        a, b, s = self.alpha, self.beta, self.scale
        az = np.abs(s * z)
        if abs(a - 1.0) <= _ALPHA_ONE_TOL:
            with np.errstate(divide="ignore", invalid="ignore"):
                logterm = np.where(az > 0, np.log(np.where(az > 0, np.abs(z), 1.0)), 0.0)
            expo = -az * (1 + 1j * b * (2 / np.pi) * np.sign(z) * logterm)
        else:
            expo = -(az**a) * (1 - 1j * b * np.tan(np.pi * a / 2) * np.sign(z))
        return np.exp(1j * self.shift * z + expo)


def sample_gaussian_mixture(spec: GaussianMixtureSpec, stream: RngStream, n: int) -> np.ndarray:
    """Exact draws: uniform component label, then ``mu_j + L_j N(0, I)``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    labels = stream.split("component").integers(spec.J, n)
    noise = stream.split("noise").normal((n, spec.dim))
    out = np.empty((n, spec.dim))
    for j in range(spec.J):
        sel = labels == j
        out[sel] = spec.mus[j] + noise[sel] @ spec.chols[j].T
    return out


def _uniform_angle(stream: RngStream, size) -> np.ndarray:
    u = stream.uniform(size)
    u[u == 0.0] = 0.5  # V = -pi/2 would put a zero in cos(V)
    return np.pi * (u - 0.5)


def _standard_stable(alpha: float, beta: float, V: np.ndarray, E: np.ndarray) -> np.ndarray:
    """Chambers-Mallows-Stuck transform to a unit-scale, zero-shift stable variate."""
    if abs(alpha - 1.0) <= _ALPHA_ONE_TOL:
        half = np.pi / 2 + beta * V
        return (2 / np.pi) * (half * np.tan(V) - beta * np.log((np.pi / 2) * E * np.cos(V) / half))
    zeta = beta * np.tan(np.pi * alpha / 2)
    b = np.arctan(zeta) / alpha
    s = (1 + zeta * zeta) ** (1 / (2 * alpha))
    avb = alpha * (V + b)
    return (
        s
        * np.sin(avb)
        / np.cos(V) ** (1 / alpha)
        * (np.cos(V - avb) / E) ** ((1 - alpha) / alpha)
    )


def sample_stable_univ(params: UnivStableParams, stream: RngStream, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    V = _uniform_angle(stream.split("angle"), n)
    E = stream.split("exp").exponential(n)
    X = _standard_stable(params.alpha, params.beta, V, E)
    if abs(params.alpha - 1.0) <= _ALPHA_ONE_TOL:
        s = params.scale
        return s * X + (2 / np.pi) * params.beta * s * np.log(s) + params.shift
    return params.scale * X + params.shift


def sample_stable_discrete_spectral(spec: StableSpec, stream: RngStream, n: int) -> np.ndarray:
    """Exact draws from a stable law whose spectral measure is a finite set of atoms.

    ``X = tau + sum_j w_j^(1/a) S_j u_j`` with ``S_j`` totally skewed unit
    stable variates.  For ``a == 1`` each atom is additionally shifted by
    ``(2/pi) w_j log w_j`` along ``u_j``, which cancels the log term created
    by rescaling a 1-stable variate.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    alpha, M, d = spec.alpha, spec.M, spec.dim
    alpha_one = abs(alpha - 1.0) <= _ALPHA_ONE_TOL
    w = spec.weights
    coef = w if alpha_one else w ** (1.0 / alpha)
    out = np.empty((n, d))
    rows = max(1, _CHUNK // M)
    for c, start in enumerate(range(0, n, rows)):
        k = min(rows, n - start)
        sub = stream.split(c)
        V = _uniform_angle(sub.split("angle"), (k, M))
        E = sub.split("exp").exponential((k, M))
        S = _standard_stable(alpha, 1.0, V, E)
        out[start : start + k] = (S * coef) @ spec.atoms
    if alpha_one:
        with np.errstate(divide="ignore", invalid="ignore"):
            wlogw = np.where(w > 0, w * np.log(np.where(w > 0, w, 1.0)), 0.0)
        out += (2 / np.pi) * (wlogw @ spec.atoms)
    return out + spec.tau


def project_stable_params(spec: StableSpec, u) -> UnivStableParams:
    """Parameters of the univariate stable law of ``<u, X>``."""
    u = as_vector(u, spec.dim, name="u")
    if not np.any(u):
        raise ValueError("projection vector must be nonzero")
    t = spec.atoms @ u
    w = spec.weights
    alpha = spec.alpha
    if abs(alpha - 1.0) <= _ALPHA_ONE_TOL:
        scale = float(w @ np.abs(t))
        if scale <= 0:
            raise ValueError("projection is degenerate: u is orthogonal to every spectral atom")
        beta = float(w @ t) / scale
        at = np.abs(t)
        tlogt = np.where(at > 0, t * np.log(np.where(at > 0, at, 1.0)), 0.0)
        shift = float(u @ spec.tau) - (2 / np.pi) * float(w @ tlogt)
    else:
        p = np.abs(t) ** alpha
        scale_a = float(w @ p)
        if scale_a <= 0:
            raise ValueError("projection is degenerate: u is orthogonal to every spectral atom")
        beta = float(w @ (np.sign(t) * p)) / scale_a
        scale = scale_a ** (1 / alpha)
        shift = float(u @ spec.tau)
    return UnivStableParams(alpha, float(np.clip(beta, -1.0, 1.0)), scale, shift)
