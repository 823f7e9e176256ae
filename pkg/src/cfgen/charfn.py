"""Characteristic functions: the black-box interface and concrete targets.

Anything with an integer ``dim`` attribute and an ``eval_batch(Z)`` method
returning one complex value per row of ``Z`` can serve as a training
target.  :class:`CharFn` supplies the single-point ``eval`` on top of that.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numkit import RngStream, as_matrix, as_vector

# rows of Z processed per block when forming Z @ atoms.T
_BLOCK = 1024
_LOG_GUARD = 1e-300


class CharFn:
    """Base class for characteristic functions ``R^d -> C``."""

    dim: int

    def eval_batch(self, Z) -> np.ndarray:
        raise NotImplementedError

    def eval(self, z) -> complex:
        z = as_vector(z, self.dim, name="z")
        return complex(self.eval_batch(z.reshape(1, -1))[0])

    def __call__(self, z) -> complex:
        return self.eval(z)

    def _check_batch(self, Z) -> np.ndarray:
        return as_matrix(Z, cols=self.dim, name="frequency matrix")


def eval_batch(phi, Z) -> np.ndarray:
    """Evaluate any CharFn-like object on the rows of ``Z`` as complex128."""
    out = np.asarray(phi.eval_batch(Z), dtype=np.complex128).reshape(-1)
    if out.shape[0] != np.shape(Z)[0]:
        raise ValueError(
            f"characteristic function returned {out.shape[0]} values for {np.shape(Z)[0]} points"
        )
    return out


class PointMassCF(CharFn):
    """CF of the Dirac measure at ``c``: ``exp(i z.c)``."""

    def __init__(self, c):
        self.c = as_vector(c, name="c")
        self.dim = self.c.shape[0]

    def eval_batch(self, Z):
        Z = self._check_batch(Z)
        return np.exp(1j * (Z @ self.c))


@dataclass(eq=False)
class GaussianMixtureSpec(CharFn):
    """Equal-weight mixture of ``J`` Gaussians with means ``mus`` and covariances ``sigmas``."""

    mus: np.ndarray
    sigmas: np.ndarray
    chols: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        mus = np.asarray(self.mus, dtype=np.float64)
        if mus.ndim == 1:
            mus = mus.reshape(1, -1)
        J, d = mus.shape
        sigmas = np.asarray(self.sigmas, dtype=np.float64)
        if sigmas.ndim == 2 and J == 1:
            sigmas = sigmas.reshape(1, d, d)
        if sigmas.shape != (J, d, d):
            raise ValueError(f"sigmas must have shape {(J, d, d)}, got {sigmas.shape}")
        chols = np.empty_like(sigmas)
        for j in range(J):
            if not np.allclose(sigmas[j], sigmas[j].T, rtol=0, atol=1e-12):
                raise ValueError(f"covariance {j} is not symmetric")
            try:
                chols[j] = np.linalg.cholesky(sigmas[j])
            except np.linalg.LinAlgError:
                raise ValueError(f"covariance {j} is not positive definite") from None
        self.mus, self.sigmas, self.chols = mus, sigmas, chols

    @property
    def dim(self) -> int:
        return self.mus.shape[1]

    @property
    def J(self) -> int:
        return self.mus.shape[0]

    def eval_batch(self, Z):
        Z = self._check_batch(Z)
        out = np.zeros(Z.shape[0], dtype=np.complex128)
        for mu, sig in zip(self.mus, self.sigmas):
            quad = np.einsum("ij,jk,ik->i", Z, sig, Z)
            out += np.exp(1j * (Z @ mu) - 0.5 * quad)
        return out / self.J

    def to_dict(self) -> dict:
        return {
            "type": "gaussian_mixture",
            "mus": self.mus.tolist(),
            "sigmas": self.sigmas.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GaussianMixtureSpec":
        return cls(mus=np.array(doc["mus"], dtype=float), sigmas=np.array(doc["sigmas"], dtype=float))


def random_gaussian_mixture_spec(
    d: int, J: int, stream: RngStream, spread: float = 3.0
) -> GaussianMixtureSpec:
    """Seeded random mixture: means ``N(0, spread^2 I)``, SPD covariances."""
    from .numkit import random_spd

    mus = spread * stream.split("mus").normal((J, d))
    cov_stream = stream.split("sigmas")
    sigmas = np.stack([random_spd(cov_stream.split(j), d) for j in range(J)])
    return GaussianMixtureSpec(mus, sigmas)


def standard_normal_spec(d: int) -> GaussianMixtureSpec:
    return GaussianMixtureSpec(np.zeros((1, d)), np.eye(d)[None])


def stable_exponent(S: np.ndarray, alpha: float, weights: np.ndarray) -> np.ndarray:
    """``sum_j w_j f_alpha(z, u_j)`` given the projections ``S[i, j] = z_i . u_j``."""
    a = np.abs(S)
    if alpha == 1.0:
        tiny = a < _LOG_GUARD
        slog = np.where(tiny, 0.0, S * np.log(np.where(tiny, 1.0, a)))
        re = a @ weights
        im = (2.0 / np.pi) * (slog @ weights)
    else:
        p = a**alpha
        re = p @ weights
        im = -np.tan(np.pi * alpha / 2.0) * ((p * np.sign(S)) @ weights)
    return re + 1j * im


@dataclass(eq=False)
class StableSpec(CharFn):
    """Multivariate alpha-stable law with a discrete spectral measure.

    ``atoms`` are unit vectors carrying ``weights`` (summing to one);
    ``spectral_source`` records the Gaussian ``(mu, sigma)`` the atoms were
    drawn from, if any.  The atoms are fixed at construction so the CF is
    a deterministic function.
    """

    alpha: float
    tau: np.ndarray
    atoms: np.ndarray
    weights: np.ndarray | None = None
    spectral_source: dict | None = None

    def __post_init__(self):
        self.alpha = float(self.alpha)
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        self.atoms = as_matrix(self.atoms, name="atoms")
        M, d = self.atoms.shape
        self.tau = as_vector(self.tau, d, name="tau")
        norms = np.linalg.norm(self.atoms, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-12:
            raise ValueError("spectral atoms must be unit vectors")
        if self.weights is None:
            self.weights = np.full(M, 1.0 / M)
        self.weights = as_vector(self.weights, M, name="weights")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("spectral weights must be nonnegative and sum to 1")

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    @property
    def M(self) -> int:
        return self.atoms.shape[0]

    @classmethod
    def from_gaussian_source(cls, alpha, tau, mu, sigma, M: int, stream: RngStream) -> "StableSpec":
        """Atoms ``Z / |Z|`` with ``Z ~ N(mu, sigma)``, equal weights."""
        mu = np.asarray(mu, dtype=float).reshape(-1)
        sigma = np.asarray(sigma, dtype=float)
        L = np.linalg.cholesky(sigma)
        atoms = np.empty((M, mu.shape[0]))
        filled = 0
        while filled < M:
            Z = mu + stream.normal((M - filled, mu.shape[0])) @ L.T
            nrm = np.linalg.norm(Z, axis=1)
            Z = Z[nrm > 0]
            atoms[filled : filled + len(Z)] = Z / np.linalg.norm(Z, axis=1, keepdims=True)
            filled += len(Z)
        # renormalise so |u| = 1 holds to rounding
        atoms /= np.linalg.norm(atoms, axis=1, keepdims=True)
        source = {"mu": mu.tolist(), "sigma": sigma.tolist()}
        return cls(alpha, tau, atoms, spectral_source=source)

    def eval_batch(self, Z):
        Z = self._check_batch(Z)
        out = np.empty(Z.shape[0], dtype=np.complex128)
        for start in range(0, Z.shape[0], _BLOCK):
            Zb = Z[start : start + _BLOCK]
            expo = stable_exponent(Zb @ self.atoms.T, self.alpha, self.weights)
            out[start : start + _BLOCK] = np.exp(1j * (Zb @ self.tau) - expo)
        return out

    def to_dict(self) -> dict:
        return {
            "type": "stable",
            "alpha": self.alpha,
            "tau": self.tau.tolist(),
            "atoms": self.atoms.tolist(),
            "weights": self.weights.tolist(),
            "spectral_source": self.spectral_source,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "StableSpec":
        return cls(
            alpha=doc["alpha"],
            tau=np.array(doc["tau"], dtype=float),
            atoms=np.array(doc["atoms"], dtype=float),
            weights=None if doc.get("weights") is None else np.array(doc["weights"], dtype=float),
            spectral_source=doc.get("spectral_source"),
        )


class EmpiricalCF(CharFn):
    """``z -> mean_i exp(i z.Y_i)`` for a fixed sample."""

    def __init__(self, sample):
        sample = as_matrix(sample, name="sample")
        if sample.shape[0] == 0:
            raise ValueError("empirical CF needs a nonempty sample")
        self.sample = sample
        self.dim = sample.shape[1]

    def eval_batch(self, Z):
        Z = self._check_batch(Z)
        out = np.zeros(Z.shape[0], dtype=np.complex128)
        for start in range(0, self.sample.shape[0], 4 * _BLOCK):
            Yb = self.sample[start : start + 4 * _BLOCK]
            T = Z @ Yb.T
            out += np.cos(T).sum(axis=1) + 1j * np.sin(T).sum(axis=1)
        return out / self.sample.shape[0]


def eval_gaussian_mixture_cf(spec: GaussianMixtureSpec, z) -> complex:
    return spec.eval(z)


def eval_stable_cf(spec: StableSpec, z) -> complex:
    return spec.eval(z)


def eval_empirical_cf(sample, z) -> complex:
    sample = np.asarray(sample, dtype=float)
    if sample.size == 0:
        raise ValueError("empirical CF needs a nonempty sample")
    return EmpiricalCF(sample).eval(z)


def spec_from_dict(doc: dict):
    kind = doc.get("type")
    if kind == "gaussian_mixture":
        return GaussianMixtureSpec.from_dict(doc)
    if kind == "stable":
        return StableSpec.from_dict(doc)
    raise ValueError(f"unknown characteristic function type {kind!r}")
