"""Seeded random streams and small array helpers shared by every module.

Complex values are plain Python/numpy complex numbers and matrices are
2-D float64 ``numpy.ndarray`` objects; this module only adds validation
and a labeled, splittable random stream on top of numpy's PCG64.
"""

from __future__ import annotations

import hashlib

import numpy as np

DISTRIBUTIONS = ("std_normal", "std_cauchy", "uniform01")


def _label_key(label: str) -> int:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")


class RngStream:
    """Deterministic random stream identified by a seed and a label path.

    Child streams obtained with :meth:`split` depend only on the parent's
    seed and path, never on how many draws the parent has made.  This is
    what lets training resume bit-identically from a checkpoint.
    """

    def __init__(self, seed: int, path: tuple[str, ...] = ()):
        if not 0 <= int(seed) < 2**64:
            raise ValueError(f"seed must fit in 64 bits, got {seed}")
        self.seed = int(seed)
        self.path = tuple(path)
        ss = np.random.SeedSequence(
            entropy=self.seed, spawn_key=tuple(_label_key(p) for p in self.path)
        )
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def split(self, label) -> "RngStream":
        return RngStream(self.seed, self.path + (str(label),))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, path={'/'.join(self.path) or '<root>'})"

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def normal(self, size) -> np.ndarray:
        return self._gen.standard_normal(size)

    def uniform(self, size) -> np.ndarray:
        return self._gen.random(size)

    def cauchy(self, size) -> np.ndarray:
        # tan(pi (U - 1/2)); U = 0 would give -inf, so redraw those
        u = self._gen.random(size)
        bad = u == 0.0
        while np.any(bad):
            u[bad] = self._gen.random(int(bad.sum()))
            bad = u == 0.0
        return np.tan(np.pi * (u - 0.5))

    def exponential(self, size) -> np.ndarray:
        return self._gen.standard_exponential(size)

    def integers(self, high: int, size) -> np.ndarray:
        return self._gen.integers(0, high, size)

    def choice(self, n: int, size, p=None) -> np.ndarray:
        return self._gen.choice(n, size=size, p=p)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)


def seed_stream(seed: int) -> RngStream:
    return RngStream(seed)


def sample_matrix(stream: RngStream, dist: str, rows: int, cols: int) -> np.ndarray:
    """Draw a ``rows x cols`` matrix of i.i.d. entries from ``dist``."""
    if rows < 1 or cols < 1:
        raise ValueError(f"matrix shape must be positive, got ({rows}, {cols})")
    if dist == "std_normal":
        return stream.normal((rows, cols))
    if dist == "std_cauchy":
        return stream.cauchy((rows, cols))
    if dist == "uniform01":
        return stream.uniform((rows, cols))
    raise ValueError(f"unknown distribution {dist!r}; expected one of {DISTRIBUTIONS}")


def as_matrix(x, cols: int | None = None, name: str = "matrix") -> np.ndarray:
    """Coerce ``x`` to a C-contiguous finite float64 2-D array."""
    a = np.ascontiguousarray(x, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(-1, 1) if cols in (None, 1) else a.reshape(1, -1)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if cols is not None and a.shape[1] != cols:
        raise ValueError(f"{name} must have {cols} columns, got {a.shape[1]}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def as_vector(x, dim: int | None = None, name: str = "vector") -> np.ndarray:
    v = np.asarray(x, dtype=np.float64).reshape(-1)
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"{name} must have dimension {dim}, got {v.shape[0]}")
    return v


def random_orthogonal(stream: RngStream, d: int) -> np.ndarray:
    q, r = np.linalg.qr(stream.normal((d, d)))
    return q * np.sign(np.diag(r))


def random_spd(stream: RngStream, d: int, low: float = 0.25, high: float = 1.5) -> np.ndarray:
    """Symmetric positive definite matrix ``Q diag(lam) Q^T`` with ``lam`` in [low, high)."""
    q = random_orthogonal(stream, d)
    lam = low + (high - low) * stream.uniform(d)
    s = (q * lam) @ q.T
    return 0.5 * (s + s.T)
