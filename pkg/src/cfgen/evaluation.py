"""Diagnostics comparing generator samples with reference samples.

Projection quantiles use numpy's default linear interpolation between
order statistics (Hyndman-Fan type 7).  Density grids are returned as
arrays; nothing here renders plots.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .kernel import KernelSpec, gram_matrix, mmd2_u_twosample
from .numkit import RngStream, as_matrix, as_vector

DEFAULT_QUANTILES = (0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95)
DEFAULT_CONTOURS = (0.0005, 0.001, 0.0025, 0.005, 0.01, 0.05, 0.1)
_U1 = (1, 1, 1, 1, 1, 1, 1, 1, 1, 1)
_U2 = (1, -1, 1, -1, 1, -1, 1, -1, 1, -1)
_U3 = (-1, 2, -1, 2, -1, 2, -1, 2, -1, 2)


def projection_vectors(d: int) -> list[np.ndarray]:
    """The three fixed directions, cycled to length ``d``."""
    return [np.resize(np.array(u, dtype=float), d) for u in (_U1, _U2, _U3)]


@dataclass(frozen=True)
class EvalConfig:
    quantiles: tuple = DEFAULT_QUANTILES
    contour_levels: tuple = DEFAULT_CONTOURS
    grid_resolution: int = 201
    grid_bounds: tuple | None = None  # (low, high) shared by every axis; None = data range
    sample_size: int = 1_000_000
    mmd_sample_size: int = 10_000
    permutations: int = 200
    bivariate_dims: tuple | None = None  # None = last two coordinates

    def __post_init__(self):
        q = tuple(float(x) for x in self.quantiles)
        if not q or any(not 0 < x < 1 for x in q) or any(b <= a for a, b in zip(q, q[1:])):
            raise ValueError(f"eval.quantiles must be strictly increasing in (0, 1), got {list(q)}")
        object.__setattr__(self, "quantiles", q)
        object.__setattr__(self, "contour_levels", tuple(float(x) for x in self.contour_levels))
        if self.grid_resolution < 3:
            raise ValueError("eval.grid_resolution must be >= 3")
        if self.sample_size < 2 or self.mmd_sample_size < 2:
            raise ValueError("eval sample sizes must be >= 2")

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        for k in ("quantiles", "contour_levels", "grid_bounds", "bivariate_dims"):
            if out[k] is not None:
                out[k] = list(out[k])
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "EvalConfig":
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown eval fields: {sorted(unknown)}")
        doc = dict(doc)
        for k in ("quantiles", "contour_levels", "grid_bounds", "bivariate_dims"):
            if doc.get(k) is not None:
                doc[k] = tuple(doc[k])
        return cls(**doc)


def projection_quantiles(sample, u, q=DEFAULT_QUANTILES) -> np.ndarray:
    X = as_matrix(sample, name="sample")
    if X.shape[0] == 0:
        raise ValueError("sample is empty")
    q = np.asarray(q, dtype=float)
    if np.any((q <= 0) | (q >= 1)):
        raise ValueError("quantile levels must lie in (0, 1)")
    u = as_vector(u, X.shape[1], name="u")
    return np.quantile(X @ u, q)


@dataclass
class TwoSampleReport:
    mmd2: float
    null_quantiles: dict = field(default_factory=dict)
    p_value: float = float("nan")
    permutations: int = 0
    perm_subsample: int = 0

    def to_dict(self) -> dict:
        return {
            "mmd2": self.mmd2,
            "null_quantiles": self.null_quantiles,
            "p_value": self.p_value,
            "permutations": self.permutations,
            "perm_subsample": self.perm_subsample,
        }


def _perm_stats(K, nx, perms):
    N = K.shape[0]
    Kz = K - np.diag(np.diag(K))
    ny = N - nx
    out = np.empty(len(perms))
    for p, idx in enumerate(perms):
        a = np.zeros(N)
        a[idx[:nx]] = 1.0
        b = 1.0 - a
        Ka, Kb = Kz @ a, Kz @ b
        out[p] = a @ Ka / (nx * (nx - 1)) + b @ Kb / (ny * (ny - 1)) - 2.0 * (a @ (K @ b)) / (nx * ny)
    return out


def two_sample_report(
    A, B, spec: KernelSpec, permutations: int = 200, stream: RngStream | None = None, max_perm_n: int = 1500
) -> TwoSampleReport:
    """U-statistic MMD^2 plus a permutation null band.

    The permutation band is computed on at most ``max_perm_n`` rows per
    sample (random subsample) and rescaled by the ratio of effective sample
    sizes, because the null spread of the unbiased statistic scales like
    ``1/n``.
    """
    A = as_matrix(A, name="A")
    B = as_matrix(B, cols=A.shape[1], name="B")
    stat = mmd2_u_twosample(A, B, spec)
    if permutations <= 0:
        return TwoSampleReport(stat)
    stream = stream or RngStream(0)
    k = min(max_perm_n, A.shape[0], B.shape[0])
    As = A if A.shape[0] == k else A[np.sort(stream.split("subA").permutation(A.shape[0])[:k])]
    Bs = B if B.shape[0] == k else B[np.sort(stream.split("subB").permutation(B.shape[0])[:k])]
    pooled = np.vstack([As, Bs])
    K = gram_matrix(spec, pooled)
    ps = stream.split("perm")
    perms = [ps.permutation(pooled.shape[0]) for _ in range(permutations)]
    null = _perm_stats(K, As.shape[0], perms)
    eff_sub = 1.0 / As.shape[0] + 1.0 / Bs.shape[0]
    eff_full = 1.0 / A.shape[0] + 1.0 / B.shape[0]
    null = null * (eff_full / eff_sub)
    qs = {str(q): float(np.quantile(null, q)) for q in (0.01, 0.05, 0.5, 0.95, 0.99)}
    p_value = float((1 + np.sum(null >= stat)) / (1 + permutations))
    return TwoSampleReport(stat, qs, p_value, permutations, k)


def scott_bandwidths(X: np.ndarray) -> np.ndarray:
    n, dk = X.shape
    std = X.std(axis=0, ddof=1)
    for j, s in enumerate(std):
        if not s > 0:
            raise ValueError(f"coordinate {j} has zero variance; density estimate undefined")
    return std * n ** (-1.0 / (dk + 4))


@dataclass
class DensityGrid:
    axes: list  # one 1-D array per selected coordinate
    density: np.ndarray
    dims: tuple
    bandwidths: np.ndarray
    contour_levels: tuple = DEFAULT_CONTOURS


def _exact_kde(X, h, axes):
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    dens = np.zeros(pts.shape[0])
    norm = X.shape[0] * np.prod(h) * (2 * np.pi) ** (X.shape[1] / 2)
    for start in range(0, X.shape[0], 4096):
        Xb = X[start : start + 4096]
        z = (pts[:, None, :] - Xb[None, :, :]) / h
        dens += np.exp(-0.5 * (z * z).sum(axis=2)).sum(axis=1)
    return (dens / norm).reshape(mesh[0].shape)


def _binned_kde(X, h, axes):
    """Linear binning onto the grid followed by FFT convolution with the Gaussian."""
    dk = X.shape[1]
    steps = [ax[1] - ax[0] for ax in axes]
    sizes = [len(ax) for ax in axes]
    counts = np.zeros(sizes)
    pos = [(X[:, j] - axes[j][0]) / steps[j] for j in range(dk)]
    base = [np.floor(p).astype(np.int64) for p in pos]
    frac = [p - b for p, b in zip(pos, base)]
    for corner in range(2**dk):
        idx, wt = [], np.ones(X.shape[0])
        for j in range(dk):
            off = (corner >> j) & 1
            idx.append(base[j] + off)
            wt = wt * (frac[j] if off else 1.0 - frac[j])
        ok = np.ones(X.shape[0], dtype=bool)
        for j in range(dk):
            ok &= (idx[j] >= 0) & (idx[j] < sizes[j])
        np.add.at(counts, tuple(i[ok] for i in idx), wt[ok])
    kern = None
    for j in range(dk):
        r = int(np.ceil(5 * h[j] / steps[j]))
        t = np.arange(-r, r + 1) * steps[j]
        kj = np.exp(-0.5 * (t / h[j]) ** 2) / (np.sqrt(2 * np.pi) * h[j])
        kern = kj if kern is None else np.multiply.outer(kern, kj)
    return fftconvolve(counts, kern, mode="same") / X.shape[0]


def kde_density(
    sample,
    dims=(0,),
    resolution: int = 201,
    bounds=None,
    contour_levels=DEFAULT_CONTOURS,
    method: str = "auto",
) -> DensityGrid:
    """Gaussian KDE with per-coordinate Scott bandwidths on a regular grid.

    ``method="exact"`` sums every kernel at every grid point; ``"binned"``
    uses linear binning and an FFT convolution; ``"auto"`` picks exact for
    small problems.
    """
    X = as_matrix(sample, name="sample")
    dims = tuple(int(j) for j in dims)
    if len(dims) not in (1, 2):
        raise ValueError("density grids are 1- or 2-dimensional")
    if X.shape[0] < 2:
        raise ValueError("kde needs at least 2 rows")
    Xs = X[:, dims]
    try:
        h = scott_bandwidths(Xs)
    except ValueError as exc:
        raise ValueError(f"{exc} (selected coordinates {list(dims)})") from None
    axes = []
    for j in range(len(dims)):
        if bounds is None:
            lo, hi = Xs[:, j].min() - 3 * h[j], Xs[:, j].max() + 3 * h[j]
        else:
            lo, hi = bounds[j] if np.ndim(bounds[0]) else bounds
        axes.append(np.linspace(lo, hi, resolution))
    if method == "auto":
        method = "exact" if Xs.shape[0] * resolution ** len(dims) <= 2e7 else "binned"
    if method == "exact":
        dens = _exact_kde(Xs, h, axes)
    elif method == "binned":
        dens = _binned_kde(Xs, h, axes)
    else:
        raise ValueError(f"unknown kde method {method!r}")
    return DensityGrid(axes, np.maximum(dens, 0.0), dims, h, tuple(contour_levels))


def local_maxima(grid: DensityGrid, rel_height: float = 0.05) -> np.ndarray:
    """Grid locations of strict interior local maxima of a 1-d density."""
    if grid.density.ndim != 1:
        raise ValueError("local_maxima expects a 1-d density grid")
    f = grid.density
    inner = (f[1:-1] > f[:-2]) & (f[1:-1] >= f[2:]) & (f[1:-1] >= rel_height * f.max())
    return grid.axes[0][1:-1][inner]


def quantile_rows(samples: dict, d: int, q=DEFAULT_QUANTILES) -> list:
    """Rows ``(u-label, source, quantiles...)`` in the layout of the quantile tables."""
    rows = []
    for k, u in enumerate(projection_vectors(d), start=1):
        for source, X in samples.items():
            rows.append((f"u{k}", source, *projection_quantiles(X, u, q)))
    return rows
