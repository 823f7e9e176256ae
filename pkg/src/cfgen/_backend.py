"""Select the compiled or the numpy implementation of the hot loops.

The compiled extension is used when it imports; ``CFGEN_BACKEND=python``
forces the numpy fallback and ``CFGEN_BACKEND=c`` makes a missing
extension an import error.
"""

import os

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_requested = os.environ.get("CFGEN_BACKEND", "auto").lower()
if _requested not in ("auto", "c", "python"):
    raise ImportError(f"CFGEN_BACKEND must be auto, c or python, got {_requested!r}")
if _requested == "c" and _ckernels is None:
    raise ImportError("CFGEN_BACKEND=c but the compiled extension cfgen._ckernels is not built")

_impl = _ckernels if (_ckernels is not None and _requested != "python") else _pykernels
_threads = int(os.environ.get("CFGEN_THREADS", os.cpu_count() or 1))


def available():
    return ["c", "python"] if _ckernels is not None else ["python"]


def name():
    return "c" if _impl is _ckernels else "python"


def use(backend):
    """Switch backend at runtime (``"c"`` or ``"python"``)."""
    global _impl
    if backend == "c":
        if _ckernels is None:
            raise RuntimeError("compiled extension is not available")
        _impl = _ckernels
    elif backend == "python":
        _impl = _pykernels
    else:
        raise ValueError(f"unknown backend {backend!r}")


def set_num_threads(k):
    global _threads
    _threads = max(1, int(k))


def num_threads():
    return _threads


def _c(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def feature_sums(Y, W):
    """``C[l] = sum_i cos(W_l . Y_i)`` and ``S[l] = sum_i sin(W_l . Y_i)``."""
    return _impl.feature_sums(_c(Y), _c(W), _threads)


def feature_grad(Y, W, A, B):
    """``G[i] = sum_l (A_l cos(W_l . Y_i) + B_l sin(W_l . Y_i)) W_l``."""
    return _impl.feature_grad(_c(Y), _c(W), _c(A), _c(B), _threads)


def pair_kernel_sum(X, Y, inv_bw, weights, laplace, symmetric):
    return float(
        _impl.pair_kernel_sum(
            _c(X), _c(Y), _c(inv_bw), _c(weights), bool(laplace), bool(symmetric), _threads
        )
    )
