"""Pure-numpy versions of the compiled kernels, processed in tiles."""

import numpy as np

# max entries of an n x block temporary
_TILE_ENTRIES = 1 << 21


def _freq_block(n):
    return max(1, _TILE_ENTRIES // max(n, 1))


def feature_sums(Y, W, num_threads=1):
    n, m = Y.shape[0], W.shape[0]
    C = np.empty(m)
    S = np.empty(m)
    step = _freq_block(n)
    for start in range(0, m, step):
        T = Y @ W[start : start + step].T
        C[start : start + step] = np.cos(T).sum(axis=0)
        S[start : start + step] = np.sin(T).sum(axis=0)
    return C, S


def feature_grad(Y, W, A, B, num_threads=1):
    n, m = Y.shape[0], W.shape[0]
    G = np.zeros_like(Y)
    step = _freq_block(n)
    for start in range(0, m, step):
        Wb = W[start : start + step]
        T = Y @ Wb.T
        coef = np.cos(T) * A[start : start + step] + np.sin(T) * B[start : start + step]
        G += coef @ Wb
    return G


def _mix(dist, inv_bw, wts):
    out = np.zeros_like(dist)
    for ib, w in zip(inv_bw, wts):
        out += w * np.exp(-dist * ib)
    return out


def _dist(Xa, Yb, laplace):
    diff = Xa[:, None, :] - Yb[None, :, :]
    if laplace:
        return np.abs(diff).sum(axis=2)
    return np.einsum("ijk,ijk->ij", diff, diff)


def pair_kernel_sum(X, Y, inv_bw, wts, laplace, symmetric, num_threads=1, tile=256):
    nx, ny = X.shape[0], Y.shape[0]
    total = 0.0
    if symmetric:
        for a in range(0, nx, tile):
            Xa = X[a : a + tile]
            for b in range(a, nx, tile):
                K = _mix(_dist(Xa, X[b : b + tile], laplace), inv_bw, wts)
                if a == b:
                    total += K.sum() - np.trace(K)
                else:
                    total += 2.0 * K.sum()
        return total
    for a in range(0, nx, tile):
        Xa = X[a : a + tile]
        for b in range(0, ny, tile):
            total += _mix(_dist(Xa, Y[b : b + tile], laplace), inv_bw, wts).sum()
    return total
