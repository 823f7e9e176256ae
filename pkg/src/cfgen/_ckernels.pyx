# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: random-feature sums/gradients and pairwise kernel sums.

Every parallel loop writes to disjoint output slots and any cross-slot
reduction happens serially afterwards, so results do not depend on the
number of threads.  The inner loops live in ``_vecmath.h``.
"""

import numpy as np

from cython.parallel import parallel, prange
from libc.stdlib cimport free


cdef extern from "_vecmath.h" nogil:
    double* cfg_alloc(Py_ssize_t n)
    void cfg_project(const double* Y, const double* w, double* t, Py_ssize_t n, Py_ssize_t d)
    void cfg_sum_cos_sin(const double* t, Py_ssize_t n, double* c, double* s)
    void cfg_grad_coef(const double* t, const double* A, const double* B, double* g, Py_ssize_t m)
    void cfg_weighted_rows(const double* g, const double* W, double* out, Py_ssize_t m, Py_ssize_t d)
    void cfg_dist(const double* x, const double* Y, double* dist, Py_ssize_t ny, Py_ssize_t d, int l1)
    double cfg_sum_exp(const double* dist, double scale, Py_ssize_t n)


def feature_sums(const double[:, ::1] Y, const double[:, ::1] W, int num_threads=1):
    """``C[l] = sum_i cos(W_l . Y_i)`` and ``S[l] = sum_i sin(W_l . Y_i)``."""
    cdef Py_ssize_t n = Y.shape[0], d = Y.shape[1], m = W.shape[0]
    cdef Py_ssize_t l
    cdef double* buf
    C_arr = np.empty(m)
    S_arr = np.empty(m)
    cdef double[::1] C = C_arr
    cdef double[::1] S = S_arr
    if m == 0 or n == 0:
        C_arr[:] = 0.0
        S_arr[:] = 0.0
        return C_arr, S_arr
    with nogil, parallel(num_threads=num_threads):
        buf = cfg_alloc(n)
        for l in prange(m, schedule="static"):
            cfg_project(&Y[0, 0], &W[l, 0], buf, n, d)
            cfg_sum_cos_sin(buf, n, &C[l], &S[l])
        free(buf)
    return C_arr, S_arr


def feature_grad(const double[:, ::1] Y, const double[:, ::1] W,
                 const double[::1] A, const double[::1] B, int num_threads=1):
    """``G_i = sum_l (A_l cos(W_l . Y_i) + B_l sin(W_l . Y_i)) W_l``."""
    cdef Py_ssize_t n = Y.shape[0], d = Y.shape[1], m = W.shape[0]
    cdef Py_ssize_t i
    cdef double* t
    cdef double* g
    G_arr = np.zeros((n, d))
    cdef double[:, ::1] G = G_arr
    if m == 0 or n == 0:
        return G_arr
    with nogil, parallel(num_threads=num_threads):
        t = cfg_alloc(m)
        g = cfg_alloc(m)
        for i in prange(n, schedule="static"):
            # W is m x d, so projecting row Y_i onto every W_l is cfg_project with the roles swapped
            cfg_project(&W[0, 0], &Y[i, 0], t, m, d)
            cfg_grad_coef(t, &A[0], &B[0], g, m)
            cfg_weighted_rows(g, &W[0, 0], &G[i, 0], m, d)
        free(t)
        free(g)
    return G_arr


def pair_kernel_sum(const double[:, ::1] X, const double[:, ::1] Y,
                    const double[::1] inv_bw, const double[::1] wts,
                    bint laplace, bint symmetric, int num_threads=1):
    """Sum of the mixture kernel over pairs; ``symmetric`` means ``Y is X`` and i != j."""
    cdef Py_ssize_t nx = X.shape[0], ny = Y.shape[0], d = X.shape[1], nb = inv_bw.shape[0]
    cdef Py_ssize_t i, b, j0, cnt
    cdef double acc, total = 0.0
    cdef double* dist
    rows_arr = np.zeros(nx)
    cdef double[::1] rows = rows_arr
    if nx == 0 or ny == 0:
        return 0.0
    with nogil, parallel(num_threads=num_threads):
        dist = cfg_alloc(ny)
        for i in prange(nx, schedule="dynamic"):
            if symmetric:
                j0 = i + 1
            else:
                j0 = 0
            cnt = ny - j0
            acc = 0.0
            if cnt > 0:
                cfg_dist(&X[i, 0], &Y[j0, 0], dist, cnt, d, laplace)
                for b in range(nb):
                    acc = acc + wts[b] * cfg_sum_exp(dist, inv_bw[b], cnt)
            rows[i] = acc
        free(dist)
    for i in range(nx):
        total += rows[i]
    return 2.0 * total if symmetric else total
