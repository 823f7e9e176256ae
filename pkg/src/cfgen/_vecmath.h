/* Vectorisable inner loops for _ckernels.pyx.
 *
 * On x86-64 glibc the SIMD variants of exp/sin/cos (libmvec) are declared
 * so "omp simd" loops can call them without -ffast-math; IEEE semantics
 * for inf/nan are kept.  Elsewhere the loops compile to scalar code.
 */
#ifndef CFGEN_VECMATH_H
#define CFGEN_VECMATH_H

#include <math.h>
#include <stdlib.h>

#if defined(__x86_64__) && defined(__GLIBC__) && defined(__GNUC__) && !defined(__clang__)
__attribute__((__simd__("notinbranch"))) extern double exp(double);
__attribute__((__simd__("notinbranch"))) extern double cos(double);
__attribute__((__simd__("notinbranch"))) extern double sin(double);
/* runtime dispatch between an AVX2 build and the baseline build of each loop */
#define CFG_CLONES __attribute__((target_clones("avx2", "default"), noinline))
#else
#define CFG_CLONES
#endif

/* fixed alignment keeps the vector/epilogue split, hence the sum order, run-independent */
static inline double *cfg_alloc(Py_ssize_t n) {
    size_t bytes = ((size_t)(n > 0 ? n : 1) * sizeof(double) + 63) & ~(size_t)63;
    return (double *)aligned_alloc(64, bytes);
}

/* t[i] = sum_k w[k] * Y[i, k] for row-major Y (n x d) */
static inline void cfg_project(const double *Y, const double *w, double *t, Py_ssize_t n, Py_ssize_t d) {
    Py_ssize_t i, k;
    if (d == 1) {
        for (i = 0; i < n; i++) t[i] = w[0] * Y[i];
    } else if (d == 2) {
        for (i = 0; i < n; i++) t[i] = w[0] * Y[2 * i] + w[1] * Y[2 * i + 1];
    } else {
        for (i = 0; i < n; i++) {
            double acc = 0.0;
            for (k = 0; k < d; k++) acc += w[k] * Y[i * d + k];
            t[i] = acc;
        }
    }
}

CFG_CLONES static void cfg_sum_cos_sin(const double *t, Py_ssize_t n, double *c_out, double *s_out) {
    double c = 0.0, s = 0.0;
    Py_ssize_t i;
#pragma omp simd reduction(+ : c)
    for (i = 0; i < n; i++) c += cos(t[i]);
#pragma omp simd reduction(+ : s)
    for (i = 0; i < n; i++) s += sin(t[i]);
    *c_out = c;
    *s_out = s;
}

/* g[l] = A[l] cos(t[l]) + B[l] sin(t[l]) */
CFG_CLONES static void cfg_grad_coef(const double *t, const double *A, const double *B, double *g, Py_ssize_t m) {
    Py_ssize_t l;
    /* separate loops: a joint cos/sin loop is fused into scalar sincos */
#pragma omp simd
    for (l = 0; l < m; l++) g[l] = A[l] * cos(t[l]);
#pragma omp simd
    for (l = 0; l < m; l++) g[l] += B[l] * sin(t[l]);
}

/* out[k] = sum_l g[l] * W[l, k] */
static inline void cfg_weighted_rows(const double *g, const double *W, double *out, Py_ssize_t m, Py_ssize_t d) {
    Py_ssize_t l, k;
    if (d == 2) {
        double a0 = 0.0, a1 = 0.0;
#pragma omp simd reduction(+ : a0, a1)
        for (l = 0; l < m; l++) {
            a0 += g[l] * W[2 * l];
            a1 += g[l] * W[2 * l + 1];
        }
        out[0] = a0;
        out[1] = a1;
        return;
    }
    for (k = 0; k < d; k++) {
        double acc = 0.0;
#pragma omp simd reduction(+ : acc)
        for (l = 0; l < m; l++) acc += g[l] * W[l * d + k];
        out[k] = acc;
    }
}

/* dist[j] = |x - Y[j]|^2 (or |.|_1 when l1) for j in [0, ny) */
CFG_CLONES static void cfg_dist(const double *x, const double *Y, double *dist, Py_ssize_t ny, Py_ssize_t d, int l1) {
    Py_ssize_t j, k;
    if (d == 1) {
        const double x0 = x[0];
        if (l1) {
#pragma omp simd
            for (j = 0; j < ny; j++) dist[j] = fabs(x0 - Y[j]);
        } else {
#pragma omp simd
            for (j = 0; j < ny; j++) dist[j] = (x0 - Y[j]) * (x0 - Y[j]);
        }
        return;
    }
    if (d == 2) {
        const double x0 = x[0], x1 = x[1];
        if (l1) {
#pragma omp simd
            for (j = 0; j < ny; j++) dist[j] = fabs(x0 - Y[2 * j]) + fabs(x1 - Y[2 * j + 1]);
        } else {
#pragma omp simd
            for (j = 0; j < ny; j++) {
                const double a = x0 - Y[2 * j], b = x1 - Y[2 * j + 1];
                dist[j] = a * a + b * b;
            }
        }
        return;
    }
    for (j = 0; j < ny; j++) {
        double acc = 0.0;
        for (k = 0; k < d; k++) {
            double diff = x[k] - Y[j * d + k];
            acc += l1 ? fabs(diff) : diff * diff;
        }
        dist[j] = acc;
    }
}

/* sum_j exp(-scale * dist[j]) */
CFG_CLONES static double cfg_sum_exp(const double *dist, double scale, Py_ssize_t n) {
    double acc = 0.0;
    Py_ssize_t j;
#pragma omp simd reduction(+ : acc)
    for (j = 0; j < n; j++) acc += exp(-scale * dist[j]);
    return acc;
}

#endif
