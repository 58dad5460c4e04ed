# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: pairwise weighted squared distances, fused Gaussian
Gram/cross matrices, and Nadaraya-Watson conditional-CDF sums.

Direct summation throughout; numerically this avoids the cancellation of the
expanded-product route used by the numpy fallback.
"""

from libc.math cimport exp

import numpy as np

cimport numpy as cnp

cnp.import_array()

name = "native"


def pairwise_sq_dists(const double[:, ::1] a, const double[:, ::1] b, const double[::1] weights):
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0], m = a.shape[1]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((na, nb), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, k
    cdef double acc, d
    for i in range(na):
        for j in range(nb):
            acc = 0.0
            for k in range(m):
                d = a[i, k] - b[j, k]
                acc += weights[k] * d * d
            o[i, j] = acc
    return out


def cross_gaussian(const double[:, ::1] a, const double[:, ::1] b, const double[::1] weights, double sigma):
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0], m = a.shape[1]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((na, nb), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, k
    cdef double acc, d
    for i in range(na):
        for j in range(nb):
            acc = 0.0
            for k in range(m):
                d = a[i, k] - b[j, k]
                acc += weights[k] * d * d
            o[i, j] = exp(-sigma * acc)
    return out


def gram_gaussian(const double[:, ::1] a, const double[::1] weights, double sigma):
    cdef Py_ssize_t n = a.shape[0], m = a.shape[1]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, k
    cdef double acc, d, v
    for i in range(n):
        o[i, i] = 1.0
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(m):
                d = a[i, k] - a[j, k]
                acc += weights[k] * d * d
            v = exp(-sigma * acc)
            o[i, j] = v
            o[j, i] = v
    return out


def nw_cdf(const double[:, ::1] sq_dists, double inv_two_h2, const double[::1] bank_scores,
           const double[::1] query_scores):
    cdef Py_ssize_t nq = sq_dists.shape[0], nb = sq_dists.shape[1]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(nq, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j
    cdef double num, den, w, r
    for i in range(nq):
        num = 0.0
        den = 0.0
        r = query_scores[i]
        for j in range(nb):
            w = exp(-inv_two_h2 * sq_dists[i, j])
            den += w
            if bank_scores[j] <= r:
                num += w
        o[i] = num / den if den > 0.0 else float("nan")
    return out
