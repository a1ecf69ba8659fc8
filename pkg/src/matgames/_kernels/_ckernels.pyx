# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: alias sampling and payload sum-tree ops.

Mirrors _pykernels exactly (same signatures, same arithmetic order) so the
two backends are interchangeable and draw identically from shared uniforms.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def alias_build(weights):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n = w.shape[0]
    if n == 0:
        raise ValueError("empty weight vector")
    # np.sum, not a sequential loop: pairwise summation must match the
    # pure-python backend bit for bit so tables are interchangeable
    cdef double total = float(np.sum(w))
    cdef Py_ssize_t i
    if total <= 0.0 or total != total:
        raise ValueError("weights must have positive finite sum")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] prob = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] alias = np.zeros(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] scaled = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] small = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] large = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t ns = 0, nl = 0, s, l
    for i in range(n):
        scaled[i] = w[i] * (n / total)
        if scaled[i] < 1.0:
            small[ns] = i
            ns += 1
        else:
            large[nl] = i
            nl += 1
    while ns > 0 and nl > 0:
        ns -= 1
        s = small[ns]
        nl -= 1
        l = large[nl]
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] = (scaled[l] + scaled[s]) - 1.0
        if scaled[l] < 1.0:
            small[ns] = l
            ns += 1
        else:
            large[nl] = l
            nl += 1
    for i in range(nl):
        prob[large[i]] = 1.0
    for i in range(ns):
        prob[small[i]] = 1.0
    return prob, alias


def alias_draw(cnp.ndarray[cnp.float64_t, ndim=1] prob,
               cnp.ndarray[cnp.int64_t, ndim=1] alias,
               double u1, double u2):
    cdef Py_ssize_t n = prob.shape[0]
    cdef Py_ssize_t k = <Py_ssize_t>(u1 * n)
    if k >= n:
        k = n - 1
    if u2 < prob[k]:
        return k
    return alias[k]


def alias_draw_batch(cnp.ndarray[cnp.float64_t, ndim=1] prob,
                     cnp.ndarray[cnp.int64_t, ndim=1] alias,
                     cnp.ndarray[cnp.float64_t, ndim=1] u1,
                     cnp.ndarray[cnp.float64_t, ndim=1] u2):
    cdef Py_ssize_t n = prob.shape[0]
    cdef Py_ssize_t t = u1.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(t, dtype=np.int64)
    cdef Py_ssize_t i, k
    for i in range(t):
        k = <Py_ssize_t>(u1[i] * n)
        if k >= n:
            k = n - 1
        out[i] = k if u2[i] < prob[k] else alias[k]
    return out


def tree_build(cnp.ndarray[cnp.float64_t, ndim=2] payload, Py_ssize_t size):
    cdef Py_ssize_t k = payload.shape[1]
    cdef Py_ssize_t i, q
    for i in range(size - 1, 0, -1):
        for q in range(k):
            payload[i, q] = payload[2 * i, q] + payload[2 * i + 1, q]


def tree_path_add(cnp.ndarray[cnp.float64_t, ndim=2] payload, Py_ssize_t size,
                  Py_ssize_t leaf, cnp.ndarray[cnp.float64_t, ndim=1] row):
    cdef Py_ssize_t k = payload.shape[1]
    cdef Py_ssize_t i = size + leaf, q
    while i >= 1:
        for q in range(k):
            payload[i, q] += row[q]
        i >>= 1


def tree_descend_dot(cnp.ndarray[cnp.float64_t, ndim=2] payload, Py_ssize_t size,
                     cnp.ndarray[cnp.float64_t, ndim=1] coef, double r):
    cdef Py_ssize_t k = payload.shape[1]
    cdef Py_ssize_t i = 1, left, q
    cdef double root = 0.0, lmass, rmass, target
    for q in range(k):
        root += payload[1, q] * coef[q]
    target = r * root
    while i < size:
        left = 2 * i
        lmass = 0.0
        rmass = 0.0
        for q in range(k):
            lmass += payload[left, q] * coef[q]
            rmass += payload[left + 1, q] * coef[q]
        if lmass < 0.0:
            lmass = 0.0
        if target < lmass or (rmass <= 0.0 and lmass > 0.0):
            i = left
        else:
            target -= lmass
            i = left + 1
    return i - size
