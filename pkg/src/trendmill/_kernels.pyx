# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in ``_kernels_py``; same results, faster."""
import numpy as np

from libc.stdlib cimport malloc, free, qsort
from libc.math cimport INFINITY

cdef double TIE_RTOL = 1e-10

cdef struct Pair:
    double x
    double y


cdef int _cmp_pair(const void* a, const void* b) noexcept nogil:
    cdef const Pair* pa = <const Pair*> a
    cdef const Pair* pb = <const Pair*> b
    if pa.x < pb.x:
        return -1
    if pa.x > pb.x:
        return 1
    if pa.y < pb.y:
        return -1
    if pa.y > pb.y:
        return 1
    return 0


def best_split(const double[:, ::1] X, const double[::1] y, const Py_ssize_t[::1] idx,
               Py_ssize_t min_leaf):
    cdef Py_ssize_t n = idx.shape[0]
    cdef Py_ssize_t p = X.shape[1]
    cdef Py_ssize_t f, i, m, nl, nr
    cdef double cs, total, sl, sr, diff, g, best = -INFINITY, floor, center, sst, d
    cdef Py_ssize_t best_f = -1
    cdef double best_thr = 0.0, best_gain = 0.0
    cdef Pair* pairs
    cdef double* gains
    cdef double* thr
    cdef char* valid
    cdef double* yc
    if n < 2:
        return -1, 0.0, 0.0
    m = n - 1
    pairs = <Pair*> malloc(n * sizeof(Pair))
    gains = <double*> malloc(p * m * sizeof(double))
    thr = <double*> malloc(p * m * sizeof(double))
    valid = <char*> malloc(p * m * sizeof(char))
    yc = <double*> malloc(n * sizeof(double))
    if pairs == NULL or gains == NULL or thr == NULL or valid == NULL or yc == NULL:
        free(pairs); free(gains); free(thr); free(valid); free(yc)
        raise MemoryError()
    with nogil:
        # centre at the node mean, sequential sums to match the numpy cumsum
        center = 0.0
        for i in range(n):
            center = center + y[idx[i]]
        center = center / n
        sst = 0.0
        for i in range(n):
            d = y[idx[i]] - center
            yc[i] = d
            sst = sst + d * d
        for f in range(p):
            for i in range(n):
                pairs[i].x = X[idx[i], f]
                pairs[i].y = yc[i]
            qsort(pairs, n, sizeof(Pair), _cmp_pair)
            total = 0.0
            for i in range(n):
                total = total + pairs[i].y
            cs = 0.0
            for i in range(m):
                cs = cs + pairs[i].y
                nl = i + 1
                nr = n - nl
                sl = cs
                sr = total - sl
                diff = sl / nl - sr / nr
                g = (<double>(nl * nr) / n) * (diff * diff)
                gains[f * m + i] = g
                thr[f * m + i] = 0.5 * (pairs[i].x + pairs[i + 1].x)
                if thr[f * m + i] >= pairs[i + 1].x:  # adjacent doubles: keep the cut strict
                    thr[f * m + i] = pairs[i].x
                valid[f * m + i] = (pairs[i].x != pairs[i + 1].x and nl >= min_leaf
                                    and nr >= min_leaf)
                if valid[f * m + i] and g > best:
                    best = g
        if best != -INFINITY:
            floor = best - TIE_RTOL * sst
            for f in range(p):
                for i in range(m):
                    if valid[f * m + i] and gains[f * m + i] >= floor:
                        best_f = f
                        best_thr = thr[f * m + i]
                        best_gain = gains[f * m + i]
                        break
                if best_f >= 0:
                    break
    free(pairs); free(gains); free(thr); free(valid); free(yc)
    if best_f < 0:
        return -1, 0.0, 0.0
    return int(best_f), best_thr, best_gain


def outside_charset_mask(list values, str allowed):
    cdef Py_ssize_t i, n = len(values)
    cdef object v
    cdef str s
    cdef Py_UCS4 ch
    cdef set ok = set(allowed)
    out = np.zeros(n, dtype=np.bool_)
    cdef unsigned char[::1] o = out.view(np.uint8)
    for i in range(n):
        v = values[i]
        if v is None:
            continue
        s = <str> v
        for ch in s:
            if ch not in ok:
                o[i] = 1
                break
    return out


def predict_rows(const long long[::1] feature, const double[::1] threshold,
                 const long long[::1] left, const long long[::1] right,
                 const double[::1] value, const double[:, ::1] X):
    cdef Py_ssize_t i, n = X.shape[0]
    cdef long long node
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            node = 0
            while feature[node] >= 0:
                if X[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            o[i] = value[node]
    return out
