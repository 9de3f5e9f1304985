# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Mirrors ``_pykernels`` operation for operation."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, floor, fabs
from libc.stdint cimport int64_t

cnp.import_array()

BACKEND = "cython"


def triangle_decode(slots):
    cdef const int64_t[::1] s = np.ascontiguousarray(slots, dtype=np.int64)
    cdef Py_ssize_t k, m = s.shape[0]
    row_arr = np.empty(m, dtype=np.int64)
    col_arr = np.empty(m, dtype=np.int64)
    cdef int64_t[::1] row = row_arr
    cdef int64_t[::1] col = col_arr
    cdef int64_t c, v
    for k in range(m):
        v = s[k]
        c = <int64_t>floor((sqrt(8.0 * <double>v + 1.0) - 1.0) / 2.0)
        if c * (c + 1) // 2 > v:
            c -= 1
        if (c + 1) * (c + 2) // 2 <= v:
            c += 1
        col[k] = c
        row[k] = v - c * (c + 1) // 2
    return row_arr, col_arr


def weighted_degrees(Py_ssize_t n, i, j, w):
    cdef const int64_t[::1] ii = np.ascontiguousarray(i, dtype=np.int64)
    cdef const int64_t[::1] jj = np.ascontiguousarray(j, dtype=np.int64)
    cdef const double[::1] ww = np.ascontiguousarray(w, dtype=np.float64)
    out_i_arr = np.zeros(n, dtype=np.float64)
    out_j_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out_i = out_i_arr
    cdef double[::1] out_j = out_j_arr
    cdef Py_ssize_t k, m = ii.shape[0]
    for k in range(m):
        if ii[k] < 0 or ii[k] >= n or jj[k] < 0 or jj[k] >= n:
            raise IndexError("edge endpoint out of range")
    for k in range(m):
        out_i[ii[k]] += ww[k]
    for k in range(m):
        if ii[k] != jj[k]:
            out_j[jj[k]] += ww[k]
    return out_i_arr + out_j_arr


def alias_build(weights):
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t k
    cdef double total = 0.0
    for k in range(n):
        total += w[k]
    if not total > 0.0:
        raise ValueError("alias table needs a positive total weight")
    prob_arr = np.zeros(n, dtype=np.float64)
    alias_arr = np.zeros(n, dtype=np.int64)
    scaled_arr = np.empty(n, dtype=np.float64)
    small_arr = np.empty(n, dtype=np.int64)
    large_arr = np.empty(n, dtype=np.int64)
    cdef double[::1] prob = prob_arr
    cdef int64_t[::1] alias = alias_arr
    cdef double[::1] scaled = scaled_arr
    cdef int64_t[::1] small = small_arr
    cdef int64_t[::1] large = large_arr
    cdef Py_ssize_t ns = 0, nl = 0
    cdef int64_t lo, hi, fallback = 0
    cdef double dn = <double>n
    for k in range(n):
        scaled[k] = w[k] * dn / total
        if w[k] > w[fallback]:
            fallback = k
    for k in range(n):
        if scaled[k] < 1.0:
            small[ns] = k
            ns += 1
        else:
            large[nl] = k
            nl += 1
    while ns > 0 and nl > 0:
        ns -= 1
        lo = small[ns]
        nl -= 1
        hi = large[nl]
        prob[lo] = scaled[lo]
        alias[lo] = hi
        scaled[hi] = (scaled[hi] + scaled[lo]) - 1.0
        if scaled[hi] < 1.0:
            small[ns] = hi
            ns += 1
        else:
            large[nl] = hi
            nl += 1
    while nl > 0:
        nl -= 1
        hi = large[nl]
        prob[hi] = 1.0
        alias[hi] = hi
    while ns > 0:
        ns -= 1
        lo = small[ns]
        if w[lo] > 0.0:
            prob[lo] = 1.0
            alias[lo] = lo
        else:
            prob[lo] = 0.0
            alias[lo] = fallback
    return prob_arr, alias_arr


def alias_draw(prob, alias, idx, coin):
    cdef const double[::1] pr = np.ascontiguousarray(prob, dtype=np.float64)
    cdef const int64_t[::1] al = np.ascontiguousarray(alias, dtype=np.int64)
    cdef const int64_t[::1] ix = np.ascontiguousarray(idx, dtype=np.int64)
    cdef const double[::1] cn = np.ascontiguousarray(coin, dtype=np.float64)
    cdef Py_ssize_t k, m = ix.shape[0], n = pr.shape[0]
    out_arr = np.empty(m, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef int64_t u
    for k in range(m):
        u = ix[k]
        if u < 0 or u >= n:
            raise IndexError("alias index out of range")
        out[k] = u if cn[k] < pr[u] else al[u]
    return out_arr


cdef inline void _neumaier(double* s, double* c, double x) noexcept nogil:
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


def enumerate_ratio(probs, red_w, blue_w):
    cdef const double[::1] p = np.ascontiguousarray(probs, dtype=np.float64)
    cdef const double[::1] rw = np.ascontiguousarray(red_w, dtype=np.float64)
    cdef const double[::1] bw = np.ascontiguousarray(blue_w, dtype=np.float64)
    cdef Py_ssize_t e = p.shape[0]
    if e > 62:
        raise ValueError("too many edge slots to enumerate")
    cdef int64_t mask, total = (<int64_t>1) << e
    cdef Py_ssize_t k
    cdef double pr, r, b
    cdef double s_ratio = 0.0, c_ratio = 0.0
    cdef double s_ne = 0.0, c_ne = 0.0
    cdef double s_e = 0.0, c_e = 0.0
    with nogil:
        for mask in range(total):
            pr = 1.0
            r = 0.0
            b = 0.0
            for k in range(e):
                if (mask >> k) & 1:
                    pr *= p[k]
                    r += rw[k]
                    b += bw[k]
                else:
                    pr *= 1.0 - p[k]
            if r + b > 0.0:
                _neumaier(&s_ratio, &c_ratio, pr * (r / (r + b)))
                _neumaier(&s_ne, &c_ne, pr)
            else:
                _neumaier(&s_e, &c_e, pr)
    return s_ratio + c_ratio, s_ne + c_ne, s_e + c_e
