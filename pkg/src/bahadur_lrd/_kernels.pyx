# cython: language_level=3
"""Compiled inner loops. Signatures and results mirror ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free, qsort
from libc.math cimport log2

cnp.import_array()


cdef int _cmp_double(const void* a, const void* b) noexcept nogil:
    cdef double x = (<double*>a)[0]
    cdef double y = (<double*>b)[0]
    return (x > y) - (x < y)


cdef inline void _swap(double* v, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef double tmp = v[i]
    v[i] = v[j]
    v[j] = tmp


cdef double _select(double* v, Py_ssize_t n, Py_ssize_t k) noexcept nogil:
    # 0-based k; median-of-three quickselect, qsort once the depth budget is spent
    cdef Py_ssize_t lo = 0, hi = n - 1, i, j, mid
    cdef double pivot
    cdef int depth = 2 * <int>log2(<double>n + 1.0) + 4
    while hi > lo:
        if depth == 0:
            qsort(v + lo, hi - lo + 1, sizeof(double), _cmp_double)
            return v[k]
        depth -= 1
        mid = lo + (hi - lo) // 2
        if v[mid] < v[lo]:
            _swap(v, mid, lo)
        if v[hi] < v[lo]:
            _swap(v, hi, lo)
        if v[hi] < v[mid]:
            _swap(v, hi, mid)
        pivot = v[mid]
        i = lo
        j = hi
        while i <= j:
            while v[i] < pivot:
                i += 1
            while v[j] > pivot:
                j -= 1
            if i <= j:
                _swap(v, i, j)
                i += 1
                j -= 1
        if k <= j:
            hi = j
        elif k >= i:
            lo = i
        else:
            return v[k]
    return v[k]


def select_and_count(x, Py_ssize_t k, double t):
    """Return the k-th smallest entry (1-based) of ``x`` and ``#{x <= t}``."""
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], i, count = 0
    if n == 0:
        raise ValueError("empty sample")
    if k < 1 or k > n:
        raise ValueError("order statistic index out of range")
    cdef double* buf = <double*>malloc(n * sizeof(double))
    cdef double out
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                buf[i] = xv[i]
                if xv[i] <= t:
                    count += 1
            out = _select(buf, n, k - 1)
    finally:
        free(buf)
    return out, count


def hermite_table(int jmax, t):
    """Rows ``H_0..H_jmax`` (probabilists') evaluated at every entry of ``t``."""
    cdef const double[::1] tv = np.ascontiguousarray(t, dtype=np.float64).ravel()
    cdef Py_ssize_t m = tv.shape[0], i
    cdef int j
    out = np.empty((jmax + 1, m), dtype=np.float64)
    cdef double[:, ::1] h = out
    with nogil:
        # row by row so the inner loop runs over contiguous memory
        for i in range(m):
            h[0, i] = 1.0
        if jmax >= 1:
            for i in range(m):
                h[1, i] = tv[i]
        for j in range(1, jmax):
            for i in range(m):
                h[j + 1, i] = tv[i] * h[j, i] - j * h[j - 1, i]
    return out


def lag_series_sum(rho, a, Py_ssize_t n):
    """``sum_{k=1}^{n-1} (n - k) * P(rho[k])`` with ``P(x) = sum_j a[j] x**j``."""
    cdef const double[::1] rv = np.ascontiguousarray(rho, dtype=np.float64)
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef Py_ssize_t k, j, deg = av.shape[0] - 1
    cdef double total = 0.0, p, x
    if rv.shape[0] < n:
        raise ValueError("rho must hold lags 0..n-1")
    with nogil:
        for k in range(1, n):
            x = rv[k]
            p = av[deg]
            for j in range(deg - 1, -1, -1):
                p = p * x + av[j]
            total += (n - k) * p
    return total


def lagged_products(x, Py_ssize_t max_lag):
    """``s[k] = sum_i x[i] * x[i + k]`` for ``k = 0..max_lag``."""
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], k, i, stop
    cdef double s0, s1, s2, s3
    if max_lag >= n or max_lag < 0:
        raise ValueError("max_lag must lie in [0, n)")
    out = np.empty(max_lag + 1, dtype=np.float64)
    cdef double[::1] ov = out
    with nogil:
        for k in range(max_lag + 1):
            # four accumulators break the add dependency chain
            s0 = s1 = s2 = s3 = 0.0
            stop = (n - k) - (n - k) % 4
            for i in range(0, stop, 4):
                s0 += xv[i] * xv[i + k]
                s1 += xv[i + 1] * xv[i + k + 1]
                s2 += xv[i + 2] * xv[i + k + 2]
                s3 += xv[i + 3] * xv[i + k + 3]
            for i in range(stop, n - k):
                s0 += xv[i] * xv[i + k]
            ov[k] = (s0 + s1) + (s2 + s3)
    return out
