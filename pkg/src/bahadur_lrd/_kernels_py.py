"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""
import numpy as np


def select_and_count(x, k, t):
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if n == 0:
        raise ValueError("empty sample")
    if k < 1 or k > n:
        raise ValueError("order statistic index out of range")
    kth = float(np.partition(x, k - 1)[k - 1])
    return kth, int(np.count_nonzero(x <= t))


def hermite_table(jmax, t):
    t = np.ascontiguousarray(t, dtype=np.float64).ravel()
    out = np.empty((jmax + 1, t.shape[0]))
    out[0] = 1.0
    if jmax >= 1:
        out[1] = t
    for j in range(1, jmax):
        out[j + 1] = t * out[j] - j * out[j - 1]
    return out


def lag_series_sum(rho, a, n):
    rho = np.asarray(rho, dtype=np.float64)
    if rho.shape[0] < n:
        raise ValueError("rho must hold lags 0..n-1")
    a = np.asarray(a, dtype=np.float64)
    x = rho[1:n]
    p = np.full_like(x, a[-1])
    for coef in a[-2::-1]:
        p = p * x + coef
    weights = n - np.arange(1, n, dtype=np.float64)
    return float(np.dot(weights, p))


def lagged_products(x, max_lag):
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    if max_lag >= n or max_lag < 0:
        raise ValueError("max_lag must lie in [0, n)")
    return np.array([np.dot(x[: n - k], x[k:]) for k in range(max_lag + 1)])
