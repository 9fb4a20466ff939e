"""Empirical CDF, sample quantile and the Bahadur remainder of one path."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .functionals import PiecewiseFunctional, pdf_gY, true_quantile
from .gaussproc import GaussianPath


@dataclass(frozen=True)
class QuantileObservation:
    """Decomposition ``xi_hat - xi = linear_term + remainder`` for one sample."""

    n: int
    p: float
    xi_hat: float
    F_hat_at_xi: float
    linear_term: float
    remainder: float


def order_index(n: int, p: float) -> int:
    """1-based index ``ceil(n p)`` of the order statistic returned as the p-quantile."""
    # rounding guards against n*p landing a few ulps above an integer
    return min(n, max(1, math.ceil(round(n * p, 9))))


def _check(sample) -> np.ndarray:
    x = np.asarray(sample, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("sample must be non-empty")
    return x


def empirical_cdf(sample, t: float) -> float:
    x = _check(sample)
    return np.count_nonzero(x <= t) / x.size


def sample_quantile(sample, p: float) -> float:
    """``inf{x : F_hat(x) >= p}``, i.e. the ``ceil(n p)``-th order statistic.

    Selection runs in expected linear time.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    x = _check(sample)
    value, _ = kernels.select_and_count(x, order_index(x.size, p), 0.0)
    return value


def remainder_from_sample(
    gy, p: float, xi: float, density: float
) -> QuantileObservation:
    """Bahadur decomposition for an already transformed sample ``g(Y)``."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    x = _check(gy)
    n = x.size
    xi_hat, count = kernels.select_and_count(x, order_index(n, p), xi)
    F_hat = count / n
    linear = (p - F_hat) / density
    return QuantileObservation(
        n=n,
        p=p,
        xi_hat=xi_hat,
        F_hat_at_xi=F_hat,
        linear_term=linear,
        remainder=xi_hat - xi - linear,
    )


def bahadur_remainder(
    path: GaussianPath | np.ndarray, g: PiecewiseFunctional, p: float
) -> QuantileObservation:
    """Push a Gaussian path through ``g`` and split the quantile error.

    ``linear_term = (p - F_hat(xi)) / f(xi)`` and
    ``remainder = xi_hat - xi - linear_term``, with the true quantile ``xi`` and
    density ``f`` of ``g(Y)``.
    """
    values = path.values if isinstance(path, GaussianPath) else path
    xi = true_quantile(g, p)
    return remainder_from_sample(g(values), p, xi, pdf_gY(g, xi))
