"""Hermite analysis of the centered indicator functionals h_u.

Probabilists' polynomials are used throughout, so that
``E[H_j(Y) H_k(Y)] = j! delta_jk`` for a standard Gaussian Y, and the
coefficients are ``c_j(u) = E[h_u(Y) H_j(Y)]`` with
``h_u(t) = 1{g(t) <= u} - F(u)``.

Closed forms rest on the antiderivative identity
``(H_{j-1} phi)' = -H_j phi`` for ``j >= 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import kernels
from .errors import AssumptionAError, RankUndetectableError
from .functionals import (
    IntervalUnion,
    PiecewiseFunctional,
    cdf_gY,
    std_normal_cdf,
    std_normal_pdf,
    sublevel_set,
    true_quantile,
)

__all__ = [
    "HermiteCoefficients",
    "IntervalUnion",
    "coefficients_by_quadrature",
    "coefficients_of_indicator",
    "cross_moment",
    "default_half_width",
    "gauss_hermite_rule",
    "hermite_eval",
    "hermite_rank",
    "interval_hermite_coefficient",
    "kappa",
    "min_rank_neighborhood",
    "phi_derivative",
    "sublevel_set",
]

DEFAULT_ZERO_TOL = 1e-10
DEFAULT_ORDER = 20
MAX_ORDER = 170  # largest j with j! finite in double precision
MAX_RULE_SIZE = 512


def hermite_eval(j: int, t):
    """Probabilists' Hermite polynomial ``H_j(t)`` by three-term recurrence."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    if np.ndim(t) == 0:
        t = float(t)
        h_prev, h = 1.0, t
        if j == 0:
            return 1.0
        for k in range(1, j):
            h_prev, h = h, t * h - k * h_prev
        return h
    return kernels.hermite_table(j, t)[j].reshape(np.shape(t))


def phi_derivative(k: int, t: float) -> float:
    """k-th derivative of the standard normal density, ``(-1)^k H_k(t) phi(t)``."""
    if math.isinf(t):
        return 0.0
    return (-1) ** k * hermite_eval(k, t) * std_normal_pdf(t)


@lru_cache(maxsize=32)
def _rule(m: int) -> tuple[np.ndarray, np.ndarray]:
    off = np.sqrt(np.arange(1, m, dtype=float))
    try:
        nodes, vecs = eigh_tridiagonal(np.zeros(m), off)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"Jacobi eigensolver failed for m={m}") from exc
    weights = vecs[0, :] ** 2
    weights /= weights.sum()
    # exact symmetry of the rule about 0
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_hermite_rule(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the m-point Gauss rule for the N(0, 1) measure.

    Golub-Welsch: the nodes are the eigenvalues of the Jacobi matrix of the
    probabilists' recurrence (zero diagonal, off-diagonal ``sqrt(k)``), and
    the weights are the squared first components of its eigenvectors. The
    rule integrates polynomials up to degree ``2m - 1`` exactly and its
    weights sum to one.
    """
    if not 1 <= m <= MAX_RULE_SIZE:
        raise ValueError(f"m must lie in [1, {MAX_RULE_SIZE}]")
    if m == 1:
        return np.zeros(1), np.ones(1)
    return _rule(m)


def interval_hermite_coefficient(j: int, a: float, b: float) -> float:
    """``int_a^b H_j(t) phi(t) dt`` in closed form; ``a``, ``b`` may be infinite."""
    if a > b:
        raise ValueError("interval endpoints must satisfy a <= b")
    if j < 0:
        raise ValueError("j must be nonnegative")
    if j == 0:
        return std_normal_cdf(b) - std_normal_cdf(a)

    def edge(t: float) -> float:
        if math.isinf(t):
            return 0.0
        return hermite_eval(j - 1, t) * std_normal_pdf(t)

    return edge(a) - edge(b)


@dataclass(frozen=True)
class HermiteCoefficients:
    """Hermite expansion of ``h_u`` truncated at order ``max_order``.

    ``coeffs`` holds ``c_0..c_J`` (entries below the rank are stored, not
    dropped). ``variance`` is the exact ``Var h_u(Y) = F(u)(1 - F(u))`` so that
    the truncation mass ``variance - sum_j c_j^2 / j!`` is available.
    ``rank`` is ``None`` only for a degenerate expansion with no coefficient
    above tolerance.
    """

    u: float
    coeffs: np.ndarray
    rank: int | None
    zero_tol: float = DEFAULT_ZERO_TOL
    variance: float = math.nan
    _weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        fact = np.array([math.factorial(j) for j in range(c.shape[0])], dtype=float)
        w = c * c / fact
        if self.rank is not None:
            w[: self.rank] = 0.0
        else:
            w[:] = 0.0
        w.setflags(write=False)
        object.__setattr__(self, "_weights", w)

    @property
    def max_order(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def series_weights(self) -> np.ndarray:
        """``c_j^2 / j!`` for ``j = 0..J``, zero below the rank."""
        return self._weights

    @property
    def partial_sum(self) -> float:
        return math.fsum(self._weights)

    @property
    def tail_mass(self) -> float:
        return self.variance - self.partial_sum


def hermite_rank(coeffs, zero_tol: float = DEFAULT_ZERO_TOL) -> int:
    """Smallest ``j >= 1`` with ``|c_j| > zero_tol``."""
    c = np.asarray(coeffs, dtype=float)
    idx = np.nonzero(np.abs(c[1:]) > zero_tol)[0]
    if idx.size == 0:
        raise RankUndetectableError(
            f"all coefficients c_1..c_{c.shape[0] - 1} are below tolerance {zero_tol}"
        )
    return int(idx[0]) + 1


def _indicator_coeffs(intervals: IntervalUnion, J: int) -> np.ndarray:
    # int_a^b H_j phi = H_{j-1}(a) phi(a) - H_{j-1}(b) phi(b); c_0 stays 0 (centering)
    c = np.zeros(J + 1)
    for a, b in intervals:
        for sign, t in ((1.0, a), (-1.0, b)):
            if not math.isinf(t):
                c[1:] += sign * kernels.hermite_table(J - 1, [t])[:, 0] * std_normal_pdf(t)
    return c


def coefficients_of_indicator(
    g: PiecewiseFunctional,
    u: float,
    J: int = DEFAULT_ORDER,
    zero_tol: float = DEFAULT_ZERO_TOL,
) -> HermiteCoefficients:
    """Closed-form Hermite coefficients of ``h_u(t) = 1{g(t) <= u} - F(u)``."""
    if not 1 <= J <= MAX_ORDER:
        raise ValueError(f"J must lie in [1, {MAX_ORDER}]")
    if zero_tol <= 0:
        raise ValueError("zero_tol must be positive")
    intervals = sublevel_set(g, u)
    c = _indicator_coeffs(intervals, J)
    F = cdf_gY(g, u)
    rank = hermite_rank(c, zero_tol)
    return HermiteCoefficients(u=u, coeffs=c, rank=rank, zero_tol=zero_tol, variance=F * (1.0 - F))


def coefficients_by_quadrature(f: Callable, J: int, m: int) -> np.ndarray:
    """Gauss-Hermite estimate of ``E[f(Y) H_j(Y)]`` for ``j = 0..J``.

    ``f`` must accept an array of nodes. Accurate for smooth ``f``; for
    indicators the error is governed by the weight of the nodes next to each
    jump, so it only serves as a coarse oracle there.
    """
    if m < J + 1:
        raise ValueError("m must be at least J + 1")
    nodes, weights = gauss_hermite_rule(m)
    values = np.asarray(f(nodes), dtype=float) * weights
    return kernels.hermite_table(J, nodes) @ values


def default_half_width(g: PiecewiseFunctional, p: float) -> float:
    """``0.05`` times a centered-difference slope of the quantile function.

    Capped at half the distance from xi(p) to the edge of the range of g so
    the grid never leaves it.
    """
    lo, hi = max(p - 0.01, 1e-12), min(p + 0.01, 1.0 - 1e-12)
    width = 0.05 * (true_quantile(g, hi) - true_quantile(g, lo)) / (hi - lo)
    xi = true_quantile(g, p)
    r_lo, r_hi = g.value_range()
    return min(width, 0.5 * (xi - r_lo), 0.5 * (r_hi - xi))


def min_rank_neighborhood(
    g: PiecewiseFunctional,
    p: float,
    half_width: float | None = None,
    grid_points: int = 21,
    J: int = DEFAULT_ORDER,
    zero_tol: float = DEFAULT_ZERO_TOL,
) -> int:
    """Minimal Hermite rank of ``h_u`` over a symmetric grid of u around xi(p).

    The infimum over an open neighbourhood is replaced by a finite grid, so
    the result is an upper bound on the true minimal rank that is exact
    whenever the rank is locally constant (true for all bundled functionals).
    """
    if half_width is None:
        half_width = default_half_width(g, p)
    if half_width <= 0:
        raise ValueError("half_width must be positive")
    if grid_points < 3:
        raise ValueError("grid_points must be at least 3")
    xi = true_quantile(g, p)
    grid = np.linspace(xi - half_width, xi + half_width, grid_points)
    return min(coefficients_of_indicator(g, float(u), J, zero_tol).rank for u in grid)


def kappa(g: PiecewiseFunctional, p: float, j: int) -> float:
    """Slab-limit constant: ``lim I(eps) / eps`` as the slab half-width ``eps -> 0``.

    ``I(eps) = int H_j(t) phi(t) 1{|g(t) - xi(p)| <= eps} dt``. Each preimage
    ``t_i`` of ``xi(p)`` contributes a slab of width ``~ 2 eps / |g'(t_i)|``, so
    ``kappa_j = 2 sum_i H_j(t_i) phi(t_i) / |g'(t_i)|
             = 2 (-1)^j sum_i phi^(j)(t_i) / |g'(t_i)|``.
    """
    if j < 1:
        raise ValueError("j must be at least 1")
    xi = true_quantile(g, p)
    roots = g.preimages(xi)
    if not roots:
        raise AssumptionAError(f"no branch preimage of xi={xi}")
    total = 0.0
    for t, branch in roots:
        d = branch.derivative(t)
        if d == 0.0:
            raise AssumptionAError(f"g' vanishes at the preimage t={t}")
        total += (-1) ** j * phi_derivative(j, t) / abs(d)
    return 2.0 * total


def cross_moment(coeffs: HermiteCoefficients, rho: float) -> float:
    """Truncated ``E[h(Y1) h(Y2)] = sum_{j=rank..J} c_j^2 / j! rho^j``."""
    if abs(rho) > 1.0:
        raise ValueError("|rho| must not exceed 1")
    w = coeffs.series_weights
    return float(np.polynomial.polynomial.polyval(rho, w))
