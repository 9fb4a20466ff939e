"""Closed-form rates and limit constants for sample quantiles of g(Y).

The dependence regime is set by ``alpha * tau_bar``, where ``alpha`` is the
correlation decay exponent and ``tau_bar`` the minimal Hermite rank of the
indicator functionals near the quantile:

* SRD, ``alpha * tau_bar > 1``: rate ``n^-1/2`` and a Gaussian limit with
  variance :func:`sigma2_p`;
* boundary, ``alpha * tau_bar = 1``: rate ``(log n / n)^1/2``;
* LRD, ``alpha * tau_bar < 1``: rate ``n^(-alpha tau_bar / 2)`` and a Hermite
  process limit normalized by :func:`k_const`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import RegimeError, TruncationError
from .functionals import PiecewiseFunctional, pdf_gY, true_quantile
from .gaussproc import CorrelationModel
from .hermite import (
    DEFAULT_ORDER,
    DEFAULT_ZERO_TOL,
    HermiteCoefficients,
    coefficients_of_indicator,
    min_rank_neighborhood,
)

BOUNDARY_TOL = 1e-12
DEFAULT_LAG_CAP = 100_000
TAIL_REL_TOL = 1e-3


class Regime(str, enum.Enum):
    SRD = "SRD"
    BOUNDARY = "Boundary"
    LRD = "LRD"


@dataclass(frozen=True)
class RateSpec:
    alpha: float
    tau_bar: int
    regime: Regime

    @property
    def exponent(self) -> float:
        return self.alpha * self.tau_bar


def classify_regime(alpha: float, tau_bar: int) -> RateSpec:
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if tau_bar < 1:
        raise ValueError("tau must be at least 1")
    e = alpha * tau_bar
    if abs(e - 1.0) <= BOUNDARY_TOL:
        regime = Regime.BOUNDARY
    elif e > 1.0:
        regime = Regime.SRD
    else:
        regime = Regime.LRD
    return RateSpec(float(alpha), int(tau_bar), regime)


def rate_rn(spec: RateSpec, n) -> float | np.ndarray:
    """Normalizing rate ``r_n(alpha, tau_bar)``; vectorised over ``n``."""
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr < 2):
        raise ValueError("n must be at least 2")
    if spec.regime is Regime.SRD:
        out = n_arr**-0.5
    elif spec.regime is Regime.BOUNDARY:
        out = np.sqrt(np.log(n_arr) / n_arr)
    else:
        out = n_arr ** (-spec.exponent / 2.0)
    return float(out) if out.ndim == 0 else out


def _lag_polynomial(w: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return np.polynomial.polynomial.polyval(rho, w)


def sigma2_p(
    g: PiecewiseFunctional,
    p: float,
    model: CorrelationModel,
    J: int = DEFAULT_ORDER,
    lag_cap: int = DEFAULT_LAG_CAP,
    zero_tol: float = DEFAULT_ZERO_TOL,
    tau_bar: int | None = None,
) -> tuple[float, float]:
    """Asymptotic variance of ``sqrt(n) (xi_hat - xi)`` in the SRD regime.

    Returns ``(value, tail_bound)``:
    ``value = f^-2 sum_{|i| <= lag_cap} sum_{j=rank..J} c_j^2 / j! rho(i)^j``
    with the coefficients of ``h`` at the true quantile. The lag-0 term uses
    the exact ``Var h = p(1 - p)`` instead of its truncated series. The
    ``tail_bound`` covers the dropped lags ``|i| > lag_cap`` using
    ``sum_j c_j^2/j! |rho|^j <= p(1-p) |rho|^rank``.
    """
    if lag_cap < 1:
        raise ValueError("lag_cap must be at least 1")
    if tau_bar is None:
        tau_bar = min_rank_neighborhood(g, p, J=J, zero_tol=zero_tol)
    spec = classify_regime(model.alpha, tau_bar)
    if spec.regime is not Regime.SRD:
        raise RegimeError(
            f"sigma2_p needs alpha * tau_bar > 1, got {model.alpha} * {tau_bar} ({spec.regime.value})"
        )
    if J < tau_bar:
        raise ValueError("J must be at least tau_bar")
    xi = true_quantile(g, p)
    coeffs = coefficients_of_indicator(g, xi, J, zero_tol)
    f = pdf_gY(g, xi)
    rho = model.rho(np.arange(1, lag_cap + 1))
    lagged = math.fsum(_lag_polynomial(coeffs.series_weights, rho))
    value = (coeffs.variance + 2.0 * lagged) / f**2
    tail = 2.0 * coeffs.variance * model.tail_sum_bound(lag_cap, coeffs.rank) / f**2
    if tail > TAIL_REL_TOL * value:
        raise TruncationError(
            f"lag tail bound {tail:.3g} exceeds {TAIL_REL_TOL:g} of sigma2 {value:.6g}; raise lag_cap"
        )
    return value, tail


def k_const(tau: int, alpha: float) -> float:
    """Normalizing constant of the rank-``tau`` Hermite-process limit (``alpha tau < 1``)."""
    if tau < 1:
        raise ValueError("tau must be at least 1")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    e = alpha * tau
    if e >= 1.0:
        raise RegimeError(f"k_const needs alpha * tau < 1, got {e}")
    base = 2.0 * math.gamma(alpha) * math.sin(math.pi * (1.0 - alpha) / 2.0)
    radicand = (1.0 - e / 2.0) * (1.0 - e) / (math.factorial(tau) * base**tau)
    if not radicand > 0:
        raise RegimeError(f"nonpositive radicand {radicand} in k_const")
    return math.sqrt(radicand)


def var_empirical_cdf(model: CorrelationModel, coeffs: HermiteCoefficients, n: int) -> float:
    """``Var(F_hat_n(u) - F(u))`` from the Hermite expansion of ``h_u``.

    ``(1/n^2) sum_{|k|<n} (n - |k|) sum_j c_j^2/j! rho(k)^j`` collapsed to a
    single sum over lags. The diagonal (``k = 0``) uses the exact
    ``coeffs.variance``; off-diagonal lags use the series truncated at J.
    """
    if n < 1:
        raise ValueError("n must be positive")
    diag = coeffs.variance if math.isfinite(coeffs.variance) else coeffs.partial_sum
    if n == 1:
        return diag
    rho = model.rho(np.arange(n))
    off = kernels.lag_series_sum(rho, coeffs.series_weights, n)
    return (n * diag + 2.0 * off) / n**2
