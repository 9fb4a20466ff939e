"""Piecewise-monotone functionals g and the law of g(Y) for Y ~ N(0, 1).

A functional is a bundle of monotone branches: open intervals on which g is a
C^1 diffeomorphism, together with the branch inverse and derivative. The
complement of the branch union must be Lebesgue-null. Every distributional
quantity of g(Y) is then computed from the sublevel sets {t : g(t) <= u},
which are finite unions of intervals obtained from the branch inverses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtr

from .errors import AssumptionAError

INF = math.inf

RealFunction = Callable[[float], float]


def std_normal_pdf(t: float) -> float:
    if math.isinf(t):
        return 0.0
    return math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)


def std_normal_cdf(t: float) -> float:
    return float(ndtr(t))


@dataclass(frozen=True)
class Branch:
    """One monotone piece of g on the open interval ``(lower, upper)``."""

    lower: float
    upper: float
    increasing: bool
    forward: RealFunction
    inverse: RealFunction
    derivative: RealFunction

    def image(self) -> tuple[float, float]:
        """Open image interval ``g((lower, upper))`` as ``(inf, sup)``."""
        a = self._limit(self.lower)
        b = self._limit(self.upper)
        return (a, b) if self.increasing else (b, a)

    def _limit(self, t: float) -> float:
        # bundled branches are unbounded at infinite endpoints
        if math.isinf(t):
            return t if self.increasing else -t
        return self.forward(t)

    def contains_value(self, u: float) -> bool:
        lo, hi = self.image()
        return lo < u < hi

    def sublevel(self, u: float) -> tuple[float, float] | None:
        """Part of this branch where ``g <= u``, or ``None`` when empty."""
        lo, hi = self.image()
        if u <= lo:
            return None
        if u >= hi:
            return (self.lower, self.upper)
        t = self.inverse(u)
        return (self.lower, t) if self.increasing else (t, self.upper)


@dataclass(frozen=True)
class PiecewiseFunctional:
    name: str
    branches: tuple[Branch, ...]
    global_eval: Callable[[np.ndarray], np.ndarray]

    def __call__(self, t):
        return self.global_eval(np.asarray(t, dtype=float))

    def value_range(self) -> tuple[float, float]:
        images = [b.image() for b in self.branches]
        return min(i[0] for i in images), max(i[1] for i in images)

    def preimages(self, u: float) -> list[tuple[float, Branch]]:
        """Solutions of ``g(t) = u``, one per branch whose image holds ``u``."""
        return [(b.inverse(u), b) for b in self.branches if b.contains_value(u)]


@dataclass(frozen=True)
class IntervalUnion:
    """Sorted, disjoint closed intervals; endpoints may be infinite."""

    intervals: tuple[tuple[float, float], ...]

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def gaussian_measure(self) -> float:
        return math.fsum(std_normal_cdf(b) - std_normal_cdf(a) for a, b in self.intervals)

    def contains(self, t: float) -> bool:
        return any(a <= t <= b for a, b in self.intervals)


def _merge(pieces: list[tuple[float, float]]) -> IntervalUnion:
    # touching pieces are glued: branch gaps are null sets
    pieces = sorted(pieces)
    merged: list[list[float]] = []
    for a, b in pieces:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return IntervalUnion(tuple((a, b) for a, b in merged if a < b))


def sublevel_set(g: PiecewiseFunctional, u: float) -> IntervalUnion:
    """The set ``{t : g(t) <= u}`` computed branch by branch.

    Raises
    ------
    AssumptionAError
        If ``u`` lies strictly outside the closure of the range of ``g``.
    """
    lo, hi = g.value_range()
    if u < lo or u > hi or math.isnan(u):
        raise AssumptionAError(f"u={u} outside the range [{lo}, {hi}] of {g.name}")
    pieces = [s for s in (b.sublevel(u) for b in g.branches) if s is not None]
    return _merge(pieces)


def cdf_gY(g: PiecewiseFunctional, u: float) -> float:
    """``P(g(Y) <= u)``."""
    lo, hi = g.value_range()
    if u < lo:
        return 0.0
    if u > hi:
        return 1.0
    return min(1.0, max(0.0, sublevel_set(g, u).gaussian_measure()))


def pdf_gY(g: PiecewiseFunctional, u: float) -> float:
    """Density of g(Y) at ``u``: sum over preimages of ``phi(t) / |g'(t)|``."""
    roots = g.preimages(u)
    if not roots:
        raise AssumptionAError(f"u={u} is not an interior value of any branch of {g.name}")
    total = 0.0
    for t, branch in roots:
        d = branch.derivative(t)
        if d == 0.0 or not math.isfinite(d):
            raise AssumptionAError(f"g' vanishes at the preimage t={t} of u={u}")
        total += std_normal_pdf(t) / abs(d)
    return total


def true_quantile(g: PiecewiseFunctional, p: float, tol: float = 1e-12) -> float:
    """Solve ``F(xi) = p`` by bracketing, bisection, then Newton steps."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    lo_r, hi_r = g.value_range()
    a = -1.0 if math.isinf(lo_r) else lo_r
    b = 1.0 if math.isinf(hi_r) else hi_r
    step = 1.0
    for _ in range(200):
        if cdf_gY(g, a) < p:
            break
        if not math.isinf(lo_r):
            raise AssumptionAError(f"p={p} is not bracketable for {g.name}")
        step *= 2.0
        a -= step
    step = 1.0
    for _ in range(200):
        if cdf_gY(g, b) >= p:
            break
        if not math.isinf(hi_r):
            raise AssumptionAError(f"p={p} is not bracketable for {g.name}")
        step *= 2.0
        b += step
    while b - a > 1e-8 * max(1.0, abs(a), abs(b)):
        mid = 0.5 * (a + b)
        if cdf_gY(g, mid) < p:
            a = mid
        else:
            b = mid
    x = 0.5 * (a + b)
    for _ in range(50):
        resid = cdf_gY(g, x) - p
        if abs(resid) <= tol:
            return x
        try:
            dens = pdf_gY(g, x)
        except AssumptionAError:
            dens = 0.0
        if dens <= 0.0:
            raise AssumptionAError(f"density of {g.name}(Y) vanishes near its {p}-quantile")
        x_new = x - resid / dens
        if not a - 1e-6 <= x_new <= b + 1e-6:
            break
        if x_new == x:
            break
        x = x_new
    if abs(cdf_gY(g, x) - p) > max(tol, 1e-10):
        raise AssumptionAError(f"quantile refinement failed for {g.name} at p={p}")
    return x


def _branch(lower, upper, increasing, forward, inverse, derivative) -> Branch:
    return Branch(float(lower), float(upper), increasing, forward, inverse, derivative)


def identity() -> PiecewiseFunctional:
    return PiecewiseFunctional(
        "identity",
        (_branch(-INF, INF, True, lambda t: t, lambda u: u, lambda t: 1.0),),
        lambda t: t,
    )


def absolute() -> PiecewiseFunctional:
    return PiecewiseFunctional(
        "abs",
        (
            _branch(-INF, 0.0, False, lambda t: -t, lambda u: -u, lambda t: -1.0),
            _branch(0.0, INF, True, lambda t: t, lambda u: u, lambda t: 1.0),
        ),
        np.abs,
    )


def square() -> PiecewiseFunctional:
    return PiecewiseFunctional(
        "square",
        (
            _branch(-INF, 0.0, False, lambda t: t * t, lambda u: -math.sqrt(u), lambda t: 2.0 * t),
            _branch(0.0, INF, True, lambda t: t * t, lambda u: math.sqrt(u), lambda t: 2.0 * t),
        ),
        np.square,
    )


CUBE_SHIFT = 1.0


def _cbrt(u: float) -> float:
    return math.copysign(abs(u) ** (1.0 / 3.0), u)


def shifted_cube() -> PiecewiseFunctional:
    """``g(t) = (t - 1)^3``, split at the critical point t = 1 where g' = 0."""
    s = CUBE_SHIFT
    fwd = lambda t: (t - s) ** 3  # noqa: E731
    inv = lambda u: s + _cbrt(u)  # noqa: E731
    der = lambda t: 3.0 * (t - s) ** 2  # noqa: E731
    return PiecewiseFunctional(
        "cube",
        (_branch(-INF, s, True, fwd, inv, der), _branch(s, INF, True, fwd, inv, der)),
        lambda t: (t - s) ** 3,
    )


BUNDLED: dict[str, Callable[[], PiecewiseFunctional]] = {
    "identity": identity,
    "abs": absolute,
    "square": square,
    "cube": shifted_cube,
}


_INSTANCES: dict[str, PiecewiseFunctional] = {}


def get_functional(name: str) -> PiecewiseFunctional:
    """Bundled functional by CLI name (instances are shared)."""
    try:
        if name not in _INSTANCES:
            _INSTANCES[name] = BUNDLED[name]()
        return _INSTANCES[name]
    except KeyError:
        raise ValueError(
            f"unknown functional {name!r}; choose one of {', '.join(BUNDLED)}"
        ) from None
