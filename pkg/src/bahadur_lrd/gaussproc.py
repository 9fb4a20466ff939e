"""Stationary standard Gaussian sequences with prescribed correlation.

Paths are drawn exactly by circulant embedding: the Toeplitz covariance of
``(Y(1), ..., Y(n))`` is extended to a circulant matrix of size ``m >= 2(n-1)``
whose eigenvalues are the FFT of its first row. Complex white noise scaled by
the square roots of these eigenvalues is transformed back, and the real part
of the first ``n`` coordinates has exactly the target covariance.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import EmbeddingError

EIG_TOL = 1e-8
MAX_EMBEDDING_FACTOR = 2**10

_KINDS = ("powerlaw", "fgn", "iid", "ar")


@dataclass(frozen=True)
class CorrelationModel:
    """Correlation function rho of a stationary unit-variance Gaussian sequence.

    ``kind`` is one of ``powerlaw`` (``rho(i) = (1 + |i|)^-alpha``), ``fgn``
    (increments of fractional Brownian motion with Hurst index ``H``), ``iid``
    and ``ar`` (``rho(i) = phi^|i|``).
    """

    kind: str
    param: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown correlation model {self.kind!r}")
        if self.kind == "powerlaw" and not (self.param is not None and self.param > 0):
            raise ValueError("alpha must be positive")
        if self.kind == "fgn" and not (self.param is not None and 0 < self.param < 1):
            raise ValueError("H must lie in (0, 1)")
        if self.kind == "ar" and not (self.param is not None and -1 < self.param < 1):
            raise ValueError("phi must lie in (-1, 1)")
        if self.kind == "iid" and self.param is not None:
            raise ValueError("iid takes no parameter")

    @classmethod
    def powerlaw(cls, alpha: float) -> CorrelationModel:
        return cls("powerlaw", float(alpha))

    @classmethod
    def fgn(cls, hurst: float) -> CorrelationModel:
        return cls("fgn", float(hurst))

    @classmethod
    def iid(cls) -> CorrelationModel:
        return cls("iid")

    @classmethod
    def ar(cls, phi: float) -> CorrelationModel:
        return cls("ar", float(phi))

    @classmethod
    def parse(cls, text: str) -> CorrelationModel:
        """Parse ``powerlaw:alpha=0.3``, ``fgn:H=0.85``, ``iid`` or ``ar:phi=0.5``."""
        m = re.fullmatch(r"\s*(\w+)\s*(?::\s*(\w+)\s*=\s*([^\s]+))?\s*", text)
        if not m:
            raise ValueError(f"malformed correlation model {text!r}")
        kind, key, value = m.group(1).lower(), m.group(2), m.group(3)
        expected = {"powerlaw": "alpha", "fgn": "H", "ar": "phi", "iid": None}
        if kind not in expected:
            raise ValueError(f"unknown correlation model {kind!r}")
        if expected[kind] != key:
            want = f"{kind}:{expected[kind]}=<value>" if expected[kind] else kind
            raise ValueError(f"malformed correlation model {text!r}, expected {want}")
        if key is None:
            return cls(kind)
        try:
            val = float(value)
        except ValueError:
            raise ValueError(f"malformed number in correlation model {text!r}") from None
        return cls(kind, val)

    def __str__(self) -> str:
        key = {"powerlaw": "alpha", "fgn": "H", "ar": "phi"}.get(self.kind)
        return self.kind if key is None else f"{self.kind}:{key}={self.param!r}"

    @property
    def alpha(self) -> float:
        """Decay exponent: ``|rho(i)| ~ C i^-alpha``; ``inf`` for summable-geometric models."""
        if self.kind == "powerlaw":
            return self.param
        if self.kind == "fgn" and self.param != 0.5:
            return 2.0 - 2.0 * self.param
        return math.inf

    def rho(self, lags) -> np.ndarray:
        """Vectorised correlation at integer lags."""
        k = np.abs(np.asarray(lags, dtype=float))
        if self.kind == "powerlaw":
            return (1.0 + k) ** (-self.param)
        if self.kind == "fgn":
            h2 = 2.0 * self.param
            return 0.5 * (np.abs(k + 1.0) ** h2 - 2.0 * k**h2 + np.abs(k - 1.0) ** h2)
        if self.kind == "ar":
            return self.param**k
        return np.where(k == 0, 1.0, 0.0)

    def tail_sum_bound(self, L: int, power: int) -> float:
        """Upper bound on ``sum_{i > L} |rho(i)|^power``; ``inf`` if not summable."""
        if self.kind == "iid":
            return 0.0
        if self.kind == "ar":
            r = abs(self.param) ** power
            return 0.0 if r == 0.0 else r ** (L + 1) / (1.0 - r)
        if self.kind == "powerlaw":
            e = self.param * power
            return math.inf if e <= 1 else (1.0 + L) ** (1.0 - e) / (e - 1.0)
        # fgn: |rho(i)| <= |H(2H-1)| (i-1)^(2H-2) by the mean value theorem for
        # second differences
        H = self.param
        if H == 0.5:
            return 0.0
        e = (2.0 - 2.0 * H) * power
        if e <= 1 or L < 2:
            return math.inf
        return abs(H * (2.0 * H - 1.0)) ** power * (L - 1.0) ** (1.0 - e) / (e - 1.0)


def rho_eval(model: CorrelationModel, lag: int) -> float:
    return float(model.rho(lag))


@dataclass(frozen=True)
class EmbeddingSpectrum:
    eigenvalues: np.ndarray
    size: int
    clipped: int
    min_eigenvalue: float


@lru_cache(maxsize=64)
def _embedding(model: CorrelationModel, n: int) -> EmbeddingSpectrum:
    m = 1 << max(1, (2 * (n - 1) - 1).bit_length())
    limit = MAX_EMBEDDING_FACTOR * n
    while True:
        half = m // 2
        r = model.rho(np.arange(half + 1))
        row = np.concatenate([r, r[-2:0:-1]])
        lam = np.fft.rfft(row).real
        lam_min, lam_max = float(lam.min()), float(lam.max())
        if lam_min >= -EIG_TOL * lam_max:
            break
        if 2 * m > limit:
            raise EmbeddingError(
                f"circulant embedding of {model} is not nonnegative definite "
                f"(min eigenvalue {lam_min:.3g}) up to size {m}"
            )
        m *= 2
    clipped = int(np.count_nonzero(lam < 0))
    lam = np.clip(lam, 0.0, None)
    full = np.concatenate([lam, lam[-2:0:-1]])
    full.setflags(write=False)
    return EmbeddingSpectrum(full, m, clipped, lam_min)


def embedding_spectrum(model: CorrelationModel, n: int) -> np.ndarray:
    """Eigenvalues of the smallest nonnegative-definite circulant embedding.

    The embedding size starts at the first power of two ``>= 2(n-1)`` and is
    doubled until the smallest eigenvalue is above ``-1e-8`` times the largest,
    up to ``2^10 n``. Negative eigenvalues within that tolerance are clipped
    to 0 and counted in :class:`GaussianPath` diagnostics.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    return _embedding(model, n).eigenvalues


@dataclass(frozen=True)
class GaussianPath:
    values: np.ndarray
    model: CorrelationModel
    seed: int
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def sample_path(model: CorrelationModel, n: int, seed: int) -> GaussianPath:
    """Draw one path of length ``n``; bit-for-bit reproducible from ``(model, n, seed)``."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    if n == 1 or model.kind == "iid":
        x = rng.standard_normal(n)
        return GaussianPath(x, model, int(seed), {"embedding_size": n, "clipped": 0})
    emb = _embedding(model, n)
    m = emb.size
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    x = np.fft.fft(np.sqrt(emb.eigenvalues / m) * z)[:n].real.copy()
    x.setflags(write=False)
    return GaussianPath(
        x, model, int(seed), {"embedding_size": m, "clipped": emb.clipped}
    )


def empirical_acf(x, max_lag: int) -> np.ndarray:
    """Biased, uncentred autocovariance ``(1/n) sum_i x_i x_{i+k}`` for ``k <= max_lag``."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if not 0 <= max_lag < n:
        raise ValueError("max_lag must satisfy 0 <= max_lag < len(x)")
    return kernels.lagged_products(x, max_lag) / n


def partial_sum(model: CorrelationModel, tau: int, n: int) -> float:
    """``(1/n) sum_{|i| < n} rho(i)^tau``."""
    if n < 1:
        raise ValueError("n must be positive")
    if tau < 1:
        raise ValueError("tau must be at least 1")
    r = model.rho(np.arange(1, n)) ** tau
    return (1.0 + 2.0 * math.fsum(r)) / n


def write_path_csv(path: GaussianPath, fh) -> None:
    """Single-column CSV with a ``#`` header line naming model, n and seed."""
    fh.write(f"# model={path.model} n={path.n} seed={path.seed}\n")
    fh.write("y\n")
    for v in path.values.tolist():
        fh.write(f"{v!r}\n")
