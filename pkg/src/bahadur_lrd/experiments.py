"""Monte-Carlo studies of the Bahadur remainder and of the quantile CLT.

Every replicate ``(n, m)`` draws its own path from a seed derived from
``(base_seed, n, m)`` alone (see :func:`replicate_seed`), so results do not
depend on worker count, scheduling, or which other replicates are run.
Statistics are computed from the full stored per-replicate vectors.
"""
from __future__ import annotations

import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .asymptotics import (
    DEFAULT_LAG_CAP,
    Regime,
    RateSpec,
    classify_regime,
    k_const,
    rate_rn,
    sigma2_p,
    var_empirical_cdf,
)
from .errors import BahadurError, RegimeError
from .functionals import get_functional, pdf_gY, true_quantile
from .gaussproc import CorrelationModel, sample_path
from .hermite import DEFAULT_ORDER, coefficients_of_indicator, min_rank_neighborhood
from .quantiles import remainder_from_sample

CSV_COLUMNS = (
    "run_id",
    "n",
    "replicate",
    "xi_hat",
    "F_hat_at_xi",
    "linear_term",
    "remainder",
    "normalized_remainder",
)
QUANTILE_LEVELS = (0.05, 0.5, 0.9, 0.95)


def replicate_seed(base_seed: int, n: int, m: int) -> int:
    """64-bit seed of replicate ``m`` at sample size ``n``.

    ``numpy.random.SeedSequence(base_seed, spawn_key=(n, m))`` hashes the
    triple into an independent stream; its first 64-bit word seeds PCG64.
    """
    ss = np.random.SeedSequence(int(base_seed), spawn_key=(int(n), int(m)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class StudyConfig:
    model: CorrelationModel
    functional: str = "identity"
    p: float = 0.5
    n_grid: tuple[int, ...] = (256, 1024, 4096, 16384)
    replicates: int = 500
    base_seed: int = 20240601
    J: int = DEFAULT_ORDER
    output: str | None = None

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_grid)
        object.__setattr__(self, "n_grid", grid)
        if isinstance(self.model, str):
            object.__setattr__(self, "model", CorrelationModel.parse(self.model))
        get_functional(self.functional)
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie in (0, 1)")
        if not grid:
            raise ValueError("n_grid must not be empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("n_grid must be strictly increasing")
        if grid[0] < 16:
            raise ValueError("every n in n_grid must be at least 16")
        if self.replicates < 2:
            raise ValueError("replicates must be at least 2")
        if self.J < 1:
            raise ValueError("J must be at least 1")
        if not 0 <= self.base_seed < 2**64:
            raise ValueError("base_seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["model"] = str(self.model)
        d["n_grid"] = list(self.n_grid)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> StudyConfig:
        """Accept a flat config or a summary JSON carrying a ``config`` block."""
        if "config" in d and isinstance(d["config"], dict):
            d = d["config"]
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**d)

    @property
    def run_id(self) -> str:
        d = self.to_dict()
        d.pop("output")
        blob = json.dumps(d, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


@dataclass
class _Theory:
    xi: float
    density: float
    tau_bar: int
    spec: RateSpec


def _theory(config: StudyConfig) -> _Theory:
    g = get_functional(config.functional)
    xi = true_quantile(g, config.p)
    density = pdf_gY(g, xi)
    tau_bar = min_rank_neighborhood(g, config.p, J=config.J)
    rank_at_xi = coefficients_of_indicator(g, xi, config.J).rank
    if rank_at_xi != tau_bar:
        raise BahadurError(
            f"rank at the quantile ({rank_at_xi}) differs from the neighbourhood rank ({tau_bar})"
        )
    return _Theory(xi, density, tau_bar, classify_regime(config.model.alpha, tau_bar))


def _simulate(config: StudyConfig, ns, theory: _Theory, threads: int) -> dict[int, np.ndarray]:
    """Per-n array of shape (M, 4): xi_hat, F_hat_at_xi, linear_term, remainder."""
    g = get_functional(config.functional)
    M = config.replicates
    out = {n: np.empty((M, 4)) for n in ns}

    def task(n: int, m: int) -> None:
        path = sample_path(config.model, n, replicate_seed(config.base_seed, n, m))
        obs = remainder_from_sample(g(path.values), config.p, theory.xi, theory.density)
        out[n][m] = (obs.xi_hat, obs.F_hat_at_xi, obs.linear_term, obs.remainder)

    jobs = [(n, m) for n in ns for m in range(M)]
    if threads <= 1:
        for n, m in jobs:
            task(n, m)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for fut in [pool.submit(task, n, m) for n, m in jobs]:
                fut.result()
    return out


def _describe(x: np.ndarray) -> dict:
    q = np.quantile(x, QUANTILE_LEVELS)
    d = {"mean": float(np.mean(x)), "sd": float(np.std(x, ddof=1))}
    d.update({f"q{round(100 * lvl):02d}": float(v) for lvl, v in zip(QUANTILE_LEVELS, q)})
    return d


def fit_loglog_slope(ns, values) -> tuple[float, float]:
    """OLS slope of ``log(values)`` on ``log(ns)`` and its standard error."""
    x = np.asarray(ns, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.shape != y.shape:
        raise ValueError("ns and values must have the same length")
    if x.size < 3:
        raise ValueError("at least 3 points are needed for a slope fit")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive ns and values")
    lx, ly = np.log(x), np.log(y)
    lx_c = lx - lx.mean()
    sxx = float(lx_c @ lx_c)
    slope = float(lx_c @ (ly - ly.mean())) / sxx
    resid = ly - ly.mean() - slope * lx_c
    stderr = math.sqrt(float(resid @ resid) / (x.size - 2) / sxx)
    return slope, stderr


@dataclass
class BahadurStudyResult:
    config: StudyConfig
    tau_bar: int
    regime: Regime
    xi: float
    density: float
    per_n: list[dict]
    slope: float | None
    slope_stderr: float | None
    constants: dict
    replicates: dict[int, np.ndarray] = field(repr=False)

    def summary(self) -> dict:
        return {
            "command": "bahadur-study",
            "run_id": self.config.run_id,
            "config": self.config.to_dict(),
            "tau_bar": self.tau_bar,
            "regime": self.regime.value,
            "alpha": _json_float(self.config.model.alpha),
            "xi": self.xi,
            "density": self.density,
            "rate_exponent": _rate_exponent(self.tau_bar, self.config.model.alpha, self.regime),
            "sd_slope": {"slope": self.slope, "stderr": self.slope_stderr},
            "constants": self.constants,
            "per_n": self.per_n,
        }

    def normalized(self, n: int) -> np.ndarray:
        spec = classify_regime(self.config.model.alpha, self.tau_bar)
        return np.abs(self.replicates[n][:, 3]) / rate_rn(spec, n)

    def write_csv(self, fh) -> None:
        run_id = self.config.run_id
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for n in self.config.n_grid:
            rows = self.replicates[n].tolist()
            norm = self.normalized(n).tolist()
            for m in range(len(rows)):
                xi_hat, F_hat, lin, rem = rows[m]
                fh.write(f"{run_id},{n},{m},{xi_hat!r},{F_hat!r},{lin!r},{rem!r},{norm[m]!r}\n")

    def csv_text(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def _json_float(x: float):
    return None if math.isinf(x) else x


def _rate_exponent(tau_bar: int, alpha: float, regime: Regime) -> float:
    return -0.5 if regime is not Regime.LRD else -alpha * tau_bar / 2.0


def _constants(config: StudyConfig, theory: _Theory) -> dict:
    g = get_functional(config.functional)
    out: dict = {}
    if theory.spec.regime is Regime.SRD:
        try:
            value, tail = sigma2_p(
                g, config.p, config.model, J=config.J, lag_cap=DEFAULT_LAG_CAP, tau_bar=theory.tau_bar
            )
            out["sigma2_p"] = {"value": value, "tail_bound": tail}
        except BahadurError as exc:
            out["sigma2_p"] = {"error": str(exc)}
    elif theory.spec.regime is Regime.LRD:
        out["k_const"] = k_const(theory.tau_bar, config.model.alpha)
        coeffs = coefficients_of_indicator(g, theory.xi, config.J)
        out["limit_scale"] = coeffs.coeffs[theory.tau_bar] / (
            math.factorial(theory.tau_bar) * theory.density
        )
    return out


def run_bahadur_study(config: StudyConfig, threads: int = 1) -> BahadurStudyResult:
    """Remainder ``R_n = xi_hat - xi - (p - F_hat(xi)) / f`` over the n-grid."""
    theory = _theory(config)
    g = get_functional(config.functional)
    reps = _simulate(config, config.n_grid, theory, threads)
    coeffs = coefficients_of_indicator(g, theory.xi, config.J)
    per_n = []
    for n in config.n_grid:
        rows = reps[n]
        r_n = rate_rn(theory.spec, n)
        per_n.append(
            {
                "n": n,
                "rate": r_n,
                "remainder": _describe(rows[:, 3]),
                "normalized_remainder": _describe(np.abs(rows[:, 3]) / r_n),
                "linear_term_var": float(np.var(rows[:, 2], ddof=1)),
                "linear_term_var_theory": var_empirical_cdf(config.model, coeffs, n)
                / theory.density**2,
                "xi_error_var": float(np.var(rows[:, 0] - theory.xi, ddof=1)),
            }
        )
    slope = stderr = None
    sds = [row["remainder"]["sd"] for row in per_n]
    if len(per_n) >= 3 and all(s > 0 for s in sds):
        slope, stderr = fit_loglog_slope(config.n_grid, sds)
    return BahadurStudyResult(
        config=config,
        tau_bar=theory.tau_bar,
        regime=theory.spec.regime,
        xi=theory.xi,
        density=theory.density,
        per_n=per_n,
        slope=slope,
        slope_stderr=stderr,
        constants=_constants(config, theory),
        replicates=reps,
    )


def ks_distance(z, cdf=stats.norm.cdf) -> float:
    """Kolmogorov-Smirnov distance of the sample ``z`` to ``cdf``."""
    return float(stats.kstest(np.asarray(z, dtype=float), cdf).statistic)


def run_clt_check(config: StudyConfig, threads: int = 1) -> dict:
    """Compare quantile errors with their Gaussian limit.

    SRD: standardized errors ``sqrt(n)(xi_hat - xi)/sigma_p`` at the largest n,
    their KS distance to N(0, 1) and the empirical/theoretical variance ratio.
    LRD with rank 1: log-log exponent of ``Var(xi_hat - xi)`` over the grid
    against ``-alpha``, and the KS distance at the largest n to a Gaussian with
    fitted mean and variance.
    """
    theory = _theory(config)
    spec = theory.spec
    g = get_functional(config.functional)
    if spec.regime is Regime.BOUNDARY:
        raise RegimeError("no limit law is available at alpha * tau_bar = 1")
    if spec.regime is Regime.LRD and theory.tau_bar >= 2:
        raise RegimeError("the non-Gaussian Hermite-process limit (tau_bar >= 2) is not sampled")
    report: dict = {
        "command": "clt-check",
        "run_id": config.run_id,
        "config": config.to_dict(),
        "tau_bar": theory.tau_bar,
        "regime": spec.regime.value,
        "alpha": _json_float(config.model.alpha),
        "xi": theory.xi,
        "density": theory.density,
    }
    n_max = config.n_grid[-1]
    if spec.regime is Regime.SRD:
        s2, tail = sigma2_p(g, config.p, config.model, J=config.J, tau_bar=theory.tau_bar)
        reps = _simulate(config, [n_max], theory, threads)
        scaled = math.sqrt(n_max) * (reps[n_max][:, 0] - theory.xi)
        report.update(
            {
                "n": n_max,
                "sigma2_p": s2,
                "sigma2_p_tail_bound": tail,
                "ks_distance": ks_distance(scaled / math.sqrt(s2)),
                "variance_ratio": float(np.var(scaled, ddof=1)) / s2,
            }
        )
        return report

    reps = _simulate(config, config.n_grid, theory, threads)
    coeffs = coefficients_of_indicator(g, theory.xi, config.J)
    variances = [float(np.var(reps[n][:, 0] - theory.xi, ddof=1)) for n in config.n_grid]
    theory_var = [
        var_empirical_cdf(config.model, coeffs, n) / theory.density**2 for n in config.n_grid
    ]
    exponent, stderr = fit_loglog_slope(config.n_grid, variances)
    err = reps[n_max][:, 0] - theory.xi
    z = (err - err.mean()) / err.std(ddof=1)
    report.update(
        {
            "n_grid": list(config.n_grid),
            "variance": variances,
            "linear_term_variance_theory": theory_var,
            "variance_exponent": exponent,
            "variance_exponent_stderr": stderr,
            "expected_exponent": -spec.exponent,
            "k_const": k_const(theory.tau_bar, config.model.alpha),
            "ks_distance": ks_distance(z),
        }
    )
    return report


def dump_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
