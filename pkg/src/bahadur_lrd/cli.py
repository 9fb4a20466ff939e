"""Command-line front end.

Every command prints JSON on standard output carrying a ``config`` block with
the fully resolved parameters; that JSON can be passed back through
``--config`` to reproduce the run. Explicit flags override ``--config``.

Exit codes: 0 success, 1 computation error, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Any, Callable

import numpy as np

from . import asymptotics, experiments, hermite
from .errors import BahadurError
from .functionals import BUNDLED, get_functional, true_quantile
from .gaussproc import CorrelationModel, sample_path, write_path_csv

THREADS_ENV = "BAHADUR_LRD_THREADS"


class UsageError(Exception):
    pass


def _probability(text: str) -> float:
    p = float(text)
    if not 0.0 < p < 1.0:
        raise argparse.ArgumentTypeError("probability must lie in (0, 1)")
    return p


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


# name -> (flag type, default); None default means required unless in --config
PARAMS: dict[str, dict[str, tuple[Callable, Any]]] = {
    "simulate": {"corr": (str, None), "n": (int, None), "seed": (int, 0)},
    "coeffs": {
        "functional": (str, "identity"),
        "p": (_probability, None),
        "u": (float, None),
        "J": (int, hermite.DEFAULT_ORDER),
        "zero_tol": (float, hermite.DEFAULT_ZERO_TOL),
    },
    "rank": {
        "functional": (str, "identity"),
        "p": (_probability, None),
        "half_width": (float, None),
        "grid_points": (int, 21),
        "J": (int, hermite.DEFAULT_ORDER),
        "zero_tol": (float, hermite.DEFAULT_ZERO_TOL),
    },
    "rate": {"alpha": (float, None), "tau": (int, None), "n": (int, None)},
    "variance": {
        "functional": (str, "identity"),
        "p": (_probability, None),
        "corr": (str, None),
        "J": (int, hermite.DEFAULT_ORDER),
        "lag_cap": (int, asymptotics.DEFAULT_LAG_CAP),
    },
    "kconst": {"tau": (int, None), "alpha": (float, None)},
}
_STUDY_PARAMS = {
    "corr": (str, None),
    "functional": (str, "identity"),
    "p": (_probability, 0.5),
    "n_grid": (_int_list, [256, 1024, 4096, 16384]),
    "replicates": (int, 500),
    "seed": (int, 20240601),
    "J": (int, hermite.DEFAULT_ORDER),
}
PARAMS["bahadur-study"] = dict(_STUDY_PARAMS)
PARAMS["clt-check"] = dict(_STUDY_PARAMS)

HELP = {
    "simulate": "draw one Gaussian path and write it as CSV",
    "coeffs": "Hermite coefficients of the indicator functional h_u",
    "rank": "minimal Hermite rank near the p-quantile",
    "rate": "rate r_n and dependence regime",
    "variance": "asymptotic variance sigma^2_p of the sample quantile (SRD only)",
    "kconst": "normalizing constant K(tau, alpha) of the LRD limit",
    "bahadur-study": "Monte-Carlo study of the Bahadur remainder",
    "clt-check": "Monte-Carlo check of the quantile limit law",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bahadur-lrd",
        description="Sample quantiles of functionals of long-memory Gaussian sequences.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, params in PARAMS.items():
        sp = sub.add_parser(name, help=HELP[name])
        for key, (typ, _default) in params.items():
            flag = "--" + key.replace("_", "-")
            aliases = [flag]
            if key == "J":
                aliases = ["--J", "-J"]
            elif key == "n_grid":
                aliases = ["--n-grid"]
            sp.add_argument(*aliases, dest=key, type=typ, default=None)
        sp.add_argument("--config", help="JSON config (a previous output is accepted)")
        sp.add_argument("--out", help="write the main result to this file instead of stdout")
        sp.add_argument("--pretty", action="store_true", help="human-readable output")
        if name in ("bahadur-study", "clt-check"):
            sp.add_argument("--threads", type=int, default=None)
            sp.add_argument("--csv", action="store_true", help="print the per-replicate CSV")
        if name == "coeffs":
            sp.add_argument("--csv", action="store_true", help="print j,c_j as CSV")
    return parser


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    return data.get("config", data) if isinstance(data.get("config"), dict) else data


_STUDY_KEYS = {"model": "corr", "base_seed": "seed"}


def resolve(command: str, args: argparse.Namespace) -> dict:
    params = PARAMS[command]
    file_cfg = _load_config(args.config)
    if command in ("bahadur-study", "clt-check"):
        file_cfg = {_STUDY_KEYS.get(k, k): v for k, v in file_cfg.items() if k != "output"}
    unknown = set(file_cfg) - set(params)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    resolved = {}
    for key, (typ, default) in params.items():
        value = getattr(args, key)
        if value is None:
            value = file_cfg.get(key, default)
        resolved[key] = value
    return resolved


def _require(cfg: dict, *keys: str) -> None:
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _model(text: str) -> CorrelationModel:
    try:
        return CorrelationModel.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _functional(name: str):
    if name not in BUNDLED:
        raise UsageError(f"unknown functional {name!r}; choose one of {', '.join(BUNDLED)}")
    return get_functional(name)


def _positive(cfg: dict, key: str, *, integer: bool = False, minimum: float = 0.0) -> None:
    v = cfg[key]
    if not (isinstance(v, (int, float)) and v > minimum) or (integer and int(v) != v):
        raise UsageError(f"{key} must be positive" if minimum == 0 else f"{key} must exceed {minimum:g}")


def _finite(x: float):
    return None if isinstance(x, float) and math.isinf(x) else x


def cmd_rate(cfg: dict) -> dict:
    _require(cfg, "alpha", "tau", "n")
    _positive(cfg, "alpha")
    _positive(cfg, "tau", integer=True)
    if cfg["n"] < 2:
        raise UsageError("n must be at least 2")
    spec = asymptotics.classify_regime(cfg["alpha"], cfg["tau"])
    return {"regime": spec.regime.value, "value": asymptotics.rate_rn(spec, cfg["n"])}


def cmd_kconst(cfg: dict) -> dict:
    _require(cfg, "tau", "alpha")
    _positive(cfg, "alpha")
    _positive(cfg, "tau", integer=True)
    spec = asymptotics.classify_regime(cfg["alpha"], cfg["tau"])
    return {"regime": spec.regime.value, "value": asymptotics.k_const(cfg["tau"], cfg["alpha"])}


def cmd_variance(cfg: dict) -> dict:
    _require(cfg, "p", "corr")
    g = _functional(cfg["functional"])
    model = _model(cfg["corr"])
    tau_bar = hermite.min_rank_neighborhood(g, cfg["p"], J=cfg["J"])
    spec = asymptotics.classify_regime(model.alpha, tau_bar)
    value, tail = asymptotics.sigma2_p(
        g, cfg["p"], model, J=cfg["J"], lag_cap=cfg["lag_cap"], tau_bar=tau_bar
    )
    return {"regime": spec.regime.value, "tau_bar": tau_bar, "value": value, "tail_bound": tail}


def cmd_coeffs(cfg: dict) -> dict:
    g = _functional(cfg["functional"])
    if (cfg["p"] is None) == (cfg["u"] is None):
        raise UsageError("give exactly one of --p and --u")
    _positive(cfg, "J", integer=True)
    _positive(cfg, "zero_tol")
    u = cfg["u"] if cfg["u"] is not None else true_quantile(g, cfg["p"])
    c = hermite.coefficients_of_indicator(g, u, cfg["J"], cfg["zero_tol"])
    return {
        "u": u,
        "coeffs": [float(v) for v in c.coeffs],
        "rank": c.rank,
        "variance": c.variance,
        "tail_mass": c.tail_mass,
    }


def cmd_rank(cfg: dict) -> dict:
    _require(cfg, "p")
    g = _functional(cfg["functional"])
    if cfg["half_width"] is not None:
        _positive(cfg, "half_width")
    if cfg["grid_points"] < 3:
        raise UsageError("grid_points must be at least 3")
    hw = cfg["half_width"] if cfg["half_width"] is not None else hermite.default_half_width(g, cfg["p"])
    tau_bar = hermite.min_rank_neighborhood(
        g, cfg["p"], hw, cfg["grid_points"], cfg["J"], cfg["zero_tol"]
    )
    xi = true_quantile(g, cfg["p"])
    rank_xi = hermite.coefficients_of_indicator(g, xi, cfg["J"], cfg["zero_tol"]).rank
    return {"tau_bar": tau_bar, "rank_at_xi": rank_xi, "xi": xi, "half_width_used": hw}


def _study_config(cfg: dict, out: str | None) -> experiments.StudyConfig:
    _require(cfg, "corr")
    _functional(cfg["functional"])
    model = _model(cfg["corr"])
    try:
        return experiments.StudyConfig(
            model=model,
            functional=cfg["functional"],
            p=cfg["p"],
            n_grid=tuple(cfg["n_grid"]),
            replicates=cfg["replicates"],
            base_seed=cfg["seed"],
            J=cfg["J"],
            output=out,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _threads(args) -> int:
    if args.threads is not None:
        t = args.threads
    else:
        try:
            t = int(os.environ.get(THREADS_ENV, "1"))
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer") from None
    if t < 1:
        raise UsageError("threads must be at least 1")
    return t


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _pretty(obj, prefix: str = "") -> str:
    lines = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            v = obj[k]
            if isinstance(v, (dict, list)) and v and any(isinstance(x, (dict, list)) for x in (v.values() if isinstance(v, dict) else v)):
                lines.append(f"{prefix}{k}:")
                lines.append(_pretty(v, prefix + "  "))
            else:
                lines.append(f"{prefix}{k}: {json.dumps(v)}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            lines.append(f"{prefix}[{i}]")
            lines.append(_pretty(v, prefix + "  "))
    else:
        lines.append(f"{prefix}{json.dumps(obj)}")
    return "\n".join(lines)


def _render(payload: dict, args) -> str:
    if args.pretty:
        return _pretty(payload) + "\n"
    return experiments.dump_json(payload)


SIMPLE = {
    "rate": cmd_rate,
    "kconst": cmd_kconst,
    "variance": cmd_variance,
    "coeffs": cmd_coeffs,
    "rank": cmd_rank,
}


def run(args: argparse.Namespace) -> None:
    command = args.command
    cfg = resolve(command, args)
    if command in SIMPLE:
        result = SIMPLE[command](cfg)
        if command == "coeffs" and args.csv:
            text = "j,c_j\n" + "".join(f"{j},{c!r}\n" for j, c in enumerate(result["coeffs"]))
            _emit(text, args.out)
            return
        payload = {"command": command, "config": cfg, **result}
        _emit(_render(payload, args), args.out)
        return
    if command == "simulate":
        _require(cfg, "corr", "n")
        model = _model(cfg["corr"])
        if cfg["n"] < 1:
            raise UsageError("n must be positive")
        if not 0 <= cfg["seed"] < 2**64:
            raise UsageError("seed must be a 64-bit unsigned integer")
        path = sample_path(model, cfg["n"], cfg["seed"])
        if args.out is None:
            write_path_csv(path, sys.stdout)
        else:
            with open(args.out, "w", newline="") as fh:
                write_path_csv(path, fh)
        return
    threads = _threads(args)
    if command == "bahadur-study":
        config = _study_config(cfg, args.out)
        result = experiments.run_bahadur_study(config, threads=threads)
        if args.out is not None:
            with open(args.out, "w", newline="") as fh:
                result.write_csv(fh)
        if args.csv:
            sys.stdout.write(result.csv_text())
        else:
            summary = result.summary()
            summary["config"] = _cli_config(summary["config"])
            sys.stdout.write(_render(summary, args))
        return
    config = _study_config(cfg, None)
    report = experiments.run_clt_check(config, threads=threads)
    report["config"] = _cli_config(report["config"])
    _emit(_render(report, args), args.out)


def _cli_config(d: dict) -> dict:
    d = dict(d)
    d.pop("output", None)
    return d


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        run(args)
    except (UsageError, ValueError) as exc:
        if isinstance(exc, BahadurError):
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except BahadurError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
