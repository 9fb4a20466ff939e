import math

import numpy as np
import pytest

from bahadur_lrd.errors import RegimeError
from bahadur_lrd.experiments import (
    CSV_COLUMNS,
    StudyConfig,
    fit_loglog_slope,
    replicate_seed,
    run_bahadur_study,
    run_clt_check,
)
from bahadur_lrd.functionals import get_functional
from bahadur_lrd.gaussproc import CorrelationModel, sample_path
from bahadur_lrd.quantiles import bahadur_remainder

SMALL = StudyConfig(CorrelationModel.ar(0.5), n_grid=(32, 64, 128), replicates=2, base_seed=7)


def test_config_validation():
    for kwargs in (
        {"n_grid": (64, 32)},
        {"n_grid": (8, 64)},
        {"replicates": 1},
        {"p": 1.0},
        {"base_seed": -1},
        {"functional": "exp"},
    ):
        with pytest.raises(ValueError):
            StudyConfig(CorrelationModel.iid(), **kwargs)


def test_config_round_trip_and_run_id():
    d = SMALL.to_dict()
    assert StudyConfig.from_dict(d) == SMALL
    assert StudyConfig.from_dict({"config": d}) == SMALL
    assert len(SMALL.run_id) == 12
    assert StudyConfig.from_dict({**d, "output": "x.csv"}).run_id == SMALL.run_id
    assert StudyConfig.from_dict({**d, "base_seed": 8}).run_id != SMALL.run_id
    with pytest.raises(ValueError):
        StudyConfig.from_dict({**d, "bogus": 1})


def test_replicate_seed_properties():
    assert replicate_seed(1, 64, 0) == replicate_seed(1, 64, 0)
    seeds = {replicate_seed(1, n, m) for n in (64, 128) for m in range(200)}
    assert len(seeds) == 400
    assert all(0 <= s < 2**64 for s in seeds)


def test_bookkeeping_with_two_replicates():
    res = run_bahadur_study(SMALL)
    g = get_functional("identity")
    lines = res.csv_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 1 + 3 * 2
    for line in lines[1:]:
        run_id, n, m, xi_hat, F_hat, lin, rem, norm = line.split(",")
        n, m = int(n), int(m)
        path = sample_path(SMALL.model, n, replicate_seed(7, n, m))
        obs = bahadur_remainder(path, g, 0.5)
        assert run_id == SMALL.run_id
        assert float(xi_hat) == obs.xi_hat
        assert float(rem) == pytest.approx(obs.remainder, abs=1e-15)
        assert float(norm) == pytest.approx(abs(obs.remainder) * math.sqrt(n), rel=1e-12)
    s = res.summary()
    assert s["tau_bar"] == 1 and s["regime"] == "SRD" and s["alpha"] is None
    assert [row["n"] for row in s["per_n"]] == [32, 64, 128]


def test_thread_count_does_not_change_output():
    cfg = StudyConfig(CorrelationModel.powerlaw(0.3), n_grid=(64, 128, 256), replicates=20)
    one = run_bahadur_study(cfg, threads=1).csv_text()
    assert run_bahadur_study(cfg, threads=4).csv_text() == one
    assert run_bahadur_study(cfg, threads=3).csv_text() == one


def test_replicate_streams_do_not_depend_on_grid():
    a = run_bahadur_study(StudyConfig(CorrelationModel.iid(), n_grid=(64, 128, 256), replicates=4))
    b = run_bahadur_study(StudyConfig(CorrelationModel.iid(), n_grid=(32, 128, 512), replicates=6))
    np.testing.assert_array_equal(a.replicates[128], b.replicates[128][:4])


def test_slope_examples():
    ns = [10, 100, 1000]
    slope, se = fit_loglog_slope(ns, [1.0, 0.1, 0.01])
    assert slope == pytest.approx(-1.0, abs=1e-12)
    assert se == pytest.approx(0.0, abs=1e-12)
    slope, se = fit_loglog_slope([1, 2, 4, 8], [1.0, 2.0, 4.2, 7.9])
    assert 0.9 < slope < 1.1 and se > 0
    with pytest.raises(ValueError):
        fit_loglog_slope([1, 2], [1.0, 2.0])
    with pytest.raises(ValueError):
        fit_loglog_slope([1, 2, 3], [1.0, 0.0, 2.0])


def test_linear_term_variance_matches_theory():
    cfg = StudyConfig(CorrelationModel.ar(0.5), n_grid=(256, 512, 1024), replicates=400, base_seed=11)
    for row in run_bahadur_study(cfg, threads=4).per_n:
        emp, th = row["linear_term_var"], row["linear_term_var_theory"]
        # SE of a sample variance of roughly Gaussian data is var * sqrt(2 / (M - 1))
        assert abs(emp - th) < 4 * th * math.sqrt(2 / 399)


def test_lrd_constants_reported():
    cfg = StudyConfig(CorrelationModel.powerlaw(0.3), n_grid=(64, 128, 256), replicates=3)
    s = run_bahadur_study(cfg).summary()
    assert s["regime"] == "LRD"
    assert s["rate_exponent"] == pytest.approx(-0.15)
    assert s["constants"]["k_const"] > 0


def test_clt_refusals():
    with pytest.raises(RegimeError):
        run_clt_check(StudyConfig(CorrelationModel.powerlaw(1.0), n_grid=(64, 128, 256), replicates=3))
    with pytest.raises(RegimeError):
        run_clt_check(
            StudyConfig(CorrelationModel.powerlaw(0.3), functional="abs", n_grid=(64, 128, 256), replicates=3)
        )


def test_clt_srd_small():
    cfg = StudyConfig(CorrelationModel.iid(), n_grid=(64, 128, 1024), replicates=300, base_seed=5)
    rep = run_clt_check(cfg, threads=4)
    assert rep["n"] == 1024
    assert rep["sigma2_p"] == pytest.approx(math.pi / 2, rel=1e-10)
    assert rep["ks_distance"] < 0.12
    assert 0.75 < rep["variance_ratio"] < 1.25
