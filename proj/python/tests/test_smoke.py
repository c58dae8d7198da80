import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

import tndipw

SCRIPTS = Path(__file__).resolve().parent.parent / "scripts"
sys.path.insert(0, str(SCRIPTS))
import recompute_summary  # noqa: E402


def test_scenario_truth():
    s1 = tndipw.scenario(1)
    assert s1["true_or"] == pytest.approx(2.5)
    assert s1["exact_relative_or"] < 2.5
    assert s1["testing_prevalence"] == pytest.approx(0.002, rel=1e-9)
    s3 = tndipw.scenario(3)
    assert s3["non_collapsible"]
    assert 1.0 < s3["true_or"] < 2.5
    with pytest.raises(tndipw.ConfigError):
        tndipw.scenario(9)


def test_simulate_columns_and_determinism():
    pop = tndipw.simulate(scenario=1, n=50_000, seed=3)
    assert list(pop) == ["c", "x", "u", "y1", "y_other", "w", "h", "t"]
    assert all(col.dtype == np.uint8 and col.shape == (50_000,) for col in pop.values())
    assert not pop["h"].any()
    again = tndipw.simulate(scenario=1, n=50_000, seed=3, threads=2)
    assert all(np.array_equal(pop[k], again[k]) for k in pop)
    assert abs(pop["t"].mean() - 0.002) < 0.001


def test_fit_logistic_two_group_closed_form():
    # Group 0: 3 of 10 positive; group 1: 6 of 10 positive.
    x = np.column_stack([np.ones(20), np.repeat([0.0, 1.0], 10)])
    y = [1.0] * 3 + [0.0] * 7 + [1.0] * 6 + [0.0] * 4
    fit = tndipw.fit_logistic(x, y)
    assert fit["converged"]
    assert fit["coefficients"][0] == pytest.approx(math.log(3 / 7), abs=1e-10)
    assert fit["coefficients"][1] == pytest.approx(math.log((6 / 4) / (3 / 7)), abs=1e-10)
    woolf = 1 / 3 + 1 / 7 + 1 / 6 + 1 / 4
    assert fit["covariance"][1, 1] == pytest.approx(woolf, rel=1e-8)
    scaled = tndipw.fit_logistic(x, y, weights=[7.0] * 20)
    assert np.allclose(scaled["coefficients"], fit["coefficients"], atol=1e-10)
    with pytest.raises(tndipw.TndipwError):
        tndipw.fit_logistic(x, [0.0] * 10 + [1.0] * 10)  # separated


def test_estimate_single_method():
    e = tndipw.estimate("tested-only", scenario=1, seed=5)
    assert e["method"] == "tested-only"
    lo, hi = e["ci"]
    assert lo <= e["log_or"] <= hi
    assert e["interval_method"] == "wald"
    ipw = tndipw.estimate("ipw-correct", scenario=1, seed=5, bootstrap_b=0)
    assert ipw["ci"] is None
    assert ipw["labels"] == ["(Intercept)", "x", "c"]
    with pytest.raises(tndipw.ConfigError):
        tndipw.estimate("ipw-adjust-hcsb", scenario=1)


def test_run_experiment_small():
    r = tndipw.run_experiment(
        scenario=1, replicates=3, bootstrap_b=0, population=100_000, seed=11, methods=["proper-tnd", "tested-only"]
    )
    assert set(r["methods"]) == {"proper-tnd", "tested-only"}
    for stats in r["methods"].values():
        assert stats["n_ok"] + stats["failures"] == 3
        assert 0.0 <= stats["coverage_beta"] <= 100.0
    assert r["table"].splitlines()[4].startswith("Method")
    assert r["truth"]["true_or"] == pytest.approx(2.5)
    yaml_cfg = "scenario: {id: 1}\nexperiment: {replicates: 3, bootstrap_b: 0, population_size: 100000, " \
               "base_seed: 11, methods: [proper-tnd, tested-only]}\n"
    assert tndipw.run_experiment(config=yaml_cfg)["key_values"] == r["key_values"]
    with pytest.raises(tndipw.ConfigError):
        tndipw.run_experiment(config="experiment: {bogus: 1}")


@pytest.mark.skipif("TNDIPW_CLI" not in os.environ, reason="command-line tool not built")
def test_independent_aggregation_matches_summary(tmp_path):
    cli = os.environ["TNDIPW_CLI"]
    out = tmp_path / "run"
    subprocess.run(
        [cli, "experiment", "--scenario", "1", "--replicates", "8", "--bootstrap-b", "20", "--seed", "404",
         "--threads", "2", "--out-dir", str(out)],
        check=True, capture_output=True,
    )
    assert recompute_summary.compare(out) == []
    # A tampered summary is detected.
    kv = (out / "summary.kv").read_text().replace("method.ipw-correct.mc_se = ", "method.ipw-correct.mc_se = 9")
    (out / "summary.kv").write_text(kv)
    assert recompute_summary.compare(out)
