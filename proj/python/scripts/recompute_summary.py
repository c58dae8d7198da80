#!/usr/bin/env python3
"""Recompute per-method summary statistics from replicates.csv and compare
them with summary.kv written by `tndipw experiment`.

Only the truth values (true OR, true relative OR) and the configured method
list are taken from summary.kv; every statistic is recomputed here with the
standard library. Exits 1 on any mismatch.

usage: recompute_summary.py OUT_DIR
"""

import csv
import math
import statistics
import sys
from pathlib import Path

REL_TOL = 1e-12
ABS_TOL = 1e-12


def read_kv(path):
    kv = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        kv[key.strip()] = value.strip()
    return kv


def recompute(rows, methods, beta, beta_star):
    out = {}
    for method in methods:
        ok = [r for r in rows if r["method"] == method and r["status"] == "ok"]
        failed = [r for r in rows if r["method"] == method and r["status"] != "ok"]
        values = [float(r["log_or"]) for r in ok]

        def covers(r, target):
            if r["ci_lower"] == "":
                return False
            return float(r["ci_lower"]) <= target <= float(r["ci_upper"])

        mean = math.fsum(values) / len(values)
        out[method] = {
            "n_ok": len(values),
            "failures": len(failed),
            "mean_log_or": mean,
            "mean_est": math.exp(mean),
            "mc_se": statistics.stdev(values) if len(values) > 1 else 0.0,
            "coverage_beta": 100.0 * sum(covers(r, beta) for r in ok) / len(values),
            "coverage_beta_star": 100.0 * sum(covers(r, beta_star) for r in ok) / len(values),
        }
    return out


def compare(out_dir):
    out_dir = Path(out_dir)
    kv = read_kv(out_dir / "summary.kv")
    with open(out_dir / "replicates.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    methods = [m for m in kv["config.methods"].split(",") if m]
    beta = math.log(float(kv["truth.true_or"]))
    beta_star = math.log(float(kv["truth.true_relative_or"]))
    mismatches = []
    for method, stats in recompute(rows, methods, beta, beta_star).items():
        for name, value in stats.items():
            reported = float(kv[f"method.{method}.{name}"])
            if not math.isclose(value, reported, rel_tol=REL_TOL, abs_tol=ABS_TOL):
                mismatches.append(f"{method}.{name}: recomputed {value!r}, reported {reported!r}")
    return mismatches


def main(argv):
    if len(argv) != 2:
        print(__doc__.strip().splitlines()[-1], file=sys.stderr)
        return 2
    mismatches = compare(argv[1])
    for m in mismatches:
        print(m)
    if not mismatches:
        print("summary.kv matches the recomputed statistics")
    return 1 if mismatches else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
