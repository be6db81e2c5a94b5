"""Acceptance criteria, one test each, at their stated tolerances.

Every test prints a ``[PASS]``/``[FAIL]`` line; the collected lines are
repeated in the pytest terminal summary.  Run standalone with
``python tests/test_acceptance.py``.
"""

import sys
import time

import numpy as np
import pytest

from oversmoothing.harness import ExperimentConfig, classify_methods, run_traces, write_csv
from oversmoothing.graph import karate_club
from oversmoothing.linalg import kron, vectorize
from oversmoothing.metrics import Verdict
from oversmoothing.rng import stream
from oversmoothing.verification import (
    check_energy_bound,
    check_energy_rod_implication,
    check_jordan_cases,
    check_kron_power,
    check_power_iteration,
)

ACCEPTANCE: list[str] = []

ENERGY_UNNORM_ZERO = ("gat", "sage", "unimp")
ENERGY_UNNORM_POSITIVE = ("gcn",)
ENERGY_SYM_ZERO = ("gcn", "gcnii2x", "resgcn")
COLLAPSED = ("gcn", "gat", "sage", "unimp", "ggcn", "gcnii2x", "resgcn", "gin2")
NOT_COLLAPSED = ("gcn_pairnorm", "gcn_batchnorm", "pprgnn", "gcnii", "gatedgnn", "gps", "gin3")


def record(number: int, title: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title} ({detail})"
    ACCEPTANCE.append(line)
    print(line)
    assert passed, line


@pytest.fixture(scope="module")
def sweep(tmp_path_factory):
    config = ExperimentConfig()
    start = time.perf_counter()
    traces = run_traces(config)
    elapsed = time.perf_counter() - start
    path = tmp_path_factory.mktemp("sweep") / "first.csv"
    write_csv(traces, path)
    summaries = classify_methods(config, traces)
    return {"config": config, "summaries": summaries, "elapsed": elapsed, "csv": path}


def test_criterion_01_vec_kron_identity():
    r = stream("acceptance:vec")
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        n, d, e = (int(v) for v in 1 + (r.random(3) * 8).astype(int))
        a, x, w = r.normal((n, n)), r.normal((n, d)), r.normal((d, e))
        worst = max(worst, float(np.max(np.abs(vectorize(a @ x @ w) - kron(w.T, a) @ vectorize(x)))))
    elapsed = time.perf_counter() - start
    record(1, "vec(AXW) = (W^T kron A) vec(X)", worst <= 1e-12 and elapsed < 1.0,
           f"max deviation {worst:.2e} <= 1e-12, {elapsed:.3f}s < 1s")


def test_criterion_02_power_iteration():
    start = time.perf_counter()
    report = check_power_iteration()
    elapsed = time.perf_counter() - start
    random_cases = [c for c in report.cases if c["case"].startswith("random")]
    perm = [c for c in report.cases if c["case"] == "permutation raises"]
    worst = max(c["vector_error"] for c in random_cases)
    iters = max(c["iterations"] for c in random_cases)
    ok = (len(random_cases) == 20 and all(c["passed"] for c in random_cases)
          and worst <= 1e-8 and iters <= 500 and perm and perm[0]["passed"] and elapsed < 1.0)
    record(2, "power iteration on 20 gapped 8x8 matrices", ok,
           f"max residual {worst:.2e} <= 1e-8, {iters} <= 500 iters, "
           f"permutation raises={perm[0]['passed']}, {elapsed:.3f}s < 1s")


def test_criterion_03_kronecker_power_iteration():
    start = time.perf_counter()
    report = check_kron_power()
    elapsed = time.perf_counter() - start
    cases = [c for c in report.cases if c["case"].startswith("random")]
    vec_err = max(c["vector_error"] for c in cases)
    val_err = max(c["value_error"] for c in cases)
    oracle_err = max(c["oracle_error"] for c in cases)
    ok = (len(cases) == 20 and report.passed and vec_err <= 1e-6 and val_err <= 1e-8
          and oracle_err <= 1e-8 and elapsed < 2.0)
    record(3, "Kronecker power iterate vs v1(W) kron v1(A)", ok,
           f"vector {vec_err:.2e} <= 1e-6, eigenvalue {val_err:.2e} <= 1e-8, "
           f"oracle {oracle_err:.2e} <= 1e-8, {elapsed:.3f}s < 2s")


def test_criterion_04_jordan_blocks():
    report = check_jordan_cases(k_max=200)
    res = max(c["column_residual"] for c in report.cases)
    lo = min(c["ratio_min"] for c in report.cases)
    hi = max(c["ratio_max"] for c in report.cases)
    ok = len(report.cases) == 4 and res <= 1e-5 and 0.5 <= lo and hi <= 2.0
    record(4, "Jordan cases p in {1,2} x multiplicity in {1,2}", ok,
           f"column residual {res:.2e} <= 1e-5, growth ratio in [{lo:.3f}, {hi:.3f}]")


def test_criterion_05_energy_bound():
    report = check_energy_bound(trials=100)
    trials = next(c for c in report.cases if c["case"] == "100 random trials")
    demo = next(c for c in report.cases if c["case"] == "over-separation")
    violations = len(trials["violations"])
    grew = demo["energy_after"] > demo["energy_before"]
    record(5, "energy bound on a 10-node graph", violations == 0 and grew and report.passed,
           f"{violations} violations in 100 trials, over-separation "
           f"{demo['energy_before']:.3g} -> {demo['energy_after']:.3g}")


def test_criterion_06_unnormalized_energy_classes(sweep):
    s = sweep["summaries"]
    low = {m: s[m].mean_final_energy_unnorm for m in ENERGY_UNNORM_ZERO}
    high = {m: s[m].mean_final_energy_unnorm for m in ENERGY_UNNORM_POSITIVE}
    ok = all(v <= 1e-3 for v in low.values()) and all(v >= 1e-2 for v in high.values())
    ok = ok and sweep["elapsed"] < 300
    record(6, "unnormalized energy classes", ok,
           ", ".join(f"{m} {v:.2e}" for m, v in {**low, **high}.items())
           + f"; sweep {sweep['elapsed']:.1f}s < 300s")


def test_criterion_07_symmetric_energy_classes(sweep):
    s = sweep["summaries"]
    vals = {m: s[m].mean_final_energy_sym for m in ENERGY_SYM_ZERO}
    record(7, "symmetric energy classes", all(v <= 1e-3 for v in vals.values()),
           ", ".join(f"{m} {v:.2e} <= 1e-3" for m, v in vals.items()))


def test_criterion_08_rank_collapse_classes(sweep):
    s = sweep["summaries"]
    wrong = [m for m in COLLAPSED if s[m].verdict is not Verdict.COLLAPSED]
    wrong += [m for m in NOT_COLLAPSED if s[m].verdict is not Verdict.NOT_COLLAPSED]
    renorm = [m for m in s if s[m].renormalized]
    worst_collapsed = max(s[m].mean_final_rod for m in COLLAPSED)
    best_open = min(s[m].mean_final_rod for m in NOT_COLLAPSED)
    record(8, "ROD verdicts for all 15 methods", not wrong,
           f"misclassified {wrong or 'none'}, renormalized {renorm or 'none'}, "
           f"max collapsed ROD {worst_collapsed:.2e}, min open ROD {best_open:.2e}")


def test_criterion_09_energy_implies_rod():
    report = check_energy_rod_implication()
    exact = [c for c in report.cases if c["case"].endswith("eta=0")]
    energy = max(c["max_energy"] for c in exact)
    rod = max(c["max_rod"] for c in exact)
    ok = len(exact) == 2 and energy <= 1e-10 and rod <= 1e-10
    record(9, "null-space states on karate club", ok,
           f"max energy {energy:.2e}, max ROD {rod:.2e}, both <= 1e-10")


def test_criterion_10_determinism(sweep, tmp_path):
    second = tmp_path / "second.csv"
    write_csv(run_traces(sweep["config"], karate_club()), second)
    same = sweep["csv"].read_bytes() == second.read_bytes()
    record(10, "two sweeps give byte-identical CSV", same,
           f"{sweep['csv'].stat().st_size} bytes, identical={same}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
