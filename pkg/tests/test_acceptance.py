"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Thresholds are fixed here; see the README for what each line measures.
Run with ``pytest tests/test_acceptance.py -v`` (about 15 minutes on one core).
"""

import math
import random
import statistics

import numpy as np
import pytest

from helpers import BinaryTree, Comb
from noisygeom.errors import BudgetExhausted
from noisygeom.harness.counterexample import counterexample_walk
from noisygeom.harness.experiment import ExperimentConfig, run_experiment
from noisygeom.walk import WalkConfig, run_walk_on_tree, run_walk_outcome, run_walks_batch

P = 0.1
TRIALS = 100
MIN_SUCCESSES = 99


@pytest.fixture
def report(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        return ok

    return emit


def test_c01_walk_on_adversarial_path(report):
    L, eps, trials = 32, 1e-3, 100_000
    comb = Comb(L)
    cfg = WalkConfig(epsilon=eps, path_hint=L)
    oracle = comb.oracle(1 / 16, random.Random(101))
    hits = wrong = 0
    steps = []
    for _ in range(trials):
        try:
            out = run_walk_outcome(comb.successors, oracle, 0, cfg)
        except BudgetExhausted:
            continue
        steps.append(out.steps)
        hits += out.vertex == L
        wrong += out.vertex != L
    bound = 3 * (L + math.log2(1 / eps)) + cfg.threshold
    mean = statistics.fmean(steps)
    ok = hits / trials >= 0.999 and mean <= bound and wrong / trials <= eps
    report("C1 walk engine", ok,
           f"success {hits / trials:.5f} (>= 0.999), wrong terminal {wrong / trials:.5f} (<= {eps}), "
           f"mean consultations {mean:.1f} (<= {bound:.1f})")
    assert ok


def test_c02_tree_walk_follows_the_path(report):
    height, trials = 10, 10_000
    rnd = random.Random(202)
    cfg = WalkConfig(epsilon=1e-3, path_hint=height)
    violations = successes = 0
    for _ in range(trials):
        tree = BinaryTree(height, rnd.randrange(2, 1 << (height + 1)))
        try:
            v, path = run_walk_on_tree(tree.children, tree.oracle(1 / 16, rnd), 1, cfg)
        except BudgetExhausted:
            continue
        if v == tree.target:
            successes += 1
            violations += path != tree.path
    ok = violations == 0
    report("C2 tree walk", ok, f"{violations} path violations in {successes} successful walks of {trials} (== 0)")
    assert ok


def _mean_ratio(algo, n, trials, seed=0):
    rep = run_experiment(ExperimentConfig(algo, n, p=P, trials=trials, seed=seed), timing=False)
    assert rep.success_rate == 1.0, f"{algo} n={n} failed a scaling trial"
    return statistics.fmean(t.calls for t in rep.trials) / (n * math.log2(n))


def test_c03_noisy_sort(report):
    rep = run_experiment(ExperimentConfig("sort", 4096, p=P, c=2, trials=TRIALS, seed=3), timing=False)
    ns = (2**9, 2**11, 2**13)
    noisy = [_mean_ratio("sort", n, 4) for n in ns]
    base = [_mean_ratio("repetition-sort", n, 2) for n in ns]
    mean = statistics.fmean(noisy)
    spread = max(abs(r - mean) / mean for r in noisy)
    grows = base[0] < base[1] < base[2]
    ok = rep.successes >= MIN_SUCCESSES and spread <= 0.25 and grows
    report("C3 noisy sort", ok,
           f"{rep.successes}/{TRIALS} sorted (>= {MIN_SUCCESSES}); calls/(n log n) {[round(r, 1) for r in noisy]} "
           f"spread {spread:.3f} (<= 0.25); repetition baseline {[round(r, 1) for r in base]} increasing: {grows}")
    assert ok


def test_c04_trapezoidal_map(report):
    n, queries = 500, 10_000
    rep = run_experiment(ExperimentConfig("trapmap", n, p=P, trials=TRIALS, seed=4, queries=queries), timing=False)
    bound_ok = all(t.extra.get("leaf_bound_ok", False) for t in rep.trials)
    asked = sum(t.extra.get("queries", 0) for t in rep.trials)
    wrong = sum(t.extra.get("query_wrong", 0) for t in rep.trials)
    rate_ok = asked > 0 and wrong / asked <= n ** -2
    ok = rep.successes >= MIN_SUCCESSES and bound_ok and rate_ok
    report("C4 trapezoidal map", ok,
           f"{rep.successes}/{TRIALS} equal to exact replay (>= {MIN_SUCCESSES}); leaf count <= 3n+1 in all: {bound_ok}; "
           f"{wrong} wrong of {asked} queries (rate <= {n ** -2:.1e})")
    assert ok


def test_c05_segment_sweep(report):
    rep = run_experiment(ExperimentConfig("sweep", 200, p=P, trials=TRIALS, seed=5), timing=False)
    ks = [t.extra.get("k", 0) for t in rep.trials]
    ratios = {}
    for n in (100, 200):
        r = run_experiment(ExperimentConfig("sweep", n, p=P, trials=5, seed=55), timing=False)
        ratios[n] = statistics.fmean(t.calls / ((t.size) * math.log2(n)) for t in r.trials)
    band = max(ratios.values()) / min(ratios.values())
    ok = rep.successes >= MIN_SUCCESSES and band <= 1.5
    report("C5 sweep", ok,
           f"{rep.successes}/{TRIALS} equal to brute force (>= {MIN_SUCCESSES}), mean k {statistics.fmean(ks):.0f}; "
           f"calls/((n+k) log n) {ratios[100]:.1f} at n=100, {ratios[200]:.1f} at n=200, ratio {band:.2f} (<= 1.5)")
    assert ok


def test_c06_closest_pair(report):
    n = 1024
    rep = run_experiment(ExperimentConfig("closest-pair", n, p=P, trials=TRIALS, seed=6), timing=False)
    ok = rep.successes >= MIN_SUCCESSES
    report("C6 closest pair", ok,
           f"{rep.successes}/{TRIALS} equal to brute force (>= {MIN_SUCCESSES}); "
           f"calls/(n log n) {rep.summary()['calls_per_nlogn']:.1f}")
    assert ok


def test_c07_convex_hull(report):
    rep = run_experiment(ExperimentConfig("hull", 2048, p=P, trials=TRIALS, seed=7), timing=False)
    checks = all(t.extra["post_checks"] for t in rep.trials if t.success)
    ok = rep.successes >= MIN_SUCCESSES and checks
    report("C7 convex hull", ok,
           f"{rep.successes}/{TRIALS} equal to gift wrapping (>= {MIN_SUCCESSES}); "
           f"convexity and containment in every success: {checks}")
    assert ok


def test_c08_delaunay_and_emst(report):
    dt = run_experiment(ExperimentConfig("delaunay", 512, p=P, trials=TRIALS, seed=8), timing=False)
    mst = run_experiment(ExperimentConfig("emst", 512, p=P, trials=TRIALS, seed=88), timing=False)
    per_n = {}
    for e in range(6, 12):
        n = 1 << e
        r = run_experiment(ExperimentConfig("delaunay", n, p=P, trials=8 if e < 10 else 3, seed=800 + e), timing=False)
        per_n[n] = statistics.fmean(t.extra["nodes"] / n for t in r.trials)
    top = max(per_n.values())
    band = top / min(per_n.values())
    ok = dt.successes >= MIN_SUCCESSES and mst.successes >= MIN_SUCCESSES and top <= 10 and band <= 1.25
    report("C8 delaunay", ok,
           f"{dt.successes}/{TRIALS} locally Delaunay, {mst.successes}/{TRIALS} EMST exact (>= {MIN_SUCCESSES}); "
           f"DAG nodes/n {', '.join(f'{v:.2f}' for v in per_n.values())} for n=2^6..2^11, "
           f"max {top:.2f} (<= 10), max/min {band:.2f} (<= 1.25)")
    assert ok


def test_c09_counterexample(report):
    ns = [1 << e for e in range(10, 21)]
    rows = counterexample_walk(ns, trials=300, seed=9)
    norm = [r.normalized for r in rows]
    band = max(norm) / min(norm)
    big = [r for r in rows if r.log_n >= 16]
    exceeds = all(r.exceeds_budget for r in big)
    ok = band <= 2.0 and exceeds
    report("C9 counterexample", ok,
           f"steps-to-leaf/(log^2 n/log log n) in [{min(norm):.2f}, {max(norm):.2f}], ratio {band:.2f} (<= 2); "
           f"mean steps / budget at n>=2^16: {', '.join(f'{r.mean_steps / r.walk_budget:.2f}' for r in big)} (all > 1)")
    assert ok


def test_c10_epsilon_scaling(report):
    n, trials = 1024, 10_000
    slopes = {}
    for L in (16, 64):
        comb = Comb(L)
        means = {}
        for c in (2, 4):
            cfg = WalkConfig.for_size(n, c, path_hint=L)
            gen = np.random.default_rng(1000 * L + c)
            res, used = run_walks_batch(comb.children, comb.oracle_batch(1 / 16, gen), np.zeros(trials, np.int64), cfg)
            assert (res == L).mean() >= 1 - cfg.epsilon * 10
            means[c] = float(used.mean())
        slopes[L] = (means[4] - means[2]) / (2 * math.log2(n))
    target = 3 * math.log2(math.e)
    in_band = all(abs(s - target) <= 0.3 * target for s in slopes.values())
    additive = abs(slopes[64] / slopes[16] - 1) <= 0.1
    ok = in_band and additive
    report("C10 epsilon scaling", ok,
           f"extra consultations per bit of log(1/eps): {slopes[16]:.2f} (L=16), {slopes[64]:.2f} (L=64), "
           f"target {target:.2f} +-30%; same increase for both path lengths: {additive}")
    assert ok
