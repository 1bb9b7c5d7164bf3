"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run alone with `pytest tests/test_acceptance.py -s` to see the lines as they
complete; they are also collected into the terminal summary.
"""

import math
from collections import Counter

import numpy as np
import pytest

from qfreq.bench.experiment import loglog_slope, parse_config, rows_to_csv, run_experiment, write_csv
from qfreq.bench.generators import generate_instance
from qfreq.bench.verify import ams_moments, hash_suite, lemma1_suite, nk_moments
from qfreq.core import Stream, collision_count_bruteforce, exact_f_infty, exact_moment
from qfreq.qsim import (
    CostModel,
    ResourceLedger,
    ae_statevector_distribution,
    amplitude_estimate,
    bernoulli_operator,
)
from qfreq.qsim.amplitude import total_variation
from qfreq.query_algos import FkQueryConfig, approx_f0_query, approx_fk_query, collision_round, f0_sketch_size
from qfreq.stream_algos import (
    approx_f0_stream,
    approx_f2_stream,
    approx_fk_stream,
    f0_stream_pass_count,
    f_infty_stream,
)

# heuristic constant for M = ceil(K / eps^2); the proof's constant is ~1e24
BENCH_K = 20


def rate(hits, trials):
    return sum(hits) / trials


def test_c01_lemma1_mean(criterion):
    checks = [c for c in lemma1_suite() if "mean" in c[0]]
    criterion(1, all(ok for _, ok, _ in checks), "E[C_k] = binom(l,k) F_k / n^k exactly, n<=5, l<=4, k in {2,3}")


def test_c02_lemma1_variance(criterion):
    checks = [c for c in lemma1_suite() if "variance" in c[0]]
    worst = max(float(d.split("=")[-1]) for _, _, d in checks)
    criterion(2, all(ok for _, ok, _ in checks), f"Var(C_k) <= bound + 1e-9 on the same grid (max gap {worst:.3g})")


def test_c03_hash_exactness(criterion):
    checks = list(hash_suite(primes=(2, 3, 5, 7, 11), max_t=4))
    criterion(3, all(ok for _, ok, _ in checks), f"{len(checks)} families p<=11, t<=4 exactly t-wise uniform")


def test_c04_amplitude_estimation_fidelity(criterion):
    rng = np.random.default_rng(4)
    worst = 0.0
    draws = 100_000
    for p in (0.1, 0.3, 0.7):
        for M in (16, 64):
            sv = ae_statevector_distribution(*bernoulli_operator(p), M)
            ys = [amplitude_estimate(M, rng, probability=p).y for _ in range(draws)]
            emp = np.bincount(ys, minlength=M) / draws
            worst = max(worst, total_variation(emp, sv))
    criterion(4, worst <= 0.01, f"max TV(sampled, statevector) = {worst:.4f} <= 0.01 over 1e5 draws")


def test_c05_algorithm1(criterion):
    n, m, trials = 10_000, 10_001, 400
    worst_rate = 1.0
    ratios = []
    for f0 in (100, 5000):
        s = generate_instance("exact_f0", {"n": n, "f0": f0, "m": m}, f0)
        for eps in (0.5, 0.25):
            d = f0_sketch_size(eps)
            hits = []
            for t in range(trials):
                led = ResourceLedger()
                est = approx_f0_query(s, eps, np.random.default_rng(t), ledger=led)
                hits.append(abs(est.value - f0) <= eps * f0)
                ratios.append(led.oracle_queries / math.sqrt(d * n))
            worst_rate = min(worst_rate, rate(hits, trials))
    c = max(ratios)  # one constant fitted across all configurations
    target = 3 / 5 - 1 / m - 0.05
    ok = worst_rate >= target and c <= 1.01
    criterion(5, ok, f"min success {worst_rate:.3f} >= {target:.3f}; queries <= c sqrt(dn) with c = {c:.4f}")


def test_c06_algorithm2_estimator(criterion):
    rng = np.random.default_rng(6)
    rounds = 10_000
    worst_z = 0.0
    for k in (2, 3):
        cfg = FkQueryConfig(k, 0.5, K=BENCH_K)
        for i in range(10):
            n = int(rng.integers(6, 16))
            s = Stream(rng.integers(1, max(2, n // 2) + 1, size=n).tolist())
            ell = int(rng.integers(k, 8))
            Fk = exact_moment(s, k)
            est = np.empty(rounds)
            for r in range(rounds):
                sample = [s.items[j] for j in rng.integers(0, n, size=ell)]
                C = collision_round(sample, cfg, rng, ResourceLedger(), s.m + 1)
                est[r] = n**k * C / math.comb(ell, k)
            se = est.std(ddof=1) / math.sqrt(rounds)
            worst_z = max(worst_z, abs(est.mean() - Fk) / se if se > 0 else 0.0)
    # reconstruction vs brute force on the true sample
    agree = 0
    for t in range(1000):
        s = Stream(rng.integers(1, 5, size=int(rng.integers(2, 9))).tolist())
        k = int(rng.integers(2, 4))
        ell = int(rng.integers(1, 7))
        positions = rng.integers(1, s.n + 1, size=ell).tolist()
        sample = [s[p] for p in positions]
        got = collision_round(sample, FkQueryConfig(k, 0.5, K=BENCH_K), rng, ResourceLedger(), s.m + 1)
        agree += got == collision_count_bruteforce(s, positions, k)
    ok = worst_z <= 3 and agree == 1000
    criterion(6, ok, f"max |mean - F_k| / SE = {worst_z:.2f} <= 3 over 20 streams; reconstruction {agree}/1000")


def test_c07_algorithm2_scaling(criterion):
    ns = [2**i for i in range(8, 15)]
    trials = 200
    slopes = {}
    for k in (2, 3):
        cfg = FkQueryConfig(k, 0.5, K=BENCH_K)
        means = []
        for n in ns:
            # uniform over n/4 values: F_k = Theta(n) for every fixed k
            s = generate_instance("uniform", {"n": n, "m": n // 4}, n)
            q = []
            for t in range(trials):
                led = ResourceLedger()
                approx_fk_query(s, cfg, np.random.default_rng(t), ledger=led)
                q.append(led.oracle_queries)
            means.append(np.mean(q))
        slopes[k] = loglog_slope(ns, means)
    targets = {k: (1 - 1 / k) * (1 - 2 ** (k - 2) / (2**k - 1)) for k in (2, 3)}
    ok = all(abs(slopes[k] - targets[k]) <= 0.15 for k in (2, 3))
    detail = ", ".join(f"k={k}: slope {slopes[k]:.3f} vs {targets[k]:.3f}" for k in (2, 3))
    criterion(7, ok, detail + " (tol 0.15)")


def test_c08_algorithm3(criterion):
    s = generate_instance("exact_f0", {"n": 512, "f0": 256, "m": 512}, 8)
    trials = 1000
    rates = {}
    formula_ok = True
    for eps in (0.5, 0.25):
        hits = []
        for t in range(trials):
            led = ResourceLedger()
            est = approx_f0_stream(s, eps, np.random.default_rng(t), ledger=led)
            hits.append(abs(est.value - 256) <= eps * 256)
            formula_ok &= led.stream_passes == f0_stream_pass_count(eps)
        rates[eps] = rate(hits, trials)
    epss = [1.0, 0.5, 0.25, 0.125, 0.0625]
    passes = []
    for eps in epss:
        led = ResourceLedger()
        approx_f0_stream(s, eps, np.random.default_rng(0), ledger=led)
        passes.append(led.stream_passes)
    slope = loglog_slope([1 / e for e in epss], passes)
    target = 2 / 3 - 0.05
    ok = min(rates.values()) >= target and formula_ok and abs(slope - 1) <= 0.1
    criterion(
        8,
        ok,
        f"success {rates[0.5]:.3f}/{rates[0.25]:.3f} >= {target:.3f}; passes match formula: {formula_ok}; "
        f"passes-vs-1/eps slope {slope:.3f}",
    )


def test_c09_algorithm4(criterion):
    s = generate_instance("uniform", {"n": 256, "m": 128}, 9)
    F2 = exact_moment(s, 2)
    trials = 1000
    rng = np.random.default_rng(9)
    r = rate((abs(approx_f2_stream(s, 0.2, rng).value - F2) <= 0.2 * F2 for _ in range(trials)), trials)
    enum_ok = True
    erng = np.random.default_rng(90)
    for _ in range(20):
        small = Stream(erng.integers(1, 9, size=int(erng.integers(1, 25))).tolist(), m=8)
        e1, e2 = ams_moments(small)
        f2 = exact_moment(small, 2)
        enum_ok &= e1 == f2 and float(e2 - e1 * e1) <= 2 * f2**2 + 1e-9
    target = 2 / 3 - 0.05
    criterion(9, r >= target and enum_ok, f"success {r:.3f} >= {target:.3f}; enumeration mean = F2, Var <= 2F2^2: {enum_ok}")


def test_c10_streaming_f_infinity(criterion):
    rng = np.random.default_rng(10)
    s = generate_instance("uniform", {"n": 4096, "m": 1024}, 10)
    truth = exact_f_infty(s)
    trials = 1000
    r = rate((f_infty_stream(s, rng).value == truth for _ in range(trials)), trials)
    ns = [2**i for i in range(6, 13)]
    passes = []
    for n in ns:
        led = ResourceLedger()
        f_infty_stream(generate_instance("uniform", {"n": n, "m": n}, n), rng, ledger=led)
        passes.append(led.stream_passes)
    slope = loglog_slope(ns, passes)
    target = 2 / 3 - 0.05
    ok = r >= target and abs(slope - 0.5) <= 0.1
    criterion(10, ok, f"exact in {r:.3f} >= {target:.3f} at n=4096; pass slope {slope:.3f} vs 0.5")


def test_c11_nk_estimator(criterion):
    rng = np.random.default_rng(11)
    identity_ok = True
    for n in range(1, 33):
        s = Stream(rng.integers(1, 17, size=n).tolist(), m=16)
        mean, _ = nk_moments(s, 3)
        identity_ok &= mean == exact_moment(s, 3)
    s = generate_instance("uniform", {"n": 128, "m": 64}, 11)
    F3 = exact_moment(s, 3)
    trials = 1000
    r = rate((abs(approx_fk_stream(s, 3, 0.3, rng).value - F3) <= 0.3 * F3 for _ in range(trials)), trials)
    target = 2 / 3 - 0.05
    criterion(11, identity_ok and r >= target, f"E_i[N_3(i)] = F_3 for n=1..32: {identity_ok}; success {r:.3f} >= {target:.3f}")


def test_c12_robustness(criterion):
    inject = CostModel(failure_injection=True)
    trials = 400
    rates = []
    injected = 0
    for k, (n, m) in ((2, (200, 50)), (3, (200, 40))):
        s = generate_instance("uniform", {"n": n, "m": m}, 12 + k)
        Fk = exact_moment(s, k)
        cfg = FkQueryConfig(k, 0.5, K=BENCH_K, cost=inject)
        hits = []
        for t in range(trials):
            led = ResourceLedger()
            est = approx_fk_query(s, cfg, np.random.default_rng(t), ledger=led)
            injected += int(led.notes.get("injected_failures", "0"))
            hits.append(abs(est.value - Fk) <= 0.5 * Fk)
        rates.append(rate(hits, trials))
    target = 3 / 4 - 0.05
    ok = min(rates) >= target and injected > 0
    criterion(12, ok, f"success k=2 {rates[0]:.3f}, k=3 {rates[1]:.3f} >= {target:.3f} with {injected} injected failures")


def test_c13_determinism(criterion, tmp_path):
    text = """
[experiment]
algorithm = {algo}
trials = 3
seed = 1313

[stream]
generator = zipf
n = 400
m = 200

[params]
epsilon = 0.5
k = 2
K = 20
"""
    same = True
    for algo in ("f0_query", "fk_query", "finf_query", "f0_stream", "f2_stream", "finf_stream"):
        cfg = parse_config(text.format(algo=algo))
        write_csv(run_experiment(cfg), tmp_path / "a.csv")
        write_csv(run_experiment(cfg), tmp_path / "b.csv")
        same &= (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    criterion(13, same, "re-running each experiment with the same seed gives byte-identical CSV")
