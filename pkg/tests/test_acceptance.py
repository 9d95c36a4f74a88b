"""Acceptance criteria 1-10, each reporting one PASS/FAIL line."""

import math
import time

import numpy as np
import pytest
from scipy.special import erf

from conftest import random_instance
from qtsp.distsim import boltzmann_exact, enumerate_lengths, h_function, tv_distance
from qtsp.geometry import generate, normalize
from qtsp.oracle import both_zero_probability, oracle_sample
from qtsp.permcode import code_table, decode, encode, enumerate_codes, perm_table, rank, unrank
from qtsp.solver import brute_force, held_karp, solve_gaussian, solve_oracle
from qtsp.wavesim import apply_uniform_gate, initial_state, prepare_weighted, probability_of
from test_wavesim import recursive_probabilities

pytestmark = pytest.mark.slow


def check(report, criterion, ok, detail):
    report(criterion, bool(ok), detail)
    assert ok, detail


def test_c01_bijection(acceptance_report):
    start = time.perf_counter()
    ok = True
    for n in range(1, 9):
        perms = set()
        table = perm_table(n)
        for r, code in enumerate(enumerate_codes(n)):
            perm = decode(code)
            perms.add(perm)
            ok &= encode(perm) == code and rank(code) == r and unrank(r, n) == code
            ok &= tuple(int(x) for x in table[r]) == perm
        ok &= len(perms) == math.factorial(n)
        ok &= all(encode(decode(c)) == c for c in map(tuple, code_table(n).tolist()))
    elapsed = time.perf_counter() - start
    check(acceptance_report, 1, ok and elapsed < 5, f"n <= 8 round trips exact, {elapsed:.2f}s (< 5s)")


def test_c02_uniform_wave(acceptance_report):
    worst_p = worst_norm = 0.0
    for n in range(1, 8):
        s = initial_state(n)
        worst_norm = max(worst_norm, abs(s.norm() - 1))
        for _ in range(n - 1):
            s = apply_uniform_gate(s)
            worst_norm = max(worst_norm, abs(s.norm() - 1))
        worst_p = max(worst_p, float(np.abs(s.probabilities - 1 / math.factorial(n)).max()))
    ok = worst_p <= 1e-12 and worst_norm <= 1e-12
    check(acceptance_report, 2, ok, f"max |p - 1/n!| = {worst_p:.1e}, max |norm - 1| = {worst_norm:.1e}")


def _increment_sums(inst):
    """Sum of insertion increments for every code, walking prefixes with plain numpy."""
    n = inst.n
    d = inst.distance_matrix()
    codes = code_table(n).astype(np.intp)
    total = np.zeros(len(codes))
    for t in range(1, n):
        prefix = perm_table(t).astype(np.intp) - 1
        pr = np.arange(len(codes)) % math.factorial(t)
        j = codes[:, t]
        u = prefix[pr, (j - 2) % t]
        w = prefix[pr, (j - 1) % t]
        total += d[u, t] + d[t, w] - d[u, w]
    return total


def test_c03_telescoping(acceptance_report):
    worst = 0.0
    in_bounds = True
    for k in range(100):
        n = 4 + k % 5
        inst = random_instance(n, 1000 + k)
        perms = perm_table(n).astype(np.intp) - 1
        d = inst.distance_matrix()
        direct = d[perms, np.roll(perms, -1, axis=1)].sum(axis=1)
        worst = max(worst, float(np.abs(_increment_sums(inst) - direct).max()))
        in_bounds &= direct.min() >= 2 - 1e-9 and direct.max() <= math.sqrt(2) * n + 1e-9
    check(acceptance_report, 3, worst <= 1e-9 and in_bounds,
          f"100 instances, max |sum inc - L| = {worst:.1e}, lengths in [2, sqrt(2) n]: {in_bounds}")


def test_c04_factorization(acceptance_report):
    worst = 0.0
    for n in range(2, 7):
        for alpha in (math.exp(0.5), math.e, math.exp(2)):
            inst = random_instance(n, 60 + n)
            s = prepare_weighted(inst, alpha)
            for code, p in recursive_probabilities(inst, alpha).items():
                worst = max(worst, abs(probability_of(s, code) - p))
    tv3 = 0.0
    uniform3 = True
    for seed in range(10):
        inst = random_instance(3, seed)
        for alpha in (math.exp(0.5), math.e, math.exp(2)):
            p = prepare_weighted(inst, alpha).probabilities
            uniform3 &= bool(np.all(p == p[0]))
            tv3 = max(tv3, tv_distance(p, boltzmann_exact(enumerate_lengths(inst), alpha)))
    ok = worst <= 1e-12 and uniform3 and tv3 <= 1e-15
    check(acceptance_report, 4, ok,
          f"max factorization error {worst:.1e}; n=3 uniform: {uniform3}, tv {tv3:.1e}")


def test_c05_circuit_gap_report(acceptance_report):
    start = time.perf_counter()
    lines = []
    for n in (4, 5, 6):
        for alpha, label in ((math.e, "e"), (math.exp(2), "e^2")):
            tvs = []
            for k in range(20):
                inst = random_instance(n, 3000 + 100 * n + k)
                circuit = prepare_weighted(inst, alpha).probabilities
                tvs.append(tv_distance(circuit, boltzmann_exact(enumerate_lengths(inst), alpha)))
            lines.append(f"n={n} alpha={label}: mean tv {np.mean(tvs):.4f}, max {np.max(tvs):.4f}")
    elapsed = time.perf_counter() - start
    for line in lines:
        print("   ", line)
    check(acceptance_report, 5, elapsed < 60, f"tv reported for 120 cases in {elapsed:.2f}s; "
          + "; ".join(lines))


def test_c06_oracle_formula(acceptance_report):
    exact_half = all(both_zero_probability(0, N) == 0.5 for N in range(1, 2001))
    below = all(both_zero_probability(m, N) < 0.5 for N in range(1, 2001) for m in range(1, N + 1))
    rng = np.random.default_rng(2024)
    worst_z = 0.0
    for m in (0, 1, 8):
        p = both_zero_probability(m, 24)
        trials = 10_000
        false_rate = sum(not oracle_sample(m, 24, rng) for _ in range(trials)) / trials
        worst_z = max(worst_z, abs(false_rate - p) / math.sqrt(p * (1 - p) / trials))
    ok = exact_half and below and worst_z <= 4
    check(acceptance_report, 6, ok,
          f"p(0,N)=1/2: {exact_half}; p<1/2 for m>=1: {below}; worst |z| {worst_z:.2f} (<= 4)")


def test_c07_oracle_guarantee(acceptance_report):
    start = time.perf_counter()
    runs = failures = 0
    for k in range(100):
        n = 5 + k % 5
        inst = random_instance(n, 5000 + k)
        table = enumerate_lengths(inst)
        opt = held_karp(inst)[0]
        for eps in (0.05, 0.1, 0.3):
            for policy in ("strict", "permissive"):
                res = solve_oracle(inst, eps, np.random.default_rng(k), policy=policy, table=table)
                runs += 1
                if not (res.length <= opt + 2 * eps + 1e-9 and res.length <= (1 + eps) * opt + 1e-9):
                    failures += 1
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 120
    check(acceptance_report, 7, ok, f"{runs - failures}/{runs} runs within OPT + 2eps and (1+eps) OPT, "
          f"{elapsed:.1f}s (< 120s)")


def test_c08_baselines(acceptance_report):
    worst = 0.0
    for k in range(100):
        inst = random_instance(4 + k % 5, 7000 + k)
        worst = max(worst, abs(held_karp(inst)[0] - brute_force(inst)[0]))
    check(acceptance_report, 8, worst <= 1e-9, f"100 instances, max |HK - BF| = {worst:.1e}")


def test_c09_gaussian_solver(acceptance_report):
    good = 0
    ratios = []
    for seed in range(100):
        inst = normalize(generate("uniform", 7, seed))
        res = solve_gaussian(inst, 0.2, np.random.default_rng(seed))
        ratio = res.length / held_karp(inst)[0]
        ratios.append(ratio)
        good += ratio <= 1.2 + 1e-12
    check(acceptance_report, 9, good >= 95,
          f"{good}/100 seeds within 1.2 OPT (>= 95), worst ratio {max(ratios):.3f}")


def _gauss(a, b):
    return math.sqrt(math.pi) / 2 * (erf(b) - erf(a))


def test_c10_analysis_functions(acceptance_report):
    ref = _gauss(0, 0.1) / _gauss(0, 3)
    h = h_function(0, 0.1, 3)
    value_ok = abs(h - 0.11246) <= 1e-4 and abs(h - ref) <= 1e-10
    ones = all(h_function(x, a, a) == 1.0 for x in np.linspace(-3, 3, 13) for a in (0.01, 0.5, 2.0))
    chain = all(h_function(0, a, b) >= a * a
                for a in np.round(np.arange(0.01, 0.2401, 0.01), 2) for b in range(1, 11))
    check(acceptance_report, 10, value_ok and ones and chain,
          f"h(0,0.1,3) = {h:.6f} (ref {ref:.6f}); equal widths give 1: {ones}; "
          f"h(0) >= (eps x_min)^2 on grid: {chain}")
