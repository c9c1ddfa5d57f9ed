"""Exit criteria, one test per criterion.

Run ``pytest tests/test_acceptance.py`` to get a PASS/FAIL line for each in
the terminal summary.
"""
import math
import time

import numpy as np
import pytest
from scipy import stats

from ctmc_acf.acf import acf_grid, acf_mixture, acf_value, constant_term, unit_acf_closed_form
from ctmc_acf.cli import main
from ctmc_acf.errors import DegenerateSpectrum
from ctmc_acf.lpnorm import IN_LP, NOT_IN_LP, classify, classify_chain
from ctmc_acf.model import ProbVector, StateSpace, stationary_distribution, unit_chain, validate_generator
from ctmc_acf.pointproc import conditional_arrival_prob, equilibrium_arrival_prob, transient_arrival_prob
from ctmc_acf.simulate import empirical_acf, min_horizon, sample_trajectory, stitched_sojourns
from ctmc_acf.spectral import decompose, expm_spectral
from ctmc_acf.transient import expm_uniformization
from helpers import random_chain, random_initial


def nondegenerate_chains(seed, count):
    """(Q, decomposition, initial law) for `count` random chains with N in 2..8."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        Q = random_chain(rng, density=rng.uniform(0.3, 1.0))
        try:
            d = decompose(Q)
        except DegenerateSpectrum:
            continue
        p0 = stationary_distribution(Q) if rng.random() < 0.3 else ProbVector(random_initial(rng, Q.n))
        out.append((Q, d, p0))
    return out


def test_ac01_unit_half_half_closed_form(criterion):
    t0 = time.perf_counter()
    Q = unit_chain(1, 3)
    taus = np.linspace(0, 3, 50)
    R = acf_grid(Q, ProbVector([0.5, 0.5]), taus)
    dev = np.abs(R - np.exp(-4 * taus)).max()
    elapsed = time.perf_counter() - t0
    criterion("AC1 unit q=1/2 R=e^{-4tau}", dev <= 1e-12 and elapsed < 1.0,
              f"max dev {dev:.2e} (tol 1e-12), {elapsed:.3f}s (<1s)")


def test_ac02_symmetric_rates_reflection(criterion):
    t0 = time.perf_counter()
    taus = np.linspace(-2, 2, 101)
    R = acf_grid(unit_chain(2, 2), ProbVector([0.5, 0.5]), taus)
    dev = np.abs(R - np.exp(-4 * np.abs(taus))).max()
    elapsed = time.perf_counter() - t0
    criterion("AC2 alpha=beta=2 R=e^{-4|tau|}", dev <= 1e-12 and elapsed < 1.0,
              f"max dev {dev:.2e} on [-2,2] (tol 1e-12), {elapsed:.3f}s (<1s)")


def test_ac03_constant_term_is_the_limit(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for Q, d, p0 in nondegenerate_chains(2024, 200):
        horizon = 50.0 / d.slowest_rate
        worst = max(worst, abs(constant_term(Q, p0) - acf_value(Q, p0, horizon)))
    elapsed = time.perf_counter() - t0
    criterion("AC3 c = E[X0]E[Z] = R(50 time constants)", worst <= 1e-8 and elapsed < 30,
              f"200 chains, worst {worst:.2e} (tol 1e-8), {elapsed:.1f}s (<30s)")


def test_ac04_stationary_unit_is_not_constant(criterion):
    a, b = 1.0, 3.0
    Q = unit_chain(a, b)
    pi = stationary_distribution(Q)
    taus = np.linspace(0, 3, 61)
    expected = 0.25 + 0.75 * np.exp(-4 * taus)
    via_uniformization = acf_grid(Q, pi, taus)
    d = decompose(Q)
    s = Q.values
    via_spectral = np.array([(s * pi.probs) @ expm_spectral(d, t) @ s for t in taus])
    via_mixture = acf_mixture(Q, pi).evaluate(taus)
    dev = max(np.abs(v - expected).max() for v in (via_uniformization, via_spectral, via_mixture))
    r0 = acf_value(Q, pi, 0.0)
    c = constant_term(Q, pi)
    limit = acf_value(Q, pi, 50 / 4)
    ok = (dev <= 1e-12 and abs(r0 - 1) <= 1e-12 and abs(c - ((a - b) / (a + b)) ** 2) <= 1e-15
          and abs(limit - 0.25) <= 1e-12 and np.ptp(via_uniformization) > 0.7)
    criterion("AC4 stationary unit R = 0.25 + 0.75e^{-4tau}", ok,
              f"max dev over 3 paths {dev:.2e} (tol 1e-12), R(0)={r0:.15g}, c={c:.15g}, R(50/4)={limit:.15g}")


def test_ac05_lp_classification(criterion):
    rng = np.random.default_rng(55)
    wrong = []
    checked = 0
    for _ in range(150):
        Q = random_chain(rng, hi=20.0)
        p0 = stationary_distribution(Q) if rng.random() < 0.5 else ProbVector(random_initial(rng, Q.n))
        c = constant_term(Q, p0)
        if abs(c) > 1e-6:
            checked += 1
            if classify_chain(Q, p0, [1, 2, 3]).integrable_class != NOT_IN_LP:
                wrong.append(c)

    zero_reports = []
    for a, b in [(1, 3), (2, 2), (0.05, 40), (7, 0.3)]:
        zero_reports.append(classify(acf_mixture(unit_chain(a, b), ProbVector([0.5, 0.5])), [1, 2, 3]))
    R = np.array([[-3.0, 1.0, 0.5, 1.5], [1.0, -2.5, 1.0, 0.5], [0.5, 1.0, -2.0, 0.5], [1.5, 0.5, 0.5, -2.5]])
    sym = validate_generator(R, StateSpace((-2, -1, 1, 2)))
    pi_sym = stationary_distribution(sym)
    zero_reports.append(classify(acf_mixture(sym, pi_sym), [1, 2, 3]))
    zero_ok = (np.abs(pi_sym.probs - 0.25).max() < 1e-14 and all(
        r.integrable_class == IN_LP and all(math.isfinite(v) for v in r.f_lp_values.values())
        and set(r.f_lp_values) == {1.0, 2.0, 3.0} for r in zero_reports))

    sup_dev = 0.0
    for _ in range(60):
        a, b = np.exp(rng.uniform(np.log(0.01), np.log(100), 2))
        q = rng.uniform()
        sup_dev = max(sup_dev, abs(classify(acf_mixture(unit_chain(a, b), ProbVector([q, 1 - q])), [1]).sup_norm - 1))

    criterion("AC5 L^p classification", not wrong and zero_ok and sup_dev <= 1e-9,
              f"{checked} chains with |c|>1e-6 all NotInLpAnyP ({len(wrong)} wrong); "
              f"{len(zero_reports)} c=0 chains InLpAllP with finite f_lp: {zero_ok}; "
              f"unit L-inf max |sup-1| {sup_dev:.1e} (tol 1e-9)")


def test_ac06_spectral_vs_uniformization(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for Q, d, _ in nondegenerate_chains(606, 200):
        for tau in (0.1, 1.0, 10.0):
            worst = max(worst, np.abs(expm_spectral(d, tau) - expm_uniformization(Q, tau)).max())
    elapsed = time.perf_counter() - t0
    criterion("AC6 spectral vs uniformization", worst <= 1e-9 and elapsed < 30,
              f"200 chains x 3 lags, worst {worst:.2e} (tol 1e-9), {elapsed:.1f}s (<30s)")


def _mc_chains():
    rng = np.random.default_rng(707)
    chains = [
        (unit_chain(1, 3), ProbVector([0.75, 0.25])),
        (unit_chain(2, 2), ProbVector([0.5, 0.5])),
    ]
    Q3 = random_chain(rng, n=3, hi=5.0)
    chains.append((Q3, ProbVector(random_initial(rng, 3))))
    Q4 = validate_generator(np.array(random_chain(rng, n=4, hi=5.0).entries), StateSpace((-2, -1, 1, 2)))
    chains.append((Q4, stationary_distribution(Q4)))
    Q4b = random_chain(rng, n=4, hi=5.0)
    chains.append((Q4b, ProbVector([1.0, 0.0, 0.0, 0.0])))
    return chains


def test_ac07_monte_carlo_consistency(criterion):
    t0 = time.perf_counter()
    lags = [0.0, 0.25, 1.0, 2.0]
    hits = 0
    for k, (Q, p0) in enumerate(_mc_chains()):
        emp = empirical_acf(Q, p0, lags, 100_000, min_horizon(Q, lags), master_seed=1000 + k)
        for lag, est, se in zip(lags, emp.estimates, emp.std_errors):
            hits += abs(est - acf_value(Q, p0, lag)) <= 3 * se
    elapsed = time.perf_counter() - t0
    criterion("AC7 Monte Carlo within 3 SE", hits >= 19 and elapsed < 180,
              f"{hits}/20 cells (need >= 19), {elapsed:.1f}s (<180s)")


def test_ac08_arrival_identities(criterion):
    rng = np.random.default_rng(808)
    worst = 0.0
    for _ in range(100):
        Q = random_chain(rng)
        p0 = ProbVector(random_initial(rng, Q.n))
        pi = stationary_distribution(Q)
        n = Q.n
        worst = max(worst, abs(sum(equilibrium_arrival_prob(Q, j) for j in range(n)) - 1))
        for tau in (0.0, 0.1, 1.0, 10.0):
            for j in range(n):
                worst = max(worst, abs(transient_arrival_prob(Q, pi, tau, j) - pi[j]))
                mix = sum(p0[i] * conditional_arrival_prob(Q, i, j, tau) for i in range(n))
                worst = max(worst, abs(mix - transient_arrival_prob(Q, p0, tau, j)))
    criterion("AC8 arrival attribution identities", worst <= 1e-10,
              f"100 chains, worst residual {worst:.2e} (tol 1e-10)")


def test_ac09_sojourns_are_exponential(criterion):
    Q = unit_chain(1, 3)
    tr = sample_trajectory(Q, ProbVector([0.75, 0.25]), 15_000.0, seed=909)
    n = 10_000
    crit = stats.kstwo.ppf(0.99, n)
    lines, ok = [], True
    for state, rate in enumerate(Q.exit_rates):
        soj = stitched_sojourns(tr, state)[:n]
        d = stats.kstest(soj, "expon", args=(0, 1 / rate)).statistic
        ok &= soj.size == n and d < crit
        lines.append(f"state {state + 1}: D={d:.4f}")
    criterion("AC9 KS of stitched sojourns", ok, ", ".join(lines) + f" (1% critical {crit:.4f}, n={n})")


def test_ac10_determinism(criterion, tmp_path):
    model = tmp_path / "m.json"
    model.write_text('{"states": [-2, -1, 1, 2], "Q": [[-3, 1, 1, 1], [2, -4, 1, 1], '
                     '[0.5, 0.5, -2, 1], [1, 1, 3, -5]], "initial": [0.1, 0.2, 0.3, 0.4]}')
    outputs = []
    for threads in (1, 1, 8):
        out = tmp_path / f"run{len(outputs)}.csv"
        rc = main(["simulate", "--model", str(model), "--tau-start", "0", "--tau-stop", "2",
                   "--tau-count", "9", "--n", "20000", "--seed", str(2**63 + 12345),
                   "--threads", str(threads), "--out", str(out)])
        assert rc == 0
        outputs.append(out.read_bytes())
    same = outputs[0] == outputs[1] == outputs[2]
    criterion("AC10 byte-identical CSV", same,
              f"2 runs at 1 thread + 1 run at 8 threads, {len(outputs[0])} bytes each, identical={same}")
