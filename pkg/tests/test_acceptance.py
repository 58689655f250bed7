"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

The summary lines are collected in conftest and shown at the end of the run
(and also printed inline when pytest runs with ``-s``).
"""

import math
import time

import numpy as np
import pytest

from dynthresh.affine import AffineParams, FixedPointType, TypeLabel, affine_fixed_points, classify
from dynthresh.core import Regime, ScalarMapSpec, State, SystemSpec, ThresholdMapSpec, eval_map, step
from dynthresh.criteria import check_contraction, common_limit_verdict, tail_contraction_ratio
from dynthresh.metrics import lyapunov, lyapunov_ensemble
from dynthresh.scenarios import builtin
from dynthresh.sim import LimitKind, VisitKind, detect_limit, simulate, transitions, visitation

from conftest import ACCEPTANCE_LINES, affine_system
from oracles import exact_affine_orbit, mp_affine_orbit, switch_indices

SEED = 42


def report(k, ok, detail):
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[k] = line
    print(line)
    assert ok, line


def test_criterion_01_affine_fixed_points():
    t0 = time.perf_counter()
    p = AffineParams(0.5, 2, 1.5, -3, 0.3, 0.7, 1)
    fp = affine_fixed_points(p)[0]
    fp_ok = (fp.fp_type is FixedPointType.TYPE_I and fp.exists and fp.stable
             and fp.eigenvalues == (0.5, 0.7)
             and abs(fp.a_star - 4) < 1e-12 and abs(fp.c_star - 22 / 3) < 1e-12)
    sys = p.to_system()
    inits = np.random.default_rng(SEED).uniform(-10, 10, (10, 2))
    converged, escaped = 0, []
    for a0, c0 in inits:
        t = simulate(sys, State(float(a0), float(c0)), 2000)
        if abs(t.a[-1] - 4) < 1e-6 and abs(t.c[-1] - 22 / 3) < 1e-6:
            converged += 1
        else:
            escaped.append((round(float(a0), 3), round(float(c0), 3)))
    elapsed = time.perf_counter() - t0
    # confirm the escapes are genuine with exact arithmetic
    exact_escape = all(
        abs(exact_affine_orbit(("0.5", "2", "1.5", "-3", "0.3", "0.7", "1"), (repr(a), repr(c)), 200)[0][-1][0]) > 1e10
        for a, c in escaped
    )
    ok = fp_ok and converged == 10 and elapsed < 1.0
    report(1, ok, f"fixed point ok={fp_ok}; converged {converged}/10 seeded starts; "
                  f"escaped {escaped} (exact arithmetic agrees: {exact_escape}); {elapsed:.2f}s")


def test_criterion_02_classification():
    t0 = time.perf_counter()
    la = classify(AffineParams.from_system(builtin("type_a").system))
    le = classify(AffineParams.from_system(builtin("type_e").system))
    ld = classify(AffineParams.from_system(builtin("divergent_threshold").system))
    elapsed = time.perf_counter() - t0
    e_ok = le.label is TypeLabel.E_CHAOS and (le.evidence.lyapunov or 0) > 0.1
    # exact-arithmetic orbit of the type_e scenario, for the record
    states, _ = exact_affine_orbit(("2.5", "-0.5", "-2.3", "2.3", "0.4", "0.6", "0.1"), ("0.5", "0.7"), 1000)
    escape_step = len(states) - 1
    ok = (la.label is TypeLabel.A_CONVERGENCE and e_ok
          and ld.label is TypeLabel.D_DIVERGENT_SPIRAL and elapsed < 30)
    report(2, ok, f"type_a={la.label.value}, type_e={le.label.value} "
                  f"(diverged fraction {le.evidence.diverged_fraction}, exact orbit passes 1e20 at step {escape_step}), "
                  f"divergent_threshold={ld.label.value}; {elapsed:.2f}s")


def test_criterion_03_chaos_exponent():
    t0 = time.perf_counter()
    ens = lyapunov_ensemble(builtin("chaos_sine").system, 10, 10**6, 1000, seed=SEED)
    elapsed = time.perf_counter() - t0
    dev = ens.mean - math.log(3)
    ok = ens.overflowed == 0 and 1.05 <= ens.mean <= 1.10 and elapsed < 10
    report(3, ok, f"mean lambda_max={ens.mean:.6f}, deviation from ln 3={dev:+.2e}, "
                  f"reference 1.087; {elapsed:.2f}s")


def test_criterion_04_divergence_despite_contraction():
    t = builtin("divergent_threshold").simulate(100)
    all_one = len(t.regimes) == 100 and bool(np.all(t.regimes == 1))
    a100 = abs(t.a[100] - 2)
    v = detect_limit(t)
    rate_err = abs(v.growth_rate / math.log(1.2) - 1) if v.growth_rate else math.inf
    lo = detect_limit(simulate(affine_system(0.5, 1, 0.5, 3, -0.1, 0.95, 0.5), State(1.0, 2.5), 2000))
    hi = detect_limit(simulate(affine_system(0.5, 1, 0.5, 3, -0.1, 1.05, 0.5), State(1.0, 2.5), 2000))
    ok = (all_one and a100 < 1e-10 and v.diverged and rate_err < 0.02
          and not lo.diverged and hi.diverged)
    report(4, ok, f"all regime 1={all_one}, |a100-2|={a100:.1e}, growth rate {v.growth_rate:.8f} "
                  f"(rel err {rate_err:.1e}); delta 0.95 -> {lo.kind.value}, delta 1.05 -> {hi.kind.value}")


def test_criterion_05_monetary_policy():
    sc = builtin("fed_policy")
    one, regime = step(sc.system, sc.initial)
    exact_step = (one.a, one.c) == (1.55, 2.315) and regime is Regime.ONE
    t = sc.simulate(200)
    v = detect_limit(t, sc.run.tol, sc.run.window)
    ts = transitions(t)
    switches = sorted(ts.t12 + ts.t21)
    states, regimes = exact_affine_orbit(("0.9", "0.2", "0.85", "0.3", "0.15", "0.8", "0.09"), ("1.5", "2.5"), 200)
    gold_switches = switch_indices(regimes)
    gold_a, gold_c = float(states[-1][0]), float(states[-1][1])
    limits_ok = (v.converged and abs(v.limit_a - gold_a) < 1e-12 and abs(v.limit_c - gold_c) < 1e-12
                 and abs(v.limit_a - 2) < 1e-6 and abs(v.limit_c - 1.95) < 1e-6)
    notes_ok = "8 quarters" in sc.notes and "2.3%" in sc.notes
    ok = exact_step and limits_ok and switches == gold_switches and notes_ok
    report(5, ok, f"one step {one.a!r},{one.c!r}; {v.kind.value} at tol {sc.run.tol} to "
                  f"({v.limit_a!r}, {v.limit_c!r}) vs oracle ({gold_a!r}, {gold_c!r}); "
                  f"switch indices {switches} vs oracle {gold_switches}; reference claims in notes={notes_ok}")


def _averaging_family(rng):
    L = rng.uniform(-5, 5)
    a1, a2 = rng.uniform(-0.95, 0.95, 2)
    w = rng.uniform(0.05, 0.95)
    sys = SystemSpec(ScalarMapSpec.affine(a1, L * (1 - a1)), ScalarMapSpec.affine(a2, L * (1 - a2)),
                     ThresholdMapSpec.averaging(w))
    return sys, State(*(L + rng.uniform(-10, 10, 2)))


def test_criterion_06_common_limit_suite():
    rng = np.random.default_rng(SEED)
    qualifying, counterexamples = 0, []
    for k in range(200):
        sys, init = _averaging_family(rng)
        v = common_limit_verdict(simulate(sys, init, 1000), tol=1e-6)
        if v.hypotheses_met:
            qualifying += 1
            if not v.conclusion_observed:
                counterexamples.append(k)
    ok = not counterexamples and qualifying > 0
    report(6, ok, f"{qualifying}/200 traces with persistent switching and double convergence; "
                  f"counterexamples {counterexamples}")


def _contracting_family(rng):
    a1, a2 = rng.uniform(-0.9, 0.9, 2)
    b1, b2, e = rng.uniform(-5, 5, 3)
    g = rng.uniform(-0.45, 0.45)
    d = rng.uniform(-0.5, 0.5)
    return affine_system(a1, b1, a2, b2, g, d, e), State(*rng.uniform(-10, 10, 2))


def test_criterion_07_contraction_theorem():
    rng = np.random.default_rng(SEED)
    checked, bad, drawn = 0, [], 0
    while checked < 50:
        drawn += 1
        sys, init = _contracting_family(rng)
        rep = check_contraction(sys)
        assert rep.satisfied
        t = simulate(sys, init, 2000)
        if len(set(t.regimes.tolist())) != 1:
            continue
        m = sys.f if t.regimes[0] == 1 else sys.g
        a_star = m.fixed_point
        c_star = (sys.h.gamma * a_star + sys.h.epsilon) / (1 - sys.h.delta)
        ratio = tail_contraction_ratio(t, a_star, c_star)
        checked += 1
        if ratio is not None and ratio > rep.combined + 0.01:
            bad.append((drawn, ratio, rep.combined))
    contraction_failure = check_contraction(builtin("contraction_failure").system)
    exact = (contraction_failure.L_f, contraction_failure.L_g, contraction_failure.L_h_a, contraction_failure.L_h_c) == (0.5, 0.5, 0.1, 0.8)
    ok = not bad and exact
    report(7, ok, f"{checked} single-regime systems ({drawn} drawn), ratio violations {bad}; "
                  f"contraction_failure constants exact={exact}")


def test_criterion_08_boundary_convention():
    rng = np.random.default_rng(SEED)
    mismatches = 0
    for _ in range(1000):
        a1, b1, a2, b2, g, d, e = rng.uniform(-3, 3, 7)
        sys = affine_system(a1, b1, a2, b2, g, d, e)
        x = float(rng.uniform(-100, 100))
        s, r = step(sys, State(x, x))
        if r is not Regime.ONE or s.a != eval_map(sys.f, x):
            mismatches += 1
    report(8, mismatches == 0, f"1000 boundary states, {mismatches} not mapped by f")


def test_criterion_09_contraction_failure_report():
    sc = builtin("contraction_failure")
    t = sc.simulate(10_000)
    v = detect_limit(t, sc.run.tol, sc.run.window)
    ts = transitions(t)
    switches = [n for n in range(len(t.regimes) - 1) if t.regimes[n] != t.regimes[n + 1]]
    partition = sorted(ts.t12 + ts.t21) == switches and not set(ts.t12) & set(ts.t21)
    exclusive = sum([v.converged, v.diverged, v.kind is LimitKind.PERIODIC, v.kind is LimitKind.UNDECIDED]) == 1
    counts = ts.i1_count + ts.i2_count == len(t) - 1
    states, regimes = mp_affine_orbit(("0.5", "10", "0.5", "15", "0.1", "0.8", "2"), ("15", "22"), 10_000)
    gold_switch = len(switch_indices(regimes))
    golden = len(switches) == gold_switch == 0 and v.converged and abs(v.limit_a - 20) < 1e-9 and abs(v.limit_c - 20) < 1e-9
    documented = "limit cycle" in sc.notes and "(20, 20)" in sc.notes
    ok = partition and exclusive and counts and golden and documented
    report(9, ok, f"switches {len(switches)} (oracle {gold_switch}), verdict {v.kind.value} "
                  f"({v.limit_a!r}, {v.limit_c!r}), visitation {visitation(t).kind.value}, "
                  f"partition={partition}, exclusive={exclusive}, documented={documented}")


def test_criterion_10_analytic_lyapunov():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for k in range(20):
        alpha = rng.choice([-1, 1]) * rng.uniform(0.05, 0.95)
        delta = rng.choice([-1, 1]) * rng.uniform(0.05, 0.95)
        b, g, e = rng.uniform(-3, 3, 3)
        f = ScalarMapSpec.affine(alpha, b)
        sys = SystemSpec(f, f, ThresholdMapSpec.affine(g, delta, e))
        est = lyapunov(sys, State(*rng.uniform(-5, 5, 2)), 10**5, 1000, seed=SEED + k)
        expected = max(math.log(abs(alpha)), math.log(abs(delta)))
        worst = max(worst, abs(est.lambda_max - expected))
    report(10, worst < 1e-3, f"20 single-regime systems, max |lambda - analytic| = {worst:.2e}")
