"""Exit criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line with the measured numbers
and its wall time, then asserts. Run alone with ``pytest -m acceptance -s``.
"""
import math
import time

import numpy as np
import pytest

from bel.estimators import (
    EvaluationSchedule,
    barcode_entropy,
    dyn_bar_count,
    dyn_barcode_entropy,
    planted_barcode,
)
from bel.lab import CrossingEnergyModel, corollary_c_report, theorem_b_check
from bel.persistence import (
    FilteredComplex,
    Reparametrization,
    count_bars,
    direct_sum,
    rank_invariant,
    reduce_filtration,
    reparametrize,
    truncate,
)
from bel.profiles import (
    Profile,
    action_of_radius,
    contact_to_hamiltonian,
    hf_barcode,
    radius_of_period,
    sandwich_counts,
    scale_profile,
    standard_profile,
)
from bel.symbolic import (
    FULL_SHIFT,
    GOLDEN_MEAN,
    SELF_LOOP,
    SFTFlow,
    TorusFlow,
    band_count_many,
    band_entropy,
    band_slopes,
    exact_return,
    htop_estimate,
    shadow,
)
from conftest import random_barcode, random_spline
from oracles import eigen_entropy, matrix_trace_powers, midpoint_samples, random_complex, sublevel_rank

pytestmark = pytest.mark.acceptance

P0 = standard_profile()
FULL_H = eigen_entropy(FULL_SHIFT)
GOLDEN_H = eigen_entropy(GOLDEN_MEAN)


@pytest.fixture
def verdict(capsys):
    def emit(n: int, title: str, ok: bool, detail: str, elapsed: float):
        with capsys.disabled():
            print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'} {title}: {detail} ({elapsed:.2f} s)")
    return emit


def _pl(rng):
    k = int(rng.integers(2, 6))
    xs = np.sort(rng.uniform(0, 12, k))
    xs = np.concatenate([[0.0], xs + np.arange(1, k + 1) * 1e-3])
    ys = np.concatenate([[0.0], np.cumsum(rng.uniform(0.2, 3.0, k) * np.diff(xs))])
    return Reparametrization.piecewise_linear(xs, ys)


def test_criterion_1_persistence_oracle(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    checked = mismatches = 0
    for _ in range(200):
        cells = random_complex(rng, max_cells=8)
        F = FilteredComplex([(str(i), d, b, [str(f) for f in faces]) for i, (d, b, faces) in enumerate(cells)])
        B = reduce_filtration(F)
        samples = midpoint_samples([c[1] for c in cells])
        for i, s in enumerate(samples):
            for t in samples[i:]:
                checked += 1
                mismatches += rank_invariant(B, s, t) != sublevel_rank(cells, s, t)
    dt = time.perf_counter() - t0
    ok = mismatches == 0 and dt < 10
    verdict(1, "rank invariant vs F2 oracle", ok, f"{checked} pairs, {mismatches} mismatches", dt)
    assert ok


def test_criterion_2_counting_identities(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2025)
    bad = {"monotone": 0, "dyn_shift": 0, "idempotent": 0, "additive": 0, "reparam": 0}
    for _ in range(1000):
        B = random_barcode(rng, max_bars=15, span=12)
        B2 = random_barcode(rng, max_bars=8, span=12)
        eps = float(rng.uniform(0.01, 2))
        s, t = np.sort(rng.uniform(-1, 13, 2))
        bad["monotone"] += count_bars(B, eps, s) > count_bars(B, eps, t)
        bad["dyn_shift"] += dyn_bar_count(B, eps, t) != count_bars(B, eps, t - eps)
        V = truncate(B, t)
        bad["idempotent"] += truncate(V, t) != V
        bad["additive"] += count_bars(direct_sum(B, B2), eps, t) != count_bars(B, eps, t) + count_bars(B2, eps, t)
        xi = _pl(rng)
        W = reparametrize(B, xi)
        u = float(rng.uniform(0, 12))
        bad["reparam"] += count_bars(W, xi.lipschitz_inverse * eps, u) > count_bars(B, eps, float(xi(u)))
    dt = time.perf_counter() - t0
    ok = not any(bad.values()) and dt < 5
    verdict(2, "counting and functor identities", ok, f"1000 barcodes, violations {bad}", dt)
    assert ok


def test_criterion_3_action_functions(verdict):
    t0 = time.perf_counter()
    profiles = [P0] + [random_spline(np.random.default_rng(100 + i)) for i in range(20)]
    worst = {"A'": 0.0, "c": 0.0, "fa'": 0.0}
    fails = []
    for P in profiles:
        r = np.linspace(1 + 1e-4, P.rmax - 1e-4, 200)
        h = 1e-6
        fd = (action_of_radius(P, r + h) - action_of_radius(P, r - h)) / (2 * h)
        exact = r * P.d2h(r)
        worst["A'"] = max(worst["A'"], float(np.max(np.abs(fd - exact) / np.abs(exact))))
        A = action_of_radius(P, np.linspace(1, P.rmax, 2001))
        worst["c"] = max(worst["c"], abs(float(A.max()) - P.c) / P.c)
        if P.c < P.a:
            fails.append("c<a")
        T = np.linspace(1e-3, P.a - 1e-3, 500)
        dfa = (contact_to_hamiltonian(P, T + h) - contact_to_hamiltonian(P, T - h)) / (2 * h)
        rt = radius_of_period(P, T)
        worst["fa'"] = max(worst["fa'"], float(np.max(np.abs(dfa - rt) / rt)))
        if np.any(dfa < 1 - 1e-6) or np.any(dfa > P.rmax + 1e-6):
            fails.append("fa' range")
        Tg = np.linspace(0.05, P.a, 9)
        gaps = np.array([contact_to_hamiltonian(scale_profile(P, s), Tg) - Tg for s in (1, 2, 4, 16, 64, 256)])
        if np.any(np.diff(gaps, axis=0) > 1e-12) or np.any(gaps[-1] > Tg * (radius_of_period(P, Tg / 256) - 1) + 1e-12):
            fails.append("fa limit")
    for a in (1.0, 2.0, 3.0):
        lo, hi = Profile.quadratic(a, 3.0), Profile.quadratic(a, 1.8)
        T = np.linspace(0, a, 200)
        if np.any(contact_to_hamiltonian(hi, T) > contact_to_hamiltonian(lo, T) + 1e-12):
            fails.append("nested")
    dt = time.perf_counter() - t0
    ok = worst["A'"] <= 1e-6 and worst["fa'"] <= 1e-6 and worst["c"] <= 1e-9 and not fails and dt < 5
    detail = ", ".join(f"max rel err {k} {v:.2e}" for k, v in worst.items()) + f", failures {fails}"
    verdict(3, "action functions on 21 profiles", ok, detail, dt)
    assert ok


def test_criterion_4_sandwich_and_bridge(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2026)
    profiles = [P0] + [random_spline(np.random.default_rng(100 + i)) for i in range(20)]
    violations = 0
    for _ in range(1000):
        B = random_barcode(rng, max_bars=15, span=8)
        P = profiles[int(rng.integers(len(profiles)))]
        s = float(rng.uniform(0.3, 4))
        eps = float(rng.uniform(0.01, 1.0))
        y = float(rng.uniform(0, s * P.a))
        hi, mid, lo = sandwich_counts(B, P, s, eps, y)
        violations += not (hi >= mid >= lo)
    B = planted_barcode(0.5, 32)
    sched = EvaluationSchedule.linear(30, 0.5)
    hb = barcode_entropy(B, sched).value
    dyn = dyn_barcode_entropy(lambda s: hf_barcode(B, P0, s), sched.scaled(1 / P0.a),
                              cutoff=lambda s: scale_profile(P0, s).c).value / P0.a
    dt = time.perf_counter() - t0
    ok = violations == 0 and abs(hb - dyn) <= 0.05 and dt < 30
    verdict(4, "sandwich and entropy bridge", ok,
            f"{violations} sandwich violations in 1000, hbar {hb:.4f} vs dyn/a {dyn:.4f}", dt)
    assert ok


def _trace_identity_holds(A, nmax=20) -> bool:
    N = SFTFlow(A).prime_counts_by_length(nmax)
    tr = matrix_trace_powers(A, nmax)
    return all(sum(d * N[d] for d in range(1, n + 1) if n % d == 0) == tr[n] for n in range(1, nmax + 1))


def test_criterion_5_symbolic_entropy(verdict):
    t0 = time.perf_counter()
    full = htop_estimate(SFTFlow(FULL_SHIFT), EvaluationSchedule.linear(20, 0.5))
    gold = htop_estimate(SFTFlow(GOLDEN_MEAN), EvaluationSchedule.linear(25, 0.5))
    traces = _trace_identity_holds(FULL_SHIFT) and _trace_identity_holds(GOLDEN_MEAN)
    dt = time.perf_counter() - t0
    ok_full = abs(full.value - 1.0) <= 0.05
    ok_gold = abs(gold.value - 0.694) <= 0.02
    ok = ok_full and ok_gold and traces and dt < 60
    verdict(5, "htop estimates", ok,
            f"full shift {full.value:.4f} (target 1 +- 0.05, slope {full.regression_slope:.4f}), "
            f"golden {gold.value:.4f} (target 0.694 +- 0.02, slope {gold.regression_slope:.4f}), "
            f"trace identity {'exact' if traces else 'BROKEN'}", dt)
    assert ok


def test_criterion_6_band_counts(verdict):
    t0 = time.perf_counter()
    r_lo, r_hi = 1.5, 1.9
    a_lo, a_hi = band_slopes(P0, r_lo, r_hi)
    parts, ok = [], True
    for name, A, L, smax in (("full shift", FULL_SHIFT, FULL_H, 20), ("golden", GOLDEN_MEAN, GOLDEN_H, 25)):
        F = SFTFlow(A)
        s = np.linspace(0.25, smax, 4 * smax)
        identity = band_count_many(F, P0, r_lo, r_hi, s).tolist() == (
            F.count_orbits_many(a_hi * s) - F.count_orbits_many(a_lo * s)).tolist()
        est = band_entropy(F, P0, r_lo, r_hi, EvaluationSchedule.linear(smax, 0.5))
        # growth per unit of s measured in units of the slope a
        v = est.value / P0.a
        lo, hi = (a_hi / P0.a) * L - 0.05, L + 0.05
        good = identity and lo <= v <= hi
        ok &= good
        parts.append(f"{name} identity {'exact' if identity else 'BROKEN'}, "
                     f"rate/a {v:.4f} in [{lo:.3f}, {hi:.3f}]? {good}")
    dt = time.perf_counter() - t0
    ok &= dt < 60
    verdict(6, "band counts on P0, band (1.5, 1.9)", ok, "; ".join(parts), dt)
    assert ok


def test_criterion_7_shadowing(verdict):
    F = TorusFlow()
    eta = 1e-4

    def run():
        out = []
        for seed in range(100):
            curve, _ = F.random_pseudo_orbit(eta, seed)
            out.append(shadow(curve, F, eta, 0.01))
        return out

    t0 = time.perf_counter()
    first = run()
    dt = time.perf_counter() - t0
    second = run()
    residual = max(r.residual for r in first)
    C = max(r.constant(eta) for r in first)
    exact = all(exact_return(F, r) == r.exact_points[0] for r in first)
    same = all(a.key() == b.key() and a.distance == b.distance for a, b in zip(first, second))
    ok = residual <= 1e-10 and C <= 10 and exact and same and dt < 30
    verdict(7, "shadowing of 100 pseudo-orbits", ok,
            f"max residual {residual:.2e}, C = {C:.4f}, exact returns {exact}, deterministic {same}", dt)
    assert ok


def test_criterion_8_model_comparison(verdict):
    t0 = time.perf_counter()
    M = CrossingEnergyModel(sigma=0.5, band=(1.5, 1.9))
    sched = EvaluationSchedule.linear(25, 0.5)
    parts, ok = [], True
    for name, A in (("full shift", FULL_SHIFT), ("golden", GOLDEN_MEAN)):
        rep = corollary_c_report(SFTFlow(A), P0, M, sched, eta_schedule=(0.2, 0.1, 0.05))
        good = 0.95 <= rep.ratio <= 1.05 and rep.inequality_flags["floor"]
        ok &= good
        last = rep.trace[-1]
        parts.append(f"{name} ratio {rep.ratio:.4f} (eta=0.05 band {last['ratio']:.4f}), floor {rep.inequality_flags['floor']}")
    # zero-entropy control, counting prime orbits so that p(s) is bounded
    ctrl = theorem_b_check(SFTFlow(SELF_LOOP), P0, M, sched, count_iterates=False)
    ok &= ctrl.inequality_flags["floor"]
    parts.append(f"self-loop hbar {ctrl.hbar_estimate.value:.4f} htop {ctrl.htop_estimate.value:.4f} "
                 f"ratio {ctrl.ratio}, floor {ctrl.inequality_flags['floor']}")
    info = theorem_b_check(SFTFlow(SELF_LOOP), P0, M, sched)
    parts.append(f"(with iterates: hbar {info.hbar_estimate.value:.4f} htop {info.htop_estimate.value:.4f} "
                 f"floor {info.inequality_flags['floor']}, informational)")
    dt = time.perf_counter() - t0
    ok &= dt < 120
    verdict(8, "model-level entropy comparison", ok, "; ".join(parts), dt)
    assert ok
