import math

import numpy as np
import pytest

from bel.estimators import EvaluationSchedule
from bel.io import emit_report, parse_report
from bel.lab import (
    UNDEFINED_RATIO,
    ComparisonReport,
    CrossingEnergyModel,
    corollary_c_report,
    hbar_estimate,
    synth_floer_barcode,
    theorem_b_check,
)
from bel.persistence import INF, count_bars
from bel.profiles import Profile, contact_to_hamiltonian, standard_profile
from bel.symbolic import FULL_SHIFT, GOLDEN_MEAN, SELF_LOOP, SFTFlow, band_count

P0 = standard_profile()
MODEL = CrossingEnergyModel(sigma=0.5, band=(1.5, 1.9))
SCHED = EvaluationSchedule.linear(25, 0.5)
GOLDEN_H = math.log2((1 + 5 ** 0.5) / 2)


def test_model_validation():
    with pytest.raises(ValueError):
        CrossingEnergyModel(0.0, (1.5, 1.9))
    with pytest.raises(ValueError):
        CrossingEnergyModel(0.5, (1.9, 1.5))
    with pytest.raises(ValueError):
        CrossingEnergyModel(0.5, (1.0, 1.5))
    with pytest.raises(ValueError):
        CrossingEnergyModel(0.5, (1.5, 1.9), bars_per_orbit=0)
    with pytest.raises(ValueError):
        CrossingEnergyModel(0.5, (1.5, 1.9), length_model="gamma")
    with pytest.raises(ValueError):
        synth_floer_barcode(SFTFlow(FULL_SHIFT), P0, CrossingEnergyModel(0.5, (1.5, 2.5)), 2.0)


# -- synthetic barcodes ----------------------------------------------------------------


def test_synth_example_four_bars():
    B = synth_floer_barcode(SFTFlow(FULL_SHIFT), P0, MODEL, 2.0)
    assert B.total == 4 == band_count(SFTFlow(FULL_SHIFT), P0, 1.5, 1.9, 2.0)
    assert np.allclose(B.lengths, 0.5)
    # all four orbits have period 3 and action s fa(T/s) = 2 fa(1.5)
    assert np.allclose(B.births, 2 * contact_to_hamiltonian(P0, 1.5))


def test_synth_empty_when_no_orbits():
    assert synth_floer_barcode(SFTFlow(FULL_SHIFT), P0, MODEL, 0.3).total == 0


@pytest.mark.parametrize("A", [FULL_SHIFT, GOLDEN_MEAN, SELF_LOOP])
def test_synth_count_is_band_count(A):
    F = SFTFlow(A)
    for k in (1, 3):
        M = CrossingEnergyModel(0.5, (1.3, 1.8), bars_per_orbit=k)
        for s in np.linspace(0.5, 9, 18):
            B = synth_floer_barcode(F, P0, M, float(s))
            assert B.total == k * band_count(F, P0, 1.3, 1.8, float(s))


def test_synth_count_vs_eps():
    F = SFTFlow(GOLDEN_MEAN)
    s = 6.0
    B = synth_floer_barcode(F, P0, MODEL, s)
    n = band_count(F, P0, 1.5, 1.9, s)
    assert n > 0
    for eps in (0.1, 0.3, 0.49):
        assert count_bars(B, eps, INF) == n
    for eps in (0.5, 0.8):
        assert count_bars(B, eps, INF) == 0


def test_synth_births_in_action_window():
    # births s fa(T/s) sit over contact periods, and fa' in [1, rmax] bounds them
    F = SFTFlow(FULL_SHIFT)
    for s in (2.0, 4.5, 8.0):
        B = synth_floer_barcode(F, P0, MODEL, s)
        assert np.all(B.births >= 1.0 * s - 1e-9)
        assert np.all(B.births <= s * P0.c + 1e-9)


def test_random_length_model():
    M = CrossingEnergyModel(0.5, (1.5, 1.9), length_model="random", seed=3)
    F = SFTFlow(FULL_SHIFT)
    B1 = synth_floer_barcode(F, P0, M, 5.0)
    B2 = synth_floer_barcode(F, P0, M, 5.0)
    assert B1 == B2
    assert np.all(B1.lengths >= 0.5)
    assert B1.total == band_count(F, P0, 1.5, 1.9, 5.0)


# -- entropy comparisons -------------------------------------------------------------------


def test_hbar_needs_eps_below_sigma():
    sched = EvaluationSchedule(SCHED.tau_values, 0.5, (0.8, 0.6))
    with pytest.raises(ValueError):
        hbar_estimate(SFTFlow(FULL_SHIFT), P0, MODEL, sched)


def test_floor_and_cap_golden():
    rep = theorem_b_check(SFTFlow(GOLDEN_MEAN), P0, MODEL, SCHED)
    assert rep.inequality_flags["floor"] and rep.inequality_flags["cap"]
    assert rep.hbar_estimate.value >= 0.9 * rep.htop_estimate.value - 0.05
    assert rep.ratio == pytest.approx(rep.hbar_estimate.value / rep.htop_estimate.value)


@pytest.mark.xfail(strict=True, reason="finite-range htop estimate sits near 0.57, below the exact 0.694")
def test_floor_golden_against_exact_entropy():
    rep = theorem_b_check(SFTFlow(GOLDEN_MEAN), P0, MODEL, SCHED)
    assert rep.hbar_estimate.value >= 0.9 * GOLDEN_H - 0.05


@pytest.mark.xfail(strict=True, reason="finite-range hbar for the full shift is near 0.76")
def test_full_shift_hbar_window():
    rep = theorem_b_check(SFTFlow(FULL_SHIFT), P0, MODEL, SCHED)
    assert 0.9 * 1.0 - 0.05 <= rep.hbar_estimate.value <= 1.0 + 0.05


def test_full_shift_flags():
    rep = theorem_b_check(SFTFlow(FULL_SHIFT), P0, MODEL, SCHED)
    assert rep.inequality_flags == {"floor": True, "cap": True}


def test_self_loop_prime_orbits():
    rep = theorem_b_check(SFTFlow(SELF_LOOP), P0, MODEL, SCHED, count_iterates=False)
    assert rep.hbar_estimate.value == 0.0
    assert rep.htop_estimate.value == 0.0
    assert rep.ratio == UNDEFINED_RATIO
    assert rep.inequality_flags["floor"]


def test_self_loop_with_iterates():
    # iterates make p(s) = floor(s), whose log2(s)/s decay is still visible at s <= 25
    rep = theorem_b_check(SFTFlow(SELF_LOOP), P0, MODEL, SCHED)
    assert 0 < rep.htop_estimate.value < 0.3
    assert rep.inequality_flags["cap"]


def test_cap_holds_on_random_profiles():
    rng = np.random.default_rng(11)
    F = SFTFlow(GOLDEN_MEAN)
    for _ in range(3):
        a = float(rng.uniform(1.0, 3.0))
        P = Profile.quadratic(a, float(rng.uniform(2.0, 3.0)))
        rep = theorem_b_check(F, P, CrossingEnergyModel(0.5, (1.2, 1.8)), SCHED)
        assert rep.inequality_flags["cap"]


def test_band_sweep_golden():
    rep = corollary_c_report(SFTFlow(GOLDEN_MEAN), P0, MODEL, SCHED)
    assert abs(rep.ratio - 1) <= 0.05
    assert [r["eta"] for r in rep.trace] == [0.2, 0.1, 0.05]
    # bands widen towards the slope, so per-band estimates do not decrease
    hb = [r["hbar"] for r in rep.trace]
    assert hb == sorted(hb)
    assert rep.inequality_flags["floor"]


def test_band_sweep_undefined_for_zero_entropy():
    rep = corollary_c_report(SFTFlow(SELF_LOOP), P0, MODEL, SCHED, count_iterates=False)
    assert rep.ratio == UNDEFINED_RATIO
    assert rep.hbar_estimate.value == 0.0


def test_band_sweep_validation():
    F = SFTFlow(FULL_SHIFT)
    with pytest.raises(ValueError):
        corollary_c_report(F, P0, MODEL, SCHED, eta_schedule=(0.1, 0.1))
    with pytest.raises(ValueError):
        corollary_c_report(F, P0, MODEL, SCHED, eta_schedule=(1.5,))
    # eta = 0.9 puts r_plus below r_minus = 1.5
    with pytest.raises(ValueError):
        corollary_c_report(F, P0, MODEL, SCHED, eta_schedule=(0.9,))


def test_report_determinism_and_round_trip():
    F = SFTFlow(GOLDEN_MEAN)
    t1 = emit_report(corollary_c_report(F, P0, MODEL, SCHED))
    t2 = emit_report(corollary_c_report(SFTFlow(GOLDEN_MEAN), P0, MODEL, SCHED))
    assert t1 == t2
    R = parse_report(t1)
    assert isinstance(R, ComparisonReport)
    assert emit_report(R) == t1


def test_report_from_dict_rejects_unknown_keys():
    rep = theorem_b_check(SFTFlow(GOLDEN_MEAN), P0, MODEL, SCHED)
    d = rep.to_dict()
    d["extra"] = 1
    with pytest.raises(ValueError):
        ComparisonReport.from_dict(d)
