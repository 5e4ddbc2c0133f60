import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bel.estimators import (
    EntropyEstimate,
    EstimatorError,
    EvaluationSchedule,
    barcode_entropy,
    dyn_bar_count,
    dyn_entropy,
    eps_entropy,
    limsup_rate,
    log_plus,
    planted_barcode,
)
from bel.persistence import EMPTY, INF, Barcode, count_bars, count_bars_many, truncate
from conftest import random_barcode

SCHED = EvaluationSchedule.linear(40, 1.0)
PLANTED = planted_barcode(0.5, 42)


def test_log_plus_conventions():
    assert log_plus([0, 0.5, 1, 2, 8]).tolist() == [0, 0, 0, 1, 3]


def test_schedule_validation():
    with pytest.raises(ValueError):
        EvaluationSchedule((1, 1, 2))
    with pytest.raises(ValueError):
        EvaluationSchedule((0, 1))
    with pytest.raises(ValueError):
        EvaluationSchedule(())
    with pytest.raises(ValueError):
        EvaluationSchedule((1, 2), tail_fraction=0)
    with pytest.raises(ValueError):
        EvaluationSchedule((1, 2), eps_grid=(0.1, 0.2))
    with pytest.raises(ValueError):
        EvaluationSchedule((1, 2), eps_grid=(0.1, -0.2))


def test_schedule_ratios_and_tail():
    s = EvaluationSchedule((1, 2, 4, 5), tail_fraction=0.5)
    assert s.ratios == (2.0, 2.0, 1.25)
    assert s.tail() == slice(2, 4)
    assert EvaluationSchedule.linear(10, 0.5).tau_values[-1] == 10.0


def test_planted_counts_are_exact():
    target = np.round(2.0 ** (0.5 * np.arange(1, 41)))
    got = count_bars_many(PLANTED, 0.5, np.arange(1, 41))
    assert got.tolist() == target.astype(int).tolist()


@pytest.mark.parametrize("B", [Barcode([0], [INF]), EMPTY])
def test_eps_entropy_trivial(B):
    assert eps_entropy(B, 0.3, SCHED).value == 0.0


def test_eps_entropy_rejects_bad_eps():
    with pytest.raises(ValueError):
        eps_entropy(PLANTED, 0.0, SCHED)


def test_eps_entropy_planted():
    est = eps_entropy(PLANTED, 0.5, SCHED)
    assert abs(est.value - 0.5) <= 0.05
    assert est.stability_flag


def test_barcode_entropy_trivial():
    est = barcode_entropy(Barcode([0], [INF]), SCHED)
    assert est.value == 0 and all(v == 0 for _, v in est.trace)


def test_barcode_entropy_planted_every_grid_point():
    sched = EvaluationSchedule(SCHED.tau_values, 0.5, (0.45, 0.3, 0.2, 0.1))
    est = barcode_entropy(PLANTED, sched)
    assert len(est.trace) == 4
    for _, v in est.trace:
        assert abs(v - 0.5) <= 0.05


def test_barcode_entropy_scaling_halves():
    est = barcode_entropy(PLANTED, SCHED)
    scaled = barcode_entropy(PLANTED.scaled(2.0), SCHED.scaled(2.0))
    assert abs(scaled.value - est.value / 2) <= 0.05


def test_barcode_entropy_detects_drop():
    # a real barcode cannot drop as eps shrinks, so feed the estimates directly
    sched = EvaluationSchedule(SCHED.tau_values, 0.5, (0.4, 0.2))
    calls = iter([EntropyEstimate(0.8, 0.8, 0.8, True), EntropyEstimate(0.5, 0.5, 0.5, True)])
    from bel import estimators

    with pytest.raises(EstimatorError):
        estimators._across_eps(lambda e: next(calls), sched, 0.05)


def test_eps_entropy_below_barcode_entropy(rng):
    for _ in range(30):
        B = random_barcode(rng, max_bars=40, span=30)
        sched = EvaluationSchedule.linear(30, 1.0)
        try:
            top = barcode_entropy(B, sched).value
        except EstimatorError:
            continue
        for e in sched.eps_grid:
            assert eps_entropy(B, e, sched).value <= top + 0.05


@pytest.mark.parametrize("eps, s, expected", [(0.3, 0.2, 0), (0.3, 0.5, 1)])
def test_dyn_bar_count_examples(eps, s, expected):
    assert dyn_bar_count(Barcode([0], [1]), eps, s) == expected


def test_dyn_bar_count_is_shifted_count(rng):
    for _ in range(200):
        B = random_barcode(rng)
        eps = float(rng.uniform(0.01, 2))
        s = float(rng.uniform(-1, 12))
        assert dyn_bar_count(B, eps, s) == count_bars(B, eps, s - eps)


def test_dyn_entropy_trivial():
    B = Barcode([0], [INF])
    assert dyn_entropy(lambda s: truncate(B, s), 0.3, SCHED).value == 0


def test_dyn_entropy_matches_eps_entropy_on_planted():
    fam = lambda s: truncate(PLANTED, s)  # noqa: E731
    d = dyn_entropy(fam, 0.4, SCHED)
    e = eps_entropy(PLANTED, 0.4, SCHED)
    assert abs(d.value - 0.5) <= 0.05
    assert abs(d.value - e.value) <= 0.05


def test_dyn_entropy_sequence_robust():
    k = np.arange(1, 41, dtype=float)
    s1 = EvaluationSchedule(tuple(k))
    s2 = EvaluationSchedule(tuple(k + np.log2(k + 1)))
    fam = lambda s: truncate(PLANTED, s)  # noqa: E731
    a = dyn_entropy(fam, 0.4, s1).value
    b = dyn_entropy(fam, 0.4, s2).value
    assert abs(a - b) <= 0.05


def test_dyn_vs_plain_sup_bound():
    # sup over the grid of both ratios agree within 2 log+ fb / tau_min
    taus = np.arange(4.0, 41.0)
    fb = count_bars_many(PLANTED, 0.5, taus)
    fbd = np.array([dyn_bar_count(truncate(PLANTED, t), 0.5, t) for t in taus])
    r1 = (log_plus(fb) / taus).max()
    r2 = (log_plus(fbd) / taus).max()
    assert abs(r1 - r2) <= 2 * log_plus(fb).max() / taus[0]


PROPS = settings(max_examples=100, deadline=None)


@PROPS
@given(st.integers(1, 6), st.integers(1, 4))
def test_action_rescaling_identity(seed, scale):
    rng = np.random.default_rng(seed)
    B = random_barcode(rng, max_bars=25, span=20)
    a = float(scale) / 2 + 0.5
    eps = 0.3
    taus = np.arange(1.0, 21.0)
    r = log_plus(count_bars_many(B, eps, taus)) / taus
    ra = log_plus(count_bars_many(B.scaled(a), a * eps, a * taus)) / (a * taus)
    assert np.allclose(ra, r / a)


def test_limsup_rate_fields():
    taus = np.arange(1.0, 11.0)
    est = limsup_rate(taus, 2.0 ** taus, 0.5)
    assert est.value == pytest.approx(1.0)
    assert est.regression_slope == pytest.approx(1.0)
    assert est.stability_flag
    assert len(est.trace) == 10


def test_estimate_validation_and_round_trip():
    with pytest.raises(ValueError):
        EntropyEstimate(math.nan, 0, 0, True)
    with pytest.raises(ValueError):
        EntropyEstimate(-1, 0, 0, True)
    e = EntropyEstimate(0.5, 0.5, 0.4, False, [(1.0, 0.25)])
    assert EntropyEstimate.from_dict(e.to_dict()) == e
    with pytest.raises(ValueError):
        EntropyEstimate.from_dict({**e.to_dict(), "extra": 1})
