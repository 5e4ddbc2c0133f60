"""Finite-data estimators for limsup-type barcode entropies.

All growth rates are in bits per unit action (log base 2) and use
log+(x) = max(0, log2 x) with log+(0) = 0.

A limsup cannot be observed from finitely many samples; the estimators
report the supremum of log+(count)/tau over the last ``tail_fraction`` of
the schedule as the headline value, alongside the least-squares slope of
log+(count) against tau on the same tail. Neither is extrapolated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .persistence import Barcode, count_bars, count_bars_many

DEFAULT_TOL = 0.05


class EstimatorError(RuntimeError):
    """An estimator invariant failed on the supplied data."""


def log_plus(x) -> np.ndarray:
    """max(0, log2 x) elementwise, with log+(0) = 0."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 1
    out[pos] = np.log2(x[pos])
    return out


@dataclass(frozen=True)
class EvaluationSchedule:
    tau_values: tuple[float, ...]
    tail_fraction: float = 0.5
    eps_grid: tuple[float, ...] = (0.4, 0.2, 0.1)

    def __post_init__(self):
        taus = tuple(float(t) for t in self.tau_values)
        eps = tuple(float(e) for e in self.eps_grid)
        if not taus:
            raise ValueError("schedule needs at least one tau value")
        if any(t <= 0 or not math.isfinite(t) for t in taus):
            raise ValueError("tau values must be positive and finite")
        if any(b <= a for a, b in zip(taus, taus[1:])):
            raise ValueError("tau values must be strictly increasing")
        if not 0 < self.tail_fraction <= 1:
            raise ValueError("tail_fraction must lie in (0, 1]")
        if any(e <= 0 for e in eps):
            raise ValueError("eps grid values must be positive")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("eps grid must be strictly decreasing")
        object.__setattr__(self, "tau_values", taus)
        object.__setattr__(self, "eps_grid", eps)
        object.__setattr__(self, "tail_fraction", float(self.tail_fraction))

    @classmethod
    def linear(cls, tau_max: float, tau_step: float, tail_fraction: float = 0.5,
               eps_grid: Sequence[float] = (0.4, 0.2, 0.1), tau_min: float | None = None):
        """tau = tau_min, tau_min + step, ..., up to tau_max inclusive."""
        if not tau_step > 0:
            raise ValueError("tau_step must be positive")
        start = tau_step if tau_min is None else tau_min
        n = int(math.floor((tau_max - start) / tau_step + 1e-9)) + 1
        taus = start + tau_step * np.arange(max(n, 0))
        return cls(tuple(taus.tolist()), tail_fraction, tuple(eps_grid))

    @property
    def ratios(self) -> tuple[float, ...]:
        """Consecutive ratios tau_{k+1}/tau_k; these should tend to 1."""
        t = self.tau_values
        return tuple(b / a for a, b in zip(t, t[1:]))

    def tail(self) -> slice:
        n = len(self.tau_values)
        m = max(1, int(math.ceil(self.tail_fraction * n - 1e-9)))
        return slice(n - m, n)

    def scaled(self, a: float) -> "EvaluationSchedule":
        return EvaluationSchedule(tuple(a * t for t in self.tau_values), self.tail_fraction, self.eps_grid)


@dataclass
class EntropyEstimate:
    value: float
    tail_sup: float
    regression_slope: float
    stability_flag: bool
    trace: list[tuple[float, float]] = field(default_factory=list)

    def __post_init__(self):
        for name in ("value", "tail_sup", "regression_slope"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"estimate field {name} must be finite, got {v}")
        if self.value < 0:
            raise ValueError("estimate value must be non-negative")

    def scaled(self, c: float) -> "EntropyEstimate":
        """Multiply every rate (and the raw trace values) by ``c``."""
        return EntropyEstimate(
            value=self.value * c,
            tail_sup=self.tail_sup * c,
            regression_slope=self.regression_slope * c,
            stability_flag=self.stability_flag,
            trace=[(x, y * c) for x, y in self.trace],
        )

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "tail_sup": self.tail_sup,
            "slope": self.regression_slope,
            "stable": self.stability_flag,
            "trace": [[x, y] for x, y in self.trace],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EntropyEstimate":
        expected = {"value", "tail_sup", "slope", "stable", "trace"}
        if set(d) != expected:
            raise ValueError(f"estimate keys must be {sorted(expected)}, got {sorted(d)}")
        return cls(
            value=float(d["value"]),
            tail_sup=float(d["tail_sup"]),
            regression_slope=float(d["slope"]),
            stability_flag=bool(d["stable"]),
            trace=[(float(x), float(y)) for x, y in d["trace"]],
        )


def limsup_rate(taus, counts, tail_fraction: float, tol: float = DEFAULT_TOL) -> EntropyEstimate:
    """Aggregate log+(count)/tau over a schedule into an estimate."""
    taus = np.asarray(taus, dtype=float)
    logs = log_plus(counts)
    ratios = logs / taus
    sched = EvaluationSchedule(tuple(taus.tolist()), tail_fraction, ())
    tail = sched.tail()
    tail_sup = float(ratios[tail].max())
    tt, yy = taus[tail], logs[tail]
    if tt.size >= 2:
        slope = float(np.polyfit(tt, yy, 1)[0])
    else:
        slope = float(ratios[tail][0])
    return EntropyEstimate(
        value=max(0.0, tail_sup),
        tail_sup=tail_sup,
        regression_slope=slope,
        stability_flag=bool(abs(tail_sup - slope) < tol),
        trace=list(zip(taus.tolist(), ratios.tolist())),
    )


def eps_entropy(B: Barcode, eps: float, sched: EvaluationSchedule, tol: float = DEFAULT_TOL) -> EntropyEstimate:
    """Finite-range estimate of the eps-barcode entropy of ``B``."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    counts = count_bars_many(B, eps, sched.tau_values)
    return limsup_rate(sched.tau_values, counts, sched.tail_fraction, tol)


def _across_eps(per_eps: Callable[[float], EntropyEstimate], sched: EvaluationSchedule,
                tol: float) -> EntropyEstimate:
    if not sched.eps_grid:
        raise ValueError("schedule has an empty eps grid")
    ests = [per_eps(e) for e in sched.eps_grid]
    values = [e.value for e in ests]
    for coarse, fine, e in zip(values, values[1:], sched.eps_grid[1:]):
        if fine < coarse - tol:
            raise EstimatorError(
                f"eps-entropy dropped from {coarse:.6g} to {fine:.6g} when eps decreased to {e:g}"
            )
    last = ests[-1]
    stable = abs(values[-1] - values[-2]) < tol if len(values) > 1 else False
    return EntropyEstimate(
        value=last.value,
        tail_sup=last.tail_sup,
        regression_slope=last.regression_slope,
        stability_flag=bool(stable),
        trace=list(zip(sched.eps_grid, values)),
    )


def barcode_entropy(B: Barcode, sched: EvaluationSchedule, tol: float = DEFAULT_TOL) -> EntropyEstimate:
    """eps -> 0 surrogate: the estimate at the smallest eps of the grid.

    The trace holds ``(eps, value)`` for every grid point. The stability
    flag is set when the last two grid values agree within ``tol``.
    """
    return _across_eps(lambda e: eps_entropy(B, e, sched, tol), sched, tol)


def dyn_bar_count(B: Barcode, eps: float, s: float) -> int:
    """Bars longer than eps beginning below s - eps."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    return count_bars(B, eps, s - eps)


def dyn_entropy(family: Callable[[float], Barcode], eps: float, sched: EvaluationSchedule,
                cutoff: Callable[[float], float] | None = None,
                tol: float = DEFAULT_TOL) -> EntropyEstimate:
    """Finite-range dynamics entropy of an indexed family of barcodes.

    At each ``s`` of the schedule counts ``dyn_bar_count(family(s), eps,
    cutoff(s))`` and divides its log+ by ``s``. ``cutoff`` defaults to the
    identity; for Floer-type families it is the top of the action window.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    cut = cutoff or (lambda s: s)
    counts = [dyn_bar_count(family(s), eps, cut(s)) for s in sched.tau_values]
    return limsup_rate(sched.tau_values, counts, sched.tail_fraction, tol)


def dyn_barcode_entropy(family: Callable[[float], Barcode], sched: EvaluationSchedule,
                        cutoff: Callable[[float], float] | None = None,
                        tol: float = DEFAULT_TOL) -> EntropyEstimate:
    """``dyn_entropy`` across the eps grid, reported at the smallest eps."""
    cache: dict[float, Barcode] = {}

    def fam(s):
        if s not in cache:
            cache[s] = family(s)
        return cache[s]

    return _across_eps(lambda e: dyn_entropy(fam, e, sched, cutoff, tol), sched, tol)


def planted_barcode(rate: float, tau_max: float, length: float = 1.0) -> Barcode:
    """Bars of a fixed length whose count below tau is round(2**(rate*tau)).

    Births are placed by inverting the target count function: the j-th bar
    is born where 2**(rate*tau) first exceeds j - 1/2 (clamped at 0). Only
    counts for tau <= tau_max are planted.
    """
    if not rate > 0:
        raise ValueError("planted rate must be positive")
    n = int(round(2.0 ** (rate * tau_max)))
    j = np.arange(1, n + 1, dtype=float)
    births = np.maximum(0.0, np.log2(j - 0.5) / rate)
    uniq, mult = np.unique(births, return_counts=True)
    return Barcode(uniq, uniq + length, mult)
