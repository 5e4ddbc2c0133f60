"""Model-level comparison of barcode entropy and topological entropy.

Each closed orbit of a symbolic flow whose period falls in the band
(h'(r-) s, h'(r+) s] of a profile lifts to a 1-periodic orbit of s*h with
Hamiltonian action fa_{sh}(T). The crossing-energy model puts a bar of
length sigma at every such action; its dynamical entropy, divided by the
slope, is compared with the growth rate of the orbit count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .estimators import (
    DEFAULT_TOL,
    EntropyEstimate,
    EvaluationSchedule,
    dyn_barcode_entropy,
)
from .persistence import EMPTY, Barcode
from .profiles import Profile, contact_to_hamiltonian, radius_of_period, scale_profile
from .symbolic import PERIOD_RTOL, SFTFlow, band_slopes, htop_estimate

UNDEFINED_RATIO = "undefined (htop=0)"


@dataclass(frozen=True)
class CrossingEnergyModel:
    """Bars of length ``sigma`` for every orbit in the radius band.

    With ``length_model="random"`` the lengths are sigma plus an
    exponential variable of mean sigma drawn from ``seed``; this richer
    variant is a modelling choice only.
    """

    sigma: float
    band: tuple[float, float]
    bars_per_orbit: int = 1
    length_model: str = "equal"
    seed: int = 0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        r_lo, r_hi = (float(x) for x in self.band)
        if not 1.0 < r_lo < r_hi:
            raise ValueError(f"band needs 1 < r_minus < r_plus, got {self.band}")
        if int(self.bars_per_orbit) != self.bars_per_orbit or self.bars_per_orbit < 1:
            raise ValueError("bars_per_orbit must be a positive integer")
        if self.length_model not in ("equal", "random"):
            raise ValueError("length_model must be 'equal' or 'random'")
        object.__setattr__(self, "band", (r_lo, r_hi))

    def check(self, P: Profile):
        if not self.band[1] < P.rmax:
            raise ValueError(f"band {self.band} must lie inside (1, rmax={P.rmax:g})")

    def with_band(self, r_minus: float, r_plus: float) -> "CrossingEnergyModel":
        return CrossingEnergyModel(self.sigma, (r_minus, r_plus), self.bars_per_orbit,
                                   self.length_model, self.seed)

    def to_dict(self) -> dict:
        return {
            "sigma": self.sigma,
            "band": list(self.band),
            "bars_per_orbit": self.bars_per_orbit,
            "length_model": self.length_model,
            "seed": self.seed,
        }


def band_periods(F: SFTFlow, lo: float, hi: float, count_iterates: bool = True):
    """Distinct orbit periods in (lo, hi] with their multiplicities."""
    if hi <= 0 or hi <= lo:
        return np.zeros(0), np.zeros(0, dtype=np.int64)
    F.census(hi)
    T, N = F._periods, F._numbers
    keep = T <= hi * (1 + PERIOD_RTOL) + PERIOD_RTOL
    T, N = T[keep], N[keep]
    if T.size == 0:
        return np.zeros(0), np.zeros(0, dtype=np.int64)
    kmax = int(math.floor((hi * (1 + PERIOD_RTOL) + PERIOD_RTOL) / T.min())) if count_iterates else 1
    per, mult = [], []
    lim_hi = hi * (1 + PERIOD_RTOL) + PERIOD_RTOL
    lim_lo = lo * (1 + PERIOD_RTOL) + PERIOD_RTOL
    for k in range(1, kmax + 1):
        kT = k * T
        sel = (kT <= lim_hi) & (kT > lim_lo)
        per.append(kT[sel])
        mult.append(N[sel])
    per = np.concatenate(per)
    mult = np.concatenate(mult)
    uniq, inv = np.unique(per, return_inverse=True)
    tot = np.zeros(uniq.size, dtype=object)
    np.add.at(tot, inv, mult)
    if tot.size and max(tot) > np.iinfo(np.int64).max:
        raise OverflowError("band multiplicities exceed int64; use a smaller s")
    return uniq, tot.astype(np.int64)


def synth_floer_barcode(F: SFTFlow, P: Profile, M: CrossingEnergyModel, s: float,
                        count_iterates: bool = True) -> Barcode:
    """Crossing-energy model of the Floer barcode of s*h.

    Every orbit with period T in (h'(r-) s, h'(r+) s] gives ``bars_per_orbit``
    bars born at fa_{sh}(T) = s fa_h(T/s).
    """
    M.check(P)
    if not s > 0:
        raise ValueError("s must be positive")
    a_lo, a_hi = band_slopes(P, *M.band)
    T, N = band_periods(F, a_lo * s, a_hi * s, count_iterates)
    if T.size == 0:
        return EMPTY
    births = s * np.asarray(contact_to_hamiltonian(P, T / s), dtype=float)
    mult = N * M.bars_per_orbit
    if M.length_model == "equal":
        return Barcode(births, births + M.sigma, mult)
    rng = np.random.default_rng(M.seed)
    b = np.repeat(births, mult)
    return Barcode(b, b + M.sigma + rng.exponential(M.sigma, size=b.size))


@dataclass
class ComparisonReport:
    hbar_estimate: EntropyEstimate
    htop_estimate: EntropyEstimate
    ratio: float | str
    inequality_flags: dict[str, bool]
    provenance: dict
    trace: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "hbar": self.hbar_estimate.to_dict(),
            "htop": self.htop_estimate.to_dict(),
            "ratio": self.ratio,
            "flags": dict(self.inequality_flags),
            "provenance": self.provenance,
            "trace": self.trace,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ComparisonReport":
        expected = {"hbar", "htop", "ratio", "flags", "provenance", "trace"}
        if set(d) != expected:
            raise ValueError(f"report keys must be {sorted(expected)}, got {sorted(d)}")
        ratio = d["ratio"] if isinstance(d["ratio"], str) else float(d["ratio"])
        return cls(
            EntropyEstimate.from_dict(d["hbar"]),
            EntropyEstimate.from_dict(d["htop"]),
            ratio,
            {str(k): bool(v) for k, v in d["flags"].items()},
            d["provenance"],
            list(d["trace"]),
        )


def _ratio(hbar: float, htop: float):
    return UNDEFINED_RATIO if htop == 0 else hbar / htop


def _eps_below(sched: EvaluationSchedule, sigma: float) -> tuple[float, ...]:
    eps = tuple(e for e in sched.eps_grid if e < sigma)
    if not eps:
        raise ValueError(f"no eps in the grid {sched.eps_grid} lies below sigma={sigma}")
    return eps


def hbar_estimate(F: SFTFlow, P: Profile, M: CrossingEnergyModel, sched: EvaluationSchedule,
                  count_iterates: bool = True, tol: float = DEFAULT_TOL) -> EntropyEstimate:
    """Dynamical entropy of s -> synth_floer_barcode(s), divided by the slope.

    ``sched`` is on the contact-action axis: tau corresponds to s = tau / a,
    and the counting window of s*h is its full action range [0, s c].
    """
    a = P.a
    s_sched = EvaluationSchedule(tuple(t / a for t in sched.tau_values), sched.tail_fraction,
                                 _eps_below(sched, M.sigma))
    est = dyn_barcode_entropy(
        lambda s: synth_floer_barcode(F, P, M, s, count_iterates),
        s_sched,
        cutoff=lambda s: scale_profile(P, s).c,
        tol=tol,
    )
    return est.scaled(1.0 / a)


def _provenance(F, P, M, sched, tol, count_iterates, extra=None) -> dict:
    d = {
        "flow": F.to_dict(),
        "profile": P.to_dict(),
        "model": M.to_dict(),
        "schedule": {
            "tau_values": list(sched.tau_values),
            "tail_fraction": sched.tail_fraction,
            "eps_grid": list(sched.eps_grid),
        },
        "tol": tol,
        "count_iterates": count_iterates,
    }
    if extra:
        d.update(extra)
    return d


def theorem_b_check(F: SFTFlow, P: Profile, M: CrossingEnergyModel, sched: EvaluationSchedule,
                    count_iterates: bool = True, tol: float = DEFAULT_TOL,
                    htop: EntropyEstimate | None = None) -> ComparisonReport:
    """Compare the model barcode entropy with the orbit growth rate.

    Flags: ``floor`` is hbar >= (h'(r+)/a) htop - tol and ``cap`` is
    hbar <= htop + tol.
    """
    M.check(P)
    hb = hbar_estimate(F, P, M, sched, count_iterates, tol)
    ht = htop if htop is not None else htop_estimate(F, sched, count_iterates, tol)
    frac = float(P.dh(M.band[1])) / P.a
    flags = {
        "floor": bool(hb.value >= frac * ht.value - tol),
        "cap": bool(hb.value <= ht.value + tol),
    }
    return ComparisonReport(hb, ht, _ratio(hb.value, ht.value), flags,
                            _provenance(F, P, M, sched, tol, count_iterates))


def corollary_c_report(F: SFTFlow, P: Profile, M: CrossingEnergyModel, sched: EvaluationSchedule,
                       eta_schedule: Sequence[float] = (0.2, 0.1, 0.05),
                       count_iterates: bool = True, tol: float = DEFAULT_TOL) -> ComparisonReport:
    """Run the band comparison for bands whose top slope is (1 - eta) a.

    The lower radius stays at the model's r_minus. The report carries the
    estimates of the band with the smallest eta, the ratio hbar/htop
    extrapolated linearly to eta = 0 from the per-band ratios, and one
    trace row per band.
    """
    etas = sorted((float(e) for e in eta_schedule), reverse=True)
    if not etas or any(not 0 < e < 1 for e in etas):
        raise ValueError("eta schedule values must lie in (0, 1)")
    if len(set(etas)) != len(etas):
        raise ValueError("eta schedule values must be distinct")
    ht = htop_estimate(F, sched, count_iterates, tol)
    rows, reports = [], []
    for eta in etas:
        r_plus = float(radius_of_period(P, (1.0 - eta) * P.a))
        if not M.band[0] < r_plus < P.rmax:
            raise ValueError(f"eta={eta} gives r_plus={r_plus:.6g} outside (r_minus, rmax)")
        rep = theorem_b_check(F, P, M.with_band(M.band[0], r_plus), sched, count_iterates, tol, ht)
        reports.append(rep)
        rows.append({
            "eta": eta,
            "r_plus": r_plus,
            "hbar": rep.hbar_estimate.value,
            "ratio": rep.ratio,
            "floor": rep.inequality_flags["floor"],
            "cap": rep.inequality_flags["cap"],
        })
    last = reports[-1]
    if ht.value == 0:
        ratio: float | str = UNDEFINED_RATIO
    elif len(etas) == 1:
        ratio = float(last.ratio)
    else:
        x = np.array(etas)
        y = np.array([r["ratio"] for r in rows], dtype=float)
        ratio = float(np.polyval(np.polyfit(x, y, 1), 0.0))
    flags = {
        "floor": all(r["floor"] for r in rows),
        "cap": all(r["cap"] for r in rows),
    }
    prov = _provenance(F, P, M, sched, tol, count_iterates, {"eta_schedule": etas})
    return ComparisonReport(last.hbar_estimate, ht, ratio, flags, prov, rows)
