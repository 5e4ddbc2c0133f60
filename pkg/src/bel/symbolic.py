"""Suspension flows over symbolic and toral hyperbolic systems.

``SFTFlow`` is the suspension of a subshift of finite type under a
locally constant roof; its closed orbits are admissible primitive cyclic
words, and the period of a word is the sum of the roof over its symbols.
``TorusFlow`` is the unit-roof suspension of a hyperbolic toral
automorphism, used for shadowing experiments.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.sparse.csgraph import connected_components

from . import kernels
from .estimators import DEFAULT_TOL, EntropyEstimate, EvaluationSchedule, limsup_rate

PERIOD_RTOL = 1e-12
# Above this many candidate words the census switches to transfer counting.
ENUMERATION_LIMIT = 5e6


@dataclass(frozen=True)
class PeriodicOrbit:
    """A prime cycle (rotation-minimal word) together with an iterate index."""

    symbol_cycle: tuple[int, ...]
    prime_period: float
    multiplicity_index: int = 1

    @property
    def period(self) -> float:
        return self.multiplicity_index * self.prime_period


class SFTFlow:
    """Suspension flow over the SFT of ``transition`` with per-symbol roof."""

    def __init__(self, transition, roof: Sequence[float] | None = None):
        A = np.asarray(transition)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
            raise ValueError("transition must be a non-empty square matrix")
        if not np.all((A == 0) | (A == 1)):
            raise ValueError("transition entries must be 0 or 1")
        A = A.astype(np.int64)
        k = A.shape[0]
        r = np.ones(k) if roof is None else np.asarray(roof, dtype=float)
        if r.shape != (k,):
            raise ValueError(f"roof needs one value per symbol ({k})")
        if not np.all(np.isfinite(r)) or np.any(r <= 0):
            raise ValueError("roof values must be positive and finite")
        ncomp, _ = connected_components(A, directed=True, connection="strong")
        if ncomp != 1 or not A.any():
            raise ValueError("transition matrix must be irreducible")
        A.setflags(write=False)
        r.setflags(write=False)
        self.transition = A
        self.roof = r
        self._census: dict | None = None
        self._census_smax = -1.0
        self._periods = np.zeros(0)
        # exact counts: the number of long cycles overflows int64
        self._numbers = np.zeros(0, dtype=object)
        self._lengths = np.zeros(0, dtype=np.int64)

    @property
    def alphabet_size(self) -> int:
        return self.transition.shape[0]

    @property
    def unit_roof(self) -> bool:
        return bool(np.all(self.roof == 1.0))

    def __repr__(self):
        return f"SFTFlow(transition={self.transition.tolist()}, roof={self.roof.tolist()})"

    def to_dict(self) -> dict:
        return {"kind": "sft", "transition": self.transition.tolist(), "roof": self.roof.tolist()}

    # -- enumeration -------------------------------------------------------

    def census(self, smax: float, backend=None, method: str = "auto") -> dict[tuple[int, ...], int]:
        """Prime cycles of period <= smax grouped by symbol-count vector.

        ``method="enumerate"`` walks the Lyndon words with the compiled (or
        pure-Python) kernel, split by first symbol over at most
        ``kernels.max_workers()`` threads and merged in symbol order.
        ``method="transfer"`` counts closed walks per count vector and
        recovers the primitive ones by Moebius inversion; it is polynomial
        in smax. ``"auto"`` enumerates unless that would visit more than
        ``ENUMERATION_LIMIT`` words.
        """
        if method not in ("auto", "enumerate", "transfer"):
            raise ValueError(f"unknown census method {method!r}")
        cacheable = backend is None and method == "auto"
        if cacheable and self._census is not None and smax <= self._census_smax:
            return self._census
        impl = backend or kernels
        adj = self.transition.tolist()
        roof = self.roof.tolist()
        k = self.alphabet_size
        if method == "auto":
            method = "enumerate" if self._enumeration_size(smax) <= ENUMERATION_LIMIT else "transfer"
        workers = min(kernels.max_workers(), k)
        if method == "transfer":
            parts = [transfer_census(adj, roof, smax)]
        elif workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(lambda f: impl.lyndon_census(adj, roof, smax, [f]), range(k)))
        else:
            parts = [impl.lyndon_census(adj, roof, smax)]
        merged: dict[tuple[int, ...], int] = {}
        for part in parts:
            for key, n in part.items():
                merged[key] = merged.get(key, 0) + n
        if cacheable:
            self._census = merged
            self._census_smax = smax
            keys = list(merged)
            cnt = np.array(keys, dtype=float).reshape(len(keys), k)
            self._periods = cnt @ self.roof
            self._numbers = np.array([int(merged[c]) for c in keys], dtype=object)
            self._lengths = cnt.sum(axis=1).astype(np.int64)
        return merged

    def _enumeration_size(self, smax: float) -> float:
        rho = float(np.max(np.abs(np.linalg.eigvals(self.transition.astype(float)))))
        n = smax / float(self.roof.min())
        return rho ** n

    def prime_cycles(self, smax: float) -> Iterator[PeriodicOrbit]:
        """Yield explicit prime cycles with period <= smax (small smax only)."""
        k = self.alphabet_size
        A = self.transition
        roof = self.roof
        budget = smax * (1 + PERIOD_RTOL) + PERIOD_RTOL
        nmax = int(budget // roof.min())
        a = [0] * (nmax + 2)

        def visit(t, p, total):
            n = t - 1
            if p == n and A[a[n], a[1]]:
                yield PeriodicOrbit(tuple(a[1:t]), float(total))
            if n >= nmax:
                return
            base = a[t - p]
            for j in range(base, k):
                if A[a[n], j] and total + roof[j] <= budget:
                    a[t] = j
                    yield from visit(t + 1, p if j == base else t, total + roof[j])

        for first in range(k):
            if roof[first] <= budget:
                a[1] = first
                yield from visit(2, 1, roof[first])

    def orbits(self, smax: float, count_iterates: bool = True) -> Iterator[PeriodicOrbit]:
        """Yield every counted periodic orbit of period <= smax."""
        for orb in self.prime_cycles(smax):
            kmax = _iterates(smax, orb.prime_period) if count_iterates else 1
            for m in range(1, kmax + 1):
                yield PeriodicOrbit(orb.symbol_cycle, orb.prime_period, m)

    def prime_counts_by_length(self, nmax: int) -> np.ndarray:
        """N_n, the number of prime cycles of word length n, for n = 0..nmax."""
        # words of length <= nmax have period <= nmax * max roof
        self.census(nmax * float(self.roof.max()))
        out = [0] * (nmax + 1)
        for n, c in zip(self._lengths.tolist(), self._numbers.tolist()):
            if n <= nmax:
                out[n] += c
        return np.array(out, dtype=object)

    def count_orbits_many(self, s_values, count_iterates: bool = True) -> np.ndarray:
        s = np.asarray(s_values, dtype=float)
        if s.size == 0:
            return np.zeros(0, dtype=object)
        smax = float(s.max())
        if smax <= 0:
            return np.zeros(s.shape, dtype=int).astype(object)
        self.census(smax)
        T, N = self._periods, self._numbers
        out = np.zeros(s.shape, dtype=int).astype(object)
        for idx, sv in np.ndenumerate(s):
            lim = sv * (1 + PERIOD_RTOL) + PERIOD_RTOL
            sel = T <= lim
            if count_iterates:
                reps = np.floor(lim / T[sel]).astype(np.int64).astype(object)
                out[idx] = int(np.sum(N[sel] * reps))
            else:
                out[idx] = int(N[sel].sum())
        return out

    def exact_entropy(self) -> float:
        """Topological entropy of the suspension flow, in bits per unit time.

        The unique h >= 0 with spectral radius of A_ij 2^(-h roof_i) equal
        to 1; for unit roof this is log2 of the spectral radius of A.
        """
        A = self.transition.astype(float)
        rho = float(np.max(np.abs(np.linalg.eigvals(A))))
        if rho <= 1 + 1e-12:
            return 0.0
        if self.unit_roof:
            return math.log2(rho)

        def g(h):
            M = A * (2.0 ** (-h * self.roof))[:, None]
            return float(np.max(np.abs(np.linalg.eigvals(M)))) - 1.0

        hi = math.log2(rho) / float(self.roof.min()) + 1.0
        return float(brentq(g, 0.0, hi, xtol=1e-14))


def _mobius(n: int) -> int:
    result, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    return -result if n > 1 else result


def transfer_census(adj, roof, smax):
    """Same contract as ``lyndon_census``, by counting closed walks.

    W(c), the number of closed walks with a marked start and symbol counts
    c, satisfies W(c) = sum over d | gcd(c) of (|c|/d) N(c/d), where N
    counts primitive cycles. Walks are grown one symbol at a time keyed by
    (start, count vector) with the current symbol as a vector index.
    """
    k = len(roof)
    budget = smax * (1.0 + PERIOD_RTOL) + PERIOD_RTOL
    ok = [[bool(adj[i][j]) for j in range(k)] for i in range(k)]
    walks: dict[tuple[int, ...], int] = {}
    frontier: dict[tuple[int, tuple[int, ...]], list[int]] = {}
    for i in range(k):
        if roof[i] <= budget:
            c = tuple(int(x == i) for x in range(k))
            vec = [0] * k
            vec[i] = 1
            frontier[(i, c)] = vec
    while frontier:
        nxt: dict[tuple[int, tuple[int, ...]], list[int]] = {}
        for (start, c), vec in frontier.items():
            closed = sum(vec[j] for j in range(k) if ok[j][start])
            if closed:
                walks[c] = walks.get(c, 0) + closed
            total = sum(ci * r for ci, r in zip(c, roof))
            for j in range(k):
                if total + roof[j] > budget:
                    continue
                inflow = sum(vec[i] for i in range(k) if ok[i][j])
                if not inflow:
                    continue
                c2 = c[:j] + (c[j] + 1,) + c[j + 1:]
                slot = nxt.setdefault((start, c2), [0] * k)
                slot[j] += inflow
        frontier = nxt
    census = {}
    for c in walks:
        n = sum(c)
        g = math.gcd(*c)
        acc = 0
        for d in range(1, g + 1):
            if g % d == 0:
                mu = _mobius(d)
                if mu:
                    acc += mu * walks.get(tuple(x // d for x in c), 0)
        if acc:
            census[c] = acc // n
    return census


def _iterates(s: float, T: float) -> int:
    return int(math.floor((s * (1 + PERIOD_RTOL) + PERIOD_RTOL) / T))


def count_orbits(F: SFTFlow, s: float, count_iterates: bool = True) -> int:
    """p(s): closed orbits with period <= s; iterates count separately by default."""
    return int(F.count_orbits_many([s], count_iterates)[0])


def htop_estimate(F: SFTFlow, sched: EvaluationSchedule, count_iterates: bool = True,
                  tol: float = DEFAULT_TOL) -> EntropyEstimate:
    """Finite-range growth rate of p(s) over the schedule."""
    counts = F.count_orbits_many(sched.tau_values, count_iterates)
    return limsup_rate(sched.tau_values, counts, sched.tail_fraction, tol)


def band_slopes(P, r_minus: float, r_plus: float) -> tuple[float, float]:
    if not 1.0 <= r_minus <= r_plus <= P.rmax:
        raise ValueError(f"band needs 1 <= r_minus <= r_plus <= rmax, got ({r_minus}, {r_plus})")
    return float(P.dh(r_minus)), float(P.dh(r_plus))


def band_count(F: SFTFlow, P, r_minus: float, r_plus: float, s: float,
               count_iterates: bool = True) -> int:
    """p(a_+ s) - p(a_- s) with a_pm = h'(r_pm): orbits with period in (a_- s, a_+ s]."""
    a_lo, a_hi = band_slopes(P, r_minus, r_plus)
    if not s > 0:
        raise ValueError("s must be positive")
    p = F.count_orbits_many([a_hi * s, a_lo * s], count_iterates)
    return int(p[0] - p[1])


def band_count_many(F: SFTFlow, P, r_minus: float, r_plus: float, s_values,
                    count_iterates: bool = True) -> np.ndarray:
    a_lo, a_hi = band_slopes(P, r_minus, r_plus)
    s = np.asarray(s_values, dtype=float)
    return F.count_orbits_many(a_hi * s, count_iterates) - F.count_orbits_many(a_lo * s, count_iterates)


def band_entropy(F: SFTFlow, P, r_minus: float, r_plus: float, sched: EvaluationSchedule,
                 count_iterates: bool = True, tol: float = DEFAULT_TOL) -> EntropyEstimate:
    """Finite-range growth rate of the band count s -> p(a_+ s) - p(a_- s)."""
    counts = band_count_many(F, P, r_minus, r_plus, sched.tau_values, count_iterates)
    return limsup_rate(sched.tau_values, counts, sched.tail_fraction, tol)


# ---------------------------------------------------------------------------
# toral automorphism suspension


class ShadowingError(RuntimeError):
    """The pseudo-orbit could not be shadowed within the certified regime."""


class TorusFlow:
    """Unit-roof suspension of a hyperbolic automorphism A of the 2-torus.

    Phase points are (x1, x2, u) with x in [0, 1)^2 and u in [0, 1); the
    flow is d/dt (x, u) = (0, 0, 1) with (x, 1) identified with (A x, 0).
    """

    # Bound on the defect for which shadowing is attempted: keeps the
    # per-traversal jump well inside the rounding cell of Z^2.
    SHADOW_THRESHOLD = 0.05

    def __init__(self, matrix=((2, 1), (1, 1))):
        A = np.asarray(matrix)
        if A.shape != (2, 2) or not np.all(A == np.round(A)):
            raise ValueError("torus matrix must be a 2x2 integer matrix")
        A = A.astype(np.int64)
        det = int(round(np.linalg.det(A)))
        if abs(det) != 1:
            raise ValueError("torus matrix must have determinant +-1")
        if abs(int(np.trace(A))) <= 2:
            raise ValueError("torus matrix must be hyperbolic (|trace| > 2)")
        A.setflags(write=False)
        self.matrix = A
        self.det = det
        Af = A.astype(float)
        self.inverse = np.round(np.linalg.inv(Af)).astype(np.int64)
        w, V = np.linalg.eig(Af)
        order = np.argsort(-np.abs(w))
        self.lam_u, self.lam_s = float(w[order[0]].real), float(w[order[1]].real)
        self.eigvecs = V[:, order].real
        self._eiginv = np.linalg.inv(self.eigvecs)

    def __repr__(self):
        return f"TorusFlow(matrix={self.matrix.tolist()})"

    def to_dict(self) -> dict:
        return {"kind": "torus", "matrix": self.matrix.tolist()}

    def orbit_samples(self, x0, n: int, step: float) -> np.ndarray:
        """An exact closed curve: n traversals starting at x0, sampled every ``step``."""
        return self.pseudo_orbit_samples(x0, np.zeros((n, 2)), step)

    def pseudo_orbit_samples(self, x0, drift, step: float) -> np.ndarray:
        """Traversal k moves x linearly by drift[k] while u runs over [0, 1)."""
        K = _samples_per_traversal(step)
        u = np.arange(K) / K
        x = np.asarray(x0, dtype=float)
        rows = []
        for w in np.asarray(drift, dtype=float):
            pts = x[None, :] + u[:, None] * w[None, :]
            rows.append(np.column_stack([np.mod(pts, 1.0), u]))
            x = self.matrix @ (x + w)
        return np.vstack(rows)

    def random_pseudo_orbit(self, eta: float, seed: int, step: float = 0.01,
                            max_traversals: int = 6) -> tuple[np.ndarray, int]:
        """A closed pseudo-orbit with defect below eta.

        The jump vectors are drawn from ``seed``; the start point then solves
        the closing condition exactly. Returns (samples, traversals).
        """
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, max_traversals + 1))
        A = self.matrix
        digits = rng.integers(-1, 2, size=(n, 2))
        # across a seam the chart velocity is multiplied by A or A^-1
        gain = max(np.linalg.norm(A, 2), np.linalg.norm(self.inverse, 2))
        speed = eta / gain * rng.uniform(0.0, 0.999, size=n)
        angle = rng.uniform(0.0, 2 * math.pi, size=n)
        drift = np.column_stack([speed * np.cos(angle), speed * np.sin(angle)])
        An = np.linalg.matrix_power(A, n)
        rhs = np.zeros(2)
        for k in range(n):
            Ak = np.linalg.matrix_power(A, n - 1 - k)
            rhs += Ak @ digits[k] - Ak @ A @ drift[k]
        x0 = np.linalg.solve(An - np.eye(2), rhs)
        return self.pseudo_orbit_samples(np.mod(x0, 1.0), drift, step), n


def _samples_per_traversal(step: float) -> int:
    K = int(round(1.0 / step))
    if K < 3 or abs(K * step - 1.0) > 1e-9:
        raise ValueError("step must divide the unit roof into at least 3 samples")
    return K


def _wrap(d):
    return d - np.round(d)


def _torus_displacements(F: TorusFlow, p, q):
    """Chart displacement q - p at every row, choosing the nearest lift of q."""
    x, u = p[:, :2], p[:, 2]
    y, v = q[:, :2], q[:, 2]
    cands = [
        (y, v),
        (np.mod(y @ F.inverse.T, 1.0), v + 1.0),
        (np.mod(y @ F.matrix.T, 1.0), v - 1.0),
    ]
    best = None
    best_norm = None
    for yc, vc in cands:
        d = np.column_stack([_wrap(yc - x), vc - u])
        nrm = np.linalg.norm(d, axis=1)
        if best is None:
            best, best_norm = d, nrm
        else:
            better = nrm < best_norm
            best = np.where(better[:, None], d, best)
            best_norm = np.where(better, nrm, best_norm)
    return best


def pseudo_orbit_defect(curve, F, step: float, closed: bool = True) -> float:
    """Max over samples of |centered difference - vector field|.

    For a ``TorusFlow`` the curve is an (N, 3) array of (x1, x2, u); for an
    ``SFTFlow`` it is a sequence of (window, u) pairs, see
    :func:`sft_defect`. ``closed`` treats the samples as a loop.
    """
    if isinstance(F, SFTFlow):
        return sft_defect(curve, F, step, closed)
    c = np.asarray(curve, dtype=float)
    if c.ndim != 2 or c.shape[1] != 3:
        raise ValueError("torus curve must be an (N, 3) array")
    if c.shape[0] < 3:
        raise ValueError("curve needs at least 3 samples")
    if not step > 0:
        raise ValueError("step must be positive")
    if closed:
        nxt, prv = np.roll(c, -1, axis=0), np.roll(c, 1, axis=0)
        mid = c
    else:
        nxt, prv, mid = c[2:], c[:-2], c[1:-1]
    fwd = _torus_displacements(F, mid, nxt)
    bwd = _torus_displacements(F, mid, prv)
    vel = (fwd - bwd) / (2.0 * step)
    field = np.array([0.0, 0.0, 1.0])
    return float(np.max(np.linalg.norm(vel - field, axis=1)))


def sft_defect(curve, F: SFTFlow, step: float, closed: bool = True) -> float:
    """Defect of a sampled curve in the SFT suspension.

    Each sample is (window, u): ``window`` is a tuple of 2m+1 symbols
    x_{-m}..x_m with the current symbol in the middle and 0 <= u <
    roof[x_0]. The fibre part of the defect is the centered difference of
    u (corrected by the roof when a sample crosses to the shifted window)
    minus 1. Symbol windows are compared in the metric 2^-j, j being the
    first index (from the centre) where they disagree, and the symbolic
    part of the defect is that distance divided by the step.
    """
    pts = list(curve)
    if len(pts) < 3:
        raise ValueError("curve needs at least 3 samples")
    windows = [tuple(int(s) for s in w) for w, _ in pts]
    us = [float(u) for _, u in pts]
    m = len(windows[0]) // 2
    if any(len(w) != 2 * m + 1 for w in windows):
        raise ValueError("all windows must have the same odd length")

    def dist(w1, w2):
        for j in range(m + 1):
            if w1[m - j] != w2[m - j] or w1[m + j] != w2[m + j]:
                return 2.0 ** (-j)
        return 0.0

    def disp(i, j):
        # displacement from sample i to sample j: (fibre, symbolic)
        wi, wj = windows[i], windows[j]
        opts = [(us[j] - us[i], dist(wi, wj))]
        fwd = wi[1:] + (wj[-1],)
        opts.append((us[j] + F.roof[wi[m]] - us[i], dist(fwd, wj)))
        bwd = (wj[0],) + wi[:-1]
        opts.append((us[j] - F.roof[wj[m]] - us[i], dist(bwd, wj)))
        return min(opts, key=lambda o: (o[1], abs(o[0])))

    n = len(pts)
    idx = range(n) if closed else range(1, n - 1)
    worst = 0.0
    for i in idx:
        df, sf = disp(i, (i + 1) % n)
        db, sb = disp(i, (i - 1) % n)
        fibre = abs((df - db) / (2.0 * step) - 1.0)
        symbolic = max(sf, sb) / step
        worst = max(worst, fibre + symbolic)
    return float(worst)


@dataclass
class ShadowResult:
    """A true periodic orbit of the suspension shadowing a closed pseudo-orbit.

    ``exact_points`` are the rational lifts y_k in R^2 of the traversal
    base points; y_{k+1} = A y_k - digits[k] exactly, closing after
    ``period`` traversals.
    """

    exact_points: tuple[tuple[Fraction, Fraction], ...]
    digits: tuple[tuple[int, int], ...]
    points: np.ndarray
    distance: float
    residual: float
    defect: float

    @property
    def period(self) -> int:
        return len(self.digits)

    def constant(self, eta: float) -> float:
        return self.distance / eta

    def key(self) -> tuple:
        """Canonical identifier: base points reduced into [0, 1)^2."""
        return tuple((x - math.floor(x), y - math.floor(y)) for x, y in self.exact_points)


def _circular_mean(x):
    ang = 2 * np.pi * x
    m = np.arctan2(np.sin(ang).mean(axis=0), np.cos(ang).mean(axis=0)) / (2 * np.pi)
    return np.mod(m, 1.0)


def _split_traversals(c):
    u = c[:, 2]
    seams = np.flatnonzero(np.diff(u) < -0.5) + 1
    groups = np.split(np.arange(c.shape[0]), seams)
    if len(groups) > 1 and u[0] > 0.5 * (u.max() + u.min()) and u[-1] >= u[0]:
        # loop started mid-traversal: join the head to the tail
        groups[-1] = np.concatenate([groups[-1], groups[0]])
        groups = groups[1:]
    return groups


def shadow(pseudo, F: TorusFlow, eta: float, step: float, newton_steps: int = 8) -> ShadowResult:
    """Shadow a closed pseudo-orbit of the torus suspension by a periodic orbit.

    The base points x_k of the traversals form a pseudo-orbit of A. The
    corrections z_k with z_{k+1} = A z_k + e_k (e_k the jump errors) are
    solved in the stable/unstable eigenbasis by geometric series around
    the loop and refined by Newton steps on the cyclic system; the shadow
    is then pinned down exactly as the rational solution of
    (A^n - I) y_0 = sum A^(n-1-k) m_k.
    """
    c = np.asarray(pseudo, dtype=float)
    if not 0 < eta <= F.SHADOW_THRESHOLD:
        raise ShadowingError(f"eta={eta} is outside (0, {F.SHADOW_THRESHOLD}]")
    defect = pseudo_orbit_defect(c, F, step)
    if defect > eta:
        raise ShadowingError(f"pseudo-orbit defect {defect:.3g} exceeds eta={eta:g}")
    groups = _split_traversals(c)
    n = len(groups)
    A = F.matrix.astype(float)
    x = np.array([_circular_mean(c[g, :2]) for g in groups])
    jump = x @ A.T - np.roll(x, -1, axis=0)
    digits = np.round(jump).astype(np.int64)
    e = jump - digits
    if np.max(np.abs(e)) >= 0.25:
        raise ShadowingError("jump errors too large to identify the shadowing orbit")

    y = x + _solve_cyclic(F, e)
    for _ in range(newton_steps):
        res = y @ A.T - digits - np.roll(y, -1, axis=0)
        if np.max(np.abs(res)) < 1e-15:
            break
        y = y + _solve_cyclic(F, res)

    exact = _exact_cycle(F, [tuple(int(v) for v in d) for d in digits])
    yf = np.array([[float(a), float(b)] for a, b in exact])
    if np.max(np.abs(yf - y)) > 1e-9:
        raise ShadowingError("Newton refinement did not converge to the periodic orbit")
    residual = float(np.max(np.abs(yf @ A.T - digits - np.roll(yf, -1, axis=0))))
    if residual > 1e-10:
        raise ShadowingError(f"shadow residual {residual:.3g} above 1e-10")
    dist = 0.0
    for k, g in enumerate(groups):
        d = _wrap(c[g, :2] - yf[k])
        dist = max(dist, float(np.max(np.linalg.norm(d, axis=1))))
    return ShadowResult(
        exact_points=tuple(exact),
        digits=tuple(tuple(int(v) for v in d) for d in digits),
        points=np.mod(yf, 1.0),
        distance=dist,
        residual=residual,
        defect=defect,
    )


def _solve_cyclic(F: TorusFlow, e):
    """The n-periodic solution of z_{k+1} = A z_k + e_k.

    In eigencoordinates the unstable part sums forward and the stable part
    backward; the loop closes the geometric series after n terms.
    """
    n = e.shape[0]
    E = e @ F._eiginv.T
    lu, ls = F.lam_u, F.lam_s
    z = np.zeros((n, 2))
    for k in range(n):
        su = sum(lu ** (-(j + 1)) * E[(k + j) % n, 0] for j in range(n))
        ss = sum(ls ** j * E[(k - 1 - j) % n, 1] for j in range(n))
        z[k, 0] = -su / (1.0 - lu ** (-n))
        z[k, 1] = ss / (1.0 - ls ** n)
    return z @ F.eigvecs.T


def _exact_cycle(F: TorusFlow, digits):
    """Rational y_0..y_{n-1} with y_{k+1} = A y_k - m_k and y_n = y_0."""
    A = [[Fraction(int(v)) for v in row] for row in F.matrix]

    def mul(M, N):
        return [[M[i][0] * N[0][j] + M[i][1] * N[1][j] for j in range(2)] for i in range(2)]

    def app(M, v):
        return (M[0][0] * v[0] + M[0][1] * v[1], M[1][0] * v[0] + M[1][1] * v[1])

    n = len(digits)
    M = (Fraction(0), Fraction(0))
    for m in digits:
        v = app(A, M)
        M = (v[0] + m[0], v[1] + m[1])
    P = [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]
    for _ in range(n):
        P = mul(P, A)
    B = [[P[0][0] - 1, P[0][1]], [P[1][0], P[1][1] - 1]]
    det = B[0][0] * B[1][1] - B[0][1] * B[1][0]
    y0 = ((B[1][1] * M[0] - B[0][1] * M[1]) / det, (B[0][0] * M[1] - B[1][0] * M[0]) / det)
    pts = [y0]
    for m in digits[:-1]:
        v = app(A, pts[-1])
        pts.append((v[0] - m[0], v[1] - m[1]))
    return pts


def exact_return(F: TorusFlow, result: ShadowResult) -> tuple[Fraction, Fraction]:
    """Iterate the integer map over the whole period starting at y_0."""
    A = F.matrix
    y = result.exact_points[0]
    for m in result.digits:
        y = (int(A[0, 0]) * y[0] + int(A[0, 1]) * y[1] - m[0],
             int(A[1, 0]) * y[0] + int(A[1, 1]) * y[1] - m[1])
    return y


def flow_from_dict(d: dict):
    """Build an ``SFTFlow`` or ``TorusFlow`` from its JSON description."""
    kind = d.get("kind")
    if kind == "sft":
        allowed, required = {"kind", "transition", "roof"}, {"transition"}
    elif kind == "torus":
        allowed, required = {"kind", "matrix"}, {"matrix"}
    else:
        raise ValueError(f"flow kind must be 'sft' or 'torus', got {kind!r}")
    unknown = set(d) - allowed
    if unknown:
        raise ValueError(f"unknown flow keys: {sorted(unknown)}")
    missing = required - set(d)
    if missing:
        raise ValueError(f"flow is missing {sorted(missing)}")
    if kind == "sft":
        return SFTFlow(d["transition"], d.get("roof"))
    return TorusFlow(d["matrix"])


FULL_SHIFT = ((1, 1), (1, 1))
GOLDEN_MEAN = ((1, 1), (1, 0))
SELF_LOOP = ((1,),)
