"""Semi-admissible radial profiles and their action functions.

A profile h on [1, inf) vanishes at r = 1 together with its slope, is
increasing and convex on [1, rmax], and equals a*r - c beyond rmax. The
Hamiltonian action of the orbit on the level r is A(r) = r h'(r) - h(r);
``contact_to_hamiltonian`` expresses it through the Reeb period T = h'(r).

Profiles are only required to be C^1 at rmax, where the convex part meets
the linear tail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .persistence import Barcode, INF, Reparametrization, reparametrize, truncate

CERT_SAMPLES = 10_000
CERT_TOL = 1e-9
ROOT_RTOL = 1e-12


class ProfileError(ValueError):
    """An invalid profile; ``certificate`` is set when certification failed."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


@dataclass
class Certificate:
    checks: dict[str, bool]
    details: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def report(self) -> str:
        lines = []
        for name, passed in self.checks.items():
            lines.append(f"{'PASS' if passed else 'FAIL'}  {name}")
        for name, val in self.details.items():
            lines.append(f"      {name} = {val:.12g}")
        return "\n".join(lines)


class Profile:
    """A certified semi-admissible profile, optionally scaled by ``factor``.

    Construct with :meth:`quadratic` or :meth:`spline`. The derivative
    callables are evaluated on the convex part [1, rmax]; beyond rmax the
    profile is the linear tail.
    """

    def __init__(self, kind, derivs, a, rmax, c, convex_window, factor=1.0, params=None,
                 certify=True):
        self.kind = kind
        self._derivs = derivs  # (h, h', h'', h''') on [1, rmax], unscaled
        self.factor = float(factor)
        self._a = float(a)
        self._c = float(c)
        self.rmax = float(rmax)
        self.convex_window = (1.0, float(convex_window))
        self.params = dict(params or {})
        self.certificate = self.certify() if certify else None
        if certify and not self.certificate.ok:
            failed = [k for k, v in self.certificate.checks.items() if not v]
            raise ProfileError(f"profile failed certification: {', '.join(failed)}", self.certificate)

    # -- constructors -------------------------------------------------

    @classmethod
    def quadratic(cls, a: float = 2.0, rmax: float = 2.0) -> "Profile":
        """h(r) = a (r-1)^2 / (2 (rmax-1)) on [1, rmax], then a r - a (rmax+1)/2."""
        if not a > 0 or not rmax > 1:
            raise ProfileError("quadratic profile needs a > 0 and rmax > 1")
        k = a / (rmax - 1.0)

        def h(r):
            return 0.5 * k * (r - 1.0) ** 2

        def dh(r):
            return k * (r - 1.0)

        def d2h(r):
            return np.full(np.shape(r), k) if np.ndim(r) else k

        def d3h(r):
            return np.zeros(np.shape(r)) if np.ndim(r) else 0.0

        c = a * (rmax + 1.0) / 2.0
        return cls("quadratic", (h, dh, d2h, d3h), a, rmax, c, rmax,
                   params={"a": a, "rmax": rmax})

    @classmethod
    def spline(cls, knots, a: float, rmax: float, convex_window: float | None = None) -> "Profile":
        """Clamped cubic spline through ``knots`` = [(r, h), ...].

        The knots must start at (1, 0) and end at r = rmax; the spline has
        h'(1) = 0 and h'(rmax) = a. When ``convex_window`` is omitted the
        largest certified window [1, w] with h''' >= 0 is used.
        """
        pts = np.asarray(knots, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise ProfileError("spline knots must be a list of [r, h] pairs")
        r, hv = pts[:, 0], pts[:, 1]
        if not a > 0 or not rmax > 1:
            raise ProfileError("spline profile needs a > 0 and rmax > 1")
        if np.any(np.diff(r) <= 0):
            raise ProfileError("spline knot radii must be strictly increasing")
        if abs(r[0] - 1.0) > 1e-12 or abs(hv[0]) > 1e-12:
            raise ProfileError("first spline knot must be (1, 0)")
        if abs(r[-1] - rmax) > 1e-12:
            raise ProfileError("last spline knot must sit at rmax")
        cs = CubicSpline(r, hv, bc_type=((1, 0.0), (1, a)))
        d1, d2, d3 = cs.derivative(1), cs.derivative(2), cs.derivative(3)
        c = a * rmax - float(cs(rmax))
        if convex_window is None:
            grid = np.linspace(1.0, rmax, CERT_SAMPLES)
            bad = np.flatnonzero(d3(grid) < -CERT_TOL * max(1.0, a))
            convex_window = rmax if bad.size == 0 else float(grid[max(bad[0] - 1, 0)])
        return cls("spline", (cs, d1, d2, d3), a, rmax, c, convex_window,
                   params={"a": a, "rmax": rmax, "knots": pts.tolist()})

    @classmethod
    def from_curvature(cls, radii, curvature, a: float, convex_window: float | None = None) -> "Profile":
        """Spline profile whose h'' is the piecewise-linear interpolant of ``curvature``.

        ``curvature`` is rescaled so that h'(rmax) = a; h and its knots are
        then exact, and the clamped spline through them reproduces h.
        """
        r = np.asarray(radii, dtype=float)
        q = np.asarray(curvature, dtype=float)
        if r.shape != q.shape or r.size < 2 or abs(r[0] - 1.0) > 1e-12:
            raise ProfileError("curvature nodes must start at r = 1")
        if np.any(q < 0):
            raise ProfileError("curvature must be non-negative")
        dr = np.diff(r)
        q = q * (a / float(np.sum(0.5 * (q[1:] + q[:-1]) * dr)))
        # exact integration of a piecewise-linear h''
        dh = np.concatenate([[0.0], np.cumsum(0.5 * (q[1:] + q[:-1]) * dr)])
        hv = np.concatenate([[0.0], np.cumsum(dh[:-1] * dr + dr ** 2 * (q[:-1] / 3.0 + q[1:] / 6.0))])
        return cls.spline(np.column_stack([r, hv]), a, float(r[-1]), convex_window)

    # -- evaluation ----------------------------------------------------

    @property
    def a(self) -> float:
        """Slope of the linear tail."""
        return self._a * self.factor

    @property
    def c(self) -> float:
        """Offset of the linear tail, h(r) = a r - c for r >= rmax."""
        return self._c * self.factor

    def _eval(self, order, r):
        r = np.asarray(r, dtype=float)
        inside = r <= self.rmax
        rc = np.clip(r, 1.0, self.rmax)
        val = np.asarray(self._derivs[order](rc), dtype=float)
        if order == 0:
            tail = self._a * r - self._c
        elif order == 1:
            tail = np.full(r.shape, self._a)
        else:
            tail = np.zeros(r.shape)
        out = self.factor * np.where(inside, val, tail)
        return out if out.ndim else float(out)

    def h(self, r):
        return self._eval(0, r)

    def dh(self, r):
        return self._eval(1, r)

    def d2h(self, r):
        return self._eval(2, r)

    def d3h(self, r):
        return self._eval(3, r)

    def certify(self, samples: int = CERT_SAMPLES, tol: float = CERT_TOL) -> Certificate:
        """Check the profile invariants on a dense sample of [1, rmax]."""
        r = np.linspace(1.0, self.rmax, samples)
        inner = r[1:-1]
        scale = max(1.0, self.a)
        h, dh, d2, d3 = self.h(r), self.dh(r), self.d2h(r), self.d3h(r)
        win = r <= self.convex_window[1] + 1e-12
        left = self._derivs[1](self.rmax) * self.factor
        checks = {
            "h(1) = 0": abs(h[0]) <= tol * scale,
            "h'(1) = 0": abs(dh[0]) <= tol * scale,
            "h' > 0 on (1, rmax]": bool(np.all(dh[1:] > 0)),
            "h'' >= 0": bool(np.all(d2 >= -tol * scale)),
            "h'' > 0 on (1, rmax)": bool(np.all(self.d2h(inner) > 0)),
            "h'(rmax-) = a": abs(left - self.a) <= 1e-6 * scale,
            "h(rmax) = a rmax - c": abs(h[-1] - (self.a * self.rmax - self.c)) <= 1e-9 * scale * self.rmax,
            "h''' >= 0 on convex window": bool(np.all(d3[win] >= -tol * scale * 1e3)),
            "convex window inside [1, rmax]": 1.0 < self.convex_window[1] <= self.rmax,
        }
        details = {
            "a": self.a,
            "c": self.c,
            "rmax": self.rmax,
            "convex_window_end": self.convex_window[1],
            "min h''": float(d2.min()),
            "min h''' on window": float(d3[win].min()),
        }
        return Certificate(checks, details)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, **self.params}
        if self.kind == "spline":
            d["convex_window"] = self.convex_window[1]
        return d

    def __repr__(self):
        return f"Profile({self.kind}, a={self.a:g}, rmax={self.rmax:g}, c={self.c:g}, factor={self.factor:g})"


def scale_profile(P: Profile, s: float) -> Profile:
    """The profile s*h: slope s*a, same rmax."""
    if not s > 0:
        raise ValueError(f"scale must be positive, got {s}")
    Q = Profile.__new__(Profile)
    Q.__dict__.update(P.__dict__)
    Q.factor = P.factor * float(s)
    return Q


def action_of_radius(P: Profile, r):
    """A(r) = r h'(r) - h(r) on [1, rmax]."""
    ra = np.asarray(r, dtype=float)
    if np.any(ra < 1.0) or np.any(ra > P.rmax):
        raise ValueError(f"radius must lie in [1, {P.rmax}]")
    out = ra * P.dh(ra) - P.h(ra)
    return out if np.ndim(out) else float(out)


def radius_of_period(P: Profile, T):
    """The r in [1, rmax] with h'(r) = T, for 0 <= T <= a.

    Bisection brackets the root, then guarded Newton steps polish it to
    relative tolerance 1e-12; h' is increasing so the bracket is kept.
    """
    Ta = np.asarray(T, dtype=float)
    a = P.a
    if np.any(Ta < 0) or np.any(Ta > a * (1 + 1e-15)):
        raise ValueError(f"period must lie in [0, {a}]")
    Ta = np.minimum(Ta, a)
    shape = Ta.shape
    t = Ta.ravel()
    lo = np.ones_like(t)
    hi = np.full_like(t, P.rmax)
    for _ in range(6):
        mid = 0.5 * (lo + hi)
        up = P.dh(mid) < t
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
    r = 0.5 * (lo + hi)
    for _ in range(100):
        f = P.dh(r) - t
        lo = np.where(f < 0, r, lo)
        hi = np.where(f > 0, r, hi)
        d2 = P.d2h(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(d2 > 0, f / d2, np.inf)
        cand = r - step
        bad = ~np.isfinite(cand) | (cand < lo) | (cand > hi)
        new = np.where(bad, 0.5 * (lo + hi), cand)
        new = np.where(f == 0, r, new)
        done = np.abs(new - r) <= ROOT_RTOL * np.abs(r)
        r = new
        if done.all():
            break
    r = np.where(t <= 0, 1.0, np.where(t >= a, P.rmax, r))
    r = r.reshape(shape)
    return r if r.ndim else float(r)


def contact_to_hamiltonian(P: Profile, T):
    """Hamiltonian action of the level whose Reeb period is T (T in [0, a])."""
    r = radius_of_period(P, T)
    return action_of_radius(P, r)


def action_reparametrization(P: Profile) -> Reparametrization:
    """xi with xi^-1 = contact_to_hamiltonian; Lipschitz constants 1 and rmax.

    Only meaningful on [0, a] (contact side) and [0, c] (Hamiltonian side).
    """
    a, top = P.a, P.a * P.rmax - P.h(P.rmax)

    def forward(y):
        y = np.asarray(y, dtype=float)
        # invert the increasing map fa by bisection on [0, a]
        lo, hi = np.zeros_like(y), np.full_like(y, a)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            up = contact_to_hamiltonian(P, mid) < y
            lo = np.where(up, mid, lo)
            hi = np.where(up, hi, mid)
        return np.where(y >= top, a, 0.5 * (lo + hi))

    def inverse(T):
        T = np.asarray(T, dtype=float)
        out = np.full(T.shape, INF)
        fin = np.isfinite(T)
        out[fin] = contact_to_hamiltonian(P, T[fin])
        return out

    return Reparametrization(forward, inverse, lipschitz=1.0, lipschitz_inverse=P.rmax)


def hf_barcode(B_SH: Barcode, P: Profile, s: float) -> Barcode:
    """Model Floer barcode of s*h built from a contact-action barcode.

    Truncates ``B_SH`` at the slope s*a and maps every finite endpoint T to
    the Hamiltonian action of the level with period T.
    """
    Ps = scale_profile(P, s)
    V = truncate(B_SH, Ps.a)
    return reparametrize(V, action_reparametrization(Ps))


def sandwich_counts(B_SH: Barcode, P: Profile, s: float, eps: float, y: float | None = None):
    """The three counts compared by the two-definitions sandwich.

    With W = hf_barcode(B_SH, P, s), V = truncate(B_SH, s*a) and fa the
    action map of s*h, returns

        (dyn_bar_count(W, eps, fa(y) + eps),
         count_bars(V, eps, y),
         dyn_bar_count(W, rmax*eps, fa(y) + rmax*eps))

    which are non-increasing left to right. ``y`` defaults to s*a, where
    the middle term counts every bar of V longer than eps.
    """
    from .estimators import dyn_bar_count
    from .persistence import count_bars

    Ps = scale_profile(P, s)
    y = Ps.a if y is None else min(float(y), Ps.a)
    W = hf_barcode(B_SH, P, s)
    V = truncate(B_SH, Ps.a)
    fy = contact_to_hamiltonian(Ps, y)
    return (
        dyn_bar_count(W, eps, fy + eps),
        count_bars(V, eps, y),
        dyn_bar_count(W, P.rmax * eps, fy + P.rmax * eps),
    )


def profile_from_dict(d: dict) -> Profile:
    """Build a profile from its JSON description (unknown keys rejected)."""
    kind = d.get("kind")
    if kind == "quadratic":
        allowed = {"kind", "a", "rmax"}
    elif kind == "spline":
        allowed = {"kind", "a", "rmax", "knots", "convex_window"}
    else:
        raise ProfileError(f"profile kind must be 'quadratic' or 'spline', got {kind!r}")
    unknown = set(d) - allowed
    if unknown:
        raise ProfileError(f"unknown profile keys: {sorted(unknown)}")
    for key in ("a", "rmax"):
        if key not in d:
            raise ProfileError(f"profile is missing {key!r}")
    if kind == "quadratic":
        return Profile.quadratic(float(d["a"]), float(d["rmax"]))
    if "knots" not in d:
        raise ProfileError("spline profile is missing 'knots'")
    return Profile.spline(d["knots"], float(d["a"]), float(d["rmax"]), d.get("convex_window"))


P0 = None


def standard_profile() -> Profile:
    """The quadratic profile h(r) = (r-1)^2 on [1, 2], slope 2, c = 3."""
    global P0
    if P0 is None:
        P0 = Profile.quadratic(2.0, 2.0)
    return P0
