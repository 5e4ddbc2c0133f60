"""Barcodes of persistence modules and the primitives built on them.

A barcode is a finite multiset of half-open bars ``(birth, death]`` with
``0 <= birth < death <= inf``. Everything downstream (entropy estimators,
action reparametrizations, the Floer-model pipeline) only ever asks a
barcode how many bars of length greater than ``eps`` begin below ``s``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels

INF = math.inf


@dataclass(frozen=True, order=True)
class Bar:
    birth: float
    death: float
    multiplicity: int = 1

    def __post_init__(self):
        b, d = float(self.birth), float(self.death)
        if math.isnan(b) or math.isnan(d):
            raise ValueError("bar endpoints must not be NaN")
        if b < 0:
            raise ValueError(f"bar birth must be >= 0, got {b}")
        if not b < d:
            raise ValueError(f"bar needs birth < death, got ({b}, {d}]")
        if int(self.multiplicity) != self.multiplicity or self.multiplicity < 1:
            raise ValueError(f"multiplicity must be a positive integer, got {self.multiplicity}")
        object.__setattr__(self, "birth", b)
        object.__setattr__(self, "death", d)
        object.__setattr__(self, "multiplicity", int(self.multiplicity))

    @property
    def length(self) -> float:
        return self.death - self.birth


class Barcode:
    """Immutable multiset of bars stored as sorted, merged numpy columns.

    Identical bars are merged and their multiplicities summed, so two
    barcodes compare equal exactly when they are the same multiset.
    """

    __slots__ = ("births", "deaths", "mults", "spectrum")

    def __init__(self, births=(), deaths=(), mults=None):
        b = np.asarray(births, dtype=float).ravel()
        d = np.asarray(deaths, dtype=float).ravel()
        if b.shape != d.shape:
            raise ValueError("births and deaths must have the same length")
        if mults is None:
            m = np.ones(b.shape, dtype=np.int64)
        else:
            m = np.asarray(mults).ravel()
            if m.shape != b.shape:
                raise ValueError("multiplicities must match the number of bars")
            if m.size and (np.any(m < 1) or np.any(m != np.floor(m))):
                raise ValueError("multiplicities must be positive integers")
            m = m.astype(np.int64)
        if b.size:
            if np.isnan(b).any() or np.isnan(d).any():
                raise ValueError("bar endpoints must not be NaN")
            if np.any(b < 0):
                raise ValueError("bar births must be >= 0")
            if np.any(~(b < d)):
                i = int(np.argmax(~(b < d)))
                raise ValueError(f"bar needs birth < death, got ({b[i]}, {d[i]}]")
            if np.isinf(b).any():
                raise ValueError("bar births must be finite")
            order = np.lexsort((d, b))
            b, d, m = b[order], d[order], m[order]
            new = np.ones(b.size, dtype=bool)
            new[1:] = (b[1:] != b[:-1]) | (d[1:] != d[:-1])
            if not new.all():
                starts = np.flatnonzero(new)
                m = np.add.reduceat(m, starts)
                b, d = b[starts], d[starts]
        endpoints = np.concatenate([b, d[np.isfinite(d)]])
        spectrum = np.unique(endpoints)
        for arr in (b, d, m, spectrum):
            arr.setflags(write=False)
        object.__setattr__(self, "births", b)
        object.__setattr__(self, "deaths", d)
        object.__setattr__(self, "mults", m)
        object.__setattr__(self, "spectrum", spectrum)

    def __setattr__(self, name, value):
        raise AttributeError("Barcode is immutable")

    @classmethod
    def from_bars(cls, bars: Iterable) -> "Barcode":
        """Build from ``Bar`` objects or ``(birth, death[, multiplicity])`` tuples."""
        bs, ds, ms = [], [], []
        for bar in bars:
            if not isinstance(bar, Bar):
                bar = Bar(*bar)
            bs.append(bar.birth)
            ds.append(bar.death)
            ms.append(bar.multiplicity)
        return cls(bs, ds, ms)

    @property
    def bars(self) -> list[Bar]:
        return [Bar(b, d, int(m)) for b, d, m in zip(self.births, self.deaths, self.mults)]

    @property
    def lengths(self) -> np.ndarray:
        return self.deaths - self.births

    def __len__(self) -> int:
        """Number of distinct bars (ignoring multiplicity)."""
        return int(self.births.size)

    @property
    def total(self) -> int:
        """Number of bars counted with multiplicity."""
        return int(self.mults.sum())

    def __eq__(self, other):
        if not isinstance(other, Barcode):
            return NotImplemented
        return (
            np.array_equal(self.births, other.births)
            and np.array_equal(self.deaths, other.deaths)
            and np.array_equal(self.mults, other.mults)
        )

    def __hash__(self):
        return hash((self.births.tobytes(), self.deaths.tobytes(), self.mults.tobytes()))

    def __repr__(self):
        shown = ", ".join(
            f"({b:g},{'inf' if math.isinf(d) else format(d, 'g')}]" + (f"x{m}" if m > 1 else "")
            for b, d, m in zip(self.births[:6], self.deaths[:6], self.mults[:6])
        )
        more = ", ..." if len(self) > 6 else ""
        return f"Barcode({{{shown}{more}}})"

    def scaled(self, a: float) -> "Barcode":
        """Multiply every endpoint by ``a > 0``."""
        if not a > 0:
            raise ValueError("scale must be positive")
        return Barcode(self.births * a, self.deaths * a, self.mults)


EMPTY = Barcode()


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    return eps


def count_bars(B: Barcode, eps: float, s: float) -> int:
    """Bars with birth < s and length > eps, counted with multiplicity."""
    eps = _check_eps(eps)
    mask = (B.births < s) & (B.lengths > eps)
    return int(B.mults[mask].sum())


def count_bars_many(B: Barcode, eps: float, s_values) -> np.ndarray:
    """``count_bars`` at every point of ``s_values`` in one pass."""
    eps = _check_eps(eps)
    keep = B.lengths > eps
    births = B.births[keep]
    cum = np.concatenate([[0], np.cumsum(B.mults[keep])])
    idx = np.searchsorted(births, np.asarray(s_values, dtype=float), side="left")
    return cum[idx]


def rank_invariant(B: Barcode, s: float, t: float) -> int:
    """Rank of the structure map V_s -> V_t: bars with birth < s and t <= death."""
    if s > t:
        raise ValueError(f"rank_invariant needs s <= t, got s={s}, t={t}")
    mask = (B.births < s) & (t <= B.deaths)
    return int(B.mults[mask].sum())


def truncate(B: Barcode, s: float) -> Barcode:
    """Freeze the module at level ``s``: V(s)_tau = V_min(tau, s).

    Bars ending at or below ``s`` survive, bars containing ``s`` become
    infinite, bars born at or after ``s`` vanish.
    """
    born = B.births < s
    deaths = np.where(B.deaths <= s, B.deaths, INF)
    return Barcode(B.births[born], deaths[born], B.mults[born])


def direct_sum(B1: Barcode, B2: Barcode) -> Barcode:
    return Barcode(
        np.concatenate([B1.births, B2.births]),
        np.concatenate([B1.deaths, B2.deaths]),
        np.concatenate([B1.mults, B2.mults]),
    )


class Reparametrization:
    """Continuous increasing bijection xi of the line, with its inverse.

    ``lipschitz_inverse`` bounds the slope of xi^-1 and ``lipschitz`` that of
    xi; either may be ``None`` when unknown. Both callables must accept numpy
    arrays.
    """

    def __init__(
        self,
        forward: Callable[[np.ndarray], np.ndarray],
        inverse: Callable[[np.ndarray], np.ndarray],
        lipschitz: float | None = None,
        lipschitz_inverse: float | None = None,
    ):
        self.forward = forward
        self.inverse = inverse
        self.lipschitz = lipschitz
        self.lipschitz_inverse = lipschitz_inverse

    def __call__(self, s):
        return self.forward(s)

    @classmethod
    def identity(cls) -> "Reparametrization":
        return cls(lambda s: np.asarray(s, dtype=float), lambda s: np.asarray(s, dtype=float), 1.0, 1.0)

    @classmethod
    def linear(cls, a: float) -> "Reparametrization":
        """xi(s) = a*s."""
        if not a > 0:
            raise ValueError("linear reparametrization needs a > 0")
        return cls(lambda s: a * np.asarray(s, dtype=float), lambda s: np.asarray(s, dtype=float) / a, a, 1.0 / a)

    @classmethod
    def piecewise_linear(cls, xs: Sequence[float], ys: Sequence[float]) -> "Reparametrization":
        """Interpolate the knots (xs, ys); the outer slopes continue to infinity."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.size < 2 or xs.shape != ys.shape:
            raise ValueError("need at least two knots of matching shape")
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
            raise ValueError("piecewise-linear xi must be strictly increasing")
        slopes = np.diff(ys) / np.diff(xs)

        def pl(x, xk, yk, sl):
            x = np.asarray(x, dtype=float)
            out = np.interp(x, xk, yk)
            lo, hi = x < xk[0], x > xk[-1]
            out = np.where(lo, yk[0] + sl[0] * (x - xk[0]), out)
            out = np.where(hi, yk[-1] + sl[-1] * (x - xk[-1]), out)
            return out

        return cls(
            lambda x: pl(x, xs, ys, slopes),
            lambda y: pl(y, ys, xs, 1.0 / slopes),
            float(slopes.max()),
            float((1.0 / slopes).max()),
        )


def reparametrize(B: Barcode, xi: Reparametrization) -> Barcode:
    """Barcode of W_s = V_xi(s): each bar (a, b] becomes (xi^-1(a), xi^-1(b)]."""
    if len(B) == 0:
        return EMPTY
    finite = np.isfinite(B.deaths)
    pts = B.spectrum
    images = np.asarray(xi.inverse(pts), dtype=float)
    if images.shape != pts.shape or np.any(np.diff(images) <= 0):
        raise ValueError("xi must be strictly increasing on the barcode spectrum")
    births = np.asarray(xi.inverse(B.births), dtype=float)
    deaths = np.full(B.deaths.shape, INF)
    if finite.any():
        deaths[finite] = np.asarray(xi.inverse(B.deaths[finite]), dtype=float)
    return Barcode(births, deaths, B.mults)


@dataclass(frozen=True)
class Cell:
    id: str
    dim: int
    birth: float
    boundary: tuple[str, ...] = ()


class FilteredComplex:
    """Ordered cells with births and F2 boundaries.

    Validated at construction: faces precede their coface and have strictly
    smaller dimension, births are non-negative and non-decreasing along the
    order, and the boundary of a boundary vanishes mod 2.
    """

    def __init__(self, cells: Iterable):
        parsed = []
        for c in cells:
            if not isinstance(c, Cell):
                cid, dim, birth, *rest = c
                boundary = rest[0] if rest else ()
                c = Cell(str(cid), int(dim), float(birth), tuple(str(x) for x in boundary))
            parsed.append(c)
        index: dict[str, int] = {}
        prev_birth = -INF
        for pos, c in enumerate(parsed):
            if c.id in index:
                raise ValueError(f"duplicate cell id {c.id!r}")
            if c.dim < 0:
                raise ValueError(f"cell {c.id!r} has negative dimension")
            if not math.isfinite(c.birth) or c.birth < 0:
                raise ValueError(f"cell {c.id!r} needs a finite birth >= 0")
            if c.birth < prev_birth:
                raise ValueError(f"births must be non-decreasing; cell {c.id!r} breaks the order")
            if len(set(c.boundary)) != len(c.boundary):
                raise ValueError(f"cell {c.id!r} lists a boundary cell twice")
            for f in c.boundary:
                if f not in index:
                    raise ValueError(f"boundary cell {f!r} of {c.id!r} must precede it")
                if parsed[index[f]].dim >= c.dim:
                    raise ValueError(f"boundary cell {f!r} of {c.id!r} must have smaller dimension")
            index[c.id] = pos
            prev_birth = c.birth
        self.cells: tuple[Cell, ...] = tuple(parsed)
        self.index = index
        self.columns: tuple[tuple[int, ...], ...] = tuple(
            tuple(sorted(index[f] for f in c.boundary)) for c in parsed
        )
        for j, col in enumerate(self.columns):
            acc: set[int] = set()
            for i in col:
                acc ^= set(self.columns[i])
            if acc:
                raise ValueError(f"boundary of boundary of {parsed[j].id!r} is nonzero mod 2")

    def __len__(self):
        return len(self.cells)

    @property
    def births(self) -> np.ndarray:
        return np.array([c.birth for c in self.cells], dtype=float)

    @property
    def dims(self) -> np.ndarray:
        return np.array([c.dim for c in self.cells], dtype=int)


def persistence_pairs(F: FilteredComplex, backend=None) -> tuple[list[tuple[int, int]], list[int]]:
    """Pairs (creator, destroyer) and essential creators, as cell positions."""
    reduce = backend.reduce_columns if backend is not None else kernels.reduce_columns
    low = reduce([list(c) for c in F.columns])
    pairs = [(i, j) for j, i in enumerate(low) if i >= 0]
    paired = {i for i, _ in pairs} | {j for _, j in pairs}
    essential = [i for i in range(len(F)) if i not in paired]
    return pairs, essential


def reduce_filtration(F: FilteredComplex, by_degree: bool = False, backend=None):
    """Barcode of the sublevel persistence module of ``F`` over F2.

    By default all homological degrees are merged into one barcode. With
    ``by_degree=True`` a dict ``{degree: Barcode}`` is returned instead.
    Pairs with equal births give zero-length bars and are dropped.
    """
    pairs, essential = persistence_pairs(F, backend)
    births = F.births
    dims = F.dims
    rows: list[tuple[int, float, float]] = []
    for i, j in pairs:
        if births[j] > births[i]:
            rows.append((int(dims[i]), births[i], births[j]))
    for i in essential:
        rows.append((int(dims[i]), births[i], INF))
    if not by_degree:
        return Barcode([r[1] for r in rows], [r[2] for r in rows])
    out = {}
    for deg in sorted({int(d) for d in dims}):
        sel = [r for r in rows if r[0] == deg]
        out[deg] = Barcode([r[1] for r in sel], [r[2] for r in sel])
    return out
