"""Text formats: barcode and filtration files, canonical JSON, configs."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .estimators import EntropyEstimate
from .lab import ComparisonReport
from .persistence import INF, Barcode, Cell, FilteredComplex

FLOAT_DIGITS = 12


class FormatError(ValueError):
    """Malformed input text."""


# -- barcodes -----------------------------------------------------------------


def _parse_float(tok: str, lineno: int, what: str) -> float:
    if tok.lower() in ("inf", "+inf", "infinity"):
        return INF
    try:
        v = float(tok)
    except ValueError:
        raise FormatError(f"line {lineno}: cannot parse {what} {tok!r}") from None
    if math.isnan(v):
        raise FormatError(f"line {lineno}: {what} is NaN")
    return v


def parse_barcode_file(text: str) -> Barcode:
    """Parse ``birth<TAB>death[<TAB>multiplicity]`` lines; ``#`` starts a comment."""
    births, deaths, mults = [], [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t") if "\t" in line else line.split()
        if len(parts) not in (2, 3):
            raise FormatError(f"line {lineno}: expected birth, death and multiplicity, got {len(parts)} fields")
        b = _parse_float(parts[0], lineno, "birth")
        d = _parse_float(parts[1], lineno, "death")
        if math.isinf(b):
            raise FormatError(f"line {lineno}: birth must be finite")
        if b < 0:
            raise FormatError(f"line {lineno}: birth < 0")
        if b >= d:
            raise FormatError(f"birth ≥ death at line {lineno}")
        m = 1
        if len(parts) == 3:
            try:
                m = int(parts[2])
            except ValueError:
                raise FormatError(f"line {lineno}: multiplicity {parts[2]!r} is not an integer") from None
            if m < 1:
                raise FormatError(f"line {lineno}: multiplicity must be positive")
        births.append(b)
        deaths.append(d)
        mults.append(m)
    return Barcode(births, deaths, mults)


def _num(x: float) -> str:
    return "inf" if math.isinf(x) else repr(float(x))


def emit_barcode(B: Barcode) -> str:
    return "".join(f"{_num(b)}\t{_num(d)}\t{int(m)}\n" for b, d, m in zip(B.births, B.deaths, B.mults))


# -- filtrations ----------------------------------------------------------------


def parse_filtration_file(text: str) -> FilteredComplex:
    """Parse ``id dim birth face...`` lines into a validated complex."""
    cells = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 3:
            raise FormatError(f"line {lineno}: expected id, dim and birth")
        try:
            dim = int(parts[1])
        except ValueError:
            raise FormatError(f"line {lineno}: dimension {parts[1]!r} is not an integer") from None
        birth = _parse_float(parts[2], lineno, "birth")
        cells.append(Cell(parts[0], dim, birth, tuple(parts[3:])))
    try:
        return FilteredComplex(cells)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def emit_filtration(F: FilteredComplex) -> str:
    return "".join(
        " ".join([c.id, str(c.dim), _num(c.birth), *c.boundary]) + "\n" for c in F.cells
    )


# -- canonical JSON ---------------------------------------------------------------


def _encode(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, float) or hasattr(obj, "dtype"):
        if hasattr(obj, "dtype") and obj.dtype.kind in "iu":
            return str(int(obj))
        if hasattr(obj, "dtype") and obj.dtype.kind == "b":
            return "true" if bool(obj) else "false"
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"refusing to serialize non-finite number {x}")
        out = format(x, f".{FLOAT_DIGITS}g")
        # keep floats recognizable as floats after a parse
        return out if any(ch in out for ch in ".e") else out + ".0"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(f"{json.dumps(k)}:{_encode(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)) or hasattr(obj, "tolist"):
        seq = obj.tolist() if hasattr(obj, "tolist") else obj
        return "[" + ",".join(_encode(v) for v in seq) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj) -> str:
    """Sorted keys, no whitespace, floats at 12 significant digits, no NaN."""
    return _encode(obj)


def _reject_constant(name):
    raise ValueError(f"non-finite JSON constant {name} is not allowed")


def loads(text: str):
    """Strict JSON parse: NaN and Infinity are rejected."""
    return json.loads(text, parse_constant=_reject_constant)


def emit_report(R) -> str:
    """Canonical JSON for an ``EntropyEstimate`` or ``ComparisonReport``."""
    if isinstance(R, (EntropyEstimate, ComparisonReport)):
        return canonical_json(R.to_dict())
    raise TypeError(f"cannot emit {type(R).__name__} as a report")


def parse_report(text: str):
    """Inverse of :func:`emit_report`; unknown keys are errors."""
    d = loads(text)
    if not isinstance(d, dict):
        raise FormatError("report must be a JSON object")
    if "hbar" in d:
        return ComparisonReport.from_dict(d)
    return EntropyEstimate.from_dict(d)


def load_json_file(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        d = loads(fh.read())
    if not isinstance(d, dict):
        raise FormatError(f"{path}: expected a JSON object")
    return d


# -- configuration -------------------------------------------------------------------

COMMANDS = ("count", "entropy", "reduce", "orbits", "shadow", "profile-check", "corollary-c")

# Parameters accepted per command with their defaults.
PARAMS: dict[str, dict] = {
    "count": {"input": None, "eps": None, "s": None, "format": "tsv"},
    "entropy": {"input": None, "eps": None, "eps_grid": [0.4, 0.2, 0.1], "tau_max": None,
                "tau_step": 1.0, "tail_fraction": 0.5, "format": "json"},
    "reduce": {"input": None, "by_degree": False, "format": "tsv"},
    "orbits": {"input": None, "smax": None, "s_step": 1.0, "no_iterates": False, "format": "tsv"},
    "shadow": {"input": None, "eta": 1e-4, "seeds": 100, "step": 0.01, "format": "tsv"},
    "profile-check": {"input": None, "format": "tsv"},
    "corollary-c": {"flow": None, "profile": None, "sigma": 0.5, "band": [1.5, 1.9],
                    "eta_schedule": [0.2, 0.1, 0.05], "smax": 25.0, "tau_step": 0.5,
                    "tail_fraction": 0.5, "eps_grid": [0.4, 0.2, 0.1], "no_iterates": False,
                    "trace": None, "format": "json"},
}


@dataclass
class Config:
    command: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        allowed = PARAMS[self.command]
        unknown = set(self.params) - set(allowed)
        if unknown:
            raise ValueError(f"unknown parameters for {self.command}: {sorted(unknown)}")
        full = dict(allowed)
        full.update(self.params)
        for k, v in full.items():
            if isinstance(v, tuple):
                full[k] = list(v)
        self.params = full

    def __getitem__(self, key):
        return self.params[key]

    def to_dict(self) -> dict:
        return {"command": self.command, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "Config":
        if set(d) != {"command", "params"}:
            raise ValueError(f"config keys must be ['command', 'params'], got {sorted(d)}")
        return cls(d["command"], dict(d["params"]))

    def dumps(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def loads(cls, text: str) -> "Config":
        return cls.from_dict(loads(text))
