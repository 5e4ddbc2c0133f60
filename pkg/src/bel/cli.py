"""Command-line interface: ``bel <command> ...``."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io
from .estimators import EvaluationSchedule, barcode_entropy, eps_entropy
from .io import Config, canonical_json
from .persistence import count_bars, reduce_filtration


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _band(text: str) -> list[float]:
    vals = _floats(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("band needs two radii r_minus,r_plus")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bel", description="Barcode entropy lab.")
    sub = p.add_subparsers(dest="command", required=True)

    def fmt(sp, default):
        sp.add_argument("--format", choices=("json", "tsv"), default=default)

    c = sub.add_parser("count", help="count bars longer than eps born below s")
    c.add_argument("input", help="barcode file")
    c.add_argument("--eps", type=float, required=True)
    c.add_argument("--s", type=_floats, required=True, help="one or more comma-separated s values")
    fmt(c, "tsv")

    e = sub.add_parser("entropy", help="finite-range barcode entropy estimate")
    e.add_argument("input", help="barcode file")
    e.add_argument("--eps", type=float, default=None, help="single eps (default: sweep --eps-grid)")
    e.add_argument("--eps-grid", type=_floats, default=[0.4, 0.2, 0.1])
    e.add_argument("--tau-max", type=float, required=True)
    e.add_argument("--tau-step", type=float, default=1.0)
    e.add_argument("--tail-fraction", type=float, default=0.5)
    fmt(e, "json")

    r = sub.add_parser("reduce", help="barcode of a filtration file")
    r.add_argument("input", help="filtration file")
    r.add_argument("--by-degree", action="store_true")
    fmt(r, "tsv")

    o = sub.add_parser("orbits", help="closed-orbit counts p(s) of a symbolic flow")
    o.add_argument("input", help="flow JSON")
    o.add_argument("--smax", type=float, required=True)
    o.add_argument("--s-step", type=float, default=1.0)
    o.add_argument("--no-iterates", action="store_true", help="count prime orbits only")
    fmt(o, "tsv")

    sh = sub.add_parser("shadow", help="shadow seeded pseudo-orbits of a torus flow")
    sh.add_argument("input", help="flow JSON of kind torus")
    sh.add_argument("--eta", type=float, default=1e-4)
    sh.add_argument("--seeds", type=int, default=100)
    sh.add_argument("--step", type=float, default=0.01)
    fmt(sh, "tsv")

    pr = sub.add_parser("profile", help="profile utilities")
    prs = pr.add_subparsers(dest="profile_command", required=True)
    chk = prs.add_parser("check", help="certify a profile file")
    chk.add_argument("input", help="profile JSON")
    fmt(chk, "tsv")
    chk2 = sub.add_parser("profile-check", help="same as 'profile check'")
    chk2.add_argument("input", help="profile JSON")
    fmt(chk2, "tsv")

    cc = sub.add_parser("corollary-c", help="model-level barcode vs topological entropy report")
    cc.add_argument("--flow", required=True)
    cc.add_argument("--profile", required=True)
    cc.add_argument("--sigma", type=float, default=0.5)
    cc.add_argument("--band", type=_band, default=[1.5, 1.9], help="r_minus,r_plus of the model")
    cc.add_argument("--eta-schedule", type=_floats, default=[0.2, 0.1, 0.05])
    cc.add_argument("--smax", type=float, default=25.0)
    cc.add_argument("--tau-step", type=float, default=0.5)
    cc.add_argument("--tail-fraction", type=float, default=0.5)
    cc.add_argument("--eps-grid", type=_floats, default=[0.4, 0.2, 0.1])
    cc.add_argument("--no-iterates", action="store_true")
    cc.add_argument("--trace", default=None, help="write the per-band trace as TSV here")
    fmt(cc, "json")
    return p


def config_from_args(ns: argparse.Namespace) -> Config:
    d = dict(vars(ns))
    command = d.pop("command")
    if command == "profile":
        d.pop("profile_command")
        command = "profile-check"
    return Config(command, d)


def _tsv(header, rows) -> str:
    lines = ["\t".join(header)]
    for row in rows:
        lines.append("\t".join(_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def run(cfg: Config) -> tuple[str, int]:
    """Execute a config; returns (stdout text, exit status)."""
    p = cfg.params
    cmd = cfg.command
    if cmd == "count":
        B = io.parse_barcode_file(_read(p["input"]))
        rows = [(s, count_bars(B, p["eps"], s)) for s in p["s"]]
        if p["format"] == "json":
            return canonical_json({"eps": p["eps"], "s": [r[0] for r in rows], "count": [r[1] for r in rows]}) + "\n", 0
        return _tsv(["s", "count"], rows), 0

    if cmd == "entropy":
        B = io.parse_barcode_file(_read(p["input"]))
        sched = EvaluationSchedule.linear(p["tau_max"], p["tau_step"], p["tail_fraction"], p["eps_grid"])
        est = eps_entropy(B, p["eps"], sched) if p["eps"] is not None else barcode_entropy(B, sched)
        if p["format"] == "json":
            return io.emit_report(est) + "\n", 0
        return _tsv(["x", "value"], est.trace), 0

    if cmd == "reduce":
        F = io.parse_filtration_file(_read(p["input"]))
        if p["by_degree"]:
            parts = reduce_filtration(F, by_degree=True)
            if p["format"] == "json":
                return canonical_json({str(k): _bars_json(v) for k, v in parts.items()}) + "\n", 0
            out = []
            for deg, B in parts.items():
                out.append(f"# degree {deg}\n")
                out.append(io.emit_barcode(B))
            return "".join(out), 0
        B = reduce_filtration(F)
        if p["format"] == "json":
            return canonical_json(_bars_json(B)) + "\n", 0
        return io.emit_barcode(B), 0

    if cmd == "orbits":
        from .symbolic import SFTFlow, flow_from_dict

        F = flow_from_dict(io.load_json_file(p["input"]))
        if not isinstance(F, SFTFlow):
            raise ValueError("orbits needs a flow of kind 'sft'")
        s = _grid(p["smax"], p["s_step"])
        counts = F.count_orbits_many(s, not p["no_iterates"])
        if p["format"] == "json":
            return canonical_json({"s": s.tolist(), "p": counts.tolist()}) + "\n", 0
        return _tsv(["s", "p(s)"], zip(s.tolist(), counts.tolist())), 0

    if cmd == "shadow":
        from .symbolic import TorusFlow, flow_from_dict, shadow

        F = flow_from_dict(io.load_json_file(p["input"]))
        if not isinstance(F, TorusFlow):
            raise ValueError("shadow needs a flow of kind 'torus'")
        rows = []
        for seed in range(p["seeds"]):
            curve, n = F.random_pseudo_orbit(p["eta"], seed, p["step"])
            res = shadow(curve, F, p["eta"], p["step"])
            rows.append((seed, n, res.distance, res.residual, res.constant(p["eta"])))
        C = max((r[4] for r in rows), default=0.0)
        if p["format"] == "json":
            return canonical_json({
                "eta": p["eta"],
                "C": C,
                "seeds": [{"seed": r[0], "traversals": r[1], "distance": r[2], "residual": r[3]} for r in rows],
            }) + "\n", 0
        return _tsv(["seed", "traversals", "distance", "residual"], [r[:4] for r in rows]) + f"# C\t{_cell(C)}\n", 0

    if cmd == "profile-check":
        from .profiles import ProfileError, profile_from_dict

        try:
            cert = profile_from_dict(io.load_json_file(p["input"])).certificate
        except ProfileError as exc:
            if exc.certificate is None:
                raise
            cert = exc.certificate
        if p["format"] == "json":
            return canonical_json({"ok": cert.ok, "checks": cert.checks, "details": cert.details}) + "\n", 0 if cert.ok else 1
        return cert.report() + "\n", 0 if cert.ok else 1

    if cmd == "corollary-c":
        from .lab import CrossingEnergyModel, corollary_c_report
        from .profiles import profile_from_dict
        from .symbolic import SFTFlow, flow_from_dict

        F = flow_from_dict(io.load_json_file(p["flow"]))
        if not isinstance(F, SFTFlow):
            raise ValueError("corollary-c needs a flow of kind 'sft'")
        P = profile_from_dict(io.load_json_file(p["profile"]))
        M = CrossingEnergyModel(p["sigma"], tuple(p["band"]))
        sched = EvaluationSchedule.linear(p["smax"], p["tau_step"], p["tail_fraction"], p["eps_grid"])
        rep = corollary_c_report(F, P, M, sched, p["eta_schedule"], not p["no_iterates"])
        header = ["eta", "r_plus", "hbar", "ratio", "floor", "cap"]
        rows = [[row[k] for k in header] for row in rep.trace]
        trace_tsv = _tsv(header, rows)
        if p["trace"]:
            with open(p["trace"], "w", encoding="utf-8") as fh:
                fh.write(trace_tsv)
        if p["format"] == "tsv":
            return trace_tsv, 0
        return io.emit_report(rep) + "\n", 0

    raise ValueError(f"unknown command {cmd!r}")


def _grid(smax: float, step: float) -> np.ndarray:
    if not step > 0:
        raise ValueError("step must be positive")
    n = int(np.floor(smax / step + 1e-9))
    return step * np.arange(1, n + 1)


def _bars_json(B):
    return [[float(b), ("inf" if np.isinf(d) else float(d)), int(m)] for b, d, m in zip(B.births, B.deaths, B.mults)]


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        text, status = run(cfg)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"bel: error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
