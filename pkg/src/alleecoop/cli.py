"""Command-line front end: parse a flat parameter file, dispatch analyses,
and emit deterministic CSV/JSON artifacts.

Config files are flat ``key = value`` text ('#' comments); ``--set
key=value`` overrides file values, and explicit subcommand flags override
both.  Every numeric is emitted with 17 significant digits so re-parsing
reproduces it exactly, CSV uses CRLF line endings with a mandatory header
row, and JSON objects keep a fixed key order -- identical configs produce
byte-identical outputs.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 bifurcation
gate/bracket failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bifurcation import (
    BifurcationPoint,
    hopf_s,
    saddle_node_lambda,
    transcritical_k0_origin,
    transcritical_lambda,
)
from .certificates import (
    CertificateReport,
    build_D0,
    check_corollary_global_stability,
    check_extinction,
    trace_grid_certificate,
)
from .equilibria import Equilibrium, boundary_equilibria, interior_equilibria
from .exceptions import (
    BracketError,
    BranchLost,
    ConfigError,
    DomainError,
    GateError,
    NoCrossing,
    NotSaddle,
    NotSemisimple,
    PoleError,
    StepFailure,
)
from .integrator import IntegratorConfig, PeriodicOrbit, integrate
from .manifolds import GapSample, grow_manifold, heteroclinic_find
from .model import Parameters, State, predator_nullcline, predator_nullcline_pole, prey_nullcline

PARAM_KEYS = ("r1", "k1", "k0", "lambda", "A", "b", "h", "s")

_EXIT_NUMERICAL = (StepFailure, NoCrossing, NotSaddle, DomainError, PoleError)
_EXIT_GATE = (GateError, BracketError, BranchLost, NotSemisimple)


def fmt(v: float) -> str:
    """Round-trip decimal formatting: 17 significant digits."""
    return format(float(v), ".17g")


def _to_jsonable(obj):
    """Recursively convert toolkit objects to JSON-ready structures."""
    if isinstance(obj, float):
        return _RawFloat(obj)
    if isinstance(obj, (int, str, bool)) or obj is None:
        return obj
    if isinstance(obj, complex):
        return {"re": _RawFloat(obj.real), "im": _RawFloat(obj.imag)}
    if isinstance(obj, State):
        return {"x": _RawFloat(obj.x), "y": _RawFloat(obj.y)}
    if isinstance(obj, Parameters):
        return {k: _RawFloat(getattr(obj, "lam" if k == "lambda" else k)) for k in PARAM_KEYS}
    if isinstance(obj, PeriodicOrbit):
        return {
            "period": _RawFloat(obj.period),
            "section_state": _to_jsonable(obj.section_state),
            "amplitude": [_RawFloat(a) for a in obj.amplitude],
            "bounds": [_RawFloat(a) for a in obj.bounds],
            "residual": _RawFloat(obj.residual),
            "return_slope": _RawFloat(obj.return_slope),
            "stable": obj.stable,
        }
    if isinstance(obj, GapSample):
        return {
            "lambda": _RawFloat(obj.lam),
            "y1": _RawFloat(obj.y1),
            "y2": _RawFloat(obj.y2),
            "x1": _RawFloat(obj.x1),
            "x2": _RawFloat(obj.x2),
            "gap": _RawFloat(obj.gap),
        }
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.floating):
        return _RawFloat(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    if hasattr(obj, "__dataclass_fields__"):
        return {k: _to_jsonable(getattr(obj, k)) for k in obj.__dataclass_fields__}
    return str(obj)


class _RawFloat:
    __slots__ = ("v",)

    def __init__(self, v: float):
        self.v = v


def _dump_json(obj, indent: int = 0) -> str:
    """Deterministic JSON writer with 17-significant-digit floats."""
    pad = "  " * indent
    if isinstance(obj, _RawFloat):
        v = obj.v
        if math.isnan(v):
            return '"nan"'
        if math.isinf(v):
            return '"inf"' if v > 0 else '"-inf"'
        return fmt(v)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = ",\n".join(
            f"{pad}  {json.dumps(str(k))}: {_dump_json(v, indent + 1)}" for k, v in obj.items()
        )
        return "{\n" + inner + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        inner = ",\n".join(f"{pad}  {_dump_json(v, indent + 1)}" for v in obj)
        return "[\n" + inner + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def dump_json(obj) -> str:
    return _dump_json(_to_jsonable(obj)) + "\n"


def write_csv(path_or_none: str | None, header: list[str], rows: list[list]) -> str:
    """RFC-4180-style CSV (CRLF, mandatory header); floats at 17 digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return _emit(path_or_none, buf.getvalue())


def _emit(path: str | None, text: str) -> str:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    parameters: Parameters
    options: dict[str, str] = field(default_factory=dict)

    def get_float(self, key: str, default: float | None = None) -> float:
        if key in self.options:
            try:
                return float(self.options[key])
            except ValueError as exc:
                raise ConfigError(f"option {key!r} is not a number: {self.options[key]!r}") from exc
        if default is None:
            raise ConfigError(f"missing required option {key!r}")
        return default

    def get_str(self, key: str, default: str | None = None) -> str:
        if key in self.options:
            return self.options[key]
        if default is None:
            raise ConfigError(f"missing required option {key!r}")
        return default

    def get_int(self, key: str, default: int) -> int:
        if key in self.options:
            try:
                return int(self.options[key])
            except ValueError as exc:
                raise ConfigError(f"option {key!r} is not an integer: {self.options[key]!r}") from exc
        return default

    def integrator_config(self, default_t_end: float = 1000.0) -> IntegratorConfig:
        try:
            return IntegratorConfig(
                t_end=self.get_float("t_end", default_t_end),
                rel_tol=self.get_float("rel_tol", 1e-9),
                abs_tol=self.get_float("abs_tol", 1e-12),
                max_step=self.get_float("max_step", math.inf),
                direction=self.get_str("direction", "forward"),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def parse_config_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_run_config(config_path: str | None, overrides: list[str]) -> RunConfig:
    raw: dict[str, str] = {}
    if config_path is not None:
        try:
            with open(config_path) as fh:
                raw.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config {config_path!r}: {exc}") from exc
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        raw[key.strip()] = value.strip()
    missing = [k for k in PARAM_KEYS if k not in raw]
    if missing:
        raise ConfigError(f"missing model parameters: {', '.join(missing)}")
    try:
        params = Parameters(
            r1=float(raw["r1"]),
            k1=float(raw["k1"]),
            k0=float(raw["k0"]),
            lam=float(raw["lambda"]),
            A=float(raw["A"]),
            b=float(raw["b"]),
            h=float(raw["h"]),
            s=float(raw["s"]),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid model parameters: {exc}") from exc
    options = {k: v for k, v in raw.items() if k not in PARAM_KEYS}
    return RunConfig(parameters=params, options=options)


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(cfg: RunConfig, out: str | None, fmt_kind: str) -> int:
    init = State(cfg.get_float("x0"), cfg.get_float("y0"))
    traj = integrate(cfg.parameters, init, cfg.integrator_config())
    if fmt_kind == "csv":
        rows = [[float(t), float(x), float(y)] for t, (x, y) in zip(traj.t, traj.xy)]
        write_csv(out, ["t", "x", "y"], rows)
    else:
        records = [
            {"t": float(t), "x": float(x), "y": float(y)} for t, (x, y) in zip(traj.t, traj.xy)
        ]
        _emit(out, dump_json(records))
    return 0


def _equilibrium_rows(eqs: list[Equilibrium]) -> list[list]:
    rows = []
    for e in eqs:
        e1, e2 = e.eigenvalues
        rows.append(
            [e.kind, e.state.x, e.state.y, e1.real, e1.imag, e2.real, e2.imag, e.cls]
        )
    return rows


def _solve_equilibria(p: Parameters) -> list[Equilibrium]:
    boundary = sorted(boundary_equilibria(p), key=lambda e: e.state.x)
    return boundary + interior_equilibria(p)


def cmd_equilibria(cfg: RunConfig, out: str | None, fmt_kind: str, sweep: str | None) -> int:
    header = ["kind", "x", "y", "re1", "im1", "re2", "im2", "class"]
    if sweep is None:
        eqs = _solve_equilibria(cfg.parameters)
        if fmt_kind == "csv":
            write_csv(out, header, _equilibrium_rows(eqs))
        else:
            _emit(out, dump_json([_eq_record(e) for e in eqs]))
        return 0

    key, values = _parse_sweep(sweep)
    p0 = cfg.parameters

    def solve_at(v: float) -> list[Equilibrium]:
        from .model import with_param

        return _solve_equilibria(with_param(p0, key, v))

    with ThreadPoolExecutor(max_workers=min(8, os.cpu_count() or 1)) as pool:
        results = list(pool.map(solve_at, values))
    if fmt_kind == "csv":
        rows = []
        for idx, (v, eqs) in enumerate(zip(values, results)):
            for row in _equilibrium_rows(eqs):
                rows.append([idx, float(v)] + row)
        write_csv(out, ["sweep_index", key] + header, rows)
    else:
        payload = [
            {"sweep_index": idx, key: float(v), "equilibria": [_eq_record(e) for e in eqs]}
            for idx, (v, eqs) in enumerate(zip(values, results))
        ]
        _emit(out, dump_json(payload))
    return 0


def _eq_record(e: Equilibrium) -> dict:
    return {
        "kind": e.kind,
        "x": e.state.x,
        "y": e.state.y,
        "eigenvalues": list(e.eigenvalues),
        "class": e.cls,
        "multiplicity": e.multiplicity,
    }


def _parse_sweep(spec: str) -> tuple[str, np.ndarray]:
    if "=" not in spec:
        raise ConfigError(f"--sweep expects key=lo:hi:n, got {spec!r}")
    key, rng = spec.split("=", 1)
    parts = rng.split(":")
    if len(parts) != 3:
        raise ConfigError(f"--sweep expects key=lo:hi:n, got {spec!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad sweep range {rng!r}") from exc
    if n < 1:
        raise ConfigError("sweep needs at least one point")
    return key.strip(), np.linspace(lo, hi, n)


def cmd_portrait(cfg: RunConfig, out_dir: str) -> int:
    p = cfg.parameters
    os.makedirs(out_dir, exist_ok=True)
    n = cfg.get_int("nullcline_n", 400)
    files: list[str] = []

    xs = np.linspace(1e-9 * p.k1, p.k1 * 1.02, n)
    rows1 = []
    for x in xs:
        y = prey_nullcline(p, float(x))
        if y is not None:
            rows1.append([float(x), float(y)])
    write_csv(os.path.join(out_dir, "nullcline_f1.csv"), ["x", "y"], rows1)
    files.append("nullcline_f1.csv")

    pole = predator_nullcline_pole(p)
    rows2 = []
    for x in xs:
        if pole is not None and abs(float(x) - pole) < 1e-6 * p.k1:
            continue
        y = predator_nullcline(p, float(x))
        if y >= 0.0:
            rows2.append([float(x), float(y)])
    write_csv(os.path.join(out_dir, "nullcline_f2.csv"), ["x", "y"], rows2)
    files.append("nullcline_f2.csv")

    manifold_spec = cfg.get_str("manifolds", "")
    if manifold_spec:
        for item in manifold_spec.split(","):
            which, _, sense = item.strip().partition(":")
            sense = sense or "stable"
            branch = grow_manifold(p, which, sense, require_crossing=False)
            name = f"manifold_{which}_{sense}.csv"
            rows = [[float(t), float(x), float(y)] for t, (x, y) in zip(branch.path.t, branch.path.xy)]
            write_csv(os.path.join(out_dir, name), ["t", "x", "y"], rows)
            files.append(name)

    traj_spec = cfg.get_str("trajectories", "")
    if traj_spec:
        icfg = cfg.integrator_config(default_t_end=500.0)
        for i, item in enumerate(t.strip() for t in traj_spec.split(";") if t.strip()):
            x0, y0 = (float(v) for v in item.split(","))
            traj = integrate(p, State(x0, y0), icfg)
            name = f"trajectory_{i:03d}.csv"
            rows = [[float(t), float(x), float(y)] for t, (x, y) in zip(traj.t, traj.xy)]
            write_csv(os.path.join(out_dir, name), ["t", "x", "y"], rows)
            files.append(name)

    manifest = {
        "version": __version__,
        "parameters": p,
        "tolerances": {
            "rel_tol": cfg.get_float("rel_tol", 1e-9),
            "abs_tol": cfg.get_float("abs_tol", 1e-12),
        },
        "files": files,
    }
    _emit(os.path.join(out_dir, "manifest.json"), dump_json(manifest))
    return 0


def cmd_bifurcate(cfg: RunConfig, kind: str, out: str | None, args) -> int:
    p = cfg.parameters
    if kind == "transcritical":
        at = args.at or cfg.get_str("at", None)
        bp = transcritical_lambda(p, at)
    elif kind == "saddle-node":
        bp = saddle_node_lambda(p, _bracket_from(cfg, args))
    elif kind == "hopf":
        branch = args.branch if args.branch is not None else cfg.get_int("branch", 0)
        bp = hopf_s(p, branch, _bracket_from(cfg, args))
    elif kind == "heteroclinic":
        bp = heteroclinic_find(p, _bracket_from(cfg, args))
    elif kind == "k0-origin":
        bp = transcritical_k0_origin(p)
    else:
        raise ConfigError(f"unknown bifurcation kind {kind!r}")
    record = {
        "kind": bp.kind,
        "param": bp.param,
        "critical_value": bp.critical_value,
        "location": bp.location,
        "diagnostics": bp.diagnostics,
    }
    _emit(out, dump_json(record))
    return 0


def _bracket_from(cfg: RunConfig, args) -> tuple[float, float]:
    if args.bracket is not None:
        return (args.bracket[0], args.bracket[1])
    return (cfg.get_float("bracket_lo"), cfg.get_float("bracket_hi"))


def cmd_check(cfg: RunConfig, kind: str, out: str | None, grid_n: int | None) -> int:
    p = cfg.parameters
    n = grid_n if grid_n is not None else cfg.get_int("grid_n", 400)
    if kind == "trace":
        report = trace_grid_certificate(p, build_D0(p, grid_n=n))
    elif kind == "corollary":
        report = check_corollary_global_stability(p)
    elif kind == "extinction":
        report = check_extinction(p, grid_n=n)
    else:
        raise ConfigError(f"unknown check kind {kind!r}")
    _emit(out, dump_json(_report_record(report)))
    return 0


def _report_record(report: CertificateReport) -> dict:
    return {
        "verdict": report.verdict,
        "checklist": {
            name: {"ok": item.ok, "lhs": item.lhs, "rhs": item.rhs, "detail": item.detail}
            for name, item in report.checklist.items()
        },
        "extremal_value": report.extremal_value,
        "extremal_point": list(report.extremal_point) if report.extremal_point else None,
        "minimum": report.minimum,
        "maximum": report.maximum,
        "note": report.note,
        "simulation": report.simulation,
    }


# ---------------------------------------------------------------------------
# argument parsing and dispatch


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="flat key = value parameter file")
    sub.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config value (repeatable)",
    )
    sub.add_argument("--out", help="output file (default: stdout)")
    sub.add_argument("--format", choices=("csv", "json"), help="output format")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="alleecoop",
        description="Numerical analysis of the cooperative-hunting predator-prey model",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = ap.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="integrate one trajectory")
    _add_common(sim)

    eq = subs.add_parser("equilibria", help="equilibrium table with stability classes")
    _add_common(eq)
    eq.add_argument("--sweep", metavar="KEY=LO:HI:N", help="fan out over one parameter")

    por = subs.add_parser("portrait", help="nullclines, manifolds and sample trajectories")
    _add_common(por)
    por.add_argument("--out-dir", required=True, help="directory for the portrait bundle")

    bif = subs.add_parser("bifurcate", help="locate a codimension-1 bifurcation")
    bif.add_argument(
        "kind",
        choices=("transcritical", "saddle-node", "hopf", "heteroclinic", "k0-origin"),
    )
    _add_common(bif)
    bif.add_argument("--at", choices=("E1", "E2"), help="boundary state for transcritical")
    bif.add_argument("--bracket", nargs=2, type=float, metavar=("LO", "HI"))
    bif.add_argument("--branch", type=int, help="interior-equilibrium index to track")

    chk = subs.add_parser("check", help="run a certificate and emit its checklist")
    chk.add_argument("kind", choices=("trace", "corollary", "extinction"))
    _add_common(chk)
    chk.add_argument("--grid-n", type=int, help="samples per axis for grid certificates")

    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = load_run_config(args.config, args.overrides)
        fmt_kind = args.format or cfg.options.get("format", "csv")
        if fmt_kind not in ("csv", "json"):
            raise ConfigError(f"format must be csv|json, got {fmt_kind!r}")
        out = args.out or cfg.options.get("out")
        if args.command == "simulate":
            return cmd_simulate(cfg, out, fmt_kind)
        if args.command == "equilibria":
            return cmd_equilibria(cfg, out, fmt_kind, args.sweep)
        if args.command == "portrait":
            return cmd_portrait(cfg, args.out_dir)
        if args.command == "bifurcate":
            if args.kind == "transcritical" and not (args.at or "at" in cfg.options):
                raise ConfigError("transcritical needs --at E1|E2")
            return cmd_bifurcate(cfg, args.kind, out, args)
        if args.command == "check":
            return cmd_check(cfg, args.kind, out, args.grid_n)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        _fail("config_error", exc)
        return 2
    except _EXIT_GATE as exc:
        _fail(type(exc).__name__, exc)
        return 4
    except _EXIT_NUMERICAL as exc:
        _fail(type(exc).__name__, exc)
        return 3


def _fail(kind: str, exc: Exception) -> None:
    sys.stderr.write(dump_json({"error": kind, "message": str(exc)}))


if __name__ == "__main__":
    sys.exit(main())
