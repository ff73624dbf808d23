"""Command-line front end: frames, pair, verify, catalog.

Jobs are described by a JSON config file::

    {
      "schema_version": 1,
      "surface": {"catalog": "cylinder", "params": {"a": 1}},
      "curve": {"catalog": "helix", "params": {"alpha": "pi/4"}},
      "lambda": 0.25,
      "n_stations": 64
    }

A DSL surface is ``{"dsl": {"x": ..., "y": ..., "z": ...}, "domain": {"u": [a, b],
"v": [c, d]}}`` and a DSL curve is ``{"dsl": {"u": ..., "v": ...}, "t_range": [a, b]}``.
Numeric parameters may be given as constant expressions such as ``"pi/4"``.

Exit codes: 0 ok, 2 config or parse error, 3 numeric degeneracy, 4 singular
offset, 5 coincidence failure. The first stderr line of every failure is
``error: <code>: <message>``.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import catalog
from .dsl import compile_curve, compile_surface, parse_curve, parse_expr, parse_surface
from .dsl.compile import evaluate_dual
from .errors import CoincidenceFailure, ConfigError, DarbouxError, ExprError, ZeroLambda
from .framing import TAU_CLASS, frame_curve
from .geometry import ParamCurve, SurfacePatch
from .mannheim import TAU_COINCIDE, build_pair, pair_series, resolve_ids, verify_pair

SCHEMA_VERSION = 1
DEFAULT_STATIONS = 200

_TOP_KEYS = {"schema_version", "surface", "curve", "lambda", "n_stations", "tolerances",
             "format", "output"}


@dataclass
class JobConfig:
    surface: SurfacePatch
    curve: ParamCurve
    lam: Optional[float] = None
    n_stations: int = DEFAULT_STATIONS
    tol_class: float = TAU_CLASS
    tol_coincide: float = TAU_COINCIDE
    format: Optional[str] = None  # None: csv for frames and pair, json for verify
    output: Optional[str] = None
    description: Dict[str, object] = field(default_factory=dict)


# config loading -------------------------------------------------------------------

def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) {', '.join(unknown)} in {where}")


def _number(value, where) -> float:
    if isinstance(value, bool):
        raise ConfigError(f"{where} must be a number")
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        try:
            out = float(evaluate_dual(parse_expr(value, ()), {}).val)
        except ExprError as exc:
            exc.where = where
            raise
    else:
        raise ConfigError(f"{where} must be a number or a constant expression")
    if not math.isfinite(out):
        raise ConfigError(f"{where} must be finite")
    return out


def _interval(value, where) -> Tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{where} must be a two-element list")
    a, b = (_number(v, f"{where}[{i}]") for i, v in enumerate(value))
    if not b > a:
        raise ConfigError(f"{where} must be increasing, got [{a:g}, {b:g}]")
    return a, b


def _params(obj, where) -> Dict[str, float]:
    if obj is None:
        return {}
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object")
    return {k: _number(v, f"{where}.{k}") for k, v in obj.items()}


def _dsl_field(source, allowed, where):
    if not isinstance(source, str):
        raise ConfigError(f"{where} must be a string expression")
    try:
        return parse_expr(source, allowed)
    except ExprError as exc:
        exc.where = where
        raise


def _load_surface(spec):
    _check_keys(spec, {"catalog", "params", "dsl", "domain"}, "surface")
    if ("catalog" in spec) == ("dsl" in spec):
        raise ConfigError("surface needs exactly one of 'catalog' or 'dsl'")
    if "catalog" in spec:
        if "domain" in spec:
            raise ConfigError("surface.domain is only valid with surface.dsl")
        entry = catalog.get_entry(str(spec["catalog"]), **_params(spec.get("params"), "surface.params"))
        return entry, entry.patch, {"catalog": entry.name, "params": entry.params}
    if "params" in spec:
        raise ConfigError("surface.params is only valid with surface.catalog")
    dsl = spec["dsl"]
    _check_keys(dsl, {"x", "y", "z"}, "surface.dsl")
    dom = spec.get("domain")
    _check_keys(dom, {"u", "v"}, "surface.domain")
    if set(dsl) != {"x", "y", "z"} or set(dom) != {"u", "v"}:
        raise ConfigError("surface.dsl needs x, y, z and surface.domain needs u, v")
    for k in "xyz":
        _dsl_field(dsl[k], ("u", "v"), f"surface.dsl.{k}")
    domain = (_interval(dom["u"], "surface.domain.u"), _interval(dom["v"], "surface.domain.v"))
    try:
        parsed = parse_surface(dsl["x"], dsl["y"], dsl["z"], domain)
    except ExprError as exc:
        exc.where = "surface.dsl"
        raise
    patch = compile_surface(parsed)
    return None, patch, {"dsl": dict(dsl), "domain": {"u": list(domain[0]), "v": list(domain[1])}}


def _load_curve(spec, entry):
    _check_keys(spec, {"catalog", "params", "dsl", "t_range"}, "curve")
    if ("catalog" in spec) == ("dsl" in spec):
        raise ConfigError("curve needs exactly one of 'catalog' or 'dsl'")
    t_range = _interval(spec["t_range"], "curve.t_range") if "t_range" in spec else None
    if "catalog" in spec:
        if entry is None:
            raise ConfigError("catalog curves need a catalog surface")
        params = _params(spec.get("params"), "curve.params")
        curve = entry.curve(str(spec["catalog"]), t_range=t_range, **params)
        return curve, {"catalog": str(spec["catalog"]), "params": curve.params,
                       "t_range": list(curve.t_range)}
    if "params" in spec:
        raise ConfigError("curve.params is only valid with curve.catalog")
    dsl = spec["dsl"]
    _check_keys(dsl, {"u", "v"}, "curve.dsl")
    if set(dsl) != {"u", "v"} or t_range is None:
        raise ConfigError("curve.dsl needs u and v, and curve.t_range is required")
    for k in "uv":
        _dsl_field(dsl[k], ("t",), f"curve.dsl.{k}")
    try:
        parsed = parse_curve(dsl["u"], dsl["v"], t_range)
    except ExprError as exc:
        exc.where = "curve.dsl"
        raise
    return compile_curve(parsed), {"dsl": dict(dsl), "t_range": list(t_range)}


def load_config(path) -> Tuple[dict, JobConfig]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc.msg} at line {exc.lineno}") from None
    return raw, build_config(raw)


def build_config(raw) -> JobConfig:
    _check_keys(raw, _TOP_KEYS, "config")
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}")
    for key in ("surface", "curve"):
        if key not in raw:
            raise ConfigError(f"missing '{key}'")
    entry, patch, sdesc = _load_surface(raw["surface"])
    curve, cdesc = _load_curve(raw["curve"], entry)
    job = JobConfig(patch, curve, description={"surface": sdesc, "curve": cdesc})
    if "lambda" in raw:
        job.lam = _number(raw["lambda"], "lambda")
    if "n_stations" in raw:
        job.n_stations = _stations(raw["n_stations"])
    tol = raw.get("tolerances", {})
    _check_keys(tol, {"class", "coincide"}, "tolerances")
    if "class" in tol:
        job.tol_class = _tolerance(tol["class"], "tolerances.class")
    if "coincide" in tol:
        job.tol_coincide = _tolerance(tol["coincide"], "tolerances.coincide")
    if "format" in raw:
        job.format = _format(raw["format"])
    if "output" in raw:
        if not isinstance(raw["output"], str):
            raise ConfigError("output must be a path string")
        job.output = raw["output"]
    return job


def _stations(value) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 2:
        raise ConfigError(f"n_stations must be an integer >= 2, got {value!r}")
    return value


def _tolerance(value, where) -> float:
    out = _number(value, where)
    if out < 0:
        raise ConfigError(f"{where} must be non-negative")
    return out


def _format(value) -> str:
    if value not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {value!r}")
    return value


# output --------------------------------------------------------------------------

def _fmt(x) -> str:
    x = float(x)
    return "" if not math.isfinite(x) else "%.17g" % x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def to_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def to_csv(columns: Sequence[Tuple[str, np.ndarray]], meta: Optional[Dict] = None) -> str:
    buf = io.StringIO()
    for k, v in (meta or {}).items():
        buf.write(f"# {k}={v}\n")
    buf.write(",".join(name for name, _ in columns) + "\n")
    data = [np.asarray(col, dtype=float) for _, col in columns]
    for i in range(len(data[0])):
        buf.write(",".join(_fmt(col[i]) for col in data) + "\n")
    return buf.getvalue()


def _emit(text: str, out: Optional[str]):
    if out is None or out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {out}: {exc.strerror}") from None


# commands --------------------------------------------------------------------------

def frame_columns(framed) -> List[Tuple[str, np.ndarray]]:
    cols = [("s", framed.s)]
    cols += [(c, framed.x[:, k]) for k, c in enumerate("xyz")]
    for name in ("T", "g", "n"):
        vec = getattr(framed, name)
        cols += [(f"{name}_{c}", vec[:, k]) for k, c in enumerate("xyz")]
    cols += [(k, getattr(framed, k)) for k in ("k_g", "k_n", "tau_g", "kappa", "tau", "phi")]
    return cols


def cmd_frames(job: JobConfig) -> str:
    framed = frame_curve(job.surface, job.curve, job.n_stations)
    cols = frame_columns(framed)
    if (job.format or "csv") == "json":
        return to_json({"job": job.description, "n_stations": job.n_stations,
                        "series": {k: v for k, v in cols}})
    return to_csv(cols)


def _require_lambda(job: JobConfig) -> float:
    if job.lam is None:
        raise ConfigError("this command needs 'lambda' in the config")
    if job.lam == 0.0:
        raise ZeroLambda("lambda must be nonzero")
    if job.n_stations < 16:
        raise ConfigError("pair commands need n_stations >= 16")
    return job.lam


def _check_coincidence(pair, tol):
    worst = float(np.max(np.abs(np.abs(pair.coincidence) - 1.0)))
    if not worst <= tol:
        raise CoincidenceFailure(
            f"max ||<g, n1>| - 1| = {worst:.3g} exceeds tolerance {tol:g}")


def cmd_pair(job: JobConfig):
    lam = _require_lambda(job)
    pair = build_pair(job.surface, job.curve, lam, job.n_stations)
    meta = pair.metadata()
    cols = pair_series(pair)
    if (job.format or "csv") == "json":
        text = to_json({"job": job.description, "pair": meta, "series": {k: v for k, v in cols}})
    else:
        text = to_csv(cols, {k: (_fmt(v) if isinstance(v, float) else v) for k, v in meta.items()})
    return text, pair


def cmd_verify(job: JobConfig, identities="ALL"):
    lam = _require_lambda(job)
    ids = resolve_ids(identities)
    pair = build_pair(job.surface, job.curve, lam, job.n_stations)
    report = verify_pair(pair, ids, job.tol_class)
    if (job.format or "json") == "csv":
        rows = report.to_dict()["identities"]
        buf = io.StringIO()
        buf.write("id,applicable,gate_reason,max_abs,rms,normalized_max\n")
        for r in rows:
            reason = '"' + r["gate_reason"].replace('"', '""') + '"' if r["gate_reason"] else ""
            buf.write(f"{r['id']},{str(r['applicable']).lower()},{reason},"
                      f"{_fmt(r['max_abs'])},{_fmt(r['rms'])},{_fmt(r['normalized_max'])}\n")
        text = buf.getvalue()
    else:
        body = report.to_dict()
        body["pair"]["tol_coincide"] = job.tol_coincide
        text = to_json({"job": job.description, **body})
    return text, pair


def catalog_listing() -> str:
    lines = []
    for item in catalog.describe():
        lines.append(" ".join([item["name"]] + [f"{k}=<{p['meaning']}>"
                                                for k, p in item["params"].items()]))
        for c in item["curves"]:
            parts = [f"  {c['name']}"] + [f"{k}=<{p['meaning']}>" for k, p in c["params"].items()]
            lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


# entry point -------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """Reports usage errors as ``error: usage: <message>`` on the first line."""

    def error(self, message):
        sys.stderr.write(f"error: usage: {message}\n")
        self.print_usage(sys.stderr)
        raise SystemExit(2)


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON job file")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--stations", type=int, help="number of arc-length stations")
    common.add_argument("--tol-class", type=float, help="classification tolerance")

    ap = _Parser(
        prog="darboux-pairs",
        description="Darboux frames of curves on surfaces and Mannheim D-pair checks.")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("frames", parents=[common], help="frame and invariant series of a curve")
    sub.add_parser("pair", parents=[common], help="build an offset pair and write both curves")
    v = sub.add_parser("verify", parents=[common], help="residuals of the pair identities")
    v.add_argument("--identities", default="ALL",
                   help="comma-separated identity ids, or ALL (default)")
    c = sub.add_parser("catalog", help="list builtin surfaces and curves")
    c.add_argument("--json", action="store_true", help="machine-readable listing")
    return ap


def _apply_flags(job: JobConfig, args):
    if args.format:
        job.format = args.format
    if args.stations is not None:
        job.n_stations = _stations(args.stations)
    if args.tol_class is not None:
        job.tol_class = _tolerance(args.tol_class, "--tol-class")
    if args.out:
        job.output = args.out


def _error_line(exc: DarbouxError) -> str:
    where = getattr(exc, "where", None)
    msg = str(exc) if not where else f"{where}: {exc}"
    return f"error: {exc.code}: {' '.join(msg.split())}"


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        if args.command == "catalog":
            text = to_json(catalog.describe()) if args.json else catalog_listing()
            _emit(text, None)
            return 0
        _, job = load_config(args.config)
        _apply_flags(job, args)
        if args.command == "frames":
            _emit(cmd_frames(job), job.output)
        elif args.command == "pair":
            text, pair = cmd_pair(job)
            _emit(text, job.output)
            _check_coincidence(pair, job.tol_coincide)
        else:
            text, pair = cmd_verify(job, args.identities)
            _emit(text, job.output)
            _check_coincidence(pair, job.tol_coincide)
    except DarbouxError as exc:
        print(_error_line(exc), file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: config: {' '.join(str(exc).split())}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
