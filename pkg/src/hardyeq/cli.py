"""Batch front end: ``hardyeq {eval,best,verify,suite}``.

Instance files hold a JSON array (or one JSON object per line) of::

    {"kind": "hardy", "theorem": "4.1", "domain": [x0, xn],
     "exponents": {"p": 2, "q": 2, "r": 1},
     "weights": {"w": W, "v": W, "u": W}}

where a weight ``W`` is either a list of segments
``{"from", "to", "c", "a"}`` or the shorthand ``{"power": a, "c": c}``
spanning the domain.  ``p`` defaults to 1; ``r`` and ``u`` are needed by
iterated kinds only; ``domain`` defaults to ``--domain``.

Output is one record per line (JSON) or a CSV table with the columns in
:data:`COLUMNS`.  Exit status: 0 when every record passes, 1 when any
verdict fails or a run errors, 2 on configuration or parse errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .discrete import InequalitySpec, LogGrid, OperatorKind
from .errors import HardyError, HypothesisViolated, WeightParseError
from .solver import best_constant
from .verify import (
    THEOREMS,
    characterization,
    random_spec,
    resolve_theorem,
    verify_characterization,
    verify_equivalence,
)
from .weights import PiecewisePowerWeight, parse_weight

__all__ = ["COLUMNS", "RunConfig", "Instance", "load_instances", "run", "read_records",
           "format_records", "main"]

COLUMNS = ("instance_id", "theorem", "regime", "value", "parts", "c_orig", "c_red", "ratio",
           "verdict", "status", "method", "witness", "message")
_JSON_COLS = ("parts", "witness")
_FLOAT_COLS = ("value", "c_orig", "c_red", "ratio")
_METHOD_NAMES = {"atom": "atom", "kat": "k_atom", "k_atom": "k_atom", "power": "power_iteration",
                 "power_iteration": "power_iteration", "ascent": "multistart_ascent",
                 "multistart_ascent": "multistart_ascent"}


class ConfigError(Exception):
    """Bad flags or instance file; maps to exit status 2."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    path: Optional[str] = None
    n: int = 512
    domain: tuple = (1e-3, 1e3)
    seed: int = 0
    window: float = 16.0
    fmt: str = "json"
    methods: tuple = ("atom", "power_iteration", "multistart_ascent")
    restarts: int = 8
    k: int = 2
    budget: int = 100_000
    jobs: int = 1
    theorems: tuple = ()
    count: int = 20

    def __post_init__(self):
        if self.n < 16:
            raise ConfigError("--n must be at least 16")
        if not (0 < self.domain[0] < self.domain[1] < math.inf):
            raise ConfigError("--domain needs 0 < x0 < xn")
        if not self.window > 1:
            raise ConfigError("--window must exceed 1")
        if self.fmt not in ("json", "csv"):
            raise ConfigError("--format must be json or csv")


@dataclass(frozen=True)
class Instance:
    """One parsed instance plus the line it started on."""

    index: int
    line: int
    spec: InequalitySpec
    theorem: Optional[str]

    @property
    def id(self) -> str:
        return str(self.index)


# -- parsing -------------------------------------------------------------------

def _parse_domain(text: str) -> tuple:
    try:
        a, b = text.split(":")
        return float(a), float(b)
    except ValueError:
        raise ConfigError(f"--domain expects x0:xn, got {text!r}") from None


def _weight(obj, domain, name):
    if isinstance(obj, dict) and "power" in obj:
        try:
            a, c = float(obj["power"]), float(obj.get("c", 1.0))
        except (TypeError, ValueError) as exc:
            raise WeightParseError(f"weight {name}: {exc}") from None
        if c <= 0:
            raise WeightParseError(f"weight {name}: coefficient must be positive")
        return PiecewisePowerWeight.power(a, c, domain)
    if not isinstance(obj, list):
        raise WeightParseError(f"weight {name}: expected a segment list or a power shorthand")
    try:
        w = parse_weight(obj)
    except WeightParseError as exc:
        raise WeightParseError(f"weight {name}: {exc}") from None
    if not (np.isclose(w.domain[0], domain[0], rtol=1e-12)
            and np.isclose(w.domain[1], domain[1], rtol=1e-12)):
        raise WeightParseError(f"weight {name}: spans {w.domain}, instance domain is {domain}")
    # snap the ends so weights and grid share the domain bit for bit
    bps = (domain[0],) + w.breakpoints[1:-1] + (domain[1],)
    return PiecewisePowerWeight(bps, w.coeffs, w.exponents)


def _float(obj, key, default=None):
    if key not in obj:
        if default is None:
            raise ValueError(f"missing exponent {key!r}")
        return default
    val = obj[key]
    if isinstance(val, str) and val.lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ValueError(f"exponent {key!r} must be a number")
    return float(val)


def build_spec(obj, cfg: RunConfig, index: int) -> tuple:
    """Turn one instance object into ``(spec, theorem)``."""
    if not isinstance(obj, dict):
        raise ValueError("instance must be an object")
    unknown = set(obj) - {"kind", "theorem", "domain", "exponents", "weights", "label"}
    if unknown:
        raise ValueError(f"unknown keys {sorted(unknown)}")
    domain = tuple(float(t) for t in obj.get("domain", cfg.domain))
    if len(domain) != 2 or not 0 < domain[0] < domain[1]:
        raise ValueError("domain must be [x0, xn] with 0 < x0 < xn")
    ex = obj.get("exponents")
    ws = obj.get("weights")
    if not isinstance(ex, dict) or not isinstance(ws, dict):
        raise ValueError("instance needs 'exponents' and 'weights' objects")
    tag = obj.get("kind", "hardy")
    p, q = _float(ex, "p", 1.0), _float(ex, "q")
    for name in ("v", "w"):
        if name not in ws:
            raise ValueError(f"missing weight {name!r}")
    v, w = _weight(ws["v"], domain, "v"), _weight(ws["w"], domain, "w")
    if "r" in ex or "u" in ws:
        u = _weight(ws["u"], domain, "u") if "u" in ws else None
        kind = OperatorKind(tag, _float(ex, "r"), u)
    else:
        kind = OperatorKind(tag)
    th = obj.get("theorem")
    if th is not None:
        th = resolve_theorem(th).key
    label = str(obj.get("label", index))
    spec = InequalitySpec(kind, p, q, w, v, LogGrid(domain[0], domain[1], cfg.n),
                          seed=cfg.seed, label=label)
    return spec, th


def _split_array(text: str):
    """Yield ``(obj, line)`` for each element of a JSON array or JSON-lines text."""
    dec = json.JSONDecoder()
    stripped = text.lstrip()
    if not stripped.startswith("["):
        for k, line in enumerate(text.splitlines(), 1):
            if line.strip():
                try:
                    yield json.loads(line), k
                except json.JSONDecodeError as exc:
                    raise ConfigError(f"line {k}: {exc.msg}") from None
        return
    pos = text.index("[") + 1

    def skip(i):
        while i < len(text) and text[i] in " \t\r\n":
            i += 1
        return i

    def line_of(i):
        return text.count("\n", 0, i) + 1

    pos = skip(pos)
    if pos < len(text) and text[pos] == "]":
        return
    while True:
        try:
            obj, end = dec.raw_decode(text, pos)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {exc.lineno}: {exc.msg}") from None
        yield obj, line_of(pos)
        pos = skip(end)
        if pos >= len(text):
            raise ConfigError(f"line {line_of(pos)}: unterminated array")
        if text[pos] == "]":
            if text[pos + 1:].strip():
                raise ConfigError(f"line {line_of(pos + 1)}: trailing data after array")
            return
        if text[pos] != ",":
            raise ConfigError(f"line {line_of(pos)}: expected ',' or ']'")
        pos = skip(pos + 1)


def load_instances(text: str, cfg: RunConfig) -> list:
    """Parse an instance file; errors carry the line of the offending instance."""
    out = []
    for k, (obj, line) in enumerate(list(_split_array(text))):
        try:
            spec, th = build_spec(obj, cfg, k)
        except (ValueError, KeyError, TypeError, HardyError) as exc:
            msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
            raise ConfigError(f"line {line}: instance {k}: {msg}") from None
        out.append(Instance(k, line, spec, th))
    if not out:
        raise ConfigError("no instances found")
    return out


# -- records -------------------------------------------------------------------

def _record(instance_id, **kw) -> dict:
    rec = dict.fromkeys(COLUMNS)
    rec["instance_id"] = str(instance_id)
    rec.update(kw)
    return rec


def _num(x):
    return None if x is None else float(x)


def _witness(est, top=8):
    h = est.witness.values
    cells = est.support()
    order = cells[np.argsort(-h[cells], kind="stable")][:top]
    return {"support_size": int(cells.size),
            "support_range": [int(cells.min()), int(cells.max())] if cells.size else [],
            "top_cells": [int(c) for c in order],
            "heights": [float(h[c]) for c in order],
            "x": [float(est.witness.grid.points[c]) for c in order]}


def _eval(inst: Instance, cfg: RunConfig) -> dict:
    F, _exact = characterization(inst.spec)
    return _record(inst.id, theorem=inst.theorem, regime=F.regime, value=float(F.value),
                   parts={k: float(v) for k, v in F.parts.items()}, status="ok")


def _best(inst: Instance, cfg: RunConfig) -> dict:
    est = best_constant(inst.spec, cfg.methods, restarts=cfg.restarts, k=cfg.k,
                        budget=cfg.budget)
    parts = {k: float(v) for k, v in est.details.get("all", {}).items()}
    return _record(inst.id, theorem=inst.theorem, value=float(est.value), parts=parts, status="ok",
                   method=est.method, witness=_witness(est))


def _verify(inst: Instance, cfg: RunConfig) -> dict:
    if inst.theorem is None:
        rep = verify_characterization(inst.spec, methods=cfg.methods, restarts=cfg.restarts)
    else:
        rep = verify_equivalence(inst.spec, inst.theorem, K=cfg.window, methods=cfg.methods,
                                 restarts=cfg.restarts)
    return _record(inst.id, theorem=rep.theorem, regime=rep.regime or None,
                   value=float(rep.c_orig), parts={k: float(v) for k, v in rep.parts.items()},
                   c_orig=float(rep.c_orig), c_red=float(rep.c_red), ratio=float(rep.ratio),
                   verdict=rep.verdict, status="pass" if rep.verdict else "fail",
                   method=rep.estimate.method,
                   message=f"window [{rep.window[0]:.6g}, {rep.window[1]:.6g}]")


_RUNNERS = {"eval": _eval, "best": _best, "verify": _verify, "suite": _verify}


def _run_one(args) -> dict:
    inst, cfg = args
    try:
        return _RUNNERS[cfg.command](inst, cfg)
    except HypothesisViolated as exc:
        return _record(inst.id, theorem=inst.theorem, status="skipped",
                       message=f"HypothesisViolated: {exc}")
    except HardyError as exc:
        return _record(inst.id, theorem=inst.theorem, status="error",
                       message=f"{type(exc).__name__}: {exc}")


def run(instances, cfg: RunConfig) -> list:
    """Process instances (in parallel when ``cfg.jobs > 1``), keeping input order."""
    jobs = [(inst, cfg) for inst in instances]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            return list(ex.map(_run_one, jobs))
    return [_run_one(j) for j in jobs]


def suite_instances(cfg: RunConfig) -> list:
    ids = cfg.theorems or tuple(k for k in THEOREMS if k != "identity")
    grid = LogGrid(cfg.domain[0], cfg.domain[1], cfg.n)
    out = []
    for th in ids:
        for i in range(cfg.count):
            sp = random_spec(th, cfg.seed + i, grid)
            out.append(Instance(len(out), 0, sp, th))
    return out


def exit_code(records) -> int:
    bad = any(r["status"] in ("fail", "error") for r in records)
    return 1 if bad else 0


def _csv_cell(col, val):
    if val is None:
        return ""
    if col in _JSON_COLS:
        return json.dumps(val, sort_keys=True)
    if col == "verdict":
        return "true" if val else "false"
    if col in _FLOAT_COLS:
        return repr(float(val))
    return str(val)


def format_records(records, fmt: str = "json") -> str:
    """Serialise records as JSON lines or CSV."""
    if fmt == "json":
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(COLUMNS)
    for r in records:
        wr.writerow([_csv_cell(c, r.get(c)) for c in COLUMNS])
    return buf.getvalue()


def read_records(text: str, fmt: str = "json") -> list:
    """Inverse of :func:`format_records`."""
    if fmt == "json":
        return [json.loads(line) for line in text.splitlines() if line.strip()]
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != COLUMNS:
        raise ValueError("unexpected CSV header")
    out = []
    for row in rows[1:]:
        rec = {}
        for col, cell in zip(COLUMNS, row):
            if cell == "":
                rec[col] = None
            elif col in _JSON_COLS:
                rec[col] = json.loads(cell)
            elif col == "verdict":
                rec[col] = cell == "true"
            elif col in _FLOAT_COLS:
                rec[col] = float(cell)
            else:
                rec[col] = cell
        out.append(rec)
    return out


# -- entry point -------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hardyeq", description=__doc__.split("\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=512, help="grid points (>= 16)")
    common.add_argument("--domain", default="1e-3:1e3", help="truncation window x0:xn")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--window", type=float, default=16.0, help="pass window K")
    common.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    common.add_argument("--methods", default="atom,power,ascent",
                        help="comma list of atom,kat,power,ascent")
    common.add_argument("--restarts", type=int, default=8)
    common.add_argument("--k", type=int, default=2, help="atoms per support for kat")
    common.add_argument("--budget", type=int, default=100_000, help="kat evaluation budget")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, hlp in (("eval", "characterization functionals"),
                      ("best", "best-constant estimates"),
                      ("verify", "equivalence or characterization checks")):
        sp = sub.add_parser(name, parents=[common], help=hlp)
        sp.add_argument("instances", help="instance file ('-' for stdin)")
    sp = sub.add_parser("suite", parents=[common], help="random equivalence suite")
    sp.add_argument("--theorems", default="", help="comma list of theorem ids (default all)")
    sp.add_argument("--count", type=int, default=20, help="instances per theorem")
    return ap


def _config(ns) -> RunConfig:
    methods = []
    for m in filter(None, (t.strip() for t in ns.methods.split(","))):
        if m not in _METHOD_NAMES:
            raise ConfigError(f"unknown method {m!r}; choose from atom,kat,power,ascent")
        methods.append(_METHOD_NAMES[m])
    theorems = ()
    if getattr(ns, "theorems", ""):
        try:
            theorems = tuple(resolve_theorem(t).key for t in ns.theorems.split(",") if t.strip())
        except KeyError as exc:
            raise ConfigError(exc.args[0]) from None
    return RunConfig(ns.command, getattr(ns, "instances", None), ns.n, _parse_domain(ns.domain),
                     ns.seed, ns.window, ns.fmt, tuple(methods), ns.restarts, ns.k, ns.budget,
                     max(1, ns.jobs), theorems, getattr(ns, "count", 20))


def main(argv=None) -> int:
    ns = _parser().parse_args(argv)
    try:
        cfg = _config(ns)
        if cfg.command == "suite":
            instances = suite_instances(cfg)
        else:
            if cfg.path == "-":
                text = sys.stdin.read()
            else:
                try:
                    with open(cfg.path, encoding="utf-8") as fh:
                        text = fh.read()
                except OSError as exc:
                    raise ConfigError(f"cannot read {cfg.path}: {exc.strerror}") from None
            instances = load_instances(text, cfg)
    except ConfigError as exc:
        print(f"hardyeq: error: {exc}", file=sys.stderr)
        return 2
    records = run(instances, cfg)
    sys.stdout.write(format_records(records, cfg.fmt))
    sys.stdout.flush()
    return exit_code(records)


if __name__ == "__main__":
    sys.exit(main())
