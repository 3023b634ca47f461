"""Command-line entry point: ``pforge verify | integrate | list``.

Exit codes: 0 success, 1 a check failed (or an integration stopped early),
2 usage or internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from datetime import datetime, timezone
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from . import __version__
from .config import Settings

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pforge", description="Exact and numerical checks for a fourth-order Painleve-type hierarchy.")
    p.add_argument("--version", action="version", version=f"pforge {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", default="all", choices=("all", "symbolic", "singularity", "weyl", "numeric"))
    v.add_argument("--json-out", metavar="PATH", help="write the full JSON report here")
    _numeric_flags(v)

    g = sub.add_parser("integrate", help="integrate a registered system")
    g.add_argument("--system", required=True)
    g.add_argument("--params", default="", help="comma-separated name=value bindings")
    g.add_argument("--init", required=True, help="comma-separated rationals")
    g.add_argument("--t0", default="0")
    g.add_argument("--t1", default="1")
    g.add_argument("--flow", choices=("t", "s"), default="t", help="flow of a two-time system")
    g.add_argument("--out", metavar="PATH", help="CSV trajectory (standard output when omitted)")
    _numeric_flags(g)

    ls = sub.add_parser("list", help="list registry entries")
    ls.add_argument("filter", nargs="?", default="", help="substring to match")
    ls.add_argument("--json", action="store_true", help="export the selected entries as JSON")
    return p


def _numeric_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rtol", type=float)
    p.add_argument("--atol", type=float)
    p.add_argument("--max-norm", type=float)


def _settings(args) -> Settings:
    return Settings.from_env().updated(rtol=args.rtol, atol=args.atol, max_norm=args.max_norm)


# -- verify -------------------------------------------------------------------


def build_report(results, suite: str, cfg: Settings, elapsed_ms: float) -> dict:
    counts = {"pass": 0, "fail": 0, "erratum": 0}
    for r in results:
        counts[r.status] += 1
    errata = [dict(e, check=r.name) for r in results if r.status == "erratum"
              for e in r.details.get("errata", [])]
    return {
        "schema": SCHEMA_VERSION,
        "tool": "pforge",
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "suite": suite,
        "settings": cfg.as_dict(),
        "summary": {"total": len(results), **counts},
        "elapsed_ms": round(elapsed_ms, 3),
        "checks": [r.as_dict() for r in results],
        "errata": errata,
    }


def cmd_verify(args) -> int:
    from .checks import run_suite

    cfg = _settings(args)
    start = time.perf_counter()
    results = run_suite(args.suite, cfg)
    report = build_report(results, args.suite, cfg, (time.perf_counter() - start) * 1e3)
    width = max((len(r.name) for r in results), default=0)
    for r in results:
        print(f"{r.status.upper():8} {r.name:<{width}}  {r.elapsed_ms:8.1f} ms")
    s = report["summary"]
    print(f"{s['total']} checks: {s['pass']} pass, {s['fail']} fail, {s['erratum']} erratum "
          f"({report['elapsed_ms'] / 1e3:.2f} s)")
    if args.json_out:
        with open(args.json_out, "w") as fh:
            json.dump(report, fh, indent=2, default=str)
            fh.write("\n")
    return 1 if s["fail"] else 0


# -- integrate ------------------------------------------------------------------


def parse_rationals(text: str) -> List[Fraction]:
    items = [x.strip() for x in text.split(",") if x.strip()]
    if not items:
        raise UsageError("empty initial condition")
    try:
        return [Fraction(x) for x in items]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse rationals from {text!r}") from None


def parse_bindings(text: str) -> Dict[str, Fraction]:
    out = {}
    for item in filter(None, (x.strip() for x in text.split(","))):
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"binding {item!r} is not name=value")
        try:
            out[name.strip()] = Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"cannot parse value in {item!r}") from None
    return out


def _resolve_field(name: str, flow: str):
    from .systems import registry
    from .systems.fields import HamiltonianSystem, TwoTimeSystem, VectorField

    try:
        e = registry.entry(name)
    except KeyError as exc:
        raise UsageError(str(exc.args[0] if exc.args else exc)) from None
    v = e.value
    if isinstance(v, TwoTimeSystem):
        return e, (v.field_t if flow == "t" else v.field_s)
    if isinstance(v, HamiltonianSystem):
        return e, v.field()
    if isinstance(v, VectorField):
        return e, v
    raise UsageError(f"{name!r} is a {e.kind}, not an integrable system")


def _invariants(entry) -> Dict[str, object]:
    from .systems import registry
    from .systems.fields import TwoTimeSystem

    out = {}
    if isinstance(entry.value, TwoTimeSystem) and entry.value.hamiltonians:
        for n, h in zip(entry.invariants or (), entry.value.hamiltonians):
            out[n] = h
    for n in entry.invariants:
        # qualified names ("H4:explicit-time") are not conserved
        if n not in out and ":" not in n:
            v = registry.get(n)
            out[n] = getattr(v, "hamiltonian", v)
    return out


def cmd_integrate(args) -> int:
    from .numint import FloatField, integrate, monitor_invariants

    cfg = _settings(args)
    entry, V = _resolve_field(args.system, args.flow)
    init = parse_rationals(args.init)
    if len(init) != V.dim:
        raise UsageError(f"{args.system} has dimension {V.dim}, got {len(init)} initial values")
    params = parse_bindings(args.params)
    chart = V.chart
    other_times = [s for s in chart.times if s != V.time]
    needed = set(chart.params) | set(other_times)
    unknown = set(params) - needed
    if unknown:
        raise UsageError(f"unknown parameters {sorted(unknown)}; expected {sorted(needed)}")
    for s in other_times:
        params.setdefault(s, Fraction(0))
    missing = sorted(p for p in chart.params if p not in params)
    if missing:
        raise UsageError(f"missing parameter values for {missing}")
    if entry.relation is not None and entry.relation.constrained:
        val = entry.relation.value(params)
        if val != entry.relation.const:
            print(f"warning: parameters violate {entry.relation.text()} (lhs = {val})", file=sys.stderr)
    fparams = {k: float(v) for k, v in params.items()}
    t0, t1 = float(Fraction(args.t0)), float(Fraction(args.t1))
    T = integrate(FloatField(V, fparams), [float(x) for x in init], t0, t1, cfg.rtol, cfg.atol, cfg.max_norm,
                  names=chart.vars)
    T.time_name = V.time or "t"
    csv_text = T.to_csv()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    info = sys.stderr if not args.out else sys.stdout
    extra = f" at {T.time_name}*={T.t_star!r}" if T.t_star is not None else ""
    print(f"termination: {T.termination}{extra}", file=info)
    print(f"steps: {T.accepted} accepted, {T.rejected} rejected, {T.evaluations} evaluations", file=info)
    inv = _invariants(entry)
    if inv:
        rep = monitor_invariants(T, inv, fparams, V.time)
        for n, d in rep.drifts.items():
            print(f"drift {n}: {d:.3e}", file=info)
    return 0 if T.termination == "reached_end" else 1


# -- list -----------------------------------------------------------------------


def cmd_list(args) -> int:
    from .systems import registry

    names = [n for n in registry.names() if args.filter in n]
    if args.json:
        print(registry.export_json(names))
        return 0
    for n in names:
        print(registry.entry(n).summary())
    return 0


COMMANDS = {"verify": cmd_verify, "integrate": cmd_integrate, "list": cmd_list}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"pforge: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    except Exception as exc:
        print(f"pforge: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
