"""``inquirc``: one entry point over the parser, linter, compiler, runtime
and cost analyzer.

Subcommands: ``parse`` (validate + pretty-print), ``check`` (lints),
``compile`` (OpenQASM to located processes), ``run`` (execute), ``analyze``
(timed schedule metrics + timeline CSV), ``sweep`` (circuits x architectures
matrix).  Input path ``-`` reads stdin.

Exit codes: 0 success, 1 usage (bad flags, unreadable arch/cost files),
2 parse or lint error in the program, 3 stuck execution, 4 fuel exhausted.

Output is byte-reproducible for identical inputs, flags and seed.  The only
terminal decoration is severity/status coloring, controlled by
``INQUIRC_COLOR=auto|never|always`` (default ``auto``: color only on a TTY).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .analyzer import metrics, simulate_cost, sweep, timeline, timeline_csv
from .arch import load_arch, load_cost_model
from .checker import ERROR, lint_linear, lint_sessions
from .errors import (
    ConfigMismatch,
    InquirError,
    ParseError,
    SchemaError,
    StuckDuringSimulation,
)
from .frontend import compile_qasm
from .parser import parse_program
from .printer import print_program
from .runtime import run as run_system

__all__ = ["main"]

_USAGE, _BADPROG, _STUCK, _FUEL = 1, 2, 3, 4

_COLORS = {"error": "\x1b[31m", "warning": "\x1b[33m",
           "completed": "\x1b[32m", "stuck": "\x1b[31m",
           "fuel_exhausted": "\x1b[33m"}


def _want_color() -> bool:
    mode = os.environ.get("INQUIRC_COLOR", "auto")
    if mode == "always":
        return True
    if mode == "never":
        return False
    return sys.stdout.isatty()


def _paint(word: str, color: bool) -> str:
    if color and word in _COLORS:
        return f"{_COLORS[word]}{word}\x1b[0m"
    return word


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage problems; the contract here says 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(_USAGE)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        print(f"inquirc: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(_USAGE) from exc


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_system(path: str, arch):
    """Parse ``.inq`` directly; compile anything that looks like OpenQASM."""
    src = _read(path)
    if path.endswith(".qasm") or src.lstrip().startswith("OPENQASM"):
        if arch is None:
            print("inquirc: --arch is required for OpenQASM input",
                  file=sys.stderr)
            raise SystemExit(_USAGE)
        return compile_qasm(src, arch)
    return parse_program(src)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_parse(args) -> int:
    system = parse_program(_read(args.input))
    _emit(print_program(system), args.out)
    return 0


def _cmd_check(args) -> int:
    system = parse_program(_read(args.input))
    diags = lint_linear(system) + lint_sessions(system)
    if args.format == "json":
        _emit(json.dumps([d.to_json() for d in diags], indent=2) + "\n",
              args.out)
    else:
        color = _want_color()
        lines = [f"{_paint(d.severity, color)}[{d.code}] "
                 f"{d.location}: {d.message}" for d in diags]
        summary = (f"{sum(d.severity == ERROR for d in diags)} error(s), "
                   f"{sum(d.severity != ERROR for d in diags)} warning(s)\n")
        _emit("".join(ln + "\n" for ln in lines) + summary, args.out)
    return _BADPROG if any(d.severity == ERROR for d in diags) else 0


def _cmd_compile(args) -> int:
    arch = load_arch(args.arch)
    system = compile_qasm(_read(args.input), arch)
    _emit(print_program(system), args.out)
    return 0


def _cmd_run(args) -> int:
    arch = load_arch(args.arch)
    system = parse_program(_read(args.input))
    res = run_system(system, arch, backend=args.backend, policy=args.policy,
                     seed=args.seed, fuel=args.fuel)
    trace_path = None
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(res.trace_jsonl())
        trace_path = args.out
    if args.format == "json":
        doc = {"status": res.status, "steps": res.steps,
               "stuck": res.stuck.to_json() if res.stuck else None,
               "trace_path": trace_path}
        print(json.dumps(doc, indent=2))
    else:
        color = _want_color()
        print(f"status: {_paint(res.status, color)}")
        print(f"steps: {res.steps}")
        if res.stuck is not None:
            print(str(res.stuck))
        if trace_path:
            print(f"trace: {trace_path}")
    if res.status == "stuck":
        return _STUCK
    if res.status == "fuel_exhausted":
        return _FUEL
    return 0


def _metrics_text(rep) -> str:
    lines = [f"e_count: {rep.e_count}", f"c_count: {rep.c_count}",
             f"e_depth: {rep.e_depth}", f"c_depth: {rep.c_depth}",
             f"total_cost_ns: {rep.total_cost_ns}"]
    for pid, n in sorted(rep.per_processor_ops.items()):
        lines.append(f"ops[p{pid}]: {n}")
    return "".join(ln + "\n" for ln in lines)


def _metrics_csv(rep) -> str:
    head = "e_count,c_count,e_depth,c_depth,total_cost_ns"
    row = f"{rep.e_count},{rep.c_count},{rep.e_depth},{rep.c_depth},{rep.total_cost_ns}"
    return head + "\n" + row + "\n"


def _cmd_analyze(args) -> int:
    arch = load_arch(args.arch)
    costs = load_cost_model(args.cost)
    system = _load_system(args.input, arch)
    trace = simulate_cost(system, arch, costs, policy=args.policy,
                          seed=args.seed)
    rep = metrics(trace)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(timeline_csv(timeline(trace)))
    if args.format == "json":
        print(json.dumps(rep.to_json(), indent=2))
    elif args.format == "csv":
        sys.stdout.write(_metrics_csv(rep))
    else:
        sys.stdout.write(_metrics_text(rep))
        if args.out:
            print(f"timeline: {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    archs = [(spec, load_arch(spec)) for spec in args.arch]
    costs = load_cost_model(args.cost)
    cells = []
    for path in args.input:
        cname = os.path.basename(path)
        for aname, arch in archs:
            try:
                system = _load_system(path, arch)
            except InquirError as exc:
                cells.append({"circuit": cname, "arch": aname,
                              "error": f"{type(exc).__name__}: {exc}"})
                continue
            cells.extend(sweep([(cname, system)], [(aname, arch)],
                               costs, policy=args.policy))
    if args.format == "csv":
        head = "circuit,arch,e_count,c_count,e_depth,c_depth,total_cost_ns,error"
        rows = [head]
        for c in cells:
            m = c.get("metrics", {})
            rows.append(",".join([
                c["circuit"], c["arch"],
                *(str(m.get(k, "")) for k in
                  ("e_count", "c_count", "e_depth", "c_depth", "total_cost_ns")),
                c.get("error", "").replace(",", ";")]))
        _emit("".join(r + "\n" for r in rows), args.out)
    elif args.format == "text":
        lines = []
        for c in cells:
            if "error" in c:
                lines.append(f"{c['circuit']} @ {c['arch']}: error {c['error']}")
            else:
                m = c["metrics"]
                lines.append(
                    f"{c['circuit']} @ {c['arch']}: e={m['e_count']} "
                    f"c={m['c_count']} e_depth={m['e_depth']} "
                    f"c_depth={m['c_depth']} cost={m['total_cost_ns']}")
        _emit("".join(ln + "\n" for ln in lines), args.out)
    else:
        _emit(json.dumps(cells, indent=2) + "\n", args.out)
    return 0


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    top = _Parser(prog="inquirc", description=__doc__.splitlines()[0])
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, *, arch_required=False, arch_many=False):
        if arch_many:
            p.add_argument("--arch", action="append", required=True,
                           help="inline spec (linear:8x2,2 / linear(8,2,2) / "
                                "cube:2,1) or JSON file; repeatable")
        else:
            p.add_argument("--arch", required=arch_required,
                           help="inline spec (linear:8x2,2 / linear(8,2,2) / "
                                "cube:2,1) or JSON file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="write the primary artifact here")

    p = sub.add_parser("parse", help="validate and pretty-print a program")
    p.add_argument("input")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_parse)

    p = sub.add_parser("check", help="run the static lints")
    p.add_argument("input")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("compile", help="compile OpenQASM onto an architecture")
    p.add_argument("input")
    common(p, arch_required=True)
    p.set_defaults(fn=_cmd_compile)

    p = sub.add_parser("run", help="execute a program")
    p.add_argument("input")
    common(p, arch_required=True)
    p.add_argument("--policy", default="roundrobin",
                   choices=("roundrobin", "random", "inorder", "depresolved"))
    p.add_argument("--backend", choices=("sv", "abstract"), default="sv")
    p.add_argument("--fuel", type=int, default=None)
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("analyze", help="timed schedule metrics and timeline")
    p.add_argument("input")
    common(p, arch_required=True)
    p.add_argument("--cost", help="cost model JSON file")
    p.add_argument("--policy", default="depresolved",
                   choices=("depresolved", "inorder"))
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser("sweep", help="metrics matrix over circuits x archs")
    p.add_argument("input", nargs="+")
    common(p, arch_many=True)
    p.add_argument("--cost", help="cost model JSON file")
    p.add_argument("--policy", default="depresolved",
                   choices=("depresolved", "inorder"))
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    p.set_defaults(fn=_cmd_sweep)

    return top


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError,) as exc:
        print(f"inquirc: parse error: {exc}", file=sys.stderr)
        return _BADPROG
    except StuckDuringSimulation as exc:
        print(f"inquirc: {exc}", file=sys.stderr)
        return _STUCK
    except (SchemaError, ConfigMismatch) as exc:
        print(f"inquirc: {exc}", file=sys.stderr)
        return _USAGE
    except InquirError as exc:
        print(f"inquirc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return _BADPROG


if __name__ == "__main__":
    raise SystemExit(main())
