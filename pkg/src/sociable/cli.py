"""Command line front end.

Exit codes: 0 affirmative verdict, 1 negative verdict, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .bdd import Manager
from .composition import CompositionError, IncompatibleError, build_composite, product
from .model import Interface, ValidationError, validate
from .parser import ParseError, format_expr, parse, parse_expr, pretty_print
from .refinement import RefinementError, refines
from .safety import InvariantError, check, well_formed
from .symbolic import compile_interface
from .syntax import ModuleAST

EXIT_YES, EXIT_NO, EXIT_USAGE = 0, 1, 2

VERDICT_SCHEMA = {
    "type": "object",
    "required": ["command", "verdict", "stats"],
    "properties": {
        "command": {"enum": ["compose", "refine", "check", "wf", "info"]},
        "verdict": {"enum": ["COMPATIBLE", "INCOMPATIBLE", "REFINES", "DOES-NOT-REFINE",
                             "SAFE", "UNSAFE", "WELL-FORMED", "ILL-FORMED", "INFO"]},
        "witness": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["action", "state"],
                "properties": {"action": {"type": "string"}, "state": {"type": "object"}},
            },
        },
        "stats": {
            "type": "object",
            "required": ["nodes", "iterations", "time_ms"],
            "properties": {
                "nodes": {"type": "integer", "minimum": 0},
                "iterations": {"type": "integer", "minimum": 0},
                "time_ms": {"type": "number", "minimum": 0},
            },
        },
    },
}


class UsageError(Exception):
    pass


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _fmt_state(values: dict) -> str:
    return " ".join(f"{k}={_fmt_value(v)}" for k, v in values.items())


def _json_state(values: dict) -> dict:
    return {k: v for k, v in values.items()}


def _load(paths: list[str]) -> dict[str, ModuleAST]:
    modules: dict[str, ModuleAST] = {}
    for path in paths:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
        for m in parse(text, path):
            if m.name in modules:
                raise UsageError(f"{m.span}: module {m.name!r} defined in more than one file")
            modules[m.name] = m
    return modules


def _select(modules: dict[str, ModuleAST], names: list[str], count: int) -> list[ModuleAST]:
    if len(names) != count:
        raise UsageError(f"expected exactly {count} -m selector(s), got {len(names)}")
    out = []
    for n in names:
        if n not in modules:
            known = ", ".join(modules) or "none"
            raise UsageError(f"unknown module {n!r} (available: {known})")
        out.append(modules[n])
    return out


class _Run:
    def __init__(self, args, out, err):
        self.args = args
        self.out = out
        self.err = err
        self.t0 = time.perf_counter()
        self.manager = Manager()
        self.iterations = 0

    def stats(self) -> dict:
        return {"nodes": len(self.manager), "iterations": self.iterations,
                "time_ms": round((time.perf_counter() - self.t0) * 1000, 3)}

    def finish(self, verdict: str, lines: list[str], code: int, **extra) -> int:
        if self.args.json:
            obj = {"command": self.args.command, "verdict": verdict, **extra,
                   "stats": self.stats()}
            self.out.write(json.dumps(obj, indent=2, sort_keys=False) + "\n")
        else:
            self.out.write("\n".join([verdict] + lines) + "\n")
        return code


def cmd_compose(run: _Run, modules) -> int:
    a = run.args
    p_ast, q_ast = _select(modules, a.module, 2)
    p, q = validate(p_ast), validate(q_ast)
    m = run.manager
    try:
        prod = product(compile_interface(p, m), compile_interface(q, m))
        comp = build_composite(prod, a.name)
    except IncompatibleError as exc:
        run.iterations = prod.arena.iterations.get("total", 0)
        w = exc.witness
        if w is None:
            return run.finish("INCOMPATIBLE", [str(exc)], EXIT_NO,
                              witness=[], rejected=None)
        lines = [f"{s.label} {_fmt_state(s.values)}" for s in w.steps]
        update = ", ".join(f"{k}'={_fmt_value(v)}" for k, v in w.rejected_update.items())
        lines.append(f"rejected {w.action}! from {w.emitter}: {w.listener} does not accept "
                     f"{update or 'the emission'}")
        witness = [{"action": s.label, "state": _json_state(s.values)} for s in w.steps]
        return run.finish("INCOMPATIBLE", lines, EXIT_NO, witness=witness,
                          rejected={"emitter": w.emitter, "action": w.action,
                                    "listener": w.listener,
                                    "update": _json_state(w.rejected_update)})
    run.iterations = prod.arena.iterations.get("total", 0)
    text = pretty_print(comp.interface.to_ast())
    lines = []
    if a.output:
        Path(a.output).write_text(text, encoding="utf-8")
        lines.append(f"wrote {comp.interface.name} to {a.output}")
    elif not a.json:
        lines.append(text.rstrip("\n"))
    return run.finish("COMPATIBLE", lines, EXIT_YES, composite=comp.interface.name,
                      **({} if a.output else {"text": text}))


def cmd_refine(run: _Run, modules) -> int:
    p_ast, q_ast = _select(modules, run.args.module, 2)
    p, q = validate(p_ast), validate(q_ast)
    v = refines(p, q, run.manager)
    run.iterations = v.iterations
    if v.refines:
        return run.finish("REFINES", [v.reason], EXIT_YES)
    lines = [f"condition: {v.condition}"]
    if v.action:
        lines.append(f"action: {v.action}")
    if v.triple:
        lines.append(f"impl: {_fmt_state(v.triple['impl'])}".rstrip())
        lines.append(f"spec: {_fmt_state(v.triple['spec'])}".rstrip())
        lines.append(f"globals: {_fmt_state(v.triple['globals'])}".rstrip())
    lines.append(v.reason)
    triple = {k: _json_state(x) for k, x in v.triple.items()} if v.triple else None
    return run.finish("DOES-NOT-REFINE", lines, EXIT_NO, condition=v.condition,
                      action=v.action, triple=triple, reason=v.reason)


def cmd_check(run: _Run, modules) -> int:
    a = run.args
    (ast,) = _select(modules, a.module, 1)
    iface = validate(ast)
    try:
        phi = parse_expr(a.invariant, "<invariant>")
    except ParseError as exc:
        raise UsageError(str(exc)) from None
    r = check(iface, phi, a.mode, run.manager)
    run.iterations = r.iterations
    extra = {"mode": a.mode, "invariant": format_expr(phi)}
    lines = []
    if r.winning_count is not None:
        lines.append(f"winning states: {r.winning_count}")
        extra["winning_states"] = r.winning_count
    if r.safe:
        return run.finish("SAFE", lines, EXIT_YES, **extra)
    lines += [f"{label} {_fmt_state(values)}" for label, values in r.trace or []]
    if r.trace is not None:
        extra["witness"] = [{"action": label, "state": _json_state(values)}
                            for label, values in r.trace]
    return run.finish("UNSAFE", lines, EXIT_NO, **extra)


def cmd_wf(run: _Run, modules) -> int:
    (ast,) = _select(modules, run.args.module, 1)
    wf = well_formed(ast, run.manager)
    lines = [str(d) for d in wf.diagnostics]
    diags = [{"severity": d.severity, "message": d.message, "at": str(d.span)}
             for d in wf.diagnostics]
    if wf.ok:
        return run.finish("WELL-FORMED", lines, EXIT_YES, diagnostics=diags)
    return run.finish("ILL-FORMED", lines, EXIT_NO, diagnostics=diags)


def _describe(iface: Interface) -> list[str]:
    lines = [f"module {iface.name}: {len(iface.variables)} variables, "
             f"{iface.state_count} states"]
    for v in iface.variables:
        dom = "bool" if v.domain.is_bool else f"[{v.domain.lo}..{v.domain.hi}]"
        lines.append(f"  {v.scope} {v.name}: {dom}")
    lines.append(f"  outputs: {' '.join(iface.output_alphabet) or '-'}")
    lines.append(f"  inputs: {' '.join(iface.input_alphabet) or '-'}")
    return lines


def cmd_info(run: _Run, modules) -> int:
    lines = []
    summary = []
    for ast in modules.values():
        iface = validate(ast)
        lines += _describe(iface)
        summary.append({
            "name": iface.name,
            "variables": [{"name": v.name, "scope": v.scope,
                           "type": "bool" if v.domain.is_bool
                           else [v.domain.lo, v.domain.hi]} for v in iface.variables],
            "outputs": list(iface.output_alphabet),
            "inputs": list(iface.input_alphabet),
            "states": iface.state_count,
        })
    return run.finish("INFO", lines, EXIT_YES, modules=summary)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sociable",
                                 description="Compose, refine and check sociable interfaces.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, modules=True):
        p.add_argument("files", nargs="+", metavar="FILE", help=".si input file(s)")
        if modules:
            p.add_argument("-m", "--module", action="append", default=[],
                           help="module name (repeat for two-module commands)")
        p.add_argument("--json", action="store_true", help="emit a JSON verdict object")

    p = sub.add_parser("compose", help="compose two interfaces")
    common(p)
    p.add_argument("-o", "--output", help="write the composite here instead of stdout")
    p.add_argument("--name", help="name of the composite module")
    p = sub.add_parser("refine", help="check that the first module refines the second")
    common(p)
    p = sub.add_parser("check", help="check an invariant")
    common(p)
    p.add_argument("--invariant", required=True, help="boolean expression over the module")
    p.add_argument("--mode", choices=["pessimistic", "optimistic"], default="optimistic")
    p = sub.add_parser("wf", help="well-formedness diagnostics")
    common(p)
    p = sub.add_parser("info", help="list modules")
    common(p, modules=False)
    return ap


_COMMANDS = {"compose": cmd_compose, "refine": cmd_refine, "check": cmd_check,
             "wf": cmd_wf, "info": cmd_info}


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_YES
    r = _Run(args, out, err)
    try:
        modules = _load(args.files)
        return _COMMANDS[args.command](r, modules)
    except ParseError as exc:
        err.write(f"{exc.span}: error: {exc.message}\n")
    except ValidationError as exc:
        for d in exc.diagnostics:
            err.write(f"{d}\n")
    except (UsageError, CompositionError, RefinementError) as exc:
        err.write(f"error: {exc}\n")
    except InvariantError as exc:
        for d in exc.diagnostics:
            err.write(f"{d}\n")
    return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
