"""Invariant checking for a single interface, pessimistic and optimistic.

Pessimistically the environment may fire any input action at any time with
any global update the interface accepts, so safety is plain reachability
over all moves. Optimistically the environment may also stay silent, so the
interface is safe when output moves alone cannot leave the invariant.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import syntax as S
from .bdd import Function, Manager
from .game import Arena, extract_trace, win_safe
from .model import Diagnostic, ValidationError, check_expression, validate
from .symbolic import SymbolicInterface, compile_interface

PESSIMISTIC, OPTIMISTIC = "pessimistic", "optimistic"


class InvariantError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))


@dataclass
class SafetyResult:
    safe: bool
    mode: str
    trace: list[tuple[str, dict]] | None = None
    winning: Function | None = None
    winning_count: int | None = None
    iterations: int = 0

    def __bool__(self) -> bool:
        return self.safe


def arena_of(si: SymbolicInterface) -> Arena:
    """Output moves for the system, the full input closure for the environment."""
    m = si.manager
    return Arena(m, si.state_bits(), si.state_bits(primed=True), si.t_out(), si.t_in(), si.dom)


def _invariant(si: SymbolicInterface, phi: S.Expr) -> Function:
    diags = check_expression(si.interface, phi)
    if diags:
        raise InvariantError(diags)
    return si.enc.predicate(phi) & si.dom


def _compiled(iface, manager) -> SymbolicInterface:
    if isinstance(iface, SymbolicInterface):
        return iface
    return compile_interface(iface, manager or Manager())


def label_step(si: SymbolicInterface, src: dict, dst: dict) -> str:
    """Name the action behind a step: ``a!`` for an output, ``a?`` for an input."""
    m = si.manager
    prime = dict(zip(si.state_bits(), si.state_bits(primed=True)))
    pair = m.cube({**src, **{prime[b]: v for b, v in dst.items()}})
    for a, rel in si.outputs.items():
        if not (rel & pair).is_false:
            return f"{a}!"
    for a, rel in si.inputs.items():
        if not (rel & pair).is_false:
            return f"{a}?"
    return "?"


def decode_trace(si: SymbolicInterface, trace) -> list[tuple[str, dict]]:
    names = [v.name for v in si.interface.variables]
    steps = [("init", si.enc.decode(trace[0], names))]
    for src, dst in zip(trace, trace[1:]):
        steps.append((label_step(si, src, dst), si.enc.decode(dst, names)))
    return steps


def check_pessimistic(iface, phi: S.Expr, manager: Manager | None = None) -> SafetyResult:
    si = _compiled(iface, manager)
    good = _invariant(si, phi)
    arena = arena_of(si)
    moves = arena.t_out | arena.t_in
    bad = si.dom & ~good
    trace = extract_trace(si.init, moves, bad, arena)
    iterations = arena.iterations.get("total", 0)
    if trace is None:
        return SafetyResult(True, PESSIMISTIC, iterations=iterations)
    return SafetyResult(False, PESSIMISTIC, trace=decode_trace(si, trace), iterations=iterations)


def check_optimistic(iface, phi: S.Expr, manager: Manager | None = None) -> SafetyResult:
    si = _compiled(iface, manager)
    good = _invariant(si, phi)
    arena = arena_of(si)
    win = win_safe(good, arena)
    m = si.manager
    safe = (si.init & ~win).is_false
    return SafetyResult(safe, OPTIMISTIC, winning=win,
                        winning_count=m.sat_count(win, si.state_bits()),
                        iterations=arena.iterations.get("total", 0))


def check(iface, phi: S.Expr, mode: str, manager: Manager | None = None) -> SafetyResult:
    if mode == PESSIMISTIC:
        return check_pessimistic(iface, phi, manager)
    if mode == OPTIMISTIC:
        return check_optimistic(iface, phi, manager)
    raise ValueError(f"unknown mode {mode!r}")


@dataclass
class WellFormedness:
    ok: bool
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def well_formed(iface, manager: Manager | None = None) -> WellFormedness:
    """Sanity checks that do not change the interface.

    Errors: unsatisfiable initial condition. Warnings: actions that can never
    fire, and interfaces with no move at all.
    """
    if isinstance(iface, S.ModuleAST):
        try:
            iface = validate(iface)
        except ValidationError as exc:
            return WellFormedness(False, exc.diagnostics)
    si = _compiled(iface, manager)
    diags = []
    if si.init.is_false:
        diags.append(Diagnostic("initial condition unsatisfiable"))
    for a, rel in si.outputs.items():
        if rel.is_false:
            diags.append(Diagnostic(f"output action {a!r} is never enabled", severity="warning"))
    for a, rel in si.inputs.items():
        if rel.is_false:
            diags.append(Diagnostic(f"input action {a!r} rejects every emission",
                                    severity="warning"))
    if (si.t_out() | si.t_in()).is_false:
        diags.append(Diagnostic(f"{si.name} has no moves (inert)", severity="warning"))
    return WellFormedness(not any(d.severity == "error" for d in diags), diags)
