"""Sociable interfaces: validated data model and explicit-state semantics.

An interface tracks its own locals plus the globals it declares. Each action
may carry output commands (the interface emits it, updating locals and
tracked globals) and input commands (the interface reacts when someone else
emits it, constraining the new global values and updating its locals).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from . import syntax as S
from .syntax import Expr, ModuleAST, SourceSpan


@dataclass(frozen=True)
class Diagnostic:
    message: str
    span: SourceSpan = S.NOWHERE
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.span}: {self.severity}: {self.message}"


class ValidationError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class Domain:
    lo: int
    hi: int
    is_bool: bool = False

    @classmethod
    def boolean(cls) -> "Domain":
        return cls(0, 1, True)

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    @property
    def width(self) -> int:
        return math.ceil(math.log2(self.size)) if self.size > 1 else 0

    def values(self) -> list:
        if self.is_bool:
            return [False, True]
        return list(range(self.lo, self.hi + 1))

    def __contains__(self, value) -> bool:
        if self.is_bool:
            return isinstance(value, bool)
        return not isinstance(value, bool) and self.lo <= value <= self.hi

    def code(self, value) -> int:
        return int(value) if self.is_bool else value - self.lo

    def value(self, code: int):
        return bool(code) if self.is_bool else self.lo + code

    def format(self, value) -> str:
        if self.is_bool:
            return "true" if value else "false"
        return str(value)

    def literal(self, value) -> Expr:
        return S.BoolLit(bool(value)) if self.is_bool else S.IntLit(value)

    def to_ast(self) -> S.TypeAST:
        return S.TypeAST() if self.is_bool else S.TypeAST(self.lo, self.hi)


@dataclass(frozen=True)
class VarDecl:
    name: str
    domain: Domain
    is_global: bool = False

    @property
    def scope(self) -> str:
        return "global" if self.is_global else "local"


@dataclass(frozen=True)
class GuardedCommand:
    guard: Expr
    assignments: tuple[tuple[str, Expr], ...] = ()
    span: SourceSpan = field(default=S.NOWHERE, compare=False, repr=False)

    @property
    def targets(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.assignments)


@dataclass(frozen=True)
class ActionSpec:
    name: str
    outputs: tuple[GuardedCommand, ...] = ()
    inputs: tuple[GuardedCommand, ...] = ()


@dataclass(frozen=True)
class Interface:
    name: str
    variables: tuple[VarDecl, ...]
    actions: tuple[ActionSpec, ...]
    init: Expr

    def __post_init__(self):
        object.__setattr__(self, "_vars", {v.name: v for v in self.variables})
        object.__setattr__(self, "_acts", {a.name: a for a in self.actions})

    def var(self, name: str) -> VarDecl:
        return self._vars[name]

    def action(self, name: str) -> ActionSpec:
        return self._acts[name]

    def tracks(self, name: str) -> bool:
        return name in self._vars

    @property
    def locals(self) -> tuple[VarDecl, ...]:
        return tuple(v for v in self.variables if not v.is_global)

    @property
    def globals(self) -> tuple[VarDecl, ...]:
        return tuple(v for v in self.variables if v.is_global)

    @property
    def output_alphabet(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.actions if a.outputs)

    @property
    def input_alphabet(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.actions if a.inputs)

    @property
    def state_count(self) -> int:
        return math.prod(v.domain.size for v in self.variables)

    def to_ast(self) -> ModuleAST:
        decls = tuple(S.DeclAST(v.name, v.domain.to_ast(), v.is_global) for v in self.variables)
        blocks = []
        for a in self.actions:
            for kind, cmds in (("output", a.outputs), ("input", a.inputs)):
                if cmds:
                    blocks.append(S.ActionAST(kind, a.name, tuple(
                        S.CommandAST(c.guard, tuple(S.AssignAST(t, e) for t, e in c.assignments))
                        for c in cmds)))
        return ModuleAST(self.name, decls, tuple(blocks), self.init)


# ---------------------------------------------------------------------------
# typing and validation

BOOL, INT = "bool", "int"

# what a command of each kind may read: (unprimed tracked, primed globals)
_READS = {"output": (True, False), "input": (True, True), "init": (True, False)}


class _Checker:
    def __init__(self, variables: Mapping[str, VarDecl]):
        self.vars = variables
        self.diags: list[Diagnostic] = []

    def error(self, msg: str, span: SourceSpan) -> None:
        self.diags.append(Diagnostic(msg, span))

    def type_of(self, e: Expr, context: str) -> str | None:
        """Type of ``e`` or None after reporting an error."""
        if isinstance(e, S.IntLit):
            return INT
        if isinstance(e, S.BoolLit):
            return BOOL
        if isinstance(e, S.VarRef):
            decl = self.vars.get(e.name)
            if decl is None:
                self.error(f"unknown variable {e.name!r}", e.span)
                return None
            if e.primed:
                if context not in ("input",):
                    self.error(f"primed variable {e.name}' is not readable here", e.span)
                    return None
                if not decl.is_global:
                    self.error(f"input commands may only read primed globals, "
                               f"{e.name!r} is local", e.span)
                    return None
            return BOOL if decl.domain.is_bool else INT
        if isinstance(e, S.Unary):
            t = self.type_of(e.operand, context)
            want = BOOL if e.op == "!" else INT
            if t is not None and t != want:
                self.error(f"operator {e.op!r} expects {want}, got {t}", e.span)
                return None
            return want if t is not None else None
        lt = self.type_of(e.left, context)
        rt = self.type_of(e.right, context)
        if lt is None or rt is None:
            return None
        if e.op in S.BOOL_OPS:
            if lt != BOOL or rt != BOOL:
                self.error(f"operator {e.op!r} expects bool operands", e.span)
                return None
            return BOOL
        if e.op in ("=", "!="):
            if lt != rt:
                self.error(f"cannot compare {lt} with {rt}", e.span)
                return None
            return BOOL
        if lt != INT or rt != INT:
            self.error(f"operator {e.op!r} expects int operands", e.span)
            return None
        if e.op == "*" and constant_value(e.left) is None and constant_value(e.right) is None:
            self.error("multiplication needs a constant operand", e.span)
            return None
        return BOOL if e.op in S.CMP_OPS else INT


def constant_value(e: Expr):
    """Fold a variable-free expression to its value, or None."""
    try:
        return evaluate(e, {})
    except KeyError:
        return None


def _domain_of(t: S.TypeAST) -> Domain:
    return Domain.boolean() if t.is_bool else Domain(t.lo, t.hi)


def validate(module: ModuleAST) -> Interface:
    """Check a parsed module and build the :class:`Interface`.

    Raises :class:`ValidationError` carrying every diagnostic found.
    """
    diags: list[Diagnostic] = []
    variables: dict[str, VarDecl] = {}
    for d in module.decls:
        if d.name in variables:
            diags.append(Diagnostic(f"variable {d.name!r} declared twice", d.span))
            continue
        if not d.type.is_bool and d.type.lo > d.type.hi:
            diags.append(Diagnostic(f"empty range [{d.type.lo}..{d.type.hi}]", d.type.span))
            continue
        variables[d.name] = VarDecl(d.name, _domain_of(d.type), d.is_global)

    chk = _Checker(variables)
    actions: dict[str, dict[str, list[GuardedCommand]]] = {}
    block_spans: dict[tuple[str, str], SourceSpan] = {}
    for block in module.actions:
        key = (block.name, block.kind)
        if key in block_spans:
            chk.error(f"duplicate {block.kind} block for action {block.name!r}", block.span)
            continue
        block_spans[key] = block.span
        slot = actions.setdefault(block.name, {"output": [], "input": []})
        for cmd in block.commands:
            _check_command(chk, cmd, block.kind, variables)
            slot[block.kind].append(GuardedCommand(
                cmd.guard, tuple((a.target, a.value) for a in cmd.assignments), cmd.span))
    for name, slot in actions.items():
        if not slot["output"] and not slot["input"]:
            span = block_spans.get((name, "output")) or block_spans[(name, "input")]
            chk.error(f"action {name!r} has no commands", span)

    if chk.type_of(module.init, "init") not in (BOOL, None):
        chk.error("initial condition must be boolean", _span_of(module.init))
    diags.extend(chk.diags)
    if diags:
        raise ValidationError(diags)

    iface = Interface(
        module.name,
        tuple(variables.values()),
        tuple(ActionSpec(n, tuple(s["output"]), tuple(s["input"])) for n, s in actions.items()),
        module.init,
    )
    if not _satisfiable_init(iface):
        raise ValidationError([Diagnostic("initial condition unsatisfiable",
                                          _span_of(module.init))])
    return iface


def _span_of(e: Expr) -> SourceSpan:
    for sub in S.walk(e):
        if sub.span is not S.NOWHERE:
            return sub.span
    return S.NOWHERE


def _check_command(chk: _Checker, cmd: S.CommandAST, kind: str,
                   variables: Mapping[str, VarDecl]) -> None:
    t = chk.type_of(cmd.guard, kind)
    if t is not None and t != BOOL:
        chk.error("guard must be boolean", _span_of(cmd.guard))
    seen = set()
    for a in cmd.assignments:
        decl = variables.get(a.target)
        if decl is None:
            chk.error(f"assignment to unknown variable {a.target!r}", a.span)
            chk.type_of(a.value, kind)
            continue
        if a.target in seen:
            chk.error(f"variable {a.target!r} assigned twice", a.span)
        seen.add(a.target)
        if kind == "input" and decl.is_global:
            chk.error(f"input commands cannot assign global {a.target!r}", a.span)
        t = chk.type_of(a.value, kind)
        want = BOOL if decl.domain.is_bool else INT
        if t is not None and t != want:
            chk.error(f"cannot assign {t} to {want} variable {a.target!r}", a.span)
            continue
        c = constant_value(a.value) if t is not None else None
        if c is not None and c not in decl.domain:
            chk.error(f"domain violation: {a.target}' := {decl.domain.format(c)} outside "
                      f"{_describe(decl.domain)}", a.span)


def _describe(d: Domain) -> str:
    return "bool" if d.is_bool else f"[{d.lo}..{d.hi}]"


def _satisfiable_init(iface: Interface) -> bool:
    from .bdd import Manager
    from .symbolic import Encoding

    enc = Encoding(Manager(), iface)
    return not (enc.predicate(iface.init) & enc.domain()).is_false


def check_expression(iface: Interface, e: Expr) -> list[Diagnostic]:
    """Diagnostics for an invariant-style expression over unprimed tracked vars."""
    chk = _Checker({v.name: v for v in iface.variables})
    t = chk.type_of(e, "init")
    if t is not None and t != BOOL:
        chk.error("expression must be boolean", _span_of(e))
    return chk.diags


# ---------------------------------------------------------------------------
# explicit evaluation

def evaluate(e: Expr, env: Mapping[tuple[str, bool], object]):
    """Evaluate over ``env`` keyed by ``(name, primed)``. Raises KeyError for unbound names."""
    if isinstance(e, (S.IntLit, S.BoolLit)):
        return e.value
    if isinstance(e, S.VarRef):
        return env[(e.name, e.primed)]
    if isinstance(e, S.Unary):
        v = evaluate(e.operand, env)
        return (not v) if e.op == "!" else -v
    op = e.op
    if op == "&":
        return bool(evaluate(e.left, env)) & bool(evaluate(e.right, env))
    if op == "|":
        return bool(evaluate(e.left, env)) | bool(evaluate(e.right, env))
    a, b = evaluate(e.left, env), evaluate(e.right, env)
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    raise ValueError(f"unknown operator {op!r}")


class StateSpaceTooLarge(Exception):
    pass


State = tuple


@dataclass
class ExplicitGraph:
    """Explicit-state semantics of one interface.

    States are value tuples in declaration order. ``outputs[a]`` is the set of
    ``(s, t)`` output edges; ``inputs[a][(s, g)]`` is the set of local
    responses to an emission of ``a`` that sets the tracked globals to ``g``.
    """
    interface: Interface
    states: list[State]
    initial: set[State]
    outputs: dict[str, set[tuple[State, State]]]
    inputs: dict[str, dict[tuple[State, tuple], frozenset[tuple]]]
    global_updates: list[tuple]

    def env(self, s: State) -> dict:
        return {(v.name, False): x for v, x in zip(self.interface.variables, s)}

    def split(self, s: State) -> tuple[tuple, tuple]:
        """``(locals, globals)`` parts of a state."""
        loc = tuple(x for v, x in zip(self.interface.variables, s) if not v.is_global)
        glo = tuple(x for v, x in zip(self.interface.variables, s) if v.is_global)
        return loc, glo

    def join(self, loc: tuple, glo: tuple) -> State:
        li, gi = iter(loc), iter(glo)
        return tuple(next(gi) if v.is_global else next(li) for v in self.interface.variables)


def all_states(variables: Iterable[VarDecl]) -> list[tuple]:
    return list(itertools.product(*(v.domain.values() for v in variables)))


def run_command(cmd: GuardedCommand, env: Mapping, variables: Mapping[str, VarDecl]):
    """Updates made by ``cmd`` under ``env``; None if the guard fails or a value leaves its domain."""
    if not evaluate(cmd.guard, env):
        return None
    updates = {}
    for name, e in cmd.assignments:
        v = evaluate(e, env)
        if v not in variables[name].domain:
            return None
        updates[name] = v
    return updates


def enumerate_explicit(iface: Interface, cap: int = 4096) -> ExplicitGraph:
    n = iface.state_count
    if n > cap:
        raise StateSpaceTooLarge(f"{iface.name} has {n} states, cap is {cap}")
    variables = {v.name: v for v in iface.variables}
    states = all_states(iface.variables)
    names = [v.name for v in iface.variables]
    glob = [v for v in iface.variables if v.is_global]
    updates = all_states(glob)

    def env_of(s):
        return {(k, False): x for k, x in zip(names, s)}

    initial = {s for s in states if evaluate(iface.init, env_of(s))}
    outputs: dict[str, set] = {}
    inputs: dict[str, dict] = {}
    for a in iface.actions:
        if a.outputs:
            edges = set()
            for s in states:
                env = env_of(s)
                for cmd in a.outputs:
                    up = run_command(cmd, env, variables)
                    if up is not None:
                        edges.add((s, tuple(up.get(k, x) for k, x in zip(names, s))))
            outputs[a.name] = edges
        if a.inputs:
            table = {}
            for s in states:
                base = env_of(s)
                for g in updates:
                    env = dict(base)
                    env.update({(v.name, True): x for v, x in zip(glob, g)})
                    responses = set()
                    for cmd in a.inputs:
                        up = run_command(cmd, env, variables)
                        if up is not None:
                            responses.add(tuple(up.get(v.name, x) for v, x in
                                                zip(iface.variables, s) if not v.is_global))
                    table[(s, g)] = frozenset(responses)
            inputs[a.name] = table
    return ExplicitGraph(iface, states, initial, outputs, inputs, updates)
