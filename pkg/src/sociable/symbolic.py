"""Compilation of interfaces to BDD predicates.

Finite-domain variables are binary encoded over ``ceil(log2(size))`` bits,
most significant first; unused codes are ruled out by the domain constraint,
which is conjoined into every relation built here.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from . import syntax as S
from .bdd import BitVar, Function, Manager
from .model import GuardedCommand, Interface, VarDecl


class NotListening:
    """Result of :meth:`SymbolicInterface.in_accepts` for an action outside the input alphabet."""

    def __repr__(self) -> str:
        return "NOT_LISTENING"


NOT_LISTENING = NotListening()


@dataclass
class VarBits:
    decl: VarDecl
    key: str  # name inside the manager
    unprimed: list[BitVar]
    primed: list[BitVar]

    def bits(self, primed: bool) -> list[BitVar]:
        return self.primed if primed else self.unprimed


class Encoding:
    """Binds the variables of one interface to manager bits.

    Locals are registered under ``local_prefix + name`` so that two copies of
    the same interface can live side by side; globals always use their plain
    name and are therefore shared by every interface in the manager.
    """

    def __init__(self, manager: Manager, iface: Interface, local_prefix: str = ""):
        self.manager = manager
        self.interface = iface
        self.local_prefix = local_prefix
        self.vars: dict[str, VarBits] = {}
        for v in iface.variables:
            key = v.name if v.is_global else local_prefix + v.name
            unprimed, primed = manager.declare(key, v.domain.width)
            self.vars[v.name] = VarBits(v, key, unprimed, primed)
        self._values: dict[tuple[str, bool], dict] = {}

    # -- bit sets ----------------------------------------------------------

    def bits(self, names=None, primed: bool = False) -> list[BitVar]:
        names = self.vars if names is None else names
        return [b for n in names for b in self.vars[n].bits(primed)]

    @property
    def local_names(self) -> list[str]:
        return [n for n, vb in self.vars.items() if not vb.decl.is_global]

    @property
    def global_names(self) -> list[str]:
        return [n for n, vb in self.vars.items() if vb.decl.is_global]

    # -- value conditions --------------------------------------------------

    def value_conditions(self, name: str, primed: bool = False) -> dict:
        """Map each domain value of ``name`` to the predicate "name has this value"."""
        key = (name, primed)
        conds = self._values.get(key)
        if conds is None:
            vb = self.vars[name]
            bits = vb.bits(primed)
            conds = {}
            for value in vb.decl.domain.values():
                code = vb.decl.domain.code(value)
                w = len(bits)
                conds[value] = self.manager.cube(
                    {b: bool((code >> (w - 1 - i)) & 1) for i, b in enumerate(bits)})
            self._values[key] = conds
        return conds

    def eq(self, name: str, value, primed: bool = False) -> Function:
        conds = self.value_conditions(name, primed)
        return conds.get(value, self.manager.false)

    def domain(self, primed: bool = False, names=None) -> Function:
        m = self.manager
        names = self.vars if names is None else names
        return m.conj(m.disj(self.value_conditions(n, primed).values()) for n in names)

    def unchanged(self, name: str) -> Function:
        vb = self.vars[name]
        m = self.manager
        return m.conj(m.var(u).equiv(m.var(p)) for u, p in zip(vb.unprimed, vb.primed))

    def state(self, values: Mapping[str, object], primed: bool = False) -> Function:
        m = self.manager
        return m.conj(self.eq(n, v, primed) for n, v in values.items())

    def assignment(self, values: Mapping[str, object], primed: bool = False) -> dict[BitVar, bool]:
        out = {}
        for n, value in values.items():
            vb = self.vars[n]
            code = vb.decl.domain.code(value)
            bits = vb.bits(primed)
            w = len(bits)
            for i, b in enumerate(bits):
                out[b] = bool((code >> (w - 1 - i)) & 1)
        return out

    def decode(self, assignment: Mapping[BitVar, bool], names=None,
               primed: bool = False) -> dict[str, object]:
        names = self.vars if names is None else names
        out = {}
        for n in names:
            vb = self.vars[n]
            code = 0
            for b in vb.bits(primed):
                code = (code << 1) | int(assignment[b])
            out[n] = vb.decl.domain.value(code)
        return out

    # -- expressions -------------------------------------------------------

    def predicate(self, e: S.Expr) -> Function:
        m = self.manager
        if isinstance(e, S.BoolLit):
            return m.true if e.value else m.false
        if isinstance(e, S.VarRef):
            return self.eq(e.name, True, e.primed)
        if isinstance(e, S.Unary):
            return ~self.predicate(e.operand)
        if e.op == "&":
            return self.predicate(e.left) & self.predicate(e.right)
        if e.op == "|":
            return self.predicate(e.left) | self.predicate(e.right)
        if e.op in S.CMP_OPS:
            if self._is_bool(e.left):
                same = self.predicate(e.left).equiv(self.predicate(e.right))
                return same if e.op == "=" else ~same
            lhs, rhs = self.int_values(e.left), self.int_values(e.right)
            test = _CMP[e.op]
            return m.disj(cl & cr for vl, cl in lhs.items()
                          for vr, cr in rhs.items() if test(vl, vr))
        raise TypeError(f"not a boolean expression: {e!r}")

    def _is_bool(self, e: S.Expr) -> bool:
        if isinstance(e, S.BoolLit):
            return True
        if isinstance(e, S.VarRef):
            return self.vars[e.name].decl.domain.is_bool
        if isinstance(e, S.Unary):
            return e.op == "!"
        if isinstance(e, S.Binary):
            return e.op in S.BOOL_OPS or e.op in S.CMP_OPS
        return False

    def int_values(self, e: S.Expr) -> dict[int, Function]:
        """Map each possible value of an integer expression to its condition."""
        m = self.manager
        if isinstance(e, S.IntLit):
            return {e.value: m.true}
        if isinstance(e, S.VarRef):
            return dict(self.value_conditions(e.name, e.primed))
        if isinstance(e, S.Unary):
            return {-v: c for v, c in self.int_values(e.operand).items()}
        lhs, rhs = self.int_values(e.left), self.int_values(e.right)
        fn = _ARITH[e.op]
        out: dict[int, Function] = {}
        for vl, cl in lhs.items():
            for vr, cr in rhs.items():
                both = cl & cr
                if both.is_false:
                    continue
                v = fn(vl, vr)
                out[v] = out[v] | both if v in out else both
        return out

    def assigns(self, target: str, e: S.Expr) -> Function:
        """Predicate ``target' = e`` (values outside the domain are unsatisfiable)."""
        m = self.manager
        dom = self.vars[target].decl.domain
        if dom.is_bool:
            return self.eq(target, True, primed=True).equiv(self.predicate(e))
        vals = self.int_values(e)
        return m.disj(self.eq(target, v, primed=True) & c for v, c in vals.items() if v in dom)

    def command(self, cmd: GuardedCommand, framed) -> Function:
        """guard, assignments and frame of one command.

        ``framed`` lists the variables that keep their value unless assigned.
        """
        m = self.manager
        parts = [self.predicate(cmd.guard)]
        parts += [self.assigns(t, e) for t, e in cmd.assignments]
        assigned = set(cmd.targets)
        parts += [self.unchanged(n) for n in framed if n not in assigned]
        return m.conj(parts)


_CMP = {
    "=": lambda a, b: a == b, "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b, "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b, ">=": lambda a, b: a >= b,
}
_ARITH = {"+": lambda a, b: a + b, "-": lambda a, b: a - b, "*": lambda a, b: a * b}


@dataclass
class SymbolicInterface:
    interface: Interface
    enc: Encoding
    outputs: dict[str, Function]
    inputs: dict[str, Function]
    init: Function
    dom: Function
    dom_primed: Function
    stats: dict = field(default_factory=dict)

    @property
    def manager(self) -> Manager:
        return self.enc.manager

    @property
    def name(self) -> str:
        return self.interface.name

    @property
    def output_alphabet(self) -> tuple[str, ...]:
        return self.interface.output_alphabet

    @property
    def input_alphabet(self) -> tuple[str, ...]:
        return self.interface.input_alphabet

    def state_bits(self, primed: bool = False) -> list[BitVar]:
        return self.enc.bits(primed=primed)

    def t_out(self) -> Function:
        return self.manager.disj(self.outputs.values())

    def t_in(self) -> Function:
        return self.manager.disj(self.inputs.values())

    def _check_state(self, s: Mapping[str, object]) -> None:
        for v in self.interface.variables:
            if v.name not in s:
                raise ValueError(f"state misses variable {v.name!r}")
            if s[v.name] not in v.domain:
                raise ValueError(f"{v.name}={s[v.name]!r} is outside its domain")

    def out_moves(self, s: Mapping[str, object]) -> set[tuple[str, tuple]]:
        """All ``(action, successor)`` output moves from state ``s``.

        Successors are value tuples in declaration order.
        """
        self._check_state(s)
        m = self.manager
        fixed = self.enc.assignment(s)
        names = [v.name for v in self.interface.variables]
        primed_bits = self.state_bits(primed=True)
        moves = set()
        for a, rel in self.outputs.items():
            succ = m.restrict(rel, fixed)
            for sat in m.iter_sat(succ, primed_bits):
                vals = self.enc.decode(sat, primed=True)
                moves.add((a, tuple(vals[n] for n in names)))
        return moves

    def in_accepts(self, s: Mapping[str, object], action: str, g: Mapping[str, object]):
        """Local responses (tuples over locals) to an emission of ``action``
        that sets the tracked globals to ``g``; :data:`NOT_LISTENING` if the
        action is not an input of this interface."""
        if action not in self.inputs:
            return NOT_LISTENING
        self._check_state(s)
        m = self.manager
        fixed = self.enc.assignment(s)
        fixed.update(self.enc.assignment(g, primed=True))
        locs = self.enc.local_names
        rel = m.restrict(self.inputs[action], fixed)
        out = set()
        for sat in m.iter_sat(rel, self.enc.bits(locs, primed=True)):
            vals = self.enc.decode(sat, locs, primed=True)
            out.add(tuple(vals[n] for n in locs))
        return out


def compile_interface(iface: Interface, manager: Manager,
                      local_prefix: str = "") -> SymbolicInterface:
    """Build the output and input relations of every action of ``iface``."""
    enc = Encoding(manager, iface, local_prefix)
    dom = enc.domain()
    dom_p = enc.domain(primed=True)
    both = dom & dom_p
    tracked = [v.name for v in iface.variables]
    locs = enc.local_names
    outputs, inputs = {}, {}
    for a in iface.actions:
        if a.outputs:
            outputs[a.name] = both & manager.disj(enc.command(c, tracked) for c in a.outputs)
        if a.inputs:
            inputs[a.name] = both & manager.disj(enc.command(c, locs) for c in a.inputs)
    init = enc.predicate(iface.init) & dom
    return SymbolicInterface(iface, enc, outputs, inputs, init, dom, dom_p)


# ---------------------------------------------------------------------------
# back from predicates to expressions

def _values_in_cube(vb: VarBits, bits: list[BitVar], cube: Mapping[BitVar, bool]) -> list:
    """Domain values of one variable compatible with a partial bit assignment."""
    w = len(bits)
    out = []
    for value in vb.decl.domain.values():
        code = vb.decl.domain.code(value)
        if all(cube.get(b, bool((code >> (w - 1 - i)) & 1)) == bool((code >> (w - 1 - i)) & 1)
               for i, b in enumerate(bits)):
            out.append(value)
    return out


def _literal(vb: VarBits, primed: bool, values: list) -> S.Expr:
    ref = S.VarRef(vb.decl.name, primed)
    dom = vb.decl.domain
    if dom.is_bool:
        return ref if values == [True] else S.Unary("!", ref)
    if len(values) == 1:
        return S.Binary("=", ref, S.IntLit(values[0]))
    if values == list(range(values[0], values[-1] + 1)):
        lo = S.Binary(">=", ref, S.IntLit(values[0]))
        hi = S.Binary("<=", ref, S.IntLit(values[-1]))
        if values[0] == dom.lo:
            return hi
        if values[-1] == dom.hi:
            return lo
        return S.Binary("&", lo, hi)
    return S.disj(S.Binary("=", ref, S.IntLit(v)) for v in values)


def _merge(terms: list[tuple[frozenset, ...]]) -> list[tuple[frozenset, ...]]:
    """Merge terms that differ in one position; drop subsumed terms."""
    terms = list(dict.fromkeys(terms))
    changed = True
    while changed:
        changed = False
        for i in range(len(terms)):
            for j in range(i + 1, len(terms)):
                a, b = terms[i], terms[j]
                diff = [k for k in range(len(a)) if a[k] != b[k]]
                if len(diff) <= 1:
                    k = diff[0] if diff else 0
                    merged = a[:k] + (a[k] | b[k],) + a[k + 1:]
                    terms[i] = merged
                    del terms[j]
                    changed = True
                    break
            if changed:
                break
    return [t for t in terms
            if not any(o is not t and o != t and all(x <= y for x, y in zip(t, o))
                       for o in terms)]


def to_expr(enc: Encoding, f: Function, unprimed=(), primed=()) -> S.Expr:
    """Disjunctive normal form of ``f`` over the named variables.

    Codes outside a variable's domain are dropped, so the result agrees with
    ``f`` only under the domain constraint.
    """
    groups = [(enc.vars[n], False) for n in unprimed] + [(enc.vars[n], True) for n in primed]
    full = [frozenset(vb.decl.domain.values()) for vb, _ in groups]
    terms = []
    for cube in enc.manager.cubes(f):
        term = []
        for (vb, p), everything in zip(groups, full):
            bits = vb.bits(p)
            if any(b in cube for b in bits):
                term.append(frozenset(_values_in_cube(vb, bits, cube)))
            else:
                term.append(everything)
        if all(term):
            terms.append(tuple(term))
    out = []
    for term in _merge(terms):
        lits = [_literal(vb, p, sorted(vals)) for (vb, p), vals, everything
                in zip(groups, term, full) if vals != everything]
        if not lits:
            return S.BoolLit(True)
        out.append(S.conj(lits))
    return S.disj(out)
