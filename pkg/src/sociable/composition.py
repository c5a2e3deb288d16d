"""Optimistic composition of two sociable interfaces.

Exactly one component emits per step. When it emits an action the other one
listens to, the listener must accept the new global values; a state where
some emission can be rejected is an error state. The composite keeps only
the states from which output moves cannot force an error.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import syntax as S
from .bdd import Function, Manager
from .game import Arena, attr_output, extract_trace
from .model import Interface, VarDecl, validate
from .symbolic import Encoding, SymbolicInterface, compile_interface, to_expr


class CompositionError(Exception):
    """The two interfaces cannot be put side by side (name or domain clash)."""


@dataclass
class Step:
    """One state of a witness trace, with the label of the move reaching it."""
    label: str
    values: dict[str, object]


@dataclass
class Witness:
    steps: list[Step]
    emitter: str
    action: str
    listener: str
    rejected_update: dict[str, object]

    def __len__(self) -> int:
        return len(self.steps)


class IncompatibleError(Exception):
    """No compatible initial state. ``witness`` is None when the two initial
    conditions already disagree on the shared globals."""

    def __init__(self, p: str, q: str, witness: Witness | None):
        self.witness = witness
        if witness is None:
            msg = f"{p} and {q} are incompatible: no joint initial state"
        else:
            msg = (f"{p} and {q} are incompatible: {witness.emitter} can emit "
                   f"{witness.action} with an update {witness.listener} rejects")
        super().__init__(msg)


@dataclass
class Product:
    p: SymbolicInterface
    q: SymbolicInterface
    variables: list[VarDecl]
    enc: Encoding
    moves: dict[tuple[int, str], Function]
    err_parts: dict[tuple[int, str], Function]
    err: Function
    init: Function
    arena: Arena
    actions: list[str] = field(default_factory=list)

    @property
    def manager(self) -> Manager:
        return self.enc.manager

    @property
    def components(self) -> tuple[SymbolicInterface, SymbolicInterface]:
        return self.p, self.q

    @property
    def dom(self) -> Function:
        return self.arena.domain


def _check_side_by_side(p: Interface, q: Interface) -> None:
    clashes = sorted({v.name for v in p.locals if q.tracks(v.name)}
                     | {v.name for v in q.locals if p.tracks(v.name)})
    if clashes:
        raise CompositionError(
            f"cannot compose {p.name} and {q.name}: clashing locals {', '.join(clashes)}")
    for v in p.globals:
        if q.tracks(v.name) and q.var(v.name).domain != v.domain:
            raise CompositionError(
                f"global {v.name!r} has different domains in {p.name} and {q.name}")


def joint_variables(p: Interface, q: Interface) -> list[VarDecl]:
    seen = {v.name for v in p.variables}
    return list(p.variables) + [v for v in q.variables if v.name not in seen]


def product(sp: SymbolicInterface, sq: SymbolicInterface) -> Product:
    """Joint arena of two interfaces compiled in the same manager."""
    if sp.manager is not sq.manager:
        raise CompositionError("interfaces were compiled in different managers")
    _check_side_by_side(sp.interface, sq.interface)
    m = sp.manager
    variables = joint_variables(sp.interface, sq.interface)
    skeleton = Interface(f"{sp.name}*{sq.name}", tuple(variables), (), S.BoolLit(True))
    enc = Encoding(m, skeleton)
    dom = enc.domain()
    both = dom & enc.domain(primed=True)
    primed = enc.bits(primed=True)

    comps = (sp, sq)
    moves: dict[tuple[int, str], Function] = {}
    err_parts: dict[tuple[int, str], Function] = {}
    for e_idx, emitter in enumerate(comps):
        listener = comps[1 - e_idx]
        untracked = [v.name for v in listener.interface.globals
                     if not emitter.interface.tracks(v.name)]
        frame_g = m.conj(enc.unchanged(n) for n in untracked)
        frame_l = m.conj(enc.unchanged(v.name) for v in listener.interface.locals)
        l_local_primed = listener.enc.bits(listener.enc.local_names, primed=True)
        for a, rho in emitter.outputs.items():
            emission = rho & frame_g & both
            if a in listener.inputs:
                reaction = listener.inputs[a]
                moves[(e_idx, a)] = emission & reaction
                accepted = m.exists(l_local_primed, reaction)
                err_parts[(e_idx, a)] = dom & m.and_exists(emission, ~accepted, primed)
            else:
                moves[(e_idx, a)] = emission & frame_l
    err = m.disj(err_parts.values())
    init = sp.init & sq.init & dom
    arena = Arena(m, enc.bits(), primed, m.disj(moves.values()), m.false, dom)
    actions = list(dict.fromkeys([a.name for a in sp.interface.actions]
                                 + [a.name for a in sq.interface.actions]))
    return Product(sp, sq, variables, enc, moves, err_parts, err, init, arena, actions)


def compatible_states(prod: Product) -> Function:
    """States from which no sequence of output moves reaches an error state."""
    return prod.dom & ~attr_output(prod.err, prod.arena)


@dataclass
class Composite:
    """A composition result with the relations it was printed from."""
    interface: Interface
    outputs: dict[str, Function]
    inputs: dict[str, Function]
    init: Function
    compatible: Function
    product: Product


def _label(prod: Product, src: dict, dst: dict) -> str:
    m = prod.manager
    pair = m.cube({**src, **{prod.arena._prime_map[b]: v for b, v in dst.items()}})
    for (e_idx, a), rel in prod.moves.items():
        if not (rel & pair).is_false:
            return f"{a}!"
    return "?"


def _witness(prod: Product) -> Witness:
    m = prod.manager
    arena = prod.arena
    trace = extract_trace(prod.init, arena.t_out, prod.err, arena)
    names = [v.name for v in prod.variables]
    steps = [Step("init", prod.enc.decode(trace[0], names))]
    for src, dst in zip(trace, trace[1:]):
        steps.append(Step(_label(prod, src, dst), prod.enc.decode(dst, names)))
    last = m.cube(trace[-1])
    for (e_idx, a), part in prod.err_parts.items():
        if (part & last).is_false:
            continue
        emitter = prod.components[e_idx]
        listener = prod.components[1 - e_idx]
        accepted = m.exists(listener.enc.bits(listener.enc.local_names, primed=True),
                            listener.inputs[a])
        untracked = [v.name for v in listener.interface.globals
                     if not emitter.interface.tracks(v.name)]
        frame_g = m.conj(prod.enc.unchanged(n) for n in untracked)
        bad = emitter.outputs[a] & frame_g & ~accepted & last
        cube = m.pick_cube(bad, arena.unprimed + arena.primed)
        gnames = [v.name for v in listener.interface.globals]
        return Witness(steps, emitter.name, a, listener.name,
                       prod.enc.decode(cube, gnames, primed=True))
    raise AssertionError("witness trace does not end in an error state")


def _decompose(enc: Encoding, rel: Function, sources: list, targets: list[str],
               guard_unprimed: list[str], guard_primed: list[str]) -> list[S.CommandAST]:
    """Split a relation into guarded commands ``guard ==> v' := c, ...``.

    ``sources`` are the bits a guard may read and ``targets`` the variables
    the relation may change. Each candidate update gets as guard every
    source where that update (with all other targets framed) is allowed,
    so each command is sound on its own; updates are then picked greedily,
    widest guard first, until every pair of the relation is covered.
    """
    m = enc.manager
    tgt_bits = enc.bits(targets, primed=True)
    keys: dict[tuple, None] = {}
    for sat in m.iter_sat(rel, sources + tgt_bits):
        before = enc.decode(sat, targets)
        after = enc.decode(sat, targets, primed=True)
        keys[tuple((n, after[n]) for n in targets if after[n] != before[n])] = None
    candidates = []
    for order, key in enumerate(keys):
        assigned = dict(key)
        update = m.conj(enc.eq(n, assigned[n], primed=True) if n in assigned
                        else enc.unchanged(n) for n in targets)
        pairs = rel & update
        guard = m.exists(tgt_bits, pairs)
        candidates.append((-m.sat_count(guard, sources), order, key, guard, pairs))
    candidates.sort(key=lambda c: c[:2])
    covered = m.false
    cmds = []
    for _, _, key, guard, pairs in candidates:
        if (pairs & ~covered).is_false:
            continue
        covered = covered | pairs
        assigns = tuple(S.AssignAST(n, enc.vars[n].decl.domain.literal(v)) for n, v in key)
        cmds.append(S.CommandAST(to_expr(enc, guard, guard_unprimed, guard_primed), assigns))
    return cmds


_FALSE_COMMAND = S.CommandAST(S.BoolLit(False), ())


def build_composite(prod: Product, name: str | None = None) -> Composite:
    """Prune the product to its compatible states and emit it as an interface.

    Raises :class:`IncompatibleError` when no initial state is compatible.
    """
    m = prod.manager
    enc = prod.enc
    w = compatible_states(prod)
    init = prod.init & w
    if init.is_false:
        witness = None if prod.init.is_false else _witness(prod)
        raise IncompatibleError(prod.p.name, prod.q.name, witness)
    w2 = w & prod.arena.prime(w)
    names = [v.name for v in prod.variables]
    locs = [v.name for v in prod.variables if not v.is_global]
    globs = [v.name for v in prod.variables if v.is_global]
    both_dom = prod.dom & prod.arena.prime(prod.dom)
    outputs, inputs = {}, {}
    blocks = []
    for a in prod.actions:
        emitters = [i for i in (0, 1) if (i, a) in prod.moves]
        if emitters:
            rel = m.disj(prod.moves[(i, a)] for i in emitters) & w2
            outputs[a] = rel
            cmds = _decompose(enc, rel, enc.bits(names), names, names, []) or [_FALSE_COMMAND]
            blocks.append(S.ActionAST("output", a, tuple(cmds)))
        listeners = [c for c in prod.components if a in c.inputs]
        if listeners:
            parts = []
            for c in prod.components:
                if a in c.inputs:
                    parts.append(c.inputs[a])
                else:
                    parts.append(m.conj(enc.unchanged(v.name) for v in c.interface.locals))
            rel = m.conj(parts) & both_dom & w2
            inputs[a] = rel
            sources = enc.bits(names) + enc.bits(globs, primed=True)
            cmds = _decompose(enc, rel, sources, locs, names, globs) or [_FALSE_COMMAND]
            blocks.append(S.ActionAST("input", a, tuple(cmds)))
    decls = tuple(S.DeclAST(v.name, v.domain.to_ast(), v.is_global) for v in prod.variables)
    module = S.ModuleAST(name or f"{prod.p.name}_{prod.q.name}", decls, tuple(blocks),
                         to_expr(enc, init, names))
    return Composite(validate(module), outputs, inputs, init, w, prod)


def compose(p: Interface, q: Interface, manager: Manager | None = None,
            name: str | None = None) -> Interface:
    """Compose two interfaces; raises :class:`IncompatibleError` with a witness."""
    m = manager or Manager()
    prod = product(compile_interface(p, m), compile_interface(q, m))
    return build_composite(prod, name).interface
