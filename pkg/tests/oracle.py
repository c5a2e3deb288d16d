"""Brute-force explicit-state oracles.

Nothing here touches the BDD kernel: every result is computed by enumerating
valuations and evaluating expressions directly, so it can be compared with
the symbolic implementation.
"""
from __future__ import annotations

import itertools
from collections import deque

from sociable.bdd import Function
from sociable.model import ExplicitGraph, Interface, VarDecl, all_states, enumerate_explicit, evaluate


# ---------------------------------------------------------------------------
# reading symbolic results back as explicit sets

def states_of(enc, f: Function, names=None) -> set[tuple]:
    names = [v.name for v in enc.interface.variables] if names is None else names
    m = enc.manager
    out = set()
    for sat in m.iter_sat(f, enc.bits(names)):
        vals = enc.decode(sat, names)
        out.add(tuple(vals[n] for n in names))
    return out


def pairs_of(enc, f: Function, names=None) -> set[tuple[tuple, tuple]]:
    names = [v.name for v in enc.interface.variables] if names is None else names
    m = enc.manager
    out = set()
    for sat in m.iter_sat(f, enc.bits(names) + enc.bits(names, primed=True)):
        a = enc.decode(sat, names)
        b = enc.decode(sat, names, primed=True)
        out.add((tuple(a[n] for n in names), tuple(b[n] for n in names)))
    return out


def input_table_of(enc, f: Function) -> dict[tuple, frozenset]:
    """``(state, globals') -> {locals'}`` for an input relation; empty entries omitted."""
    iface = enc.interface
    names = [v.name for v in iface.variables]
    globs = [v.name for v in iface.globals]
    locs = [v.name for v in iface.locals]
    m = enc.manager
    table: dict[tuple, set] = {}
    for sat in m.iter_sat(f, enc.bits(names) + enc.bits(globs, primed=True)
                          + enc.bits(locs, primed=True)):
        s = enc.decode(sat, names)
        g = enc.decode(sat, globs, primed=True)
        lp = enc.decode(sat, locs, primed=True)
        key = (tuple(s[n] for n in names), tuple(g[n] for n in globs))
        table.setdefault(key, set()).add(tuple(lp[n] for n in locs))
    return {k: frozenset(v) for k, v in table.items()}


def nonempty(table: dict) -> dict:
    return {k: v for k, v in table.items() if v}


# ---------------------------------------------------------------------------
# safety

def explicit_successors(g: ExplicitGraph) -> dict[tuple, set[tuple]]:
    """All moves of a single interface: its outputs plus every accepted input."""
    succ = {s: set() for s in g.states}
    for edges in g.outputs.values():
        for s, t in edges:
            succ[s].add(t)
    for table in g.inputs.values():
        for (s, glo), responses in table.items():
            for loc in responses:
                succ[s].add(g.join(loc, glo))
    return succ


def explicit_pessimistic(iface: Interface, phi) -> bool:
    g = enumerate_explicit(iface)
    succ = explicit_successors(g)
    seen = set(g.initial)
    queue = deque(seen)
    while queue:
        s = queue.popleft()
        if not evaluate(phi, g.env(s)):
            return False
        for t in succ[s]:
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return True


def explicit_winning(iface: Interface, phi) -> set[tuple]:
    g = enumerate_explicit(iface)
    out_succ = {s: set() for s in g.states}
    for edges in g.outputs.values():
        for s, t in edges:
            out_succ[s].add(t)
    win = {s for s in g.states if evaluate(phi, g.env(s))}
    changed = True
    while changed:
        changed = False
        for s in list(win):
            if any(t not in win for t in out_succ[s]):
                win.discard(s)
                changed = True
    return win


def explicit_optimistic(iface: Interface, phi) -> bool:
    g = enumerate_explicit(iface)
    return g.initial <= explicit_winning(iface, phi)


# ---------------------------------------------------------------------------
# composition

class ExplicitProduct:
    """Joint semantics of two interfaces, enumerated state by state."""

    def __init__(self, p: Interface, q: Interface, cap: int = 4096):
        self.p, self.q = p, q
        self.gp = enumerate_explicit(p, cap)
        self.gq = enumerate_explicit(q, cap)
        seen = {v.name for v in p.variables}
        self.variables: list[VarDecl] = list(p.variables) + [
            v for v in q.variables if v.name not in seen]
        self.names = [v.name for v in self.variables]
        self.globals = [v.name for v in self.variables if v.is_global]
        self.locals = [v.name for v in self.variables if not v.is_global]
        self.states = all_states(self.variables)
        if len(self.states) > cap:
            raise ValueError("joint state space too large")
        self.moves: dict[tuple[int, str], set] = {}
        self.err: set[tuple] = set()
        self._build()
        self.init = {s for s in self.states
                     if self.project(s, 0) in self.gp.initial
                     and self.project(s, 1) in self.gq.initial}

    def graph(self, i: int) -> ExplicitGraph:
        return self.gp if i == 0 else self.gq

    def iface(self, i: int) -> Interface:
        return self.p if i == 0 else self.q

    def project(self, s: tuple, i: int) -> tuple:
        vals = dict(zip(self.names, s))
        return tuple(vals[v.name] for v in self.iface(i).variables)

    def _build(self) -> None:
        for e in (0, 1):
            ge, gl = self.graph(e), self.graph(1 - e)
            le = self.iface(1 - e)
            by_src: dict[str, dict] = {}
            for a, edges in ge.outputs.items():
                idx = by_src.setdefault(a, {})
                for s, t in edges:
                    idx.setdefault(s, []).append(t)
            for a, idx in by_src.items():
                moves = self.moves.setdefault((e, a), set())
                for s in self.states:
                    vals = dict(zip(self.names, s))
                    for te in idx.get(self.project(s, e), []):
                        new = dict(vals)
                        new.update(zip((v.name for v in self.iface(e).variables), te))
                        if a in gl.inputs:
                            g_l = tuple(new[v.name] for v in le.globals)
                            responses = gl.inputs[a][(self.project(s, 1 - e), g_l)]
                            if not responses:
                                self.err.add(s)
                            for loc in responses:
                                t = dict(new)
                                t.update(zip((v.name for v in le.locals), loc))
                                moves.add((s, tuple(t[n] for n in self.names)))
                        else:
                            moves.add((s, tuple(new[n] for n in self.names)))

    def all_moves(self) -> set:
        return set().union(*self.moves.values()) if self.moves else set()

    def compatible(self) -> set[tuple]:
        """Complement of the output attractor of the error states."""
        pred: dict[tuple, set] = {}
        for s, t in self.all_moves():
            pred.setdefault(t, set()).add(s)
        bad = set(self.err)
        queue = deque(bad)
        while queue:
            t = queue.popleft()
            for s in pred.get(t, ()):
                if s not in bad:
                    bad.add(s)
                    queue.append(s)
        return set(self.states) - bad

    def composite_outputs(self) -> dict[str, set]:
        w = self.compatible()
        out: dict[str, set] = {}
        for (e, a), moves in self.moves.items():
            out.setdefault(a, set()).update((s, t) for s, t in moves if s in w and t in w)
        return out

    def composite_inputs(self) -> dict[str, dict]:
        w = self.compatible()
        actions = set(self.gp.inputs) | set(self.gq.inputs)
        updates = all_states([v for v in self.variables if v.is_global])
        out = {}
        for a in actions:
            table = {}
            for s in self.states:
                vals = dict(zip(self.names, s))
                for g in updates:
                    gvals = dict(zip(self.globals, g))
                    options = []
                    for i in (0, 1):
                        gi, ii = self.graph(i), self.iface(i)
                        if a in gi.inputs:
                            key = tuple(gvals[v.name] for v in ii.globals)
                            options.append([dict(zip((v.name for v in ii.locals), loc))
                                            for loc in gi.inputs[a][(self.project(s, i), key)]])
                        else:
                            options.append([{v.name: vals[v.name] for v in ii.locals}])
                    responses = set()
                    for lp, lq in itertools.product(*options):
                        t = dict(vals)
                        t.update(gvals)
                        t.update(lp)
                        t.update(lq)
                        tt = tuple(t[n] for n in self.names)
                        if s in w and tt in w:
                            responses.add(tuple(t[n] for n in self.locals))
                    table[(s, g)] = frozenset(responses)
            out[a] = table
        return out

    def composite_init(self) -> set[tuple]:
        return self.init & self.compatible()


# ---------------------------------------------------------------------------
# alternating simulation

def explicit_alt_sim(p: Interface, q: Interface) -> set[tuple]:
    """Greatest alternating simulation as a set of ``(p_locals, q_locals, globals)``."""
    gp, gq = enumerate_explicit(p), enumerate_explicit(q)
    p_locs = all_states(p.locals)
    q_locs = all_states(q.locals)
    globs = all_states(p.globals)
    rel = {(a, b, g) for a in p_locs for b in q_locs for g in globs}

    def out_index(graph):
        idx = {}
        for a, edges in graph.outputs.items():
            for s, t in edges:
                idx.setdefault((a, s), []).append(graph.split(t))
        return idx

    p_out, q_out = out_index(gp), out_index(gq)

    def ok(triple, rel):
        pl, ql, g = triple
        sp, sq = gp.join(pl, g), gq.join(ql, g)
        for a in q.input_alphabet:
            for g2 in globs:
                for ql2 in gq.inputs[a][(sq, g2)]:
                    if not any((pl2, ql2, g2) in rel for pl2 in gp.inputs[a][(sp, g2)]):
                        return False
        for a in p.output_alphabet:
            for pl2, g2 in p_out.get((a, sp), []):
                if not any(g3 == g2 and (pl2, ql2, g2) in rel
                           for ql2, g3 in q_out.get((a, sq), [])):
                    return False
        return True

    while True:
        keep = {t for t in rel if ok(t, rel)}
        if keep == rel:
            return rel
        rel = keep


def explicit_refines(p: Interface, q: Interface) -> bool:
    for a in q.input_alphabet:
        if a not in p.input_alphabet:
            return False
    for a in p.output_alphabet:
        if a not in q.output_alphabet:
            return False
    gp, gq = enumerate_explicit(p), enumerate_explicit(q)
    rel = explicit_alt_sim(p, q)
    p_init = [gp.split(s) for s in gp.initial]
    for s in gq.initial:
        ql, g = gq.split(s)
        candidates = [pl for pl, pg in p_init if pg == g]
        if candidates and not any((pl, ql, g) in rel for pl in candidates):
            return False
    return True


def accepted_inputs(graph: ExplicitGraph, s: tuple) -> set[tuple[str, tuple]]:
    """``(action, globals')`` pairs accepted at ``s``."""
    return {(a, g) for a, table in graph.inputs.items() for g in graph.global_updates
            if table[(s, g)]}


def produced_outputs(graph: ExplicitGraph, s: tuple) -> set[tuple[str, tuple]]:
    return {(a, graph.split(t)[1]) for a, edges in graph.outputs.items()
            for src, t in edges if src == s}


# ---------------------------------------------------------------------------
# whole-pipeline comparisons (return lists of mismatch descriptions)

def compare_interface(iface: Interface, manager=None) -> list[str]:
    from sociable import Manager, compile_interface
    si = compile_interface(iface, manager or Manager())
    g = enumerate_explicit(iface)
    bad = []
    if states_of(si.enc, si.init) != g.initial:
        bad.append(f"{iface.name}: init")
    for a in set(si.outputs) | set(g.outputs):
        if a not in si.outputs or pairs_of(si.enc, si.outputs[a]) != g.outputs.get(a):
            bad.append(f"{iface.name}: output {a}")
    for a in set(si.inputs) | set(g.inputs):
        if a not in si.inputs or input_table_of(si.enc, si.inputs[a]) != nonempty(g.inputs.get(a, {})):
            bad.append(f"{iface.name}: input {a}")
    return bad


def compare_composition(p: Interface, q: Interface) -> tuple[list[str], object]:
    """Check product moves, Err, compatible states and the printed composite.

    Returns ``(mismatches, composite or IncompatibleError)``.
    """
    from sociable import Manager, compile_interface
    from sociable.composition import IncompatibleError, build_composite, compatible_states, product

    m = Manager()
    prod = product(compile_interface(p, m), compile_interface(q, m))
    ex = ExplicitProduct(p, q)
    enc = prod.enc
    tag = f"{p.name}|{q.name}"
    bad = []
    for key in set(prod.moves) | set(ex.moves):
        if key not in prod.moves or pairs_of(enc, prod.moves[key]) != ex.moves.get(key, set()):
            bad.append(f"{tag}: moves {key}")
    if states_of(enc, prod.err) != ex.err:
        bad.append(f"{tag}: Err")
    w = ex.compatible()
    if states_of(enc, compatible_states(prod)) != w:
        bad.append(f"{tag}: compatible states")
    try:
        comp = build_composite(prod)
    except IncompatibleError as exc:
        if ex.composite_init():
            bad.append(f"{tag}: reported incompatible but oracle has compatible initial states")
        bad += check_witness(ex, exc.witness, tag)
        return bad, exc
    if states_of(enc, comp.init) != ex.composite_init():
        bad.append(f"{tag}: composite init")
    printed = enumerate_explicit(comp.interface)
    if printed.initial != ex.composite_init():
        bad.append(f"{tag}: printed init")
    want_out = ex.composite_outputs()
    for a in set(want_out) | set(printed.outputs):
        if printed.outputs.get(a) != want_out.get(a):
            bad.append(f"{tag}: printed output {a}")
        if a in comp.outputs and pairs_of(enc, comp.outputs[a]) != want_out.get(a):
            bad.append(f"{tag}: composite output {a}")
    want_in = ex.composite_inputs()
    for a in set(want_in) | set(printed.inputs):
        if nonempty(printed.inputs.get(a, {})) != nonempty(want_in.get(a, {})):
            bad.append(f"{tag}: printed input {a}")
    return bad, comp


def check_witness(ex: ExplicitProduct, witness, tag: str = "") -> list[str]:
    """A witness must start in an initial state, follow joint output moves
    and end in an error state where the named emission is rejected."""
    if witness is None:
        return [] if not ex.init else [f"{tag}: missing witness despite joint initial states"]
    bad = []
    states = [tuple(step.values[n] for n in ex.names) for step in witness.steps]
    if states[0] not in ex.init:
        bad.append(f"{tag}: witness does not start in an initial state")
    moves = ex.all_moves()
    for s, t in zip(states, states[1:]):
        if (s, t) not in moves:
            bad.append(f"{tag}: witness step {s} -> {t} is not a move")
    last = states[-1]
    if last not in ex.err:
        bad.append(f"{tag}: witness does not end in Err")
    e = 0 if witness.emitter == ex.p.name else 1
    ge, gl = ex.graph(e), ex.graph(1 - e)
    vals = dict(zip(ex.names, last))
    src = ex.project(last, e)
    le = ex.iface(1 - e)
    emitted = False
    for s, t in ge.outputs.get(witness.action, ()):
        if s != src:
            continue
        new = dict(vals)
        new.update(zip((v.name for v in ex.iface(e).variables), t))
        g_l = {v.name: new[v.name] for v in le.globals}
        if g_l == witness.rejected_update:
            emitted = True
            key = tuple(g_l[v.name] for v in le.globals)
            if gl.inputs[witness.action][(ex.project(last, 1 - e), key)]:
                bad.append(f"{tag}: rejected update is accepted")
    if not emitted:
        bad.append(f"{tag}: rejected update cannot be emitted")
    return bad


def relation_triples(sim) -> set[tuple]:
    """The symbolic alternating simulation as ``(p_locals, q_locals, globals)`` tuples."""
    ie, se = sim.impl.enc, sim.spec.enc
    m = sim.manager
    pl, ql, gl = ie.local_names, se.local_names, ie.global_names
    out = set()
    for sat in m.iter_sat(sim.relation, ie.bits(pl) + se.bits(ql) + ie.bits(gl)):
        a, b, g = ie.decode(sat, pl), se.decode(sat, ql), ie.decode(sat, gl)
        out.add((tuple(a[n] for n in pl), tuple(b[n] for n in ql), tuple(g[n] for n in gl)))
    return out
