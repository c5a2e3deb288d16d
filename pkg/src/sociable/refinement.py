"""Refinement by alternating simulation.

``P`` refines ``Q`` when ``P`` accepts every input move ``Q`` accepts and
every output move of ``P`` can be matched by ``Q``. A move is an action
together with the new values of the shared globals; locals are private and
only matter through future behaviour.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .bdd import Function, Manager
from .model import Interface
from .symbolic import SymbolicInterface, compile_interface

IMPL_PREFIX = "impl."
SPEC_PREFIX = "spec."


class RefinementError(Exception):
    """Global signatures differ; refinement is not even defined."""


@dataclass
class Verdict:
    refines: bool
    reason: str = ""
    condition: str | None = None  # "alphabet", "InputOk", "OutputOk" or "init"
    action: str | None = None
    triple: dict | None = None
    iterations: int = 0

    def __bool__(self) -> bool:
        return self.refines


@dataclass
class AltSim:
    """Alternating simulation between an implementation and a specification."""
    impl: SymbolicInterface
    spec: SymbolicInterface
    relation: Function
    history: list[Function] = field(default_factory=list)

    @property
    def manager(self) -> Manager:
        return self.impl.manager

    @property
    def iterations(self) -> int:
        return len(self.history)

    def decode(self, assignment) -> dict:
        """Split a triple assignment into ``{"impl": .., "spec": .., "globals": ..}``."""
        ie, se = self.impl.enc, self.spec.enc
        return {
            "impl": ie.decode(assignment, ie.local_names),
            "spec": se.decode(assignment, se.local_names),
            "globals": ie.decode(assignment, ie.global_names),
        }


def alphabet_violation(p: Interface, q: Interface) -> Verdict | None:
    """Structural preconditions: In(P) must contain In(Q), Out(P) must be inside Out(Q)."""
    for a in q.input_alphabet:
        if a not in p.input_alphabet:
            return Verdict(False, f"{p.name} does not accept input {a}, which {q.name} accepts",
                           "alphabet", a)
    for a in p.output_alphabet:
        if a not in q.output_alphabet:
            return Verdict(False, f"{p.name} emits {a}, which {q.name} never emits",
                           "alphabet", a)
    return None


def _check_globals(p: Interface, q: Interface) -> None:
    pg = {v.name: v.domain for v in p.globals}
    qg = {v.name: v.domain for v in q.globals}
    if pg != qg:
        raise RefinementError(
            f"global signatures differ: {p.name} has {sorted(pg)}, {q.name} has {sorted(qg)}")


class _Conditions:
    """Per-action InputOk / OutputOk operators over triples."""

    def __init__(self, sp: SymbolicInterface, sq: SymbolicInterface):
        m = sp.manager
        self.m = m
        self.sp, self.sq = sp, sq
        self.p_lp = sp.enc.bits(sp.enc.local_names, primed=True)
        self.q_lp = sq.enc.bits(sq.enc.local_names, primed=True)
        self.gp = sp.enc.bits(sp.enc.global_names, primed=True)
        unprimed = sp.enc.bits() + sq.enc.bits(sq.enc.local_names)
        primed = sp.enc.bits(primed=True) + self.q_lp
        self._prime = dict(zip(unprimed, primed))

    def prime(self, r: Function) -> Function:
        return self.m.rename(r, self._prime)

    def input_ok(self, a: str, r_primed: Function) -> Function:
        # forall g', q' . rhoI_Q -> exists p' . rhoI_P & R'
        m = self.m
        matched = m.and_exists(self.sp.inputs[a], r_primed, self.p_lp)
        return m.forall(self.gp + self.q_lp, self.sq.inputs[a].implies(matched))

    def output_ok(self, a: str, r_primed: Function) -> Function:
        # forall g', p' . rhoO_P -> exists q' . rhoO_Q & R'
        m = self.m
        matched = m.and_exists(self.sq.outputs[a], r_primed, self.q_lp)
        return m.forall(self.gp + self.p_lp, self.sp.outputs[a].implies(matched))


def _compile_pair(p: Interface, q: Interface, manager: Manager | None):
    m = manager or Manager()
    return (compile_interface(p, m, IMPL_PREFIX), compile_interface(q, m, SPEC_PREFIX))


def alt_sim(p, q, manager: Manager | None = None) -> AltSim:
    """Greatest alternating simulation of ``q`` by ``p``.

    ``p`` and ``q`` are interfaces (compiled here with disjoint locals) or
    already compiled with distinct local prefixes.
    """
    if isinstance(p, Interface):
        sp, sq = _compile_pair(p, q, manager)
    else:
        sp, sq = p, q
    _check_globals(sp.interface, sq.interface)
    bad = alphabet_violation(sp.interface, sq.interface)
    if bad is not None:
        raise RefinementError(bad.reason)
    cond = _Conditions(sp, sq)
    r = sp.dom & sq.dom
    history = [r]
    while True:
        rp = cond.prime(r)
        nxt = r
        for a in sq.input_alphabet:
            nxt = nxt & cond.input_ok(a, rp)
        for a in sp.output_alphabet:
            nxt = nxt & cond.output_ok(a, rp)
        if nxt is r:
            break
        r = nxt
        history.append(r)
    return AltSim(sp, sq, r, history)


def refines(p, q, manager: Manager | None = None) -> Verdict:
    """Does ``p`` refine ``q``? A negative verdict names a failing triple and why."""
    if isinstance(p, Interface):
        sp, sq = _compile_pair(p, q, manager)
    else:
        sp, sq = p, q
    _check_globals(sp.interface, sq.interface)
    bad = alphabet_violation(sp.interface, sq.interface)
    if bad is not None:
        return bad
    sim = alt_sim(sp, sq)
    m = sp.manager
    p_locals = sp.enc.bits(sp.enc.local_names)
    p_init = sp.init
    # spec initial states whose globals some impl initial state shares
    q_init = sq.init & m.exists(p_locals, p_init)
    matched = m.exists(p_locals, p_init & sim.relation)
    unmatched = q_init & ~matched
    if unmatched.is_false:
        return Verdict(True, f"{sp.name} refines {sq.name}", iterations=sim.iterations)
    return _explain(sim, unmatched & p_init)


def _explain(sim: AltSim, candidates: Function) -> Verdict:
    """Find where an unmatched initial triple dropped out of the fixpoint."""
    m = sim.manager
    sp, sq = sim.impl, sim.spec
    bits = sp.enc.bits() + sq.enc.bits(sq.enc.local_names)
    cube = m.pick_cube(candidates, bits)
    point = m.cube(cube)
    triple = sim.decode(cube)
    cond = _Conditions(sp, sq)
    for before in sim.history:
        rp = cond.prime(before)
        for a in sq.input_alphabet:
            if (cond.input_ok(a, rp) & point).is_false:
                return Verdict(False, f"{sp.name} cannot match input {a} accepted by {sq.name}",
                               "InputOk", a, triple, sim.iterations)
        for a in sp.output_alphabet:
            if (cond.output_ok(a, rp) & point).is_false:
                return Verdict(False, f"{sq.name} cannot match output {a} of {sp.name}",
                               "OutputOk", a, triple, sim.iterations)
    return Verdict(False, "no initial state of the implementation is related",
                   "init", None, triple, sim.iterations)
