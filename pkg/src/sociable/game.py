"""Symbolic two-player game primitives.

Output moves belong to the system and can never be blocked; input moves are
chosen (or withheld) by the environment. All fixpoints are computed by plain
Kleene iteration over the finite lattice of state sets.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .bdd import BDDError, BitVar, Function, Manager


class Player(enum.Enum):
    INPUT = "input"
    OUTPUT = "output"


@dataclass
class Arena:
    manager: Manager
    unprimed: list[BitVar]
    primed: list[BitVar]
    t_out: Function
    t_in: Function
    domain: Function
    iterations: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        self._prime_map = dict(zip(self.unprimed, self.primed))
        self._unprime_map = dict(zip(self.primed, self.unprimed))
        self._primed_set = set(self.primed)

    def moves(self, player: Player) -> Function:
        return self.t_out if player is Player.OUTPUT else self.t_in

    def prime(self, x: Function) -> Function:
        return self.manager.rename(x, self._prime_map)

    def unprime(self, x: Function) -> Function:
        return self.manager.rename(x, self._unprime_map)

    def state_count(self) -> int:
        return self.manager.sat_count(self.domain, self.unprimed)

    def _record(self, name: str, n: int) -> None:
        self.iterations[name] = n
        self.iterations["total"] = self.iterations.get("total", 0) + n


def _check_unprimed(arena: Arena, x: Function, what: str) -> None:
    for b in arena.manager.support(x):
        if b.primed:
            raise BDDError(f"{what} mentions primed bit {b}")


def pre(t: Function, x: Function, arena: Arena) -> Function:
    """States with some ``t``-successor in ``x``."""
    _check_unprimed(arena, x, "pre: target set")
    return arena.manager.and_exists(t, arena.prime(x), arena.primed)


def post(t: Function, x: Function, arena: Arena) -> Function:
    """States reachable in one ``t``-step from ``x``."""
    _check_unprimed(arena, x, "post: source set")
    return arena.unprime(arena.manager.and_exists(t, x, arena.unprimed))


def attr_output(err: Function, arena: Arena) -> Function:
    """States from which output moves alone can force a visit to ``err``.

    Least fixpoint of ``Y = err | pre(T_out, Y)``. Input moves never help the
    attractor: the environment is free to withhold them.
    """
    _check_unprimed(arena, err, "attr_output: error set")
    y = err
    n = 0
    while True:
        n += 1
        nxt = err | pre(arena.t_out, y, arena)
        if nxt is y:
            break
        y = nxt
    arena._record("attr_output", n)
    return y


def win_safe(safe: Function, arena: Arena) -> Function:
    """Greatest fixpoint of ``X = safe & ~pre(T_out, ~X)``.

    Equal to ``~attr_output(~safe)`` as the same node.
    """
    _check_unprimed(arena, safe, "win_safe: safe set")
    x = safe
    n = 0
    while True:
        n += 1
        nxt = safe & ~pre(arena.t_out, ~x, arena)
        if nxt is x:
            break
        x = nxt
    arena._record("win_safe", n)
    return x


def reachable(init: Function, t: Function, arena: Arena) -> Function:
    return _layers(init, t, arena)[-1]


def _layers(init: Function, t: Function, arena: Arena) -> list[Function]:
    """Cumulative forward frontiers ``R0 = init, R(k+1) = Rk | post(Rk)``."""
    _check_unprimed(arena, init, "reachable: initial set")
    layers = [init]
    while True:
        nxt = layers[-1] | post(t, layers[-1], arena)
        if nxt is layers[-1]:
            break
        layers.append(nxt)
    arena._record("reachable", len(layers))
    return layers


def extract_trace(init: Function, t: Function, target: Function,
                  arena: Arena) -> list[dict[BitVar, bool]] | None:
    """A shortest state sequence from ``init`` into ``target`` along ``t``.

    Each state is a total assignment over the arena's unprimed bits. Returns
    None when no target state is reachable.
    """
    m = arena.manager
    layers = _layers(init, t, arena)
    k = next((i for i, layer in enumerate(layers) if not (layer & target).is_false), None)
    if k is None:
        return None
    # states at distance exactly i; every state of ring i+1 has a predecessor in ring i
    rings = [layers[0]] + [layers[i] & ~layers[i - 1] for i in range(1, k + 1)]
    cur = m.pick_cube(rings[k] & target & arena.domain, arena.unprimed)
    trace = [cur]
    for i in range(k - 1, -1, -1):
        preds = pre(t, m.cube(cur), arena) & rings[i] & arena.domain
        cur = m.pick_cube(preds, arena.unprimed)
        trace.append(cur)
    trace.reverse()
    return trace
