"""Reduced ordered binary decision diagrams.

Nodes are plain integers indexing into the manager's node arrays; ``0`` and
``1`` are the FALSE and TRUE terminals. User code handles :class:`Function`
wrappers, which are interned per manager so that two semantically equal
functions are the *same* Python object.

Model variables are binary encoded; every model bit gets an unprimed and a
primed :class:`BitVar`, adjacent in the order (unprimed first).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

FALSE_ID = 0
TRUE_ID = 1
_TERMINAL_LEVEL = 1 << 30

AND, OR, XOR, IMPLIES = "and", "or", "xor", "implies"
_OPS = (AND, OR, XOR, IMPLIES)


class BDDError(Exception):
    """Misuse of the kernel (unregistered bits, foreign operands, ...)."""


@dataclass(frozen=True)
class BitVar:
    index: int
    primed: bool
    origin: tuple[str, int]

    @property
    def kind(self) -> str:
        return "primed" if self.primed else "unprimed"

    def __str__(self) -> str:
        name, pos = self.origin
        return f"{name}[{pos}]" + ("'" if self.primed else "")


class Function:
    """Handle on a node of a :class:`Manager`.

    Supports ``&``, ``|``, ``^``, ``~`` and :meth:`implies`. Equality is
    identity: instances are interned, so equal functions compare ``is``.
    """

    __slots__ = ("manager", "node", "__weakref__")

    def __init__(self, manager: "Manager", node: int):
        self.manager = manager
        self.node = node

    def __and__(self, other: "Function") -> "Function":
        return self.manager.apply(AND, self, other)

    def __or__(self, other: "Function") -> "Function":
        return self.manager.apply(OR, self, other)

    def __xor__(self, other: "Function") -> "Function":
        return self.manager.apply(XOR, self, other)

    def __invert__(self) -> "Function":
        return self.manager.negate(self)

    def implies(self, other: "Function") -> "Function":
        return self.manager.apply(IMPLIES, self, other)

    def equiv(self, other: "Function") -> "Function":
        return self.manager.negate(self.manager.apply(XOR, self, other))

    @property
    def is_false(self) -> bool:
        return self.node == FALSE_ID

    @property
    def is_true(self) -> bool:
        return self.node == TRUE_ID

    def __bool__(self) -> bool:
        raise TypeError("use .is_true / .is_false to test a Function")

    def __repr__(self) -> str:
        if self.node <= TRUE_ID:
            return f"<Function {'TRUE' if self.node else 'FALSE'}>"
        return f"<Function node={self.node} var={self.manager._var[self.node]}>"


class Manager:
    """Unique table, operation caches and bit registry.

    Not thread safe; confine a manager and its functions to one thread.
    """

    def __init__(self) -> None:
        # node arrays; slots 0/1 are the terminals
        self._var: list[int] = [_TERMINAL_LEVEL, _TERMINAL_LEVEL]
        self._low: list[int] = [0, 1]
        self._high: list[int] = [0, 1]
        self._unique: dict[tuple[int, int, int], int] = {}
        self._cache: dict[tuple, int] = {}
        self._handles: dict[int, Function] = {}
        self.bits: list[BitVar] = []
        self._by_name: dict[str, tuple[list[BitVar], list[BitVar]]] = {}
        self.false = self._wrap(FALSE_ID)
        self.true = self._wrap(TRUE_ID)

    # ------------------------------------------------------------------
    # registry

    def declare(self, name: str, width: int) -> tuple[list[BitVar], list[BitVar]]:
        """Register ``width`` bit pairs for model variable ``name``.

        Returns ``(unprimed, primed)`` lists, most significant bit first.
        Re-declaring a name with the same width returns the existing bits.
        """
        if name in self._by_name:
            unprimed, primed = self._by_name[name]
            if len(unprimed) != width:
                raise BDDError(
                    f"variable {name!r} already declared with {len(unprimed)} bits")
            return list(unprimed), list(primed)
        unprimed, primed = [], []
        for pos in range(width):
            u = BitVar(len(self.bits), False, (name, pos))
            self.bits.append(u)
            p = BitVar(len(self.bits), True, (name, pos))
            self.bits.append(p)
            unprimed.append(u)
            primed.append(p)
        self._by_name[name] = (unprimed, primed)
        return list(unprimed), list(primed)

    def declared(self, name: str) -> bool:
        return name in self._by_name

    def bits_of(self, name: str) -> tuple[list[BitVar], list[BitVar]]:
        unprimed, primed = self._by_name[name]
        return list(unprimed), list(primed)

    def twin(self, v: BitVar) -> BitVar:
        self._check_bit(v)
        return self.bits[v.index - 1] if v.primed else self.bits[v.index + 1]

    def _check_bit(self, v: BitVar) -> None:
        if not (0 <= v.index < len(self.bits)) or self.bits[v.index] != v:
            raise BDDError(f"bit {v} is not registered in this manager")

    # ------------------------------------------------------------------
    # node plumbing

    def _wrap(self, u: int) -> Function:
        f = self._handles.get(u)
        if f is None:
            f = Function(self, u)
            self._handles[u] = f
        return f

    def _own(self, f: Function) -> int:
        if not isinstance(f, Function):
            raise BDDError(f"expected a Function, got {type(f).__name__}")
        if f.manager is not self:
            raise BDDError("operand belongs to a different manager")
        return f.node

    def _mk(self, var: int, low: int, high: int) -> int:
        if low == high:
            return low
        key = (var, low, high)
        u = self._unique.get(key)
        if u is None:
            u = len(self._var)
            self._var.append(var)
            self._low.append(low)
            self._high.append(high)
            self._unique[key] = u
        return u

    def __len__(self) -> int:
        """Number of nodes in the store, terminals included."""
        return len(self._var)

    def clear_cache(self) -> None:
        self._cache.clear()

    def var(self, v: BitVar) -> Function:
        """The function that is true iff bit ``v`` is 1."""
        self._check_bit(v)
        return self._wrap(self._mk(v.index, FALSE_ID, TRUE_ID))

    def top(self, f: Function) -> tuple[int, Function, Function]:
        """Decompose a non-terminal into ``(var index, low, high)``."""
        u = self._own(f)
        if u <= TRUE_ID:
            raise BDDError("terminal node has no children")
        return self._var[u], self._wrap(self._low[u]), self._wrap(self._high[u])

    # ------------------------------------------------------------------
    # Boolean operations

    def apply(self, op: str, f: Function, g: Function) -> Function:
        if op not in _OPS:
            raise BDDError(f"unknown operator {op!r}")
        return self._wrap(self._apply(op, self._own(f), self._own(g)))

    def _apply(self, op: str, u: int, v: int) -> int:
        # terminal cases
        if op == AND:
            if u == FALSE_ID or v == FALSE_ID:
                return FALSE_ID
            if u == TRUE_ID:
                return v
            if v == TRUE_ID or u == v:
                return u
            if u > v:
                u, v = v, u
        elif op == OR:
            if u == TRUE_ID or v == TRUE_ID:
                return TRUE_ID
            if u == FALSE_ID:
                return v
            if v == FALSE_ID or u == v:
                return u
            if u > v:
                u, v = v, u
        elif op == XOR:
            if u == v:
                return FALSE_ID
            if u == FALSE_ID:
                return v
            if v == FALSE_ID:
                return u
            if u == TRUE_ID:
                return self._not(v)
            if v == TRUE_ID:
                return self._not(u)
            if u > v:
                u, v = v, u
        else:  # implies
            if u == FALSE_ID or v == TRUE_ID or u == v:
                return TRUE_ID
            if u == TRUE_ID:
                return v
            if v == FALSE_ID:
                return self._not(u)
        key = (op, u, v)
        r = self._cache.get(key)
        if r is not None:
            return r
        vu, vv = self._var[u], self._var[v]
        top = min(vu, vv)
        u0, u1 = (self._low[u], self._high[u]) if vu == top else (u, u)
        v0, v1 = (self._low[v], self._high[v]) if vv == top else (v, v)
        r = self._mk(top, self._apply(op, u0, v0), self._apply(op, u1, v1))
        self._cache[key] = r
        return r

    def negate(self, f: Function) -> Function:
        return self._wrap(self._not(self._own(f)))

    def _not(self, u: int) -> int:
        if u <= TRUE_ID:
            return 1 - u
        key = ("not", u)
        r = self._cache.get(key)
        if r is None:
            r = self._mk(self._var[u], self._not(self._low[u]), self._not(self._high[u]))
            self._cache[key] = r
        return r

    def ite(self, f: Function, g: Function, h: Function) -> Function:
        return self._wrap(self._ite(self._own(f), self._own(g), self._own(h)))

    def _ite(self, f: int, g: int, h: int) -> int:
        if f == TRUE_ID:
            return g
        if f == FALSE_ID:
            return h
        if g == h:
            return g
        if g == TRUE_ID and h == FALSE_ID:
            return f
        key = ("ite", f, g, h)
        r = self._cache.get(key)
        if r is not None:
            return r
        top = min(self._var[f], self._var[g], self._var[h])
        f0, f1 = self._cofactors(f, top)
        g0, g1 = self._cofactors(g, top)
        h0, h1 = self._cofactors(h, top)
        r = self._mk(top, self._ite(f0, g0, h0), self._ite(f1, g1, h1))
        self._cache[key] = r
        return r

    def _cofactors(self, u: int, level: int) -> tuple[int, int]:
        if self._var[u] == level:
            return self._low[u], self._high[u]
        return u, u

    def conj(self, fs: Iterable[Function]) -> Function:
        r = TRUE_ID
        for f in fs:
            r = self._apply(AND, r, self._own(f))
        return self._wrap(r)

    def disj(self, fs: Iterable[Function]) -> Function:
        r = FALSE_ID
        for f in fs:
            r = self._apply(OR, r, self._own(f))
        return self._wrap(r)

    # ------------------------------------------------------------------
    # quantification and substitution

    def _levels(self, bits: Iterable[BitVar]) -> frozenset[int]:
        levels = []
        for b in bits:
            self._check_bit(b)
            levels.append(b.index)
        return frozenset(levels)

    def exists(self, bits: Iterable[BitVar], f: Function) -> Function:
        levels = self._levels(bits)
        return self._wrap(self._exists(self._own(f), levels, max(levels, default=-1)))

    def forall(self, bits: Iterable[BitVar], f: Function) -> Function:
        levels = self._levels(bits)
        u = self._not(self._own(f))
        return self._wrap(self._not(self._exists(u, levels, max(levels, default=-1))))

    def _exists(self, u: int, levels: frozenset[int], last: int) -> int:
        if u <= TRUE_ID or self._var[u] > last:
            return u
        key = ("ex", u, levels)
        r = self._cache.get(key)
        if r is not None:
            return r
        lo = self._exists(self._low[u], levels, last)
        if self._var[u] in levels:
            r = TRUE_ID if lo == TRUE_ID else self._apply(
                OR, lo, self._exists(self._high[u], levels, last))
        else:
            r = self._mk(self._var[u], lo, self._exists(self._high[u], levels, last))
        self._cache[key] = r
        return r

    def and_exists(self, f: Function, g: Function, bits: Iterable[BitVar]) -> Function:
        """``exists(bits, f & g)`` without building the conjunction."""
        levels = self._levels(bits)
        return self._wrap(self._and_exists(
            self._own(f), self._own(g), levels, max(levels, default=-1)))

    def _and_exists(self, u: int, v: int, levels: frozenset[int], last: int) -> int:
        if u == FALSE_ID or v == FALSE_ID:
            return FALSE_ID
        if u == TRUE_ID:
            return self._exists(v, levels, last)
        if v == TRUE_ID or u == v:
            return self._exists(u, levels, last)
        if u > v:
            u, v = v, u
        key = ("aex", u, v, levels)
        r = self._cache.get(key)
        if r is not None:
            return r
        top = min(self._var[u], self._var[v])
        if top > last:
            r = self._apply(AND, u, v)
        else:
            u0, u1 = self._cofactors(u, top)
            v0, v1 = self._cofactors(v, top)
            lo = self._and_exists(u0, v0, levels, last)
            if top in levels:
                r = TRUE_ID if lo == TRUE_ID else self._apply(
                    OR, lo, self._and_exists(u1, v1, levels, last))
            else:
                r = self._mk(top, lo, self._and_exists(u1, v1, levels, last))
        self._cache[key] = r
        return r

    def rename(self, f: Function, mapping: Mapping[BitVar, BitVar]) -> Function:
        """Substitute bits by their twins.

        Only twin swaps (unprimed <-> primed of the same model bit) are
        accepted, and the mapping must be injective.
        """
        table: dict[int, int] = {}
        for src, dst in mapping.items():
            self._check_bit(src)
            self._check_bit(dst)
            if src.origin != dst.origin or src.primed == dst.primed:
                raise BDDError(f"rename {src} -> {dst} is not a twin swap")
            table[src.index] = dst.index
        if len(set(table.values())) != len(table):
            raise BDDError("rename mapping is not injective")
        if not table:
            return f
        key_map = tuple(sorted(table.items()))
        return self._wrap(self._rename(self._own(f), table, key_map, {}))

    def _rename(self, u: int, table: dict[int, int], key_map: tuple, memo: dict) -> int:
        if u <= TRUE_ID:
            return u
        r = memo.get(u)
        if r is not None:
            return r
        key = ("ren", u, key_map)
        r = self._cache.get(key)
        if r is None:
            lo = self._rename(self._low[u], table, key_map, memo)
            hi = self._rename(self._high[u], table, key_map, memo)
            level = table.get(self._var[u], self._var[u])
            r = self._ite(self._mk(level, FALSE_ID, TRUE_ID), hi, lo)
            self._cache[key] = r
        memo[u] = r
        return r

    def prime(self, f: Function) -> Function:
        """Rename every unprimed bit in the support of ``f`` to its twin."""
        return self.rename(f, {b: self.bits[b.index + 1]
                               for b in self.support(f) if not b.primed})

    def unprime(self, f: Function) -> Function:
        return self.rename(f, {b: self.bits[b.index - 1]
                               for b in self.support(f) if b.primed})

    def restrict(self, f: Function, assignment: Mapping[BitVar, bool]) -> Function:
        """Cofactor ``f`` by a partial assignment."""
        values = {}
        for b, val in assignment.items():
            self._check_bit(b)
            values[b.index] = bool(val)
        return self._wrap(self._restrict(self._own(f), values, {}))

    def _restrict(self, u: int, values: dict[int, bool], memo: dict) -> int:
        if u <= TRUE_ID:
            return u
        r = memo.get(u)
        if r is None:
            level = self._var[u]
            if level in values:
                child = self._high[u] if values[level] else self._low[u]
                r = self._restrict(child, values, memo)
            else:
                r = self._mk(level, self._restrict(self._low[u], values, memo),
                             self._restrict(self._high[u], values, memo))
            memo[u] = r
        return r

    def cube(self, assignment: Mapping[BitVar, bool]) -> Function:
        """Conjunction of literals."""
        r = TRUE_ID
        for b in sorted(assignment, key=lambda b: b.index, reverse=True):
            self._check_bit(b)
            if assignment[b]:
                r = self._apply(AND, self._mk(b.index, FALSE_ID, TRUE_ID), r)
            else:
                r = self._apply(AND, self._mk(b.index, TRUE_ID, FALSE_ID), r)
        return self._wrap(r)

    # ------------------------------------------------------------------
    # inspection

    def support(self, f: Function) -> list[BitVar]:
        seen: set[int] = set()
        levels: set[int] = set()
        stack = [self._own(f)]
        while stack:
            u = stack.pop()
            if u <= TRUE_ID or u in seen:
                continue
            seen.add(u)
            levels.add(self._var[u])
            stack.append(self._low[u])
            stack.append(self._high[u])
        return [self.bits[i] for i in sorted(levels)]

    def dag_size(self, f: Function) -> int:
        """Number of nodes reachable from ``f``, terminals included."""
        seen: set[int] = set()
        stack = [self._own(f)]
        while stack:
            u = stack.pop()
            if u in seen:
                continue
            seen.add(u)
            if u > TRUE_ID:
                stack.append(self._low[u])
                stack.append(self._high[u])
        return len(seen)

    def evaluate(self, f: Function, assignment: Mapping[BitVar, bool]) -> bool:
        u = self._own(f)
        values = {b.index: bool(val) for b, val in assignment.items()}
        while u > TRUE_ID:
            level = self._var[u]
            if level not in values:
                raise BDDError(f"assignment misses bit {self.bits[level]}")
            u = self._high[u] if values[level] else self._low[u]
        return u == TRUE_ID

    def sat_count(self, f: Function, over: Iterable[BitVar]) -> int:
        """Number of satisfying assignments to the bits in ``over``."""
        over_levels = sorted(self._levels(over))
        supp = {b.index for b in self.support(f)}
        missing = supp.difference(over_levels)
        if missing:
            names = ", ".join(str(self.bits[i]) for i in sorted(missing))
            raise BDDError(f"sat_count: support not covered by 'over' ({names})")
        # rank of each level within over; terminals rank len(over)
        rank = {lvl: i for i, lvl in enumerate(over_levels)}
        n = len(over_levels)
        memo: dict[int, int] = {}

        def pos(u: int) -> int:
            return n if u <= TRUE_ID else rank[self._var[u]]

        def count(u: int) -> int:
            # models over the bits at ranks >= pos(u)
            if u == FALSE_ID:
                return 0
            if u == TRUE_ID:
                return 1
            r = memo.get(u)
            if r is None:
                p = pos(u)
                lo, hi = self._low[u], self._high[u]
                r = (count(lo) << (pos(lo) - p - 1)) + (count(hi) << (pos(hi) - p - 1))
                memo[u] = r
            return r

        u = self._own(f)
        return count(u) << pos(u)

    def cubes(self, f: Function) -> Iterator[dict[BitVar, bool]]:
        """Enumerate the paths to TRUE as partial assignments (disjoint cubes)."""
        u = self._own(f)
        path: dict[BitVar, bool] = {}

        def walk(u: int) -> Iterator[dict[BitVar, bool]]:
            if u == FALSE_ID:
                return
            if u == TRUE_ID:
                yield dict(path)
                return
            b = self.bits[self._var[u]]
            path[b] = False
            yield from walk(self._low[u])
            path[b] = True
            yield from walk(self._high[u])
            del path[b]

        yield from walk(u)

    def iter_sat(self, f: Function, over: Iterable[BitVar]) -> Iterator[dict[BitVar, bool]]:
        """Enumerate total assignments over ``over`` satisfying ``f``."""
        over = sorted(set(over), key=lambda b: b.index)
        over_set = set(over)
        for c in self.cubes(f):
            if not over_set.issuperset(c):
                raise BDDError("iter_sat: support not covered by 'over'")
            free = [b for b in over if b not in c]
            for k in range(1 << len(free)):
                full = dict(c)
                for i, b in enumerate(free):
                    full[b] = bool((k >> (len(free) - 1 - i)) & 1)
                yield full

    def pick_cube(self, f: Function,
                  over: Iterable[BitVar] | None = None) -> dict[BitVar, bool] | None:
        """One satisfying assignment, total over ``over`` (default: support).

        Free bits are set to 0. Returns ``None`` iff ``f`` is FALSE.
        """
        u = self._own(f)
        if u == FALSE_ID:
            return None
        if over is None:
            over = self.support(f)
        result = {b: False for b in over}
        while u > TRUE_ID:
            b = self.bits[self._var[u]]
            if b not in result:
                raise BDDError(f"pick_cube: bit {b} of the support is not in 'over'")
            if self._low[u] != FALSE_ID:
                result[b] = False
                u = self._low[u]
            else:
                result[b] = True
                u = self._high[u]
        return result

    def check_invariants(self) -> None:
        """Assert ordering, reduction and unique-table consistency."""
        for u in range(2, len(self._var)):
            var, lo, hi = self._var[u], self._low[u], self._high[u]
            assert lo != hi, f"node {u} is redundant"
            assert var < self._var[lo] and var < self._var[hi], f"node {u} out of order"
            assert self._unique[(var, lo, hi)] == u, f"node {u} missing from unique table"
        assert len(self._unique) == len(self._var) - 2
        for v in self.bits:
            if not v.primed:
                assert self.bits[v.index + 1].origin == v.origin
