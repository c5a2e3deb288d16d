"""Syntax trees for the ``.si`` interface language.

Every node carries a :class:`SourceSpan`; spans are excluded from equality
so that structurally equal trees compare equal regardless of layout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union


@dataclass(frozen=True)
class SourceSpan:
    file: str = "<input>"
    line: int = 1
    column: int = 1
    length: int = 0

    def __post_init__(self):
        if self.line < 1 or self.column < 1:
            raise ValueError("line and column are 1-based")

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


NOWHERE = SourceSpan("<generated>", 1, 1, 0)


def _span():
    return field(default=NOWHERE, compare=False, repr=False)


# ---------------------------------------------------------------------------
# expressions

@dataclass(frozen=True)
class IntLit:
    value: int
    span: SourceSpan = _span()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    span: SourceSpan = _span()


@dataclass(frozen=True)
class VarRef:
    name: str
    primed: bool = False
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Unary:
    op: str  # "!" or "-"
    operand: "Expr"
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    span: SourceSpan = _span()


Expr = Union[IntLit, BoolLit, VarRef, Unary, Binary]

BOOL_OPS = ("&", "|")
CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")
ARITH_OPS = ("+", "-", "*")


def conj(exprs) -> Expr:
    exprs = list(exprs)
    if not exprs:
        return BoolLit(True)
    out = exprs[0]
    for e in exprs[1:]:
        out = Binary("&", out, e)
    return out


def disj(exprs) -> Expr:
    exprs = list(exprs)
    if not exprs:
        return BoolLit(False)
    out = exprs[0]
    for e in exprs[1:]:
        out = Binary("|", out, e)
    return out


def walk(e: Expr):
    yield e
    if isinstance(e, Unary):
        yield from walk(e.operand)
    elif isinstance(e, Binary):
        yield from walk(e.left)
        yield from walk(e.right)


# ---------------------------------------------------------------------------
# declarations and modules

@dataclass(frozen=True)
class TypeAST:
    """``bool`` when ``lo`` is None, otherwise the range ``[lo..hi]``."""
    lo: int | None = None
    hi: int | None = None
    span: SourceSpan = _span()

    @property
    def is_bool(self) -> bool:
        return self.lo is None


@dataclass(frozen=True)
class DeclAST:
    name: str
    type: TypeAST
    is_global: bool = False
    span: SourceSpan = _span()


@dataclass(frozen=True)
class AssignAST:
    target: str
    value: Expr
    span: SourceSpan = _span()


@dataclass(frozen=True)
class CommandAST:
    guard: Expr
    assignments: tuple[AssignAST, ...] = ()
    span: SourceSpan = _span()


@dataclass(frozen=True)
class ActionAST:
    kind: str  # "output" | "input"
    name: str
    commands: tuple[CommandAST, ...] = ()
    span: SourceSpan = _span()


@dataclass(frozen=True)
class ModuleAST:
    name: str
    decls: tuple[DeclAST, ...]
    actions: tuple[ActionAST, ...]
    init: Expr
    span: SourceSpan = _span()
