"""Lexer, recursive-descent parser and pretty printer for ``.si`` files.

Grammar::

    file        := module* ;
    module      := "module" IDENT ":" decl* action* init ;
    decl        := ("var" | "global" "var") IDENT ":" type ;
    type        := "bool" | "[" INT ".." INT "]" ;
    action      := ("output" | "input") IDENT "{" command* "}" ;
    command     := expr "==>" assign_list ";" ;
    assign_list := /*empty*/ | assign ("," assign)* ;
    assign      := IDENT "'" ":=" expr ;
    init        := "init" ":" expr ;

Expression precedence, loosest first: ``|``, ``&``, prefix ``!``,
comparisons (non-associative), ``+ -``, ``*``, prefix ``-``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    ActionAST, AssignAST, Binary, BoolLit, CommandAST, DeclAST, Expr, IntLit,
    ModuleAST, SourceSpan, TypeAST, Unary, VarRef,
)

KEYWORDS = {"module", "var", "global", "bool", "output", "input", "init", "true", "false"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>==>|:=|\.\.|!=|<=|>=|[:\[\]{};,'=<>+\-*&|!()])
""", re.VERBOSE)


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "ident", "kw", "sym", "eof"
    text: str
    span: SourceSpan


def tokenize(text: str, file: str = "<input>") -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}",
                             SourceSpan(file, line, col, 1))
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "ident" and lexeme in KEYWORDS:
            tokens.append(Token("kw", lexeme, SourceSpan(file, line, col, len(lexeme))))
        elif kind in ("int", "ident", "sym"):
            tokens.append(Token(kind, lexeme, SourceSpan(file, line, col, len(lexeme))))
        pos = m.end()
    tokens.append(Token("eof", "", SourceSpan(file, line, pos - line_start + 1, 0)))
    return tokens


_CMP = ("=", "!=", "<", "<=", ">", ">=")


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("kw", "sym") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def fail(self, expected: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"expected {expected}, found {found}", t.span)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(repr(text))
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            self.fail("identifier")
        return self.advance()

    def integer(self) -> tuple[int, SourceSpan]:
        start = self.tok.span
        neg = False
        if self.at("-"):
            self.advance()
            neg = True
        if self.tok.kind != "int":
            self.fail("integer")
        v = int(self.advance().text)
        return (-v if neg else v), start

    # -- structure ---------------------------------------------------------

    def file(self) -> list[ModuleAST]:
        modules = []
        seen: dict[str, SourceSpan] = {}
        while self.tok.kind != "eof":
            m = self.module()
            if m.name in seen:
                raise ParseError(f"duplicate module name {m.name!r} "
                                 f"(first defined at {seen[m.name]})", m.span)
            seen[m.name] = m.span
            modules.append(m)
        return modules

    def module(self) -> ModuleAST:
        self.expect("module")
        name = self.ident()
        self.expect(":")
        decls = []
        while self.at("var") or self.at("global"):
            decls.append(self.decl())
        actions = []
        while self.at("output") or self.at("input"):
            actions.append(self.action())
        if not self.at("init"):
            self.fail("'var', 'global', 'output', 'input' or 'init'")
        self.advance()
        self.expect(":")
        init = self.expr()
        return ModuleAST(name.text, tuple(decls), tuple(actions), init, name.span)

    def decl(self) -> DeclAST:
        is_global = False
        if self.at("global"):
            self.advance()
            is_global = True
        self.expect("var")
        name = self.ident()
        self.expect(":")
        return DeclAST(name.text, self.type(), is_global, name.span)

    def type(self) -> TypeAST:
        t = self.tok
        if self.at("bool"):
            self.advance()
            return TypeAST(span=t.span)
        if not self.at("["):
            self.fail("'bool' or '['")
        self.advance()
        lo, _ = self.integer()
        self.expect("..")
        hi, _ = self.integer()
        self.expect("]")
        return TypeAST(lo, hi, t.span)

    def action(self) -> ActionAST:
        kind = self.advance().text
        name = self.ident()
        self.expect("{")
        commands = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.fail("'}'")
            commands.append(self.command())
        self.advance()
        return ActionAST(kind, name.text, tuple(commands), name.span)

    def command(self) -> CommandAST:
        start = self.tok.span
        guard = self.expr()
        self.expect("==>")
        assigns = []
        if not self.at(";"):
            assigns.append(self.assign())
            while self.at(","):
                self.advance()
                assigns.append(self.assign())
        self.expect(";")
        return CommandAST(guard, tuple(assigns), start)

    def assign(self) -> AssignAST:
        name = self.ident()
        self.expect("'")
        self.expect(":=")
        return AssignAST(name.text, self.expr(), name.span)

    # -- expressions -------------------------------------------------------

    def expr(self) -> Expr:
        left = self.and_expr()
        while self.at("|"):
            op = self.advance()
            left = Binary("|", left, self.and_expr(), op.span)
        return left

    def and_expr(self) -> Expr:
        left = self.not_expr()
        while self.at("&"):
            op = self.advance()
            left = Binary("&", left, self.not_expr(), op.span)
        return left

    def not_expr(self) -> Expr:
        if self.at("!"):
            op = self.advance()
            return Unary("!", self.not_expr(), op.span)
        return self.comparison()

    def comparison(self) -> Expr:
        left = self.sum()
        if self.tok.kind == "sym" and self.tok.text in _CMP:
            op = self.advance()
            left = Binary(op.text, left, self.sum(), op.span)
            if self.tok.kind == "sym" and self.tok.text in _CMP:
                raise ParseError("comparisons do not chain; add parentheses",
                                 self.tok.span)
        return left

    def sum(self) -> Expr:
        left = self.term()
        while self.at("+") or self.at("-"):
            op = self.advance()
            left = Binary(op.text, left, self.term(), op.span)
        return left

    def term(self) -> Expr:
        left = self.negation()
        while self.at("*"):
            op = self.advance()
            left = Binary("*", left, self.negation(), op.span)
        return left

    def negation(self) -> Expr:
        if self.at("-"):
            op = self.advance()
            if self.tok.kind == "int":
                # "-3" is a literal, "-(3)" is a negation
                lit = self.advance()
                return IntLit(-int(lit.text), op.span)
            return Unary("-", self.negation(), op.span)
        return self.atom()

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return IntLit(int(t.text), t.span)
        if self.at("true") or self.at("false"):
            self.advance()
            return BoolLit(t.text == "true", t.span)
        if t.kind == "ident":
            self.advance()
            if self.at("'"):
                self.advance()
                return VarRef(t.text, True, t.span)
            return VarRef(t.text, False, t.span)
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        self.fail("expression")


def parse(text: str, file: str = "<input>") -> list[ModuleAST]:
    """Parse a whole ``.si`` file into one :class:`ModuleAST` per module."""
    return _Parser(tokenize(text, file)).file()


def parse_expr(text: str, file: str = "<expr>") -> Expr:
    p = _Parser(tokenize(text, file))
    e = p.expr()
    if p.tok.kind != "eof":
        p.fail("end of expression")
    return e


# ---------------------------------------------------------------------------
# pretty printing

_PREC = {"|": 1, "&": 2, "!": 3, **{op: 4 for op in _CMP}, "+": 5, "-": 5, "*": 6}
_NEG_PREC = 7
_ATOM_PREC = 8


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary):
        return _PREC["!"] if e.op == "!" else _NEG_PREC
    if isinstance(e, IntLit) and e.value < 0:
        return _NEG_PREC
    return _ATOM_PREC


def _wrap(e: Expr, need: int) -> str:
    s = format_expr(e)
    return f"({s})" if _prec(e) < need else s


def format_expr(e: Expr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, VarRef):
        return e.name + ("'" if e.primed else "")
    if isinstance(e, Unary):
        if e.op == "!":
            return "!" + _wrap(e.operand, _PREC["!"])
        inner = e.operand
        if isinstance(inner, IntLit) and inner.value >= 0:
            return f"-({inner.value})"
        # "--x" must not lex as a negative literal followed by something else
        return "-" + _wrap(inner, _ATOM_PREC if isinstance(inner, (Unary, IntLit)) else _NEG_PREC)
    p = _PREC[e.op]
    if e.op in _CMP:
        return f"{_wrap(e.left, p + 1)} {e.op} {_wrap(e.right, p + 1)}"
    return f"{_wrap(e.left, p)} {e.op} {_wrap(e.right, p + 1)}"


def format_type(t: TypeAST) -> str:
    return "bool" if t.is_bool else f"[{t.lo}..{t.hi}]"


def format_module(m: ModuleAST) -> str:
    lines = [f"module {m.name}:"]
    for d in m.decls:
        lines.append(f"  {'global var' if d.is_global else 'var'} {d.name}: {format_type(d.type)}")
    for a in m.actions:
        if not a.commands:
            lines.append(f"  {a.kind} {a.name} {{ }}")
            continue
        lines.append(f"  {a.kind} {a.name} {{")
        for c in a.commands:
            rhs = ", ".join(f"{x.target}' := {format_expr(x.value)}" for x in c.assignments)
            lines.append(f"    {format_expr(c.guard)} ==> {rhs};")
        lines.append("  }")
    lines.append(f"  init: {format_expr(m.init)}")
    return "\n".join(lines) + "\n"


def pretty_print(modules) -> str:
    """Canonical text for one module or a list of modules."""
    if isinstance(modules, ModuleAST):
        return format_module(modules)
    return "\n".join(format_module(m) for m in modules)
