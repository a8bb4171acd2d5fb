"""Concrete syntax: tokenizer, recursive-descent parser and pretty printer.

Grammar (loosest to tightest)::

    term   := '\\' x [':' type] '.' term | 'if' term 'then' term 'else' term
            | sum ('||' sum)*
    sum    := scaled ('+' scaled)*
    scaled := scalar '.' scaled | app
    app    := atom atom* [lambda | if]
    atom   := x | '(' term ')' | '(' term ',' term ')' | 'zero' | '|bits>'
            | '[' term ']' | '{' term '}' | 'pi' | 'pi_n' | '*'
            | 'dpar' '(' term ',' '[' x ']' term ',' '[' x ']' term ')'
            | 'dmeas' '(' ... ')'

Types: ``B``, ``Top``, ``S T``, ``T * T``, ``T (.) T``, ``T -> T``.
"""

from __future__ import annotations

import cmath
import math
import re

from . import encodings
from .errors import DialectError, ParseError
from .scalars import format_scalar
from .terms import (
    LAMBDA_S,
    LINEAL,
    ODOT,
    STAR,
    ZERO,
    Abs,
    App,
    DeltaMeas,
    DeltaPar,
    If,
    Ket0,
    Ket1,
    Meas,
    Pair,
    Parallel,
    Scale,
    Star,
    Sum,
    Sup,
    Term,
    Var,
    Zero,
    canonicalize,
)
from .typesys import B, TOP, Arrow, Odot, Prod, TypeExpr, show_type, sup

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|--[^\n]*)
  | (?P<ket>\|[01]+>)
  | (?P<num>\d+(?:\.\d+)?(?:[eE][-+]?\d+)?i?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>\(\.\)|\|\||->|[\\λ⊙.:()\[\]{},+\-*/])
    """,
    re.VERBOSE,
)

KEYWORDS = {"if", "then", "else", "zero", "dpar", "dmeas"}
_MEAS = re.compile(r"pi(?:_(\d+))?$")
_SQRT = re.compile(r"sqrt(\d+(?:\.\d+)?)$")


def tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if not m:
            raise ParseError(f"unexpected character {source[pos]!r}", source, pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(source)))
    return tokens


class Parser:
    def __init__(self, source: str, dialect: str = LINEAL):
        if dialect not in (LINEAL, LAMBDA_S, ODOT):
            raise ValueError(f"unknown dialect {dialect!r}")
        self.source = source
        self.dialect = dialect
        self.tokens = tokenize(source)
        self.i = 0

    # -- token helpers ------------------------------------------------------

    def peek(self, k: int = 0):
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        kind, tok, _ = self.peek()
        return kind in ("sym", "ident") and tok == text

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str):
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.advance()

    def fail(self, message: str, offset=None):
        kind, tok, pos = self.peek()
        found = "end of input" if kind == "eof" else repr(tok)
        raise ParseError(f"{message}, found {found}", self.source, pos if offset is None else offset)

    def allow(self, cls, offset: int):
        if self.dialect not in cls.dialects:
            raise DialectError(
                f"{cls.construct} is not allowed in the {self.dialect} dialect",
                self.source,
                offset,
            )

    def ident(self) -> str:
        kind, tok, _ = self.peek()
        if kind != "ident" or tok in KEYWORDS:
            self.fail("expected an identifier")
        self.advance()
        return tok

    # -- terms --------------------------------------------------------------

    def parse(self) -> Term:
        t = self.term()
        if self.peek()[0] != "eof":
            self.fail("unexpected input")
        return canonicalize(t)

    def term(self) -> Term:
        if self.at("\\") or self.at("λ"):
            return self.lam()
        if self.at("if"):
            return self.ifte()
        items = [self.sum_()]
        while self.at("||"):
            self.allow(Parallel, self.peek()[2])
            self.advance()
            items.append(self.sum_())
        return items[0] if len(items) == 1 else Parallel(tuple(items))

    def sum_(self) -> Term:
        start = self.peek()[2]
        items = [self.scaled()]
        while self.at("+"):
            self.advance()
            items.append(self.scaled())
        if len(items) == 1:
            return items[0]
        if self.dialect == ODOT:
            acc = items[0]
            for item in items[1:]:
                acc = Sup(acc, item)
            return acc
        self.allow(Sum, start)
        return Sum(tuple(items))

    def scaled(self) -> Term:
        if self.at("\\") or self.at("λ"):
            return self.lam()
        if self.at("if"):
            return self.ifte()
        save = self.i
        start = self.peek()[2]
        try:
            coef = self.scalar_bare()
        except ParseError:
            coef = None
        if coef is not None and self.at("."):
            self.advance()
            self.allow(Scale, start)
            return Scale(coef, self.scaled())
        self.i = save
        return self.app()

    def starts_atom(self) -> bool:
        kind, tok, _ = self.peek()
        if kind == "ident":
            return tok not in ("then", "else")
        if kind == "ket":
            return True
        return kind == "sym" and tok in ("(", "[", "{", "*", "\\", "λ")

    def app(self) -> Term:
        head = self.atom()
        while self.starts_atom():
            if self.at("\\") or self.at("λ"):
                return App(head, self.lam())
            if self.at("if"):
                return App(head, self.ifte())
            head = App(head, self.atom())
        return head

    def atom(self) -> Term:
        kind, tok, pos = self.peek()
        if kind == "ket":
            self.advance()
            bits = tok[1:-1]
            if self.dialect == LINEAL:
                return encodings.church_ket(bits)
            if self.dialect == ODOT:
                return encodings.odot_ket(bits)
            return encodings.const_ket(bits)
        if kind == "ident":
            if tok == "zero":
                self.allow(Zero, pos)
                self.advance()
                return ZERO
            if tok in ("dpar", "dmeas"):
                return self.eliminator()
            if tok == "if":
                return self.ifte()
            m = _MEAS.match(tok)
            if m:
                self.allow(Meas, pos)
                self.advance()
                n = int(m.group(1) or 1)
                if n < 1:
                    self.fail("measurement arity must be positive", pos)
                return Meas(n)
            return Var(self.ident())
        if kind == "sym":
            if tok == "(":
                self.advance()
                first = self.term()
                if self.at(","):
                    self.allow(Pair, pos)
                    self.advance()
                    second = self.term()
                    self.expect(")")
                    return Pair(first, second)
                self.expect(")")
                return first
            if tok == "[":
                self.advance()
                body = self.term()
                self.expect("]")
                return encodings.thunk(body)
            if tok == "{":
                self.advance()
                body = self.term()
                self.expect("}")
                return encodings.release(body)
            if tok == "*":
                self.allow(Star, pos)
                self.advance()
                return STAR
            if tok in ("\\", "λ"):
                return self.lam()
        self.fail("expected a term")

    def lam(self) -> Term:
        self.advance()
        name = self.ident()
        ann = None
        if self.at(":"):
            self.advance()
            ann = self.type_arrow()
        self.expect(".")
        return Abs(name, ann, self.term())

    def ifte(self) -> Term:
        self.allow(If, self.peek()[2])
        self.expect("if")
        cond = self.term()
        self.expect("then")
        then = self.term()
        self.expect("else")
        return If(cond, then, self.term())

    def eliminator(self) -> Term:
        _, tok, pos = self.advance()
        cls = DeltaPar if tok == "dpar" else DeltaMeas
        self.allow(cls, pos)
        self.expect("(")
        scrut = self.term()
        self.expect(",")
        self.expect("[")
        x = self.ident()
        self.expect("]")
        left = self.term()
        self.expect(",")
        self.expect("[")
        y = self.ident()
        self.expect("]")
        right = self.term()
        self.expect(")")
        return cls(scrut, x, left, y, right)

    # -- scalars ------------------------------------------------------------

    def scalar_bare(self) -> complex:
        if self.at("-"):
            self.advance()
            return -self.sproduct()
        return self.sproduct()

    def sexpr(self) -> complex:
        value = self.scalar_bare()
        while self.at("+") or self.at("-"):
            op = self.advance()[1]
            rhs = self.sproduct()
            value = value + rhs if op == "+" else value - rhs
        return value

    def sproduct(self) -> complex:
        value = self.sprimary()
        while self.at("*") or self.at("/"):
            save = self.i
            op = self.advance()[1]
            try:
                rhs = self.sprimary()
            except ParseError:
                self.i = save
                break
            if op == "*":
                value *= rhs
            else:
                if rhs == 0:
                    self.fail("division by zero in scalar")
                value /= rhs
        return value

    def sprimary(self) -> complex:
        kind, tok, _ = self.peek()
        if kind == "num":
            self.advance()
            if tok.endswith("i"):
                return complex(0, float(tok[:-1]))
            return complex(float(tok))
        if kind == "ident":
            if tok == "i":
                self.advance()
                return 1j
            m = _SQRT.match(tok)
            if m:
                self.advance()
                return complex(math.sqrt(float(m.group(1))))
            if tok == "sqrt" and self.peek(1)[1] == "(":
                self.advance()
                self.advance()
                value = self.sexpr()
                self.expect(")")
                return cmath.sqrt(value)
        if self.at("("):
            self.advance()
            value = self.sexpr()
            self.expect(")")
            return value
        self.fail("expected a scalar")

    # -- types --------------------------------------------------------------

    def type_arrow(self) -> TypeExpr:
        left = self.type_prod()
        if self.at("->"):
            self.advance()
            return Arrow(left, self.type_arrow())
        return left

    def type_prod(self) -> TypeExpr:
        left = self.type_unary()
        if self.at("*"):
            self.advance()
            return Prod(left, self.type_prod())
        if self.at("(.)") or self.at("⊙"):
            self.advance()
            return Odot(left, self.type_prod())
        return left

    def type_unary(self) -> TypeExpr:
        if self.at("S"):
            self.advance()
            return sup(self.type_unary())
        if self.at("B"):
            self.advance()
            return B
        if self.at("Top"):
            self.advance()
            return TOP
        if self.at("("):
            self.advance()
            t = self.type_arrow()
            self.expect(")")
            return t
        self.fail("expected a type")


def parse(source: str, dialect: str = LINEAL) -> Term:
    """Parse ``source`` into a canonical term legal in ``dialect``."""
    return Parser(source, dialect).parse()


def parse_type(source: str) -> TypeExpr:
    p = Parser(source)
    t = p.type_arrow()
    if p.peek()[0] != "eof":
        p.fail("unexpected input after type")
    return t


# ---------------------------------------------------------------------------
# printing


def _is_identity(t: Term) -> bool:
    return isinstance(t, Abs) and t.ann is None and t.body == Var(t.name)


def pretty(t: Term, dialect: str = LINEAL) -> str:
    return _pp(t, 0, dialect)


def _wrap(text: str, cond: bool) -> str:
    return f"({text})" if cond else text


def _pp(t: Term, prec: int, d: str) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Abs):
        if d == LINEAL:
            bits = encodings.read_church_ket(t)
            if bits is not None:
                return f"|{bits}>"
        if t.ann is None and t.name.startswith("_") and t.name not in t.body.fv:
            return f"[{_pp(t.body, 0, d)}]"
        ann = "" if t.ann is None else ":" + show_type(t.ann)
        return _wrap(f"\\{t.name}{ann}.{_pp(t.body, 0, d)}", prec > 0)
    if isinstance(t, App):
        if _is_identity(t.arg):
            return "{" + _pp(t.fun, 0, d) + "}"
        return _wrap(f"{_pp(t.fun, 3, d)} {_pp(t.arg, 4, d)}", prec > 3)
    if isinstance(t, Scale):
        body = _pp(t.body, 2, d)
        # "2.2.x" would lex as the number 2.2
        body = f"({body})" if body[0].isdigit() else body
        return _wrap(f"{format_scalar(t.coef)}.{body}", prec > 2)
    if isinstance(t, Sum):
        return _wrap(" + ".join(_pp(c, 2, d) for c in t.terms), prec > 1)
    if isinstance(t, Sup):
        return _wrap(f"{_pp(t.left, 1, d)} + {_pp(t.right, 2, d)}", prec > 1)
    if isinstance(t, Parallel):
        return _wrap(" || ".join(_pp(c, 1, d) for c in t.terms), prec > 0)
    if isinstance(t, Zero):
        return "zero"
    if isinstance(t, Ket0):
        return "|0>"
    if isinstance(t, Ket1):
        return "|1>"
    if isinstance(t, Star):
        return "*"
    if isinstance(t, Meas):
        return "pi" if t.n == 1 else f"pi_{t.n}"
    if isinstance(t, Pair):
        bits = encodings.read_const_ket(t)
        if bits is not None:
            return f"|{bits}>"
        return f"({_pp(t.left, 0, d)}, {_pp(t.right, 0, d)})"
    if isinstance(t, If):
        return _wrap(
            f"if {_pp(t.cond, 0, d)} then {_pp(t.then, 0, d)} else {_pp(t.else_, 0, d)}",
            prec > 0,
        )
    if isinstance(t, DeltaPar):
        name = "dmeas" if isinstance(t, DeltaMeas) else "dpar"
        return (
            f"{name}({_pp(t.scrut, 0, d)}, [{t.x}]{_pp(t.left, 0, d)}, "
            f"[{t.y}]{_pp(t.right, 0, d)})"
        )
    raise TypeError(f"cannot print {t!r}")
