"""Type expressions: Lambda-S qubit/function types with the S modality, plus
the Top and sup types of the sup-calculus."""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

from .errors import TypeCheckError


class TypeExpr:
    def __str__(self) -> str:
        return show_type(self)


@dataclass(frozen=True)
class BoolT(TypeExpr):
    pass


@dataclass(frozen=True)
class Prod(TypeExpr):
    left: TypeExpr
    right: TypeExpr


@dataclass(frozen=True)
class S(TypeExpr):
    body: TypeExpr


@dataclass(frozen=True)
class Arrow(TypeExpr):
    dom: TypeExpr
    cod: TypeExpr


@dataclass(frozen=True)
class Top(TypeExpr):
    pass


@dataclass(frozen=True)
class Odot(TypeExpr):
    left: TypeExpr
    right: TypeExpr


@dataclass(frozen=True)
class ZeroType(TypeExpr):
    """Type of the null vector: below every S-type."""


B = BoolT()
TOP = Top()
ZERO_T = ZeroType()


def bits_type(n: int) -> TypeExpr:
    """B^n as a right-nested product."""
    if n < 1:
        raise ValueError("arity must be positive")
    return reduce(lambda acc, _: Prod(B, acc), range(n - 1), B)


def bits_arity(t: TypeExpr):
    """n if t is B^n (right-nested), else None."""
    if t == B:
        return 1
    if isinstance(t, Prod) and t.left == B:
        rest = bits_arity(t.right)
        return None if rest is None else rest + 1
    return None


def sup(t: TypeExpr) -> TypeExpr:
    """S applied in normal form: S S A = S A."""
    if isinstance(t, (S, ZeroType)):
        return t
    return S(t)


def strip(t: TypeExpr) -> TypeExpr:
    return t.body if isinstance(t, S) else t


def is_qubit_type(t: TypeExpr) -> bool:
    if t == B:
        return True
    if isinstance(t, Prod):
        return is_qubit_type(t.left) and is_qubit_type(t.right)
    if isinstance(t, S):
        return is_qubit_type(t.body)
    return False


def normalize_type(t: TypeExpr) -> TypeExpr:
    if isinstance(t, S):
        return sup(normalize_type(t.body))
    if isinstance(t, Prod):
        return Prod(normalize_type(t.left), normalize_type(t.right))
    if isinstance(t, Odot):
        return Odot(normalize_type(t.left), normalize_type(t.right))
    if isinstance(t, Arrow):
        return Arrow(normalize_type(t.dom), normalize_type(t.cod))
    return t


def subtype(a: TypeExpr, b: TypeExpr) -> bool:
    """A <= SA, closed under products, arrow codomains and transitivity."""
    if a == b:
        return True
    if isinstance(a, ZeroType):
        return isinstance(b, S)
    if isinstance(b, S):
        if isinstance(a, S):
            return subtype(a.body, b.body)
        if subtype(a, b.body):
            return True
        # a product of superpositions embeds into the superposed product
        if isinstance(a, Prod) and isinstance(b.body, Prod):
            return subtype(a.left, sup(b.body.left)) and subtype(a.right, sup(b.body.right))
        if isinstance(a, Arrow) and isinstance(b.body, Arrow):
            return subtype(a, b.body)
        return False
    if isinstance(a, Prod) and isinstance(b, Prod):
        return subtype(a.left, b.left) and subtype(a.right, b.right)
    if isinstance(a, Arrow) and isinstance(b, Arrow):
        return subtype(b.dom, a.dom) and subtype(a.cod, b.cod)
    return False


def join(a: TypeExpr, b: TypeExpr) -> TypeExpr:
    """Least upper bound under subtype, or TypeCheckError."""
    if subtype(a, b):
        return b
    if subtype(b, a):
        return a
    if isinstance(a, ZeroType):
        return sup(b)
    if isinstance(b, ZeroType):
        return sup(a)
    sa, sb = strip(a), strip(b)
    if isinstance(sa, Prod) and isinstance(sb, Prod):
        inner = Prod(strip(join(sa.left, sb.left)), strip(join(sa.right, sb.right)))
        return sup(inner)
    if isinstance(sa, Arrow) and isinstance(sb, Arrow) and sa.dom == sb.dom:
        inner = Arrow(sa.dom, join(sa.cod, sb.cod))
        if isinstance(a, S) or isinstance(b, S):
            return sup(inner)
        return inner
    if sa != a or sb != b:
        if subtype(sa, sb) or subtype(sb, sa):
            return sup(join(sa, sb))
    raise TypeCheckError(f"type mismatch: {a} and {b} have no common supertype")


def show_type(t: TypeExpr, prec: int = 0) -> str:
    if isinstance(t, BoolT):
        return "B"
    if isinstance(t, Top):
        return "Top"
    if isinstance(t, ZeroType):
        return "S _"
    if isinstance(t, S):
        return "S " + show_type(t.body, 2)
    if isinstance(t, (Prod, Odot)):
        op = " * " if isinstance(t, Prod) else " (.) "
        text = show_type(t.left, 2) + op + show_type(t.right, 1)
        return f"({text})" if prec > 1 else text
    if isinstance(t, Arrow):
        text = show_type(t.dom, 1) + " -> " + show_type(t.cod, 0)
        return f"({text})" if prec > 0 else text
    raise TypeError(t)
