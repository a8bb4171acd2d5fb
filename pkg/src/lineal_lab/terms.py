"""Unified term language for Lineal, Lambda-S and the sup-calculus.

Terms are immutable. Sums (and parallel compositions) are n-ary, flattened
and sorted by a total syntactic order in which bound variables compare by
de Bruijn level, so alpha-equivalent terms sort the same way.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from functools import cached_property
from typing import ClassVar, Optional

from .scalars import approx_eq

LINEAL = "lineal"
LAMBDA_S = "lambda-s"
ODOT = "odot"
DIALECTS = (LINEAL, LAMBDA_S, ODOT)
ALL = frozenset(DIALECTS)


class Term:
    """Base class. Subclasses are frozen dataclasses with ``eq=False``."""

    rank: ClassVar[int]
    dialects: ClassVar[frozenset] = ALL
    construct: ClassVar[str] = "term"

    def children(self) -> tuple["Term", ...]:
        return ()

    def rebuild(self, kids: tuple["Term", ...]) -> "Term":
        return self

    def bound_in(self, i: int) -> tuple[str, ...]:
        """Names bound by this node in its i-th child."""
        return ()

    @cached_property
    def _fields(self) -> tuple:
        return tuple(getattr(self, f.name) for f in fields(self))

    @cached_property
    def _hash(self) -> int:
        return hash((type(self).__name__, self._fields))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if type(self) is not type(other):
            return NotImplemented if not isinstance(other, Term) else False
        return self._hash == other._hash and self._fields == other._fields

    @cached_property
    def fv(self) -> frozenset:
        acc = set()
        for i, kid in enumerate(self.children()):
            acc |= kid.fv - set(self.bound_in(i))
        return frozenset(acc)

    @cached_property
    def size(self) -> int:
        return 1 + sum(k.size for k in self.children())

    @cached_property
    def _closed_key(self) -> tuple:
        return _key_node(self, ())

    @cached_property
    def _closed_canon(self) -> "Term":
        return _canon_node(self, ())

    def __str__(self) -> str:
        from .syntax import pretty

        return pretty(self)


@dataclass(frozen=True, eq=False)
class Var(Term):
    name: str
    rank = 0
    construct = "variable"

    @cached_property
    def fv(self) -> frozenset:
        return frozenset((self.name,))


@dataclass(frozen=True, eq=False)
class Abs(Term):
    name: str
    ann: Optional[object]  # TypeExpr or None
    body: Term
    rank = 1
    construct = "abstraction"

    def children(self):
        return (self.body,)

    def rebuild(self, kids):
        return Abs(self.name, self.ann, kids[0])

    def bound_in(self, i):
        return (self.name,)


@dataclass(frozen=True, eq=False)
class App(Term):
    fun: Term
    arg: Term
    rank = 2
    construct = "application"

    def children(self):
        return (self.fun, self.arg)

    def rebuild(self, kids):
        return App(kids[0], kids[1])


@dataclass(frozen=True, eq=False)
class Scale(Term):
    coef: complex
    body: Term
    rank = 3
    construct = "scaling"

    def __post_init__(self):
        object.__setattr__(self, "coef", complex(self.coef))

    def children(self):
        return (self.body,)

    def rebuild(self, kids):
        return Scale(self.coef, kids[0])


@dataclass(frozen=True, eq=False)
class Sum(Term):
    terms: tuple
    rank = 4
    dialects = frozenset((LINEAL, LAMBDA_S))
    construct = "sum"

    def __post_init__(self):
        if len(self.terms) < 2:
            raise ValueError("Sum needs at least two summands")

    def children(self):
        return self.terms

    def rebuild(self, kids):
        return mk_sum(kids)


@dataclass(frozen=True, eq=False)
class Zero(Term):
    rank = 5
    dialects = frozenset((LINEAL, LAMBDA_S))
    construct = "null vector 'zero'"


@dataclass(frozen=True, eq=False)
class Ket0(Term):
    rank = 6
    dialects = frozenset((LAMBDA_S,))
    construct = "ket constant"


@dataclass(frozen=True, eq=False)
class Ket1(Term):
    rank = 7
    dialects = frozenset((LAMBDA_S,))
    construct = "ket constant"


@dataclass(frozen=True, eq=False)
class If(Term):
    cond: Term
    then: Term
    else_: Term
    rank = 8
    dialects = frozenset((LAMBDA_S,))
    construct = "conditional 'if'"

    def children(self):
        return (self.cond, self.then, self.else_)

    def rebuild(self, kids):
        return If(*kids)


@dataclass(frozen=True, eq=False)
class Pair(Term):
    left: Term
    right: Term
    rank = 9
    dialects = frozenset((LAMBDA_S,))
    construct = "pair"

    def children(self):
        return (self.left, self.right)

    def rebuild(self, kids):
        return Pair(*kids)


@dataclass(frozen=True, eq=False)
class Meas(Term):
    n: int
    rank = 10
    dialects = frozenset((LAMBDA_S,))
    construct = "measurement 'pi'"


@dataclass(frozen=True, eq=False)
class Star(Term):
    rank = 11
    dialects = frozenset((ODOT,))
    construct = "star '*'"


@dataclass(frozen=True, eq=False)
class Sup(Term):
    """Ordered sup-introduction ``t + r`` of the sup-calculus (not AC)."""

    left: Term
    right: Term
    rank = 12
    dialects = frozenset((ODOT,))
    construct = "sup introduction"

    def children(self):
        return (self.left, self.right)

    def rebuild(self, kids):
        return Sup(*kids)


@dataclass(frozen=True, eq=False)
class DeltaPar(Term):
    scrut: Term
    x: str
    left: Term
    y: str
    right: Term
    rank = 13
    dialects = frozenset((ODOT,))
    construct = "eliminator 'dpar'"

    def children(self):
        return (self.scrut, self.left, self.right)

    def rebuild(self, kids):
        return type(self)(kids[0], self.x, kids[1], self.y, kids[2])

    def bound_in(self, i):
        return ((), (self.x,), (self.y,))[i]


@dataclass(frozen=True, eq=False)
class DeltaMeas(DeltaPar):
    rank = 14
    construct = "eliminator 'dmeas'"


@dataclass(frozen=True, eq=False)
class Parallel(Term):
    terms: tuple
    rank = 15
    dialects = frozenset((ODOT,))
    construct = "parallel '||'"

    def __post_init__(self):
        if len(self.terms) < 2:
            raise ValueError("Parallel needs at least two components")

    def children(self):
        return self.terms

    def rebuild(self, kids):
        return mk_parallel(kids)


ZERO = Zero()
KET0 = Ket0()
KET1 = Ket1()
STAR = Star()


# ---------------------------------------------------------------------------
# total syntactic order


def _ann_key(ann) -> str:
    return "" if ann is None else str(ann)


def term_key(t: Term, env: tuple[str, ...] = ()) -> tuple:
    """Sort key of ``t`` under the binder stack ``env`` (innermost last)."""
    if not t.fv:
        # a closed subterm under binders is tagged above every rank so its
        # cached key cannot collide with an open term's levels
        return (99, t._closed_key) if env else t._closed_key
    return _key_node(t, env)


def _key_node(t: Term, env: tuple[str, ...]) -> tuple:
    if isinstance(t, Var):
        for depth, name in enumerate(reversed(env)):
            if name == t.name:
                # de Bruijn level, so |0> = \x.\y.x sorts before |1>
                return (0, "b", len(env) - 1 - depth)
        return (0, "f", t.name)
    if isinstance(t, Abs):
        return (1, _ann_key(t.ann), term_key(t.body, env + (t.name,)))
    if isinstance(t, Scale):
        return (3, term_key(t.body, env), t.coef.real, t.coef.imag)
    if isinstance(t, Meas):
        return (10, t.n)
    if isinstance(t, DeltaPar):
        return (
            t.rank,
            term_key(t.scrut, env),
            term_key(t.left, env + (t.x,)),
            term_key(t.right, env + (t.y,)),
        )
    return (t.rank,) + tuple(term_key(k, env) for k in t.children())


# ---------------------------------------------------------------------------
# smart constructors keep sums flat and sorted


def mk_sum(terms, env: tuple[str, ...] = ()) -> Term:
    flat: list[Term] = []
    for t in terms:
        if isinstance(t, Sum):
            flat.extend(t.terms)
        else:
            flat.append(t)
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    flat.sort(key=lambda k: term_key(k, env))
    return Sum(tuple(flat))


def mk_parallel(terms, env: tuple[str, ...] = ()) -> Term:
    flat: list[Term] = []
    for t in terms:
        if isinstance(t, Parallel):
            flat.extend(t.terms)
        else:
            flat.append(t)
    if len(flat) == 1:
        return flat[0]
    flat.sort(key=lambda k: term_key(k, env))
    return Parallel(tuple(flat))


def sum_of(*terms: Term) -> Term:
    return mk_sum(terms)


def canonicalize(t: Term, env: tuple[str, ...] = ()) -> Term:
    """Flatten and sort every sum. Idempotent; never applies rewrite rules."""
    if not t.fv:
        return t._closed_canon
    return _canon_node(t, env)


def _canon_node(t: Term, env: tuple[str, ...]) -> Term:
    kids = t.children()
    if not kids:
        return t
    new = tuple(canonicalize(k, env + t.bound_in(i)) for i, k in enumerate(kids))
    if isinstance(t, Sum):
        return mk_sum(new, env)
    if isinstance(t, Parallel):
        return mk_parallel(new, env)
    if all(a is b for a, b in zip(new, kids)):
        return t
    return t.rebuild(new)


# ---------------------------------------------------------------------------
# variables and substitution


def free_vars(t: Term) -> frozenset:
    return t.fv


def is_closed(t: Term) -> bool:
    return not t.fv


def fresh_name(base: str, avoid) -> str:
    name = base + "'"
    while name in avoid:
        name += "'"
    return name


def _subst(t: Term, x: str, r: Term) -> Term:
    if x not in t.fv:
        return t
    if isinstance(t, Var):
        return r
    if isinstance(t, Abs):
        name, body = t.name, t.body
        if name in r.fv:
            new = fresh_name(name, r.fv | body.fv | {x})
            body = _subst(body, name, Var(new))
            name = new
        return Abs(name, t.ann, _subst(body, x, r))
    if isinstance(t, DeltaPar):
        x1, s1 = t.x, t.left
        y1, s2 = t.y, t.right
        if x1 != x and x1 in r.fv:
            new = fresh_name(x1, r.fv | s1.fv | {x})
            s1, x1 = _subst(s1, x1, Var(new)), new
        if y1 != x and y1 in r.fv:
            new = fresh_name(y1, r.fv | s2.fv | {x})
            s2, y1 = _subst(s2, y1, Var(new)), new
        return type(t)(
            _subst(t.scrut, x, r),
            x1,
            s1 if x1 == x else _subst(s1, x, r),
            y1,
            s2 if y1 == x else _subst(s2, x, r),
        )
    kids = tuple(_subst(k, x, r) for k in t.children())
    if isinstance(t, Sum):
        return Sum(kids)
    if isinstance(t, Parallel):
        return Parallel(kids)
    return t.rebuild(kids)


def substitute(t: Term, x: str, r: Term) -> Term:
    """Capture-avoiding ``(r/x)t``, re-canonicalized."""
    if x not in t.fv:
        return t
    return canonicalize(_subst(t, x, r))


def occurrences(t: Term, x: str) -> int:
    """Occurrences of free ``x``; alternative branches count as their maximum."""
    if x not in t.fv:
        return 0
    if isinstance(t, Var):
        return 1
    if isinstance(t, If):
        return occurrences(t.cond, x) + max(occurrences(t.then, x), occurrences(t.else_, x))
    if isinstance(t, DeltaPar):
        left = 0 if t.x == x else occurrences(t.left, x)
        right = 0 if t.y == x else occurrences(t.right, x)
        return occurrences(t.scrut, x) + max(left, right)
    if isinstance(t, Abs):
        return 0 if t.name == x else occurrences(t.body, x)
    return sum(occurrences(k, x) for k in t.children())


# ---------------------------------------------------------------------------
# equality up to alpha, AC and scalar tolerance


def alpha_ac_eq(t: Term, r: Term, eps: float = 1e-9) -> bool:
    return _aeq(canonicalize(t), canonicalize(r), (), (), eps)


def _lookup(env, name):
    for depth, n in enumerate(reversed(env)):
        if n == name:
            return depth
    return None


def _aeq(t: Term, r: Term, et, er, eps) -> bool:
    if type(t) is not type(r):
        return False
    if t is r and not et and not er:
        return True
    if isinstance(t, Var):
        dt, dr = _lookup(et, t.name), _lookup(er, r.name)
        if dt is None and dr is None:
            return t.name == r.name
        return dt == dr
    if isinstance(t, Abs):
        return _ann_key(t.ann) == _ann_key(r.ann) and _aeq(
            t.body, r.body, et + (t.name,), er + (r.name,), eps
        )
    if isinstance(t, Scale):
        return approx_eq(t.coef, r.coef, eps) and _aeq(t.body, r.body, et, er, eps)
    if isinstance(t, Meas):
        return t.n == r.n
    if isinstance(t, DeltaPar):
        return (
            _aeq(t.scrut, r.scrut, et, er, eps)
            and _aeq(t.left, r.left, et + (t.x,), er + (r.x,), eps)
            and _aeq(t.right, r.right, et + (t.y,), er + (r.y,), eps)
        )
    if isinstance(t, (Sum, Parallel)):
        if len(t.terms) != len(r.terms):
            return False
        return _match_multiset(list(t.terms), list(r.terms), et, er, eps)
    kt, kr = t.children(), r.children()
    return len(kt) == len(kr) and all(_aeq(a, b, et, er, eps) for a, b in zip(kt, kr))


def _match_multiset(xs, ys, et, er, eps) -> bool:
    if not xs:
        return True
    head, rest = xs[0], xs[1:]
    for j, y in enumerate(ys):
        if _aeq(head, y, et, er, eps) and _match_multiset(rest, ys[:j] + ys[j + 1 :], et, er, eps):
            return True
    return False


# ---------------------------------------------------------------------------
# classification


def is_basis_term(t: Term, dialect: str = LINEAL) -> bool:
    if isinstance(t, (Var, Abs)):
        return True
    if dialect == LAMBDA_S:
        if isinstance(t, (Ket0, Ket1, Meas)):
            return True
        if isinstance(t, Pair):
            return is_basis_term(t.left, dialect) and is_basis_term(t.right, dialect)
        return False
    if dialect == ODOT:
        return isinstance(t, Star)
    return False


def split_scale(t: Term) -> tuple[complex, Term, bool]:
    """(coefficient, base, explicitly_scaled) of a summand."""
    if isinstance(t, Scale):
        return t.coef, t.body, True
    return 1 + 0j, t, False


def subterm(t: Term, pos) -> Term:
    for i in pos:
        t = t.children()[i]
    return t


def replace_at(t: Term, pos, new: Term) -> Term:
    if not pos:
        return new
    i = pos[0]
    kids = list(t.children())
    kids[i] = replace_at(kids[i], pos[1:], new)
    return t.rebuild(tuple(kids))


def walk(t: Term):
    yield t
    for k in t.children():
        yield from walk(k)
