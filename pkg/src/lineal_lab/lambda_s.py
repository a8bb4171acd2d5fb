"""Lambda-S: typing with the superposition modality, measurement and the
norm-one realizability check."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .encodings import read_const_ket
from .errors import DegenerateMeasurement, FuelExhausted, LinearityError, TypeCheckError
from .execute import OutcomeDistribution, merge_outcomes, outcome_tree, run as _run, _leaves
from .linear import LinearForm
from .rewrite import EngineConfig, FUEL_EXHAUSTED, Step, measurement_outcomes, normalize, step
from .scalars import EPS
from .terms import (
    LAMBDA_S,
    Abs,
    App,
    If,
    Ket0,
    Ket1,
    Meas,
    Pair,
    Scale,
    Sum,
    Term,
    Var,
    Zero,
    canonicalize,
    occurrences,
)
from .typesys import (
    B,
    ZERO_T,
    Arrow,
    Prod,
    S,
    TypeExpr,
    bits_arity,
    bits_type,
    is_qubit_type,
    join,
    normalize_type,
    subtype,
    sup,
)

CONFIG = EngineConfig(dialect=LAMBDA_S)


@dataclass
class TypingContext:
    types: dict[str, TypeExpr] = field(default_factory=dict)

    def extend(self, name: str, ty: TypeExpr) -> "TypingContext":
        return TypingContext({**self.types, name: ty})

    def lookup(self, name: str) -> TypeExpr:
        try:
            return self.types[name]
        except KeyError:
            raise TypeCheckError(f"unbound variable {name!r}") from None


def meas_type(n: int) -> Arrow:
    return Arrow(S(bits_type(n)), bits_type(n))


def typecheck(t: Term, ctx: Optional[TypingContext] = None) -> TypeExpr:
    """Least type of ``t``; raises TypeCheckError (or LinearityError)."""
    return _type(t, ctx or TypingContext())


def _type(t: Term, ctx: TypingContext) -> TypeExpr:
    match t:
        case Var(name):
            return ctx.lookup(name)
        case Ket0() | Ket1():
            return B
        case Zero():
            return ZERO_T
        case Sum(terms):
            ty = _type(terms[0], ctx)
            for u in terms[1:]:
                ty = join(ty, _type(u, ctx))
            return sup(ty)
        case Scale(_, body):
            return sup(_type(body, ctx))
        case Abs(name, ann, body):
            if ann is None:
                raise TypeCheckError(f"binder {name!r} needs a type annotation")
            ann = normalize_type(ann)
            if not is_qubit_type(ann):
                raise TypeCheckError(f"binder {name!r} must have a qubit type, got {ann}")
            if isinstance(ann, S) and occurrences(body, name) > 1:
                raise LinearityError(f"S-typed variable {name!r} is used more than once")
            return Arrow(ann, _type(body, ctx.extend(name, ann)))
        case Meas(n):
            return meas_type(n)
        case App(fun, arg):
            return _apply(_type(fun, ctx), _type(arg, ctx), t)
        case If(cond, then, else_):
            tc = _type(cond, ctx)
            branches = join(_type(then, ctx), _type(else_, ctx))
            if subtype(tc, B):
                return branches
            if subtype(tc, S(B)):
                return sup(branches)
            raise TypeCheckError(f"condition has type {tc}, expected B or S B")
        case Pair(left, right):
            return Prod(_type(left, ctx), _type(right, ctx))
    raise TypeCheckError(f"{type(t).__name__} has no Lambda-S type")


def _apply(tf: TypeExpr, ta: TypeExpr, t: Term) -> TypeExpr:
    superposed = isinstance(tf, S)
    if superposed:
        tf = tf.body
    if not isinstance(tf, Arrow):
        raise TypeCheckError(f"applying a non-function of type {tf}")
    dom, cod = tf.dom, tf.cod
    if subtype(ta, dom):
        return sup(cod) if superposed else cod
    # a basis-typed function lifts pointwise over a superposed argument
    if not isinstance(dom, S) and subtype(ta, sup(dom)):
        return sup(cod)
    raise TypeCheckError(f"argument of type {ta} does not fit domain {dom}")


def typed_step(t: Term, rng=None) -> Optional[Step]:
    """One Lambda-S reduction step; measurement only fires with ``rng``."""
    return step(t, CONFIG, rng)


def measure_distribution(t: Term, fuel: int = CONFIG.fuel) -> OutcomeDistribution:
    """Distribution of pi_n(v) over the n-qubit basis kets."""
    t = canonicalize(t)
    if not (isinstance(t, App) and isinstance(t.fun, Meas)):
        raise TypeCheckError("measure_distribution expects pi_n applied to a term")
    trace = normalize(t.arg, EngineConfig(dialect=LAMBDA_S, fuel=fuel))
    if trace.outcome == FUEL_EXHAUSTED:
        raise FuelExhausted(fuel, trace.final)
    outcomes = measurement_outcomes(t.fun.n, trace.final)
    return OutcomeDistribution(tuple((k, p) for p, k in outcomes), None, LAMBDA_S)


def run(t: Term, seed: int, fuel: int = CONFIG.fuel) -> Term:
    return _run(t, seed, EngineConfig(dialect=LAMBDA_S, fuel=fuel))


def _ket_arity(base: Term) -> Optional[int]:
    bits = read_const_ket(base)
    return None if bits is None else len(bits)


def value_realizes(v: Term, ty: TypeExpr) -> bool:
    """v in [[B^n]] is a basis ket; v in #S(B^n) is a norm-one combination."""
    ty = normalize_type(ty)
    n = bits_arity(ty.body if isinstance(ty, S) else ty)
    if n is None:
        raise TypeCheckError(f"realizability is only checked at B^n and S B^n, not {ty}")
    if not isinstance(ty, S):
        return _ket_arity(v) == n
    form = LinearForm.from_term(v)
    if any(_ket_arity(base) != n for _, base in form):
        return False
    return abs(form.norm2() - 1) <= EPS


def realizes(t: Term, ty: TypeExpr, fuel: int = CONFIG.fuel) -> Optional[bool]:
    """Three-valued: True/False on normal forms, None if the fuel runs out.

    Every measurement branch has to land in the interpretation of ``ty``.
    """
    try:
        tree = outcome_tree(t, EngineConfig(dialect=LAMBDA_S, fuel=fuel))
    except FuelExhausted:
        return None
    except DegenerateMeasurement:
        return False
    return all(value_realizes(leaf, ty) for leaf, _ in _leaves(tree))


def exact_distribution(t: Term, fuel: int = CONFIG.fuel) -> OutcomeDistribution:
    tree = outcome_tree(t, EngineConfig(dialect=LAMBDA_S, fuel=fuel))
    return OutcomeDistribution(tuple(merge_outcomes(_leaves(tree))), None, LAMBDA_S)
