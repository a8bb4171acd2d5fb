"""The sup-calculus with scalars: typing, the parallel eliminator (gates)
and the probabilistic eliminator (measurement)."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .errors import FuelExhausted, TypeCheckError
from .execute import run as _run
from .rewrite import (
    FUEL_EXHAUSTED,
    EngineConfig,
    normalize,
    odot_measure_outcomes,
    odot_parallel_contract,
    vector_merge,
)
from .terms import (
    ODOT,
    Abs,
    App,
    DeltaMeas,
    DeltaPar,
    Parallel,
    Scale,
    Star,
    Sup,
    Term,
    Var,
    canonicalize,
)
from .typesys import TOP, Arrow, Odot, TypeExpr, normalize_type

CONFIG = EngineConfig(dialect=ODOT)


def odot_typecheck(t: Term, ctx: Optional[dict[str, TypeExpr]] = None) -> TypeExpr:
    return _type(t, dict(ctx or {}))


def _type(t: Term, ctx: dict[str, TypeExpr]) -> TypeExpr:
    match t:
        case Star():
            return TOP
        case Var(name):
            if name not in ctx:
                raise TypeCheckError(f"unbound variable {name!r}")
            return ctx[name]
        case Scale(_, body):
            return _type(body, ctx)
        case Sup(left, right):
            return Odot(_type(left, ctx), _type(right, ctx))
        case DeltaPar(scrut, x, left, y, right):
            ts = _type(scrut, ctx)
            if not isinstance(ts, Odot):
                kind = "dmeas" if isinstance(t, DeltaMeas) else "dpar"
                raise TypeCheckError(f"{kind} scrutinee has type {ts}, expected A (.) B")
            tl = _type(left, {**ctx, x: ts.left})
            tr = _type(right, {**ctx, y: ts.right})
            if tl != tr:
                raise TypeCheckError(f"eliminator branches disagree: {tl} vs {tr}")
            return tl
        case Parallel(terms):
            types = {_type(u, ctx) for u in terms}
            if len(types) != 1:
                raise TypeCheckError("parallel components have different types")
            return types.pop()
        case Abs(name, ann, body):
            if ann is None:
                raise TypeCheckError(f"binder {name!r} needs a type annotation")
            ann = normalize_type(ann)
            return Arrow(ann, _type(body, {**ctx, name: ann}))
        case App(fun, arg):
            tf, ta = _type(fun, ctx), _type(arg, ctx)
            if not isinstance(tf, Arrow) or tf.dom != ta:
                raise TypeCheckError(f"cannot apply {tf} to {ta}")
            return tf.cod
    raise TypeCheckError(f"{type(t).__name__} is not a sup-calculus term")


def _normal_scrutinee(t: DeltaPar, fuel: int) -> DeltaPar:
    trace = normalize(t.scrut, EngineConfig(dialect=ODOT, fuel=fuel))
    if trace.outcome == FUEL_EXHAUSTED:
        raise FuelExhausted(fuel, trace.final)
    if not isinstance(trace.final, Sup):
        raise TypeCheckError("eliminator scrutinee does not reduce to an introduced sup")
    return type(t)(trace.final, t.x, t.left, t.y, t.right)


def reduce_parallel(t: Term, fuel: int = CONFIG.fuel) -> Term:
    """Contract a dpar node and merge the parallel result as a vector sum."""
    t = canonicalize(t)
    if type(t) is not DeltaPar:
        raise TypeCheckError("reduce_parallel expects a dpar term")
    out = odot_parallel_contract(_normal_scrutinee(t, fuel))
    return vector_merge(out.terms) if isinstance(out, Parallel) else out


def reduce_measure(t: Term, seed: int, fuel: int = CONFIG.fuel) -> Term:
    """Pick a dmeas branch with probability |a|^2/(|a|^2+|b|^2)."""
    t = canonicalize(t)
    if not isinstance(t, DeltaMeas):
        raise TypeCheckError("reduce_measure expects a dmeas term")
    outcomes = odot_measure_outcomes(_normal_scrutinee(t, fuel))
    u = np.random.default_rng(seed).random()
    acc = 0.0
    for p, branch in outcomes:
        acc += p
        if u < acc:
            return branch
    return outcomes[-1][1]


def run(t: Term, seed: int, fuel: int = CONFIG.fuel) -> Term:
    return _run(t, seed, EngineConfig(dialect=ODOT, fuel=fuel))
