"""Small-step rewrite engine.

One engine serves the three dialects. Lineal gets the beta, elementary,
factorization and application groups; Lambda-S adds call-by-name beta for
S-typed binders, conditionals, bilinear pairs and measurement; the
sup-calculus adds its two eliminators and the parallel merge.

Reduction is weak: nothing is reduced under a binder, inside the branches of
a conditional, or inside the branches of an eliminator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterator, Optional

import numpy as np

from .encodings import church_ket, const_ket, read_const_ket
from .errors import DegenerateMeasurement, LinealError, LinearityError
from .linear import LinearForm
from .scalars import EPS, is_one, is_zero, modulus2
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
    alpha_ac_eq,
    canonicalize,
    is_basis_term,
    is_closed,
    mk_parallel,
    mk_sum,
    occurrences,
    replace_at,
    split_scale,
    substitute,
    term_key,
)
from .typesys import S


@dataclass(frozen=True)
class RuleId:
    group: str
    index: int

    def __str__(self) -> str:
        return f"{self.group}/{self.index}"


def _rules(group: str, count: int) -> dict[int, RuleId]:
    return {i: RuleId(group, i) for i in range(1, count + 1)}


BETA = RuleId("beta", 1)
BETA_S = RuleId("beta", 2)
ELEM = _rules("elementary", 6)
FACT = _rules("factorization", 3)
APP = _rules("application", 6)
IF = _rules("if", 5)
PAIR = _rules("pair", 6)
MEASURE = RuleId("measure", 1)
ODOT_PAR = RuleId("odot", 1)
ODOT_MEAS = RuleId("odot", 2)
ODOT_MERGE = RuleId("odot", 3)


# ---------------------------------------------------------------------------
# strategies


class Strategy:
    def chooser(self) -> "Chooser":
        raise NotImplementedError


class Chooser:
    lazy = False

    def pick(self, redexes: list["Redex"]) -> int:
        raise NotImplementedError


class _First(Chooser):
    lazy = True

    def pick(self, redexes):
        return 0


@dataclass(frozen=True)
class LeftmostOutermost(Strategy):
    def chooser(self):
        return _First()


class _Innermost(Chooser):
    def pick(self, redexes):
        for i, r in enumerate(redexes):
            n = len(r.pos)
            if not any(len(o.pos) > n and o.pos[:n] == r.pos for o in redexes):
                return i
        return 0


@dataclass(frozen=True)
class LeftmostInnermost(Strategy):
    def chooser(self):
        return _Innermost()


class _Random(Chooser):
    def __init__(self, seed):
        self.rng = np.random.default_rng(seed)

    def pick(self, redexes):
        return int(self.rng.integers(len(redexes)))


@dataclass(frozen=True)
class RandomSeeded(Strategy):
    seed: int

    def chooser(self):
        return _Random(self.seed)


class _Priority(Chooser):
    def __init__(self, groups):
        self.rank = {g: i for i, g in enumerate(groups)}

    def pick(self, redexes):
        worst = len(self.rank)
        return min(range(len(redexes)), key=lambda i: (self.rank.get(redexes[i].rule.group, worst), i))


@dataclass(frozen=True)
class Priority(Strategy):
    """Leftmost-outermost among the redexes of the best-ranked rule group."""

    groups: tuple[str, ...]

    def chooser(self):
        return _Priority(self.groups)


class _Scripted(Chooser):
    def __init__(self, choices):
        self.choices = list(choices)
        self.k = 0

    def pick(self, redexes):
        i = self.choices[self.k] if self.k < len(self.choices) else 0
        self.k += 1
        if i >= len(redexes):
            raise LinealError(f"scripted choice {i} out of range ({len(redexes)} redexes)")
        return i


@dataclass(frozen=True)
class Scripted(Strategy):
    """Pick the given redex indices (leftmost-outermost order) first, then
    continue leftmost-outermost."""

    choices: tuple[int, ...]

    def chooser(self):
        return _Scripted(self.choices)


@dataclass(frozen=True)
class EngineConfig:
    dialect: str = LINEAL
    restriction: bool = True
    strategy: Strategy = LeftmostOutermost()
    fuel: int = 10_000

    def __post_init__(self):
        if self.fuel < 1:
            raise ValueError("fuel must be positive")


# ---------------------------------------------------------------------------
# redexes


@dataclass
class Redex:
    pos: tuple[int, ...]
    rule: RuleId
    contract: Callable[[], list[tuple[float, Term]]]
    probabilistic: bool = False


@dataclass(frozen=True)
class Step:
    rule: RuleId
    pos: tuple[int, ...]
    term: Term
    probability: float = 1.0


def _det(fn: Callable[[], Term]) -> Callable[[], list[tuple[float, Term]]]:
    return lambda: [(1.0, fn())]


def _reducible_children(t: Term) -> range | tuple:
    if isinstance(t, (App, Pair, Sup)):
        return (0, 1)
    if isinstance(t, (Scale, If, DeltaPar)):
        return (0,)
    if isinstance(t, (Sum, Parallel)):
        return range(len(t.terms))
    return ()


def iter_redexes(t: Term, cfg: EngineConfig, pos: tuple[int, ...] = ()) -> Iterator[Redex]:
    """All redexes of ``t`` in leftmost-outermost (preorder) order."""
    for rule, contract, prob in _local_rules(t, cfg.dialect, cfg.restriction):
        yield Redex(pos, rule, contract, prob)
    kids = t.children()
    for i in _reducible_children(t):
        yield from iter_redexes(kids[i], cfg, pos + (i,))


@lru_cache(maxsize=1 << 16)
def _is_normal(t: Term, dialect: str, restriction: bool) -> bool:
    cfg = EngineConfig(dialect=dialect, restriction=restriction)
    return next(iter_redexes(t, cfg), None) is None


def is_normal(t: Term, cfg: Optional[EngineConfig] = None) -> bool:
    cfg = cfg or EngineConfig()
    return _is_normal(t, cfg.dialect, cfg.restriction)


def _local_rules(t: Term, d: str, restriction: bool):
    if isinstance(t, App):
        yield from _app_rules(t, d, restriction)
    elif isinstance(t, Scale):
        yield from _scale_rules(t, d)
    elif isinstance(t, Sum):
        yield from _sum_rules(t, d, restriction)
    elif isinstance(t, If) and d == LAMBDA_S:
        yield from _if_rules(t)
    elif isinstance(t, Pair) and d == LAMBDA_S:
        yield from _pair_rules(t)
    elif isinstance(t, DeltaMeas) and d == ODOT:
        if isinstance(t.scrut, Sup) and _is_normal(t.scrut, d, restriction):
            yield ODOT_MEAS, lambda: odot_measure_outcomes(t), True
    elif isinstance(t, DeltaPar) and d == ODOT:
        if isinstance(t.scrut, Sup) and _is_normal(t.scrut, d, restriction):
            yield ODOT_PAR, _det(lambda: odot_parallel_contract(t)), False
    elif isinstance(t, Parallel) and d == ODOT:
        if all(_is_normal(c, d, restriction) for c in t.terms):
            merged = vector_merge(t.terms)
            if merged != t:
                yield ODOT_MERGE, _det(lambda: merged), False


def _distributes_over_arg(f: Term, d: str) -> bool:
    if d == LINEAL:
        return True
    if d == LAMBDA_S:
        return isinstance(f, Abs) and not isinstance(f.ann, S)
    return False


def _app_rules(t: App, d: str, restriction: bool):
    f, a = t.fun, t.arg
    if d != ODOT:
        if isinstance(f, Sum):
            yield APP[1], _det(lambda: mk_sum([App(c, a) for c in f.terms])), False
        elif isinstance(f, Scale):
            yield APP[2], _det(lambda: Scale(f.coef, App(f.body, a))), False
        elif isinstance(f, Zero):
            yield APP[3], _det(lambda: ZERO), False
        if _distributes_over_arg(f, d):
            if isinstance(a, Sum):
                yield APP[4], _det(lambda: mk_sum([App(f, c) for c in a.terms])), False
            elif isinstance(a, Scale):
                yield APP[5], _det(lambda: Scale(a.coef, App(f, a.body))), False
            elif isinstance(a, Zero):
                yield APP[6], _det(lambda: ZERO), False
    if isinstance(f, Abs):
        if d == LAMBDA_S and isinstance(f.ann, S):
            yield BETA_S, _det(lambda: _beta_s(f, a)), False
        elif d == ODOT or is_basis_term(a, d):
            yield BETA, _det(lambda: substitute(f.body, f.name, a)), False
    elif isinstance(f, Meas) and d == LAMBDA_S:
        if _is_normal(a, d, restriction) and _readable_kets(a, f.n):
            yield MEASURE, lambda: measurement_outcomes(f.n, a), True


def _beta_s(f: Abs, a: Term) -> Term:
    if occurrences(f.body, f.name) > 1:
        raise LinearityError(f"S-typed variable {f.name!r} occurs more than once")
    return substitute(f.body, f.name, a)


def _scale_rules(t: Scale, d: str):
    alpha, b = t.coef, t.body
    if d != ODOT and is_zero(alpha):
        yield ELEM[2], _det(lambda: ZERO), False
    if is_one(alpha):
        yield ELEM[3], _det(lambda: b), False
    if d != ODOT and isinstance(b, Zero):
        yield ELEM[4], _det(lambda: ZERO), False
    if isinstance(b, Scale):
        yield ELEM[5], _det(lambda: Scale(alpha * b.coef, b.body)), False
    if isinstance(b, Sum):
        yield ELEM[6], _det(lambda: mk_sum([Scale(alpha, c) for c in b.terms])), False
    elif isinstance(b, Sup):
        yield ELEM[6], _det(lambda: Sup(Scale(alpha, b.left), Scale(alpha, b.right))), False
    elif isinstance(b, Parallel):
        yield ELEM[6], _det(lambda: mk_parallel([Scale(alpha, c) for c in b.terms])), False


def _same_base(a: Term, b: Term) -> bool:
    return term_key(a) == term_key(b) or alpha_ac_eq(a, b)


def _sum_rules(t: Sum, d: str, restriction: bool):
    ts = t.terms
    for i, c in enumerate(ts):
        if isinstance(c, Zero):
            rest = ts[:i] + ts[i + 1 :]
            yield ELEM[1], _det(lambda rest=rest: mk_sum(rest)), False
            break
    split = [split_scale(c) for c in ts]
    for i in range(len(ts)):
        ci, bi, si = split[i]
        if restriction and not (is_closed(bi) and _is_normal(bi, d, restriction)):
            continue
        for j in range(i + 1, len(ts)):
            cj, bj, sj = split[j]
            if not _same_base(bi, bj):
                continue
            rule = FACT[1] if si and sj else FACT[2] if si or sj else FACT[3]
            rest = ts[:i] + ts[i + 1 : j] + ts[j + 1 :]

            def merge(rest=rest, coef=ci + cj, base=bi):
                return mk_sum(list(rest) + [Scale(coef, base)])

            yield rule, _det(merge), False


def _if_rules(t: If):
    c = t.cond
    if isinstance(c, Ket0):
        yield IF[1], _det(lambda: t.then), False
    elif isinstance(c, Ket1):
        yield IF[2], _det(lambda: t.else_), False
    elif isinstance(c, Sum):
        yield IF[3], _det(lambda: mk_sum([If(k, t.then, t.else_) for k in c.terms])), False
    elif isinstance(c, Scale):
        yield IF[4], _det(lambda: Scale(c.coef, If(c.body, t.then, t.else_))), False
    elif isinstance(c, Zero):
        yield IF[5], _det(lambda: ZERO), False


def _pair_rules(t: Pair):
    l, r = t.left, t.right
    if isinstance(l, Sum):
        yield PAIR[1], _det(lambda: mk_sum([Pair(k, r) for k in l.terms])), False
    elif isinstance(l, Scale):
        yield PAIR[2], _det(lambda: Scale(l.coef, Pair(l.body, r))), False
    elif isinstance(l, Zero):
        yield PAIR[3], _det(lambda: ZERO), False
    if isinstance(r, Sum):
        yield PAIR[4], _det(lambda: mk_sum([Pair(l, k) for k in r.terms])), False
    elif isinstance(r, Scale):
        yield PAIR[5], _det(lambda: Scale(r.coef, Pair(l, r.body))), False
    elif isinstance(r, Zero):
        yield PAIR[6], _det(lambda: ZERO), False


# ---------------------------------------------------------------------------
# measurement and the sup-calculus eliminators


def _readable_kets(v: Term, n: int) -> bool:
    for _, base in LinearForm.from_term(v):
        bits = read_const_ket(base)
        if bits is None or len(bits) != n:
            return False
    return True


def measurement_outcomes(n: int, v: Term) -> list[tuple[float, Term]]:
    """Outcomes of measuring ``v`` in the computational basis, renormalized
    by the total squared norm."""
    form = LinearForm.from_term(v)
    total = form.norm2()
    if total <= EPS:
        raise DegenerateMeasurement("measurement of a vector with zero norm")
    out = []
    for coef, base in form:
        bits = read_const_ket(base)
        if bits is None or len(bits) != n:
            raise LinealError(f"pi_{n} applied to a non-ket component {base}")
        out.append((modulus2(coef) / total, const_ket(bits)))
    return out


def _weight(t: Term) -> tuple[complex, Term]:
    if isinstance(t, Scale):
        return t.coef, t.body
    return 1 + 0j, t


def odot_parallel_contract(t: DeltaPar) -> Term:
    alpha, left = _weight(t.scrut.left)
    beta, right = _weight(t.scrut.right)
    return mk_parallel(
        [Scale(alpha, substitute(t.left, t.x, left)), Scale(beta, substitute(t.right, t.y, right))]
    )


def odot_measure_outcomes(t: DeltaPar) -> list[tuple[float, Term]]:
    alpha, left = _weight(t.scrut.left)
    beta, right = _weight(t.scrut.right)
    total = modulus2(alpha) + modulus2(beta)
    if total <= EPS:
        raise DegenerateMeasurement("dmeas on a scrutinee with zero weights")
    out = []
    p_left, p_right = modulus2(alpha) / total, modulus2(beta) / total
    if p_left > 0:
        out.append((p_left, substitute(t.left, t.x, left)))
    if p_right > 0:
        out.append((p_right, substitute(t.right, t.y, right)))
    return out


def _weighted(terms, coef=1 + 0j):
    for t in terms:
        if isinstance(t, Scale):
            yield from _weighted([t.body], coef * t.coef)
        elif isinstance(t, Parallel):
            yield from _weighted(t.terms, coef)
        else:
            yield coef, t


def vector_merge(terms) -> Term:
    """Vectorial sum of parallel components: scalars on Top add up, sups
    merge componentwise, anything else merges as a linear combination."""
    pairs = list(_weighted(terms))
    if all(isinstance(b, Star) for _, b in pairs):
        return Scale(sum(c for c, _ in pairs), STAR)
    if all(isinstance(b, Sup) for _, b in pairs):
        return Sup(
            vector_merge([Scale(c, b.left) for c, b in pairs]),
            vector_merge([Scale(c, b.right) for c, b in pairs]),
        )
    form = LinearForm.of(pairs)
    if form.is_zero():
        return Scale(0j, pairs[0][1])
    kept = [b if c == 1 else Scale(c, b) for c, b in form]
    return mk_parallel(kept)


# ---------------------------------------------------------------------------
# stepping


def _sample(rng, outcomes: list[tuple[float, Term]]) -> tuple[float, Term]:
    u = rng.random()
    acc = 0.0
    for p, t in outcomes:
        acc += p
        if u < acc:
            return p, t
    return outcomes[-1]


def _eligible(t: Term, cfg: EngineConfig, rng, chooser: Chooser) -> Optional[Redex]:
    gen = (r for r in iter_redexes(t, cfg) if rng is not None or not r.probabilistic)
    if chooser.lazy:
        return next(gen, None)
    redexes = list(gen)
    if not redexes:
        return None
    return redexes[chooser.pick(redexes)]


def step(
    t: Term,
    cfg: Optional[EngineConfig] = None,
    rng=None,
    chooser: Optional[Chooser] = None,
) -> Optional[Step]:
    """One rewrite step, or None if ``t`` is normal.

    Probabilistic redexes (measurements) only fire when ``rng`` is given.
    """
    cfg = cfg or EngineConfig()
    chooser = chooser or cfg.strategy.chooser()
    redex = _eligible(t, cfg, rng, chooser)
    if redex is None:
        return None
    outcomes = redex.contract()
    if redex.probabilistic:
        p, new = _sample(rng, outcomes)
    else:
        p, new = outcomes[0]
    return Step(redex.rule, redex.pos, replace_at(t, redex.pos, new), p)


NORMAL = "normal"
FUEL_EXHAUSTED = "fuel-exhausted"


@dataclass
class ReductionTrace:
    start: Term
    steps: list[Step] = field(default_factory=list)
    outcome: str = NORMAL

    @property
    def fuel_used(self) -> int:
        return len(self.steps)

    @property
    def final(self) -> Term:
        return self.steps[-1].term if self.steps else self.start

    @property
    def terms(self) -> list[Term]:
        return [self.start] + [s.term for s in self.steps]

    def to_jsonl(self, dialect: str = LINEAL) -> str:
        from .syntax import pretty

        return "\n".join(
            json.dumps({"rule": str(s.rule), "pos": list(s.pos), "term": pretty(s.term, dialect)})
            for s in self.steps
        )


def normalize(t: Term, cfg: Optional[EngineConfig] = None, rng=None) -> ReductionTrace:
    """Iterate ``step`` until no redex remains or the fuel runs out."""
    cfg = cfg or EngineConfig()
    chooser = cfg.strategy.chooser()
    current = canonicalize(t)
    trace = ReductionTrace(current)
    while True:
        s = step(current, cfg, rng, chooser)
        if s is None:
            return trace
        if len(trace.steps) >= cfg.fuel:
            trace.outcome = FUEL_EXHAUSTED
            return trace
        trace.steps.append(s)
        current = s.term


def diverges_witness(b: Optional[Term] = None) -> Term:
    """Y_b = Delta_b Delta_b with Delta_b = \\x.(x x + b); Y_b -> Y_b + b."""
    b = church_ket("1") if b is None else b
    if not is_closed(b):
        raise ValueError("b must be closed")
    x = Var("x")
    delta = Abs("x", None, mk_sum([App(x, x), b]))
    return canonicalize(App(delta, delta))
