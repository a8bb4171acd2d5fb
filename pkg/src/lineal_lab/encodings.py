"""Church/Lineal encodings: basis kets, thunks, gates and pairs."""

from __future__ import annotations

import numpy as np

from .errors import OracleError
from .scalars import EPS
from .terms import (
    KET0,
    KET1,
    STAR,
    Abs,
    App,
    DeltaPar,
    If,
    Pair,
    Scale,
    Sup,
    Term,
    Var,
    fresh_name,
    mk_sum,
)
from .typesys import B

THUNK_BINDER = "_t"


def _check_bits(bits: str) -> None:
    if not bits or any(c not in "01" for c in bits):
        raise ValueError(f"not a bitstring: {bits!r}")


def selector_names(arity: int) -> list[str]:
    if arity == 2:
        return ["x", "y"]
    return [f"x{i}" for i in range(1, arity + 1)]


def church_ket(bits: str) -> Term:
    """|b> as the 2^n-ary selector; for one qubit, \\x.\\y.x and \\x.\\y.y."""
    _check_bits(bits)
    names = selector_names(2 ** len(bits))
    t: Term = Var(names[int(bits, 2)])
    for name in reversed(names):
        t = Abs(name, None, t)
    return t


def read_church_ket(t: Term):
    """Inverse of church_ket: the bitstring of a selector, or None."""
    names = []
    while isinstance(t, Abs):
        names.append(t.name)
        t = t.body
    arity = len(names)
    if arity < 2 or arity & (arity - 1) or not isinstance(t, Var):
        return None
    if len(set(names)) != arity or t.name not in names:
        return None
    # the innermost binder of a repeated name wins, so names are distinct here
    n = arity.bit_length() - 1
    return format(names.index(t.name), f"0{n}b")


def const_ket(bits: str) -> Term:
    """|b> in Lambda-S constants: right-nested pairs of |0>, |1>."""
    _check_bits(bits)
    kets = [KET0 if c == "0" else KET1 for c in bits]
    t = kets[-1]
    for k in reversed(kets[:-1]):
        t = Pair(k, t)
    return t


def read_const_ket(t: Term):
    if t == KET0:
        return "0"
    if t == KET1:
        return "1"
    if isinstance(t, Pair):
        left, right = read_const_ket(t.left), read_const_ket(t.right)
        if left is not None and right is not None:
            return left + right
    return None


def odot_ket(bits: str) -> Term:
    """|b> in the sup-calculus: a tree of sups with 1.* at position b."""
    _check_bits(bits)
    amps = np.zeros(2 ** len(bits), dtype=complex)
    amps[int(bits, 2)] = 1
    return odot_vector(amps)


def odot_vector(amps) -> Term:
    amps = list(amps)
    if len(amps) == 1:
        return Scale(amps[0], STAR)
    half = len(amps) // 2
    return Sup(odot_vector(amps[:half]), odot_vector(amps[half:]))


def identity() -> Term:
    return Abs("x", None, Var("x"))


def thunk(t: Term) -> Term:
    """[t] = \\_t.t with a binder that cannot capture."""
    name = THUNK_BINDER
    if name in t.fv:
        name = fresh_name(name, t.fv)
    return Abs(name, None, t)


def release(t: Term) -> Term:
    """{t} = t (\\x.x)."""
    return App(t, identity())


def _amplitude_sum(column, ket) -> Term:
    n = int(np.log2(len(column)))
    terms = [
        Scale(complex(a), ket(format(j, f"0{n}b")))
        for j, a in enumerate(column)
        if abs(a) > EPS
    ]
    return mk_sum(terms)


def _as_matrix(u, strict: bool) -> np.ndarray:
    m = np.asarray(getattr(u, "matrix", u), dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise OracleError("gate must be a square matrix")
    dim = m.shape[0]
    if dim < 2 or dim & (dim - 1):
        raise OracleError("gate dimension must be a power of two")
    if strict and not np.allclose(m.conj().T @ m, np.eye(dim), atol=EPS):
        raise OracleError("gate is not unitary")
    return m


def encode_gate(u, strict: bool = True) -> Term:
    """\\x.{x [col_0] ... [col_{N-1}]}; thunk b holds U|b>."""
    m = _as_matrix(u, strict)
    if m.shape[0] > 16:
        raise OracleError("gate encodings are capped at dimension 16")
    body: Term = Var("x")
    for b in range(m.shape[0]):
        body = App(body, thunk(_amplitude_sum(m[:, b], church_ket)))
    return Abs("x", None, release(body))


def encode_gate_1q(u, strict: bool = True) -> Term:
    m = _as_matrix(u, strict)
    if m.shape != (2, 2):
        raise OracleError("encode_gate_1q expects a 2x2 matrix")
    return encode_gate(m, strict)


def lambda_s_gate(u, strict: bool = True) -> Term:
    """1-qubit gate over constants: \\x:B. if x then U|0> else U|1>."""
    m = _as_matrix(u, strict)
    if m.shape != (2, 2):
        raise OracleError("lambda_s_gate expects a 2x2 matrix")
    return Abs(
        "x",
        B,
        If(Var("x"), _amplitude_sum(m[:, 0], const_ket), _amplitude_sum(m[:, 1], const_ket)),
    )


def odot_gate(u, qubit: Term, strict: bool = True) -> Term:
    """dpar(q, [x] U00.x + U10.x, [y] U01.y + U11.y) on a Top(.)Top qubit."""
    m = _as_matrix(u, strict)
    if m.shape != (2, 2):
        raise OracleError("odot_gate expects a 2x2 matrix")
    x, y = Var("x"), Var("y")
    return DeltaPar(
        qubit,
        "x",
        Sup(Scale(m[0, 0], x), Scale(m[1, 0], x)),
        "y",
        Sup(Scale(m[0, 1], y), Scale(m[1, 1], y)),
    )


PAIR = Abs("a", None, Abs("b", None, Abs("f", None, App(App(Var("f"), Var("a")), Var("b")))))


def encode_pair(t: Term, r: Term) -> Term:
    """Church pair applied as a function, so linearity makes it bilinear."""
    return App(App(PAIR, t), r)


def pair_fst(p: Term) -> Term:
    return App(p, church_ket("0"))


def pair_snd(p: Term) -> Term:
    return App(p, church_ket("1"))


def read_church_pair(t: Term):
    """(left, right) of a released pair \\f.f a b, or None."""
    if not isinstance(t, Abs):
        return None
    f, body = t.name, t.body
    if (
        isinstance(body, App)
        and isinstance(body.fun, App)
        and body.fun.fun == Var(f)
        and f not in body.fun.arg.fv
        and f not in body.arg.fv
    ):
        return body.fun.arg, body.arg
    return None


def hadamard_term() -> Term:
    s = 1 / np.sqrt(2)
    return encode_gate_1q(np.array([[s, s], [s, -s]]))
