"""Dense state-vector reference: states, unitaries, measurements, tensors,
and the bridge between encoded terms and amplitude vectors."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce
from typing import Optional

import numpy as np

from .encodings import (
    church_ket,
    const_ket,
    encode_gate,
    read_church_ket,
    read_church_pair,
    read_const_ket,
)
from .errors import FuelExhausted, NormViolation, OracleError, ReadbackError
from .execute import OutcomeDistribution
from .linear import LinearForm
from .rewrite import FUEL_EXHAUSTED, EngineConfig, normalize
from .scalars import EPS, is_one
from .terms import (
    LAMBDA_S,
    LINEAL,
    ODOT,
    STAR,
    ZERO,
    App,
    Parallel,
    Scale,
    Star,
    Sup,
    Term,
    mk_sum,
)

MAX_QUBITS = 12
ENCODINGS = {"church": LINEAL, "constants": LAMBDA_S, "odot": ODOT}


def _check_qubits(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise OracleError(f"qubit count must be in 1..{MAX_QUBITS}, got {n}")


@dataclass(frozen=True, eq=False)
class StateVector:
    """n qubits, 2^n amplitudes; norm one unless built with ``check=False``."""

    n: int
    amps: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        _check_qubits(self.n)
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        if amps.shape != (2**self.n,):
            raise OracleError(f"expected {2 ** self.n} amplitudes, got {amps.shape[0]}")
        object.__setattr__(self, "amps", amps)
        if self.check and abs(self.norm2() - 1) > EPS:
            raise NormViolation(f"state has squared norm {self.norm2():.12g}, expected 1")

    @classmethod
    def basis(cls, bits: str) -> "StateVector":
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int(bits, 2)] = 1
        return cls(len(bits), amps)

    @classmethod
    def of(cls, amps, check: bool = True) -> "StateVector":
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        n = len(amps).bit_length() - 1
        if len(amps) != 2**n:
            raise OracleError("amplitude count must be a power of two")
        return cls(n, amps, check)

    def norm2(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "amps": [[a.real, a.imag] for a in self.amps]})


def load_state(source) -> StateVector:
    """From JSON text or a dict ``{"n": 1, "amps": [[re, im], ...]}``."""
    data = json.loads(source) if isinstance(source, str) else source
    amps = [complex(re, im) for re, im in data["amps"]]
    return StateVector(int(data["n"]), np.array(amps))


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        dim = m.shape[0] if m.ndim == 2 else 0
        if m.ndim != 2 or m.shape != (dim, dim) or dim < 2 or dim & (dim - 1):
            raise OracleError("unitary must be a 2^n x 2^n matrix")
        if not np.allclose(m.conj().T @ m, np.eye(dim), rtol=0, atol=EPS):
            raise OracleError("matrix is not unitary")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.dim.bit_length() - 1


@dataclass(frozen=True, eq=False)
class MeasurementFamily:
    operators: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(np.asarray(m, dtype=complex) for m in self.operators)
        if not ops:
            raise OracleError("a measurement needs at least one operator")
        dim = ops[0].shape[0]
        if any(m.shape != (dim, dim) for m in ops):
            raise OracleError("measurement operators must share one square shape")
        total = sum(m.conj().T @ m for m in ops)
        if not np.allclose(total, np.eye(dim), rtol=0, atol=EPS):
            raise OracleError("measurement operators are not complete")
        object.__setattr__(self, "operators", ops)

    @classmethod
    def projective(cls, basis) -> "MeasurementFamily":
        """Rank-1 projectors onto the columns of ``basis``."""
        b = np.asarray(basis, dtype=complex)
        return cls(tuple(np.outer(b[:, i], b[:, i].conj()) for i in range(b.shape[1])))


s2 = 1 / np.sqrt(2)
GATES = {
    "I": UnitaryMatrix(np.eye(2)),
    "H": UnitaryMatrix(np.array([[s2, s2], [s2, -s2]])),
    "X": UnitaryMatrix(np.array([[0, 1], [1, 0]])),
    "Z": UnitaryMatrix(np.array([[1, 0], [0, -1]])),
    "CNOT": UnitaryMatrix(np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])),
}


def apply_unitary(u: UnitaryMatrix, psi: StateVector) -> StateVector:
    if u.dim != len(psi.amps):
        raise OracleError(f"dimension mismatch: {u.dim}x{u.dim} gate on {len(psi.amps)} amplitudes")
    return StateVector(psi.n, u.matrix @ psi.amps, psi.check)


def measure_general(m: MeasurementFamily, psi: StateVector) -> list[tuple[int, float, StateVector]]:
    """(index, p_i, M_i psi / sqrt p_i) for every outcome with p_i > eps."""
    if m.operators[0].shape[0] != len(psi.amps):
        raise OracleError("measurement and state dimensions differ")
    out = []
    for i, op in enumerate(m.operators):
        image = op @ psi.amps
        p = float(np.vdot(image, image).real)
        if p > EPS:
            out.append((i, p, StateVector(psi.n, image / np.sqrt(p))))
    return out


def computational_probabilities(psi: StateVector) -> dict[str, float]:
    probs = np.abs(psi.amps) ** 2 / psi.norm2()
    return {format(i, f"0{psi.n}b"): float(p) for i, p in enumerate(probs) if p > EPS}


def measure_computational(psi: StateVector) -> OutcomeDistribution:
    """|b> with probability |a_b|^2, outcomes as constant kets."""
    probs = computational_probabilities(psi)
    return OutcomeDistribution(tuple((const_ket(b), p) for b, p in probs.items()), None, LAMBDA_S)


def _rank_one_vector(op: np.ndarray) -> np.ndarray:
    if not np.allclose(op, op.conj().T, rtol=0, atol=EPS) or not np.allclose(op @ op, op, rtol=0, atol=EPS):
        raise OracleError("operator is not an orthogonal projector")
    if abs(np.trace(op).real - 1) > EPS:
        raise OracleError("projector does not have rank one")
    col = op[:, int(np.argmax(np.linalg.norm(op, axis=0)))]
    return col / np.linalg.norm(col)


def simulate_measurement_via_basis(m: MeasurementFamily, psi: StateVector):
    """Rotate the measured basis to the computational one, measure there,
    and rotate the post-states back. Only rank-1 projective families."""
    vs = np.column_stack([_rank_one_vector(op) for op in m.operators])
    dim = vs.shape[0]
    if vs.shape[1] != dim or not np.allclose(vs.conj().T @ vs, np.eye(dim), rtol=0, atol=EPS):
        raise OracleError("projectors do not come from an orthonormal basis")
    u = UnitaryMatrix(vs.conj().T)
    rotated = apply_unitary(u, psi)
    undo = u.matrix.conj().T
    out = []
    for i, p in enumerate(np.abs(rotated.amps) ** 2):
        if p > EPS:
            post = np.zeros(dim, dtype=complex)
            post[i] = rotated.amps[i] / np.sqrt(p)
            out.append((i, float(p), StateVector(psi.n, undo @ post)))
    return out


def tensor(*states: StateVector) -> StateVector:
    amps = reduce(np.kron, [s.amps for s in states])
    return StateVector(sum(s.n for s in states), amps, all(s.check for s in states))


def align_phase(reference: np.ndarray, other: np.ndarray) -> np.ndarray:
    """``other`` times the unit scalar matching the phase of ``reference`` at
    its largest-modulus amplitude."""
    k = int(np.argmax(np.abs(reference)))
    if abs(other[k]) <= EPS or abs(reference[k]) <= EPS:
        return other
    return other * (reference[k] / other[k]) / abs(reference[k] / other[k])


def deviation(a, b, up_to_phase: bool = False) -> float:
    a = np.asarray(getattr(a, "amps", a), dtype=complex)
    b = np.asarray(getattr(b, "amps", b), dtype=complex)
    if a.shape != b.shape:
        return float("inf")
    if up_to_phase:
        b = align_phase(a, b)
    return float(np.max(np.abs(a - b))) if a.size else 0.0


# ---------------------------------------------------------------------------
# circuits


def embed(u: UnitaryMatrix, targets: tuple[int, ...], n: int) -> UnitaryMatrix:
    """Lift ``u`` acting on ``targets`` (qubit 0 is the most significant) to
    the full n-qubit register."""
    k = u.n
    if len(targets) != k or len(set(targets)) != k or any(not 0 <= q < n for q in targets):
        raise OracleError(f"bad qubit targets {targets} for a {k}-qubit gate on {n} qubits")
    rest = [q for q in range(n) if q not in targets]
    order = list(targets) + rest
    full = np.kron(u.matrix, np.eye(2 ** (n - k)))
    # reorder tensor factors so factor j sits at qubit order[j]
    t = full.reshape([2] * (2 * n))
    perm = np.argsort(order)
    t = t.transpose(list(perm) + [n + p for p in perm])
    return UnitaryMatrix(t.reshape(2**n, 2**n))


def parse_circuit(text: str, n: Optional[int] = None) -> tuple[int, list[tuple[str, tuple[int, ...]]]]:
    """"H,X:1,CNOT:0:1" -> (n, ops); a bare 1-qubit gate name targets qubit 0."""
    ops = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        name, *qs = item.split(":")
        name = name.upper()
        if name not in GATES:
            raise OracleError(f"unknown gate {name!r}; known: {', '.join(sorted(GATES))}")
        arity = GATES[name].n
        targets = tuple(int(q) for q in qs) if qs else tuple(range(arity))
        if len(targets) != arity:
            raise OracleError(f"{name} needs {arity} qubit index(es)")
        ops.append((name, targets))
    width = max([q + 1 for _, ts in ops for q in ts], default=1)
    n = width if n is None else n
    if width > n:
        raise OracleError(f"circuit uses {width} qubits but only {n} given")
    _check_qubits(n)
    return n, ops


def circuit_unitaries(ops, n: int) -> list[UnitaryMatrix]:
    return [embed(GATES[name], targets, n) for name, targets in ops]


def run_circuit(ops, n: int, psi: Optional[StateVector] = None) -> StateVector:
    psi = psi or StateVector.basis("0" * n)
    for u in circuit_unitaries(ops, n):
        psi = apply_unitary(u, psi)
    return psi


def encode_circuit(ops, n: int, bits: Optional[str] = None) -> Term:
    """Nested applications of Church-encoded gates to a Church ket."""
    t = church_ket(bits or "0" * n)
    for u in circuit_unitaries(ops, n):
        t = App(encode_gate(u), t)
    return t


# ---------------------------------------------------------------------------
# term <-> vector


def _church_bits(base: Term) -> Optional[str]:
    bits = read_church_ket(base)
    if bits is not None:
        return bits
    pair = read_church_pair(base)
    if pair is not None:
        left, right = _church_bits(pair[0]), _church_bits(pair[1])
        if left is not None and right is not None:
            return left + right
    return None


def _odot_amps(t: Term, coef: complex = 1 + 0j) -> np.ndarray:
    if isinstance(t, Star):
        return np.array([coef])
    if isinstance(t, Scale):
        return _odot_amps(t.body, coef * t.coef)
    if isinstance(t, Sup):
        left, right = _odot_amps(t.left, coef), _odot_amps(t.right, coef)
        if left.shape != right.shape:
            raise ReadbackError("unbalanced sup tree")
        return np.concatenate([left, right])
    if isinstance(t, Parallel):
        parts = [_odot_amps(c, coef) for c in t.terms]
        if len({p.shape for p in parts}) != 1:
            raise ReadbackError("parallel components of different shapes")
        return sum(parts)
    raise ReadbackError(f"cannot read {type(t).__name__} as amplitudes")


def read_vector(v: Term, encoding: str = "church", n: Optional[int] = None) -> np.ndarray:
    """Amplitudes of an already-normal term (no norm check)."""
    if encoding == "odot":
        amps = _odot_amps(v)
        if len(amps) < 2 or len(amps) & (len(amps) - 1):
            raise ReadbackError("sup tree does not have 2^n leaves")
        if n is not None and len(amps) != 2**n:
            raise ReadbackError(f"expected {n} qubits")
        return amps
    read = _church_bits if encoding == "church" else read_const_ket
    entries = []
    for coef, base in LinearForm.from_term(v):
        bits = read(base)
        if bits is None:
            raise ReadbackError(f"component is not a {encoding} basis ket: {base}")
        entries.append((coef, bits))
    widths = {len(b) for _, b in entries} | ({n} if n is not None else set())
    if len(widths) != 1:
        raise ReadbackError("cannot determine a single qubit count" if not widths else "mixed qubit counts")
    width = widths.pop()
    _check_qubits(width)
    amps = np.zeros(2**width, dtype=complex)
    for coef, bits in entries:
        amps[int(bits, 2)] += coef
    return amps


def term_to_vector(
    t: Term,
    encoding: str = "church",
    n: Optional[int] = None,
    strict: bool = True,
    fuel: int = 10_000,
) -> StateVector:
    """Normalize ``t`` and read its normal form as an amplitude vector.

    ``strict`` demands norm one; relaxed mode accepts any vector (zero too).
    """
    if encoding not in ENCODINGS:
        raise OracleError(f"unknown encoding {encoding!r}")
    trace = normalize(t, EngineConfig(dialect=ENCODINGS[encoding], fuel=fuel))
    if trace.outcome == FUEL_EXHAUSTED:
        raise FuelExhausted(fuel, trace.final)
    amps = read_vector(trace.final, encoding, n)
    return StateVector.of(amps, check=strict)


def vector_to_term(v: StateVector, encoding: str = "church") -> Term:
    """The normal-form term with the amplitudes of ``v``."""
    if encoding == "odot":
        return _odot_term(v.amps)
    ket = {"church": church_ket, "constants": const_ket}.get(encoding)
    if ket is None:
        raise OracleError(f"unknown encoding {encoding!r}")
    terms = []
    for i, a in enumerate(v.amps):
        if abs(a) > EPS:
            k = ket(format(i, f"0{v.n}b"))
            terms.append(k if is_one(a) else Scale(complex(a), k))
    return mk_sum(terms) if terms else ZERO


def _odot_term(amps) -> Term:
    if len(amps) == 1:
        return STAR if is_one(amps[0]) else Scale(complex(amps[0]), STAR)
    half = len(amps) // 2
    return Sup(_odot_term(amps[:half]), _odot_term(amps[half:]))
