import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lineal_lab.errors import NormViolation, OracleError, ReadbackError
from lineal_lab.oracle import (
    GATES,
    MeasurementFamily,
    StateVector,
    UnitaryMatrix,
    apply_unitary,
    computational_probabilities,
    deviation,
    embed,
    encode_circuit,
    load_state,
    measure_computational,
    measure_general,
    parse_circuit,
    run_circuit,
    simulate_measurement_via_basis,
    tensor,
    term_to_vector,
    vector_to_term,
)
from lineal_lab.syntax import parse
from lineal_lab.terms import KET0, KET1, LAMBDA_S

S2 = 1 / math.sqrt(2)


def random_state(seed: int, n: int) -> StateVector:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return StateVector(n, v / np.linalg.norm(v))


def random_unitary(seed: int, dim: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


class TestStateVector:
    def test_basis(self):
        assert np.allclose(StateVector.basis("10").amps, [0, 0, 1, 0])

    def test_norm_checked(self):
        with pytest.raises(NormViolation):
            StateVector(1, [1, 1])
        assert StateVector(1, [1, 1], check=False).norm2() == pytest.approx(2)

    def test_qubit_limit(self):
        StateVector.basis("0" * 12)
        with pytest.raises(OracleError):
            StateVector.basis("0" * 13)

    def test_wrong_length(self):
        with pytest.raises(OracleError):
            StateVector(2, [1, 0])

    def test_json_round_trip(self):
        psi = random_state(1, 2)
        back = load_state(psi.to_json())
        assert deviation(psi, back) < 1e-15
        assert load_state({"n": 1, "amps": [[0, 0], [0, 1]]}).amps[1] == 1j

    def test_json_shape(self):
        data = json.loads(StateVector.basis("1").to_json())
        assert data == {"n": 1, "amps": [[0.0, 0.0], [1.0, 0.0]]}


class TestPostulates:
    def test_hadamard(self):
        out = apply_unitary(GATES["H"], StateVector.basis("0"))
        assert np.allclose(out.amps, [S2, S2])

    def test_non_unitary_rejected(self):
        with pytest.raises(OracleError):
            UnitaryMatrix(np.array([[1, 1], [0, 1]]))

    def test_incomplete_measurement_rejected(self):
        with pytest.raises(OracleError):
            MeasurementFamily((np.diag([1, 0]),))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6), st.integers(1, 3))
    def test_unitaries_preserve_norm(self, seed, n):
        u = UnitaryMatrix(random_unitary(seed, 2**n))
        assert apply_unitary(u, random_state(seed + 1, n)).norm2() == pytest.approx(1, abs=1e-12)

    def test_computational_probabilities(self):
        psi = StateVector(1, [math.sqrt(3) / 2, 0.5])
        probs = computational_probabilities(psi)
        assert probs == pytest.approx({"0": 0.75, "1": 0.25})

    def test_measure_computational_terms(self):
        dist = measure_computational(StateVector(1, [S2, S2]))
        assert dist.probability(KET0) == pytest.approx(0.5)
        assert dist.probability(KET1) == pytest.approx(0.5)

    def test_general_measurement_post_states(self):
        m = MeasurementFamily.projective(GATES["H"].matrix)
        out = measure_general(m, StateVector(1, [S2, S2]))
        assert [i for i, _, _ in out] == [0]
        assert out[0][1] == pytest.approx(1)
        halves = measure_general(m, StateVector.basis("0"))
        assert [p for _, p, _ in halves] == pytest.approx([0.5, 0.5])
        assert deviation(halves[1][2], [S2, -S2], up_to_phase=True) < 1e-12

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6), st.integers(1, 3))
    def test_basis_change_simulates_measurement(self, seed, n):
        m = MeasurementFamily.projective(random_unitary(seed, 2**n))
        psi = random_state(seed + 7, n)
        direct = measure_general(m, psi)
        simulated = simulate_measurement_via_basis(m, psi)
        assert [i for i, _, _ in direct] == [i for i, _, _ in simulated]
        for (_, p, post), (_, q, other) in zip(direct, simulated):
            assert abs(p - q) < 1e-9
            assert deviation(post, other, up_to_phase=True) < 1e-9

    def test_simulation_needs_rank_one(self):
        m = MeasurementFamily((np.diag([1, 1, 0, 0]), np.diag([0, 0, 1, 1])))
        with pytest.raises(OracleError):
            simulate_measurement_via_basis(m, StateVector.basis("00"))

    def test_tensor(self):
        a = StateVector(1, [1 / math.sqrt(5), 2 / math.sqrt(5)])
        b = StateVector(1, [1 / math.sqrt(1.1), math.sqrt(0.1 / 1.1)])
        assert np.allclose(tensor(a, b).amps, np.kron(a.amps, b.amps))

    def test_deviation_up_to_phase(self):
        psi = random_state(3, 2)
        rotated = psi.amps * np.exp(0.7j)
        assert deviation(psi, rotated) > 0.1
        assert deviation(psi, rotated, up_to_phase=True) < 1e-12


class TestCircuits:
    def test_parse(self):
        assert parse_circuit("H,X:1,CNOT:0:1") == (2, [("H", (0,)), ("X", (1,)), ("CNOT", (0, 1))])

    def test_parse_errors(self):
        with pytest.raises(OracleError):
            parse_circuit("T")
        with pytest.raises(OracleError):
            parse_circuit("CNOT:0")
        with pytest.raises(OracleError):
            parse_circuit("X:3", n=2)

    def test_qubit_zero_is_most_significant(self):
        assert np.allclose(embed(GATES["X"], (0,), 2).matrix @ [1, 0, 0, 0], [0, 0, 1, 0])
        flipped = embed(GATES["CNOT"], (1, 0), 2).matrix
        assert np.allclose(flipped @ [0, 1, 0, 0], [0, 0, 0, 1])

    def test_bell(self):
        psi = run_circuit(parse_circuit("H,CNOT:0:1")[1], 2)
        assert np.allclose(psi.amps, [S2, 0, 0, S2])

    def test_encoded_circuit_matches(self):
        n, ops = parse_circuit("H,CNOT:0:1,X:1")
        got = term_to_vector(encode_circuit(ops, n), n=n)
        assert deviation(run_circuit(ops, n), got) < 1e-9


class TestReadback:
    def test_church(self):
        v = term_to_vector(parse("(1/sqrt2).|0> + (-1/sqrt2).|1>"))
        assert np.allclose(v.amps, [S2, -S2])

    def test_constants(self):
        t = parse("(1/sqrt2).|00> + (1/sqrt2).|11>", LAMBDA_S)
        assert np.allclose(term_to_vector(t, encoding="constants").amps, [S2, 0, 0, S2])

    def test_odot(self):
        t = parse("(1/sqrt2).* + (0.0+0.7071067811865476i).*", "odot")
        assert np.allclose(term_to_vector(t, encoding="odot").amps, [S2, 1j * S2])

    def test_strict_norm(self):
        with pytest.raises(NormViolation):
            term_to_vector(parse("|0> + |1>"))
        assert term_to_vector(parse("|0> + |1>"), strict=False).norm2() == pytest.approx(2)

    def test_unreadable(self):
        with pytest.raises(ReadbackError):
            term_to_vector(parse("\\x.x"))

    def test_mixed_widths(self):
        with pytest.raises(ReadbackError):
            term_to_vector(parse("|0> + |01>"), strict=False)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6), st.integers(1, 3), st.sampled_from(["church", "constants", "odot"]))
    def test_round_trip(self, seed, n, encoding):
        psi = random_state(seed, n)
        back = term_to_vector(vector_to_term(psi, encoding), encoding=encoding, n=n)
        assert deviation(psi, back) < 1e-12
