import cmath
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lineal_lab.errors import LinearityError, TypeCheckError
from lineal_lab.lambda_s import (
    CONFIG,
    TypingContext,
    exact_distribution,
    measure_distribution,
    realizes,
    run,
    typecheck,
    typed_step,
)
from lineal_lab.rewrite import normalize
from lineal_lab.syntax import parse, parse_type
from lineal_lab.terms import KET0, KET1, LAMBDA_S, ZERO, App, Meas, Scale, alpha_ac_eq
from lineal_lab.typesys import B, ZERO_T, Arrow, Prod, S, normalize_type, subtype

H = "(\\x:B. if x then (1/sqrt2).|0> + (1/sqrt2).|1> else (1/sqrt2).|0> + (-1/sqrt2).|1>)"


def p(source):
    return parse(source, LAMBDA_S)


def ty(source):
    return parse_type(source)


class TestTypes:
    def test_double_s_collapses(self):
        assert normalize_type(S(S(B))) == S(B)

    @pytest.mark.parametrize(
        "a, b",
        [
            ("B", "S B"),
            ("B * B", "S (B * B)"),
            ("S B * S B", "S (B * B)"),
            ("S B -> B", "B -> S B"),
        ],
    )
    def test_subtype_holds(self, a, b):
        assert subtype(ty(a), ty(b))

    @pytest.mark.parametrize("a, b", [("S B", "B"), ("B -> B", "S B -> B"), ("B", "B * B")])
    def test_subtype_fails(self, a, b):
        assert not subtype(ty(a), ty(b))

    def test_zero_below_every_superposition(self):
        assert subtype(ZERO_T, S(B)) and not subtype(ZERO_T, B)


class TestTypecheck:
    @pytest.mark.parametrize(
        "source, expected",
        [
            ("|0>", "B"),
            ("(1/sqrt2).|0> + (1/sqrt2).|1>", "S B"),
            (H, "B -> S B"),
            (f"{H} |0>", "S B"),
            (f"{H} ((1/sqrt2).|0> + (1/sqrt2).|1>)", "S B"),
            ("\\x:S B. pi x", "S B -> B"),
            ("(|0>, (1/sqrt2).|0> + (1/sqrt2).|1>)", "B * S B"),
            ("pi_2 ((|0>, |1>))", "B * B"),
            ("if (1/sqrt2).|0> + (1/sqrt2).|1> then |0> else |1>", "S B"),
        ],
    )
    def test_least_types(self, source, expected):
        assert typecheck(p(source)) == normalize_type(ty(expected))

    def test_context(self):
        ctx = TypingContext().extend("q", S(B))
        assert typecheck(p("pi q"), ctx) == B

    def test_unannotated_binder(self):
        with pytest.raises(TypeCheckError, match="annotation"):
            typecheck(p("\\x. x"))

    def test_linearity(self):
        with pytest.raises(LinearityError):
            typecheck(p("\\x:S B. (x, x)"))

    def test_basis_binder_may_duplicate(self):
        assert typecheck(p("\\x:B. (x, x)")) == Arrow(B, Prod(B, B))

    def test_superposed_argument_to_s_arrow_is_fine(self):
        assert typecheck(p("(\\x:S B. x) (|0> + |1>)")) == S(B)

    def test_bad_application(self):
        with pytest.raises(TypeCheckError):
            typecheck(p("|0> |1>"))

    def test_unbound(self):
        with pytest.raises(TypeCheckError, match="unbound"):
            typecheck(p("y"))


WELL_TYPED = [
    f"{H} ({H} |0>)",
    "(\\x:B. (x, x)) ((1/sqrt2).|0> + (1/sqrt2).|1>)",
    "(\\x:S B. pi x) ((sqrt3/2).|0> + (1/2).|1>)",
    "if (1/2).|0> + (sqrt3/2).|1> then (|0>, |1>) else (|1>, |1>)",
    "pi_2 ((\\x:B. (x, |1>)) ((1/sqrt2).|0> + (1/sqrt2).|1>))",
]


class TestReduction:
    @pytest.mark.parametrize("source", WELL_TYPED)
    def test_subject_reduction(self, source):
        t = p(source)
        start = typecheck(t)
        trace = normalize(t, CONFIG)
        for s in trace.steps:
            assert subtype(typecheck(s.term), start), f"after {s.rule}"
        dist = exact_distribution(t)
        for outcome, _ in dist.outcomes:
            assert subtype(typecheck(outcome), start)

    def test_s_binder_is_call_by_name(self):
        s = typed_step(p("(\\x:S B. x) ((1/sqrt2).|0> + (1/sqrt2).|1>)"))
        assert str(s.rule) == "beta/2"
        assert alpha_ac_eq(s.term, p("(1/sqrt2).|0> + (1/sqrt2).|1>"))

    def test_s_binder_on_zero(self):
        assert normalize(p("(\\x:S B. x) zero"), CONFIG).final == ZERO

    def test_basis_binder_distributes(self):
        s = typed_step(p("(\\x:B. (x, x)) (|0> + |1>)"))
        assert s.rule.group == "application"

    def test_dynamic_linearity(self):
        with pytest.raises(LinearityError):
            normalize(p("(\\x:S B. (x, x)) |0>"), CONFIG)

    def test_cloning_attempt_gives_entangled_pair(self):
        out = normalize(p(WELL_TYPED[1]), CONFIG).final
        assert alpha_ac_eq(out, p("(1/sqrt2).|00> + (1/sqrt2).|11>"))

    def test_hh_is_identity(self):
        assert normalize(p(f"{H} ({H} |1>)"), CONFIG).final == KET1

    def test_measurement_waits_for_rng(self):
        assert typed_step(p("pi ((1/sqrt2).|0> + (1/sqrt2).|1>)")) is None


class TestMeasurement:
    def test_distribution(self):
        dist = measure_distribution(p("pi ((sqrt3/2).|0> + (1/2).|1>)"))
        assert dist.probability(KET0) == pytest.approx(0.75)
        assert dist.probability(KET1) == pytest.approx(0.25)

    def test_unnormalized_argument_is_rescaled(self):
        dist = measure_distribution(p("pi (|0> + |1>)"))
        assert dist.probability(KET0) == pytest.approx(0.5)

    def test_needs_pi(self):
        with pytest.raises(TypeCheckError):
            measure_distribution(p("|0>"))

    def test_two_qubits(self):
        dist = measure_distribution(p("pi_2 ((1/sqrt2).|00> + (1/sqrt2).|11>)"))
        assert dist.probability(p("(|0>, |0>)")) == pytest.approx(0.5)
        assert dist.probability(p("(|0>, |1>)")) == pytest.approx(0.0)

    def test_run_is_deterministic(self):
        t = p("pi ((1/sqrt2).|0> + (1/sqrt2).|1>)")
        assert all(run(t, s) == run(t, s) for s in range(10))
        assert {run(t, s) for s in range(40)} == {KET0, KET1}

    def test_hh_then_measure(self):
        assert run(p(f"pi ({H} ({H} |0>))"), seed=7) == KET0

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0, 2 * math.pi), st.floats(0.05, math.pi / 2 - 0.05))
    def test_global_phase_invariance(self, theta, angle):
        a, b = math.cos(angle), math.sin(angle)
        phase = cmath.exp(1j * theta)
        v = p(f"{a}.|0> + {b}.|1>")
        plain = measure_distribution(App(Meas(1), v))
        rotated = measure_distribution(App(Meas(1), Scale(phase, v)))
        for k in (KET0, KET1):
            assert plain.probability(k) == pytest.approx(rotated.probability(k), abs=1e-9)


class TestRealizes:
    def test_basis(self):
        assert realizes(p("|0>"), B) is True

    def test_superposition_not_basis(self):
        assert realizes(p("(1/sqrt2).|0> + (1/sqrt2).|1>"), B) is False
        assert realizes(p("(1/sqrt2).|0> + (1/sqrt2).|1>"), S(B)) is True

    def test_unnormalized(self):
        assert realizes(p("|0> + |1>"), S(B)) is False

    def test_measured_term_realizes_basis(self):
        assert realizes(p("pi ((1/2).|0> + (sqrt3/2).|1>)"), B) is True

    def test_only_qubit_types(self):
        with pytest.raises(TypeCheckError):
            realizes(p("|0>"), Arrow(B, B))
