"""Interpreters for three small quantum lambda calculi (Lineal, Lambda-S and
the sup-calculus) with a dense state-vector oracle to check them against."""

from .encodings import (
    church_ket,
    const_ket,
    encode_gate,
    encode_gate_1q,
    encode_pair,
    lambda_s_gate,
    odot_gate,
    odot_ket,
    pair_fst,
    pair_snd,
    release,
    thunk,
)
from .errors import (
    DegenerateMeasurement,
    DialectError,
    FuelExhausted,
    LinealError,
    LinearityError,
    NormViolation,
    OracleError,
    ParseError,
    ReadbackError,
    TypeCheckError,
)
from .execute import OutcomeDistribution, distribution, run, sample
from .lambda_s import measure_distribution, realizes, typecheck, typed_step
from .linear import LinearForm
from .odot import odot_typecheck, reduce_measure, reduce_parallel
from .oracle import (
    MeasurementFamily,
    StateVector,
    UnitaryMatrix,
    apply_unitary,
    measure_computational,
    measure_general,
    simulate_measurement_via_basis,
    tensor,
    term_to_vector,
    vector_to_term,
)
from .rewrite import (
    EngineConfig,
    LeftmostInnermost,
    LeftmostOutermost,
    Priority,
    RandomSeeded,
    ReductionTrace,
    RuleId,
    Scripted,
    diverges_witness,
    normalize,
    step,
)
from .syntax import parse, parse_type, pretty
from .terms import LAMBDA_S, LINEAL, ODOT, Term, alpha_ac_eq, canonicalize, substitute
from .typesys import normalize_type, subtype

__all__ = [name for name in dir() if not name.startswith("_")]
