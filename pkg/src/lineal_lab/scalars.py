"""Complex amplitudes with a fixed comparison tolerance.

Scalars are plain Python ``complex`` values; this module only pins down how
they are compared and printed.
"""

from __future__ import annotations

import math

EPS = 1e-9

Scalar = complex

# Printable names for constants that show up in the worked examples.
_NAMED = [
    (1 / math.sqrt(2), "1/sqrt2"),
    (math.sqrt(3) / 2, "sqrt3/2"),
    (1 / math.sqrt(3), "1/sqrt3"),
    (1 / math.sqrt(5), "1/sqrt5"),
    (2 / math.sqrt(5), "2/sqrt5"),
    (1 / math.sqrt(10), "1/sqrt10"),
    (2 / math.sqrt(10), "2/sqrt10"),
    (math.sqrt(2), "sqrt2"),
    (0.5, "1/2"),
]


def scalar(value) -> complex:
    return complex(value)


def approx_eq(a: complex, b: complex, eps: float = EPS) -> bool:
    return abs(a.real - b.real) <= eps and abs(a.imag - b.imag) <= eps


def is_zero(a: complex) -> bool:
    return approx_eq(a, 0j)


def is_one(a: complex) -> bool:
    return approx_eq(a, 1 + 0j)


def modulus2(a: complex) -> float:
    return a.real * a.real + a.imag * a.imag


def _format_real(x: float) -> tuple[str, bool]:
    """Return (text, atomic) for a nonnegative real; atomic means no parens needed."""
    if abs(x - round(x)) <= 1e-12 and abs(x) < 1e15:
        return str(round(x)), True
    for value, name in _NAMED:
        if abs(x - value) <= 1e-12:
            return name, False
    return repr(x), False


def format_scalar(a: complex) -> str:
    """Concrete-syntax rendering; parses back to a value within 1e-12."""
    a = complex(a)
    if abs(a.imag) <= 1e-12:
        x = a.real
        text, atomic = _format_real(abs(x))
        if x < 0 and text != "0":
            return f"(-{text})"
        return text if atomic else f"({text})"
    sign = "+" if a.imag >= 0 else "-"
    return f"({a.real!r}{sign}{abs(a.imag)!r}i)"
