"""AC-canonical linear combinations of base terms."""

from __future__ import annotations

from dataclasses import dataclass

from .scalars import is_zero, modulus2
from .terms import ZERO, Parallel, Scale, Sum, Term, Zero, alpha_ac_eq, mk_sum, term_key


@dataclass(frozen=True)
class LinearForm:
    """Entries (coefficient, base) with pairwise distinct bases and no zero
    coefficients; bases are never Sum, Scale or Zero. Empty means 0."""

    entries: tuple[tuple[complex, Term], ...] = ()

    @classmethod
    def of(cls, pairs) -> "LinearForm":
        merged: list[list] = []
        for coef, base in pairs:
            for slot in merged:
                if alpha_ac_eq(slot[1], base):
                    slot[0] += coef
                    break
            else:
                merged.append([complex(coef), base])
        kept = [(c, b) for c, b in merged if not is_zero(c)]
        kept.sort(key=lambda e: term_key(e[1]))
        return cls(tuple(kept))

    @classmethod
    def from_term(cls, t: Term) -> "LinearForm":
        return cls.of(_expand(t, 1 + 0j))

    def to_term(self) -> Term:
        return mk_sum([Scale(c, b) if c != 1 else b for c, b in self.entries]) if self.entries else ZERO

    def norm2(self) -> float:
        return sum(modulus2(c) for c, _ in self.entries)

    def scale(self, alpha: complex) -> "LinearForm":
        return LinearForm.of((alpha * c, b) for c, b in self.entries)

    def __add__(self, other: "LinearForm") -> "LinearForm":
        return LinearForm.of(self.entries + other.entries)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def is_zero(self) -> bool:
        return not self.entries


def _expand(t: Term, coef: complex):
    if isinstance(t, (Sum, Parallel)):
        for c in t.terms:
            yield from _expand(c, coef)
    elif isinstance(t, Scale):
        yield from _expand(t.body, coef * t.coef)
    elif isinstance(t, Zero):
        return
    else:
        yield coef, t
