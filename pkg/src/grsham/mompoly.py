"""Sparse polynomials in the momentum variables (p_1..p_r, phi).

Coefficients are :class:`~grsham.laurent.LaurentScalar`, so everything stays
exact over Q[s, s^-1] (plus whatever parameters a computation adjoins).  The
same class doubles as the bivariate polynomial ring used by the Darboux
machinery, with variables (x, y) and a formal ``n`` living in the
coefficients.

Division is single-divisor multivariate reduction under lexicographic order,
which is all the recursion bookkeeping needs and makes normal forms
deterministic.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Mapping, Optional, Sequence, Tuple

from .laurent import LaurentScalar

Expo = Tuple[int, ...]


class MomPoly:
    """Immutable sparse polynomial over LaurentScalar coefficients."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Optional[Mapping[Expo, LaurentScalar]] = None):
        self.nvars = nvars
        cleaned: Dict[Expo, LaurentScalar] = {}
        if terms:
            for expo, coeff in terms.items():
                coeff = LaurentScalar.coerce(coeff)
                if not coeff.is_zero():
                    cleaned[tuple(expo)] = coeff
        self.terms: Dict[Expo, LaurentScalar] = cleaned

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "MomPoly":
        return cls(nvars)

    @classmethod
    def const(cls, nvars: int, value) -> "MomPoly":
        return cls(nvars, {(0,) * nvars: LaurentScalar.coerce(value)})

    @classmethod
    def variable(cls, nvars: int, index: int) -> "MomPoly":
        expo = [0] * nvars
        expo[index] = 1
        return cls(nvars, {tuple(expo): LaurentScalar.one()})

    # -- queries --------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(all(e == 0 for e in expo) for expo in self.terms)

    def constant_value(self) -> LaurentScalar:
        return self.terms.get((0,) * self.nvars, LaurentScalar.zero())

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def leading(self) -> Tuple[Expo, LaurentScalar]:
        """Leading term under lexicographic order (p_1 > p_2 > ... > phi)."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        expo = max(self.terms)
        return expo, self.terms[expo]

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, LaurentScalar)):
            other = MomPoly.const(self.nvars, other)
        if not isinstance(other, MomPoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    # -- ring operations --------------------------------------------------------

    def _coerce(self, other) -> "MomPoly":
        if isinstance(other, MomPoly):
            if other.nvars != self.nvars:
                raise ValueError("mixed variable counts")
            return other
        return MomPoly.const(self.nvars, other)

    def __add__(self, other) -> "MomPoly":
        other = self._coerce(other)
        terms = dict(self.terms)
        for expo, coeff in other.terms.items():
            terms[expo] = terms.get(expo, LaurentScalar.zero()) + coeff
        return MomPoly(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self) -> "MomPoly":
        return MomPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "MomPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "MomPoly":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "MomPoly":
        if isinstance(other, (int, Fraction, LaurentScalar)):
            scalar = LaurentScalar.coerce(other)
            return MomPoly(self.nvars, {e: c * scalar for e, c in self.terms.items()})
        other = self._coerce(other)
        out: Dict[Expo, LaurentScalar] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                expo = tuple(a + b for a, b in zip(e1, e2))
                prod = c1 * c2
                out[expo] = out.get(expo, LaurentScalar.zero()) + prod
        return MomPoly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, exp: int) -> "MomPoly":
        if exp < 0:
            raise ValueError("negative power of a polynomial")
        result = MomPoly.const(self.nvars, 1)
        base = self
        while exp:
            if exp & 1:
                result = result * base
            base = base * base
            exp >>= 1
        return result

    def diff(self, index: int) -> "MomPoly":
        out: Dict[Expo, LaurentScalar] = {}
        for expo, coeff in self.terms.items():
            k = expo[index]
            if k == 0:
                continue
            new = list(expo)
            new[index] = k - 1
            key = tuple(new)
            out[key] = out.get(key, LaurentScalar.zero()) + coeff * Fraction(k)
        return MomPoly(self.nvars, out)

    def directional(self, direction: Sequence) -> "MomPoly":
        """direction . grad, with rational direction entries."""
        out = MomPoly.zero(self.nvars)
        for i, di in enumerate(direction):
            di = Fraction(di)
            if di:
                out = out + self.diff(i) * di
        return out

    # -- division and substitution ----------------------------------------------

    def divmod_by(self, divisor: "MomPoly") -> Tuple["MomPoly", "MomPoly"]:
        """Single-divisor reduction under lex order; exact over the coefficients.

        Requires every triggered coefficient division to be exact in the
        Laurent ring (true whenever the divisor's leading coefficient is a
        monomial, e.g. rational), otherwise raises ValueError.
        """
        divisor = self._coerce(divisor)
        if divisor.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        lead_expo, lead_coeff = divisor.leading()
        quotient = MomPoly.zero(self.nvars)
        remainder = MomPoly.zero(self.nvars)
        work = self
        while not work.is_zero():
            expo = max(work.terms)
            coeff = work.terms[expo]
            if all(a >= b for a, b in zip(expo, lead_expo)):
                q = coeff.try_div(lead_coeff)
                if q is None:
                    raise ValueError("inexact coefficient division in divmod_by")
                shift = tuple(a - b for a, b in zip(expo, lead_expo))
                qterm = MomPoly(self.nvars, {shift: q})
                quotient = quotient + qterm
                work = work - qterm * divisor
            else:
                move = MomPoly(self.nvars, {expo: coeff})
                remainder = remainder + move
                work = work - move
        return quotient, remainder

    def try_exact_div(self, divisor: "MomPoly") -> Optional["MomPoly"]:
        try:
            q, r = self.divmod_by(divisor)
        except ValueError:
            return None
        return q if r.is_zero() else None

    def substitute(self, index: int, replacement: "MomPoly") -> "MomPoly":
        """Substitute variable ``index`` by a polynomial, exactly."""
        replacement = self._coerce(replacement)
        out = MomPoly.zero(self.nvars)
        for expo, coeff in self.terms.items():
            rest = list(expo)
            k = rest[index]
            rest[index] = 0
            piece = MomPoly(self.nvars, {tuple(rest): coeff})
            if k:
                piece = piece * replacement ** k
            out = out + piece
        return out

    # -- evaluation and formatting -------------------------------------------------

    def eval(self, values: Sequence[float],
             subs: Optional[Mapping[str, float]] = None) -> float:
        total = 0.0
        for expo, coeff in self.terms.items():
            term = coeff.eval(subs)
            for v, e in zip(values, expo):
                if e:
                    term *= v ** e
            total += term
        return total

    def text(self, names: Optional[Sequence[str]] = None) -> str:
        if not self.terms:
            return "0"
        if names is None:
            names = default_names(self.nvars)
        chunks = []
        for expo in sorted(self.terms, reverse=True):
            coeff = self.terms[expo]
            mono = "*".join(
                names[i] if e == 1 else f"{names[i]}^{e}"
                for i, e in enumerate(expo) if e
            )
            ctext = str(coeff)
            if " " in ctext:
                ctext = f"({ctext})"
            if mono:
                if ctext == "1":
                    chunk = mono
                elif ctext == "-1":
                    chunk = f"-{mono}"
                else:
                    chunk = f"{ctext}*{mono}"
            else:
                chunk = ctext
            chunks.append(chunk)
        out = chunks[0]
        for chunk in chunks[1:]:
            out += " - " + chunk[1:] if chunk.startswith("-") else " + " + chunk
        return out

    def __str__(self) -> str:
        return self.text()

    def __repr__(self) -> str:
        return f"MomPoly({self.text()})"


def default_names(nvars: int) -> Tuple[str, ...]:
    if nvars == 2:
        return ("p", "phi")
    return tuple(f"p{i + 1}" for i in range(nvars - 1)) + ("phi",)
