"""Exact scalars for the symbolic side of the package.

A :class:`LaurentScalar` is a sparse multivariate Laurent polynomial over Q.
The distinguished generator ``s`` plays the role of sqrt(E), so E = s**2 is
carried exactly through superpotential and first-integral computations.  Two
further kinds of generator can appear:

* free parameters (``a``, ``b``, ...) introduced while solving quadratic
  systems, so one-parameter families keep an exact closed form, and
* radical markers ``sqrt(m)`` for squarefree integers m > 1, reduced by
  sqrt(m)**2 = m on multiplication.

All coefficients are :class:`fractions.Fraction`; equality is term-wise and
exact.  Values are immutable.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Tuple

Mono = Tuple[Tuple[str, int], ...]

_ONE: Mono = ()


def _radicand(name: str) -> Optional[int]:
    if name.startswith("sqrt(") and name.endswith(")"):
        return int(name[5:-1])
    return None


def _squarefree(m: int) -> Tuple[int, int]:
    """Return (g, m') with m = g**2 * m' and m' squarefree."""
    g, rest, k = 1, m, 2
    while k * k <= rest:
        while rest % (k * k) == 0:
            rest //= k * k
            g *= k
        k += 1
    return g, rest


def _mono_normalise(pairs: Iterable[Tuple[str, int]]) -> Tuple[Mono, Fraction]:
    """Sort generators and fold radical squares into a rational factor."""
    acc: Dict[str, int] = {}
    for name, exp in pairs:
        acc[name] = acc.get(name, 0) + exp
    factor = Fraction(1)
    out = []
    for name in sorted(acc):
        exp = acc[name]
        if exp == 0:
            continue
        m = _radicand(name)
        if m is not None:
            carry = exp // 2
            rem = exp - 2 * carry
            if carry:
                factor *= Fraction(m) ** carry
            if rem:
                out.append((name, 1))
        else:
            out.append((name, exp))
    return tuple(out), factor


class LaurentScalar:
    """Immutable exact scalar; see module docstring."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[Mono, Fraction]] = None):
        cleaned: Dict[Mono, Fraction] = {}
        if terms:
            for mono, coeff in terms.items():
                if coeff != 0:
                    cleaned[mono] = Fraction(coeff)
        self.terms: Dict[Mono, Fraction] = cleaned

    # -- constructors ---------------------------------------------------

    @classmethod
    def rational(cls, value) -> "LaurentScalar":
        value = Fraction(value)
        return cls({_ONE: value}) if value else cls()

    @classmethod
    def zero(cls) -> "LaurentScalar":
        return cls()

    @classmethod
    def one(cls) -> "LaurentScalar":
        return cls.rational(1)

    @classmethod
    def gen(cls, name: str, exp: int = 1, coeff=1) -> "LaurentScalar":
        mono, extra = _mono_normalise([(name, exp)])
        return cls({mono: Fraction(coeff) * extra})

    @classmethod
    def s_power(cls, exp: int, coeff=1) -> "LaurentScalar":
        return cls.gen("s", exp, coeff)

    @classmethod
    def sqrt_rational(cls, value) -> "LaurentScalar":
        """Exact sqrt of a nonnegative rational, adjoining sqrt(m) if needed."""
        value = Fraction(value)
        if value < 0:
            raise ValueError("sqrt of a negative rational")
        if value == 0:
            return cls.zero()
        g, m = _squarefree(value.numerator * value.denominator)
        coeff = Fraction(g, value.denominator)
        if m == 1:
            return cls.rational(coeff)
        return cls.gen(f"sqrt({m})", 1, coeff)

    @staticmethod
    def coerce(value) -> "LaurentScalar":
        if isinstance(value, LaurentScalar):
            return value
        return LaurentScalar.rational(value)

    # -- queries ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_rational(self) -> bool:
        return not self.terms or set(self.terms) == {_ONE}

    def as_rational(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        if set(self.terms) != {_ONE}:
            raise ValueError(f"{self} is not rational")
        return self.terms[_ONE]

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def generators(self) -> set:
        return {name for mono in self.terms for name, _ in mono}

    def radical_names(self) -> set:
        return {g for g in self.generators() if _radicand(g) is not None}

    def s_degree(self) -> int:
        """Highest power of s (0 if s absent); zero scalar returns 0."""
        best = 0
        for mono in self.terms:
            best = max(best, dict(mono).get("s", 0))
        return best

    def lead_rational_at_s_inf(self) -> Fraction:
        """Coefficient sum of the highest-s terms (sign used for normalisation)."""
        if not self.terms:
            return Fraction(0)
        top = max(dict(m).get("s", 0) for m in self.terms)
        return sum(
            (c for m, c in self.terms.items() if dict(m).get("s", 0) == top),
            Fraction(0),
        )

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other) -> "LaurentScalar":
        other = LaurentScalar.coerce(other)
        terms = dict(self.terms)
        for mono, coeff in other.terms.items():
            terms[mono] = terms.get(mono, Fraction(0)) + coeff
        return LaurentScalar(terms)

    __radd__ = __add__

    def __neg__(self) -> "LaurentScalar":
        return LaurentScalar({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "LaurentScalar":
        return self + (-LaurentScalar.coerce(other))

    def __rsub__(self, other) -> "LaurentScalar":
        return LaurentScalar.coerce(other) + (-self)

    def __mul__(self, other) -> "LaurentScalar":
        other = LaurentScalar.coerce(other)
        out: Dict[Mono, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono, extra = _mono_normalise(list(m1) + list(m2))
                out[mono] = out.get(mono, Fraction(0)) + c1 * c2 * extra
        return LaurentScalar(out)

    __rmul__ = __mul__

    def __pow__(self, exp: int) -> "LaurentScalar":
        if exp < 0:
            return self.inverse() ** (-exp)
        result = LaurentScalar.one()
        base = self
        while exp:
            if exp & 1:
                result = result * base
            base = base * base
            exp >>= 1
        return result

    def inverse(self) -> "LaurentScalar":
        """Inverse of a monomial scalar (raises ValueError otherwise)."""
        if len(self.terms) != 1:
            raise ValueError(f"cannot invert non-monomial {self}")
        (mono, coeff), = self.terms.items()
        pairs = []
        extra = Fraction(1)
        for name, exp in mono:
            m = _radicand(name)
            if m is None:
                pairs.append((name, -exp))
            else:
                # 1/sqrt(m) = sqrt(m)/m
                pairs.append((name, exp))
                extra /= Fraction(m) ** exp
        new_mono, fold = _mono_normalise(pairs)
        return LaurentScalar({new_mono: extra * fold / coeff})

    def try_div(self, other) -> Optional["LaurentScalar"]:
        """Exact division; None when the quotient does not exist here.

        Divisor may be any monomial, or a multi-term scalar in ``s`` alone
        (ordinary Laurent-polynomial division, exact remainder required).
        """
        other = LaurentScalar.coerce(other)
        if other.is_zero():
            return None
        if self.is_zero():
            return LaurentScalar.zero()
        if other.is_monomial():
            return self * other.inverse()
        if other.generators() <= {"s"} and self.generators() <= {"s"}:
            num = {dict(m).get("s", 0): c for m, c in self.terms.items()}
            den = {dict(m).get("s", 0): c for m, c in other.terms.items()}
            shift = min(min(num), min(den))
            np_ = {k - shift: v for k, v in num.items()}
            dp = {k - shift: v for k, v in den.items()}
            dd = max(dp)
            lead = dp[dd]
            quo: Dict[int, Fraction] = {}
            while np_:
                nd = max(np_)
                if nd < dd:
                    return None
                q = np_[nd] / lead
                quo[nd - dd] = q
                for k, v in dp.items():
                    np_[nd - dd + k] = np_.get(nd - dd + k, Fraction(0)) - q * v
                np_ = {k: v for k, v in np_.items() if v != 0}
            return LaurentScalar(
                {(("s", k),) if k else _ONE: v for k, v in quo.items()}
            )
        return None

    def __truediv__(self, other) -> "LaurentScalar":
        result = self.try_div(other)
        if result is None:
            raise ValueError(f"inexact division {self} / {other}")
        return result

    def sqrt(self) -> "LaurentScalar":
        """Exact square root of a monomial with even generator exponents.

        The rational coefficient may require adjoining one radical marker.
        Raises ValueError when no square root exists in this ring.
        """
        if self.is_zero():
            return LaurentScalar.zero()
        if len(self.terms) != 1:
            raise ValueError(f"sqrt of non-monomial {self}")
        (mono, coeff), = self.terms.items()
        if coeff < 0:
            raise ValueError(f"sqrt of negative {self}")
        pairs = []
        for name, exp in mono:
            if _radicand(name) is not None or exp % 2:
                raise ValueError(f"sqrt of {self} is outside the ring")
            pairs.append((name, exp // 2))
        root = LaurentScalar.sqrt_rational(coeff)
        return root * LaurentScalar({tuple(pairs): Fraction(1)})

    # -- substitution and evaluation ---------------------------------------

    def subs_gen(self, name: str, value: "LaurentScalar") -> "LaurentScalar":
        """Exactly substitute a generator (negative powers need monomial value)."""
        out = LaurentScalar.zero()
        for mono, coeff in self.terms.items():
            piece = LaurentScalar({_ONE: coeff})
            for gen_name, exp in mono:
                if gen_name == name:
                    piece = piece * (value ** exp)
                else:
                    piece = piece * LaurentScalar.gen(gen_name, exp)
            out = out + piece
        return out

    def eval(self, subs: Optional[Mapping[str, float]] = None) -> float:
        subs = subs or {}
        total = 0.0
        for mono, coeff in self.terms.items():
            value = float(coeff)
            for name, exp in mono:
                m = _radicand(name)
                base = math.sqrt(m) if m is not None else float(subs[name])
                value *= base ** exp
            total += value
        return total

    # -- comparison and formatting -----------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = LaurentScalar.rational(other)
        if not isinstance(other, LaurentScalar):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        return f"LaurentScalar({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        chunks = []
        for mono in sorted(self.terms, key=lambda m: (-dict(m).get("s", 0), m)):
            coeff = self.terms[mono]
            factors = []
            if not mono:
                factors.append(str(coeff))
            else:
                if coeff == -1:
                    factors.append("-1")
                elif coeff != 1:
                    factors.append(str(coeff))
                for name, exp in mono:
                    factors.append(name if exp == 1 else f"{name}^{exp}")
            text = "*".join(factors)
            if text.startswith("-1*"):
                text = "-" + text[3:]
            chunks.append(text)
        out = chunks[0]
        for chunk in chunks[1:]:
            out += " - " + chunk[1:] if chunk.startswith("-") else " + " + chunk
        return out


_TOKEN = re.compile(
    r"\s*(?:(?P<rat>\d+(?:/\d+)?)|(?P<sqrt>sqrt\(\d+\))|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<op>[*+^()-]))"
)


def parse_laurent(text: str) -> LaurentScalar:
    """Parse strings like ``2*s``, ``12*s^-1``, ``-1/2``, ``a``, ``2*sqrt(3)*s^2``.

    Grammar: sum of terms; a term is a '*'-separated product of rationals
    and powered generators (exponent after '^', possibly negative).
    """
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if not match or match.end() == pos:
            raise ValueError(f"cannot parse scalar {text!r} at position {pos}")
        pos = match.end()
        tokens.append(match)
    result = LaurentScalar.zero()
    term: Optional[LaurentScalar] = None
    sign = 1
    idx = 0

    def flush():
        nonlocal result, term, sign
        if term is not None:
            result = result + (term if sign > 0 else -term)
        term, sign = None, 1

    while idx < len(tokens):
        tok = tokens[idx]
        if tok.group("op") == "+":
            flush()
            idx += 1
            continue
        if tok.group("op") == "-":
            if term is None:
                sign = -sign
            else:
                flush()
                sign = -1
            idx += 1
            continue
        if tok.group("op") == "*":
            idx += 1
            continue
        if tok.group("rat"):
            factor = LaurentScalar.rational(Fraction(tok.group("rat")))
            idx += 1
        else:
            name = tok.group("sqrt") or tok.group("name")
            exp = 1
            idx += 1
            if idx < len(tokens) and tokens[idx].group("op") == "^":
                idx += 1
                neg = 1
                if idx < len(tokens) and tokens[idx].group("op") == "-":
                    neg = -1
                    idx += 1
                if idx >= len(tokens) or not tokens[idx].group("rat"):
                    raise ValueError(f"bad exponent in {text!r}")
                exp = neg * int(tokens[idx].group("rat"))
                idx += 1
            m = _radicand(name)
            if m is not None:
                factor = LaurentScalar.sqrt_rational(m) ** exp
            else:
                factor = LaurentScalar.gen(name, exp)
        term = factor if term is None else term * factor
    flush()
    return result


S = LaurentScalar.gen("s")
E_SYMBOLIC = LaurentScalar.gen("s", 2)
