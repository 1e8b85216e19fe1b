"""Principal-orbit data and the Lorentzian momentum form J.

The orbit of a cohomogeneity-one metric with multiplicity-free isotropy is
described by the summand dimensions d_1..d_r and by the weight data of the
scalar curvature S(q) = sum_w A_w exp(w.q).  All entries are exact rationals;
the quadratic form

    J(p, phi) = -( sum p_i^2/d_i + phi sum p_i + ((n-1)/4) phi^2 )

has Lorentz signature (1, r), is positive on the extended dimension vector
(d, -2), and drives both the superpotential equation and the first-integral
recursion.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from .errors import (
    BadDimension,
    DimensionMismatch,
    DuplicateWeight,
    ZeroCoefficient,
)

RationalLike = Union[int, str, Fraction]


def as_fraction(value) -> Fraction:
    """Exact parse; floats are rejected so no silent binary rounding slips in."""
    if isinstance(value, float):
        raise ZeroCoefficient(
            f"non-exact value {value!r}: pass rationals as int, Fraction or 'p/q'"
        )
    return Fraction(value)


@dataclass(frozen=True)
class ExtVector:
    """Vector of r+1 exact rationals; the last slot is the u/phi slot."""

    entries: Tuple[Fraction, ...]

    @classmethod
    def of(cls, values: Iterable) -> "ExtVector":
        return cls(tuple(as_fraction(v) for v in values))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, idx):
        return self.entries[idx]

    def __add__(self, other: "ExtVector") -> "ExtVector":
        if len(other) != len(self):
            raise DimensionMismatch(f"{self} + {other}")
        return ExtVector(tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "ExtVector") -> "ExtVector":
        if len(other) != len(self):
            raise DimensionMismatch(f"{self} - {other}")
        return ExtVector(tuple(a - b for a, b in zip(self.entries, other.entries)))

    def scale(self, factor) -> "ExtVector":
        factor = Fraction(factor)
        return ExtVector(tuple(factor * a for a in self.entries))

    def half(self) -> "ExtVector":
        return self.scale(Fraction(1, 2))

    def floats(self) -> Tuple[float, ...]:
        return tuple(float(a) for a in self.entries)

    def __str__(self) -> str:
        return "(" + ", ".join(str(a) for a in self.entries) + ")"


@dataclass(frozen=True)
class LorentzForm:
    """The momentum quadratic form of an orbit, as exact rational arithmetic."""

    r: int
    d: Tuple[int, ...]
    n: int

    def _check(self, v: Sequence) -> None:
        if len(v) != self.r + 1:
            raise DimensionMismatch(
                f"expected length {self.r + 1}, got {len(v)}: {tuple(v)}"
            )

    def quadratic(self, v: Sequence) -> Fraction:
        """J(v) for an extended vector v = (p_1..p_r, phi)."""
        self._check(v)
        v = [as_fraction(x) for x in v]
        phi = v[-1]
        total = sum(v[i] ** 2 / self.d[i] for i in range(self.r))
        total += phi * sum(v[:-1])
        total += Fraction(self.n - 1, 4) * phi ** 2
        return -total

    def bilinear(self, v: Sequence, w: Sequence) -> Fraction:
        """Symmetric bilinear form; polarization of :meth:`quadratic`."""
        self._check(v)
        self._check(w)
        v = [as_fraction(x) for x in v]
        w = [as_fraction(x) for x in w]
        phi, psi = v[-1], w[-1]
        total = sum(v[i] * w[i] / self.d[i] for i in range(self.r))
        total += phi * sum(w[:-1]) / 2 + psi * sum(v[:-1]) / 2
        total += Fraction(self.n - 1, 4) * phi * psi
        return -total

    def matrix(self) -> List[List[Fraction]]:
        size = self.r + 1
        m = [[Fraction(0)] * size for _ in range(size)]
        for i in range(self.r):
            m[i][i] = Fraction(-1, self.d[i])
            m[i][self.r] = m[self.r][i] = Fraction(-1, 2)
        m[self.r][self.r] = Fraction(-(self.n - 1), 4)
        return m

    def shifted_bilinear(self, v: Sequence, w: Sequence) -> Fraction:
        """J(v + d, w + d) = 1 - sum v_i w_i / d_i for r-vectors v, w.

        Both sides are evaluated and compared, so this doubles as an exact
        self-check of the bilinear-form implementation.
        """
        if len(v) != self.r or len(w) != self.r:
            raise DimensionMismatch("shifted_bilinear takes r-vectors")
        v = [as_fraction(x) for x in v]
        w = [as_fraction(x) for x in w]
        short = 1 - sum(v[i] * w[i] / self.d[i] for i in range(self.r))
        dv = list(self.d) + [-2]
        full = self.bilinear(
            [a + b for a, b in zip(v, dv)] + [Fraction(-2)],
            [a + b for a, b in zip(w, dv)] + [Fraction(-2)],
        )
        assert short == full, "shift identity violated (internal bug)"
        return short

    def is_null(self, v: Sequence, tol: float = 0.0) -> bool:
        """Exact null test for rational input, |J(v)| <= tol for floats."""
        exact = all(not isinstance(x, float) for x in v)
        if exact:
            return self.quadratic(v) == 0
        self._check(v)
        vf = [float(x) for x in v]
        phi = vf[-1]
        total = sum(vf[i] ** 2 / self.d[i] for i in range(self.r))
        total += phi * sum(vf[:-1]) + (self.n - 1) / 4.0 * phi ** 2
        return abs(total) <= tol

    def signature_ok(self) -> bool:
        """Exact Sylvester test that J has signature (1, r).

        With Jacobi's rule, r negative eigenvalues means r sign changes in
        the sequence of leading principal minors; for this matrix the first
        r minors alternate and the determinant must keep the r-th sign.
        """
        m = self.matrix()
        size = self.r + 1
        prev = Fraction(1)
        changes = 0
        for k in range(1, size + 1):
            minor = _det([row[:k] for row in m[:k]])
            if minor == 0:
                return False
            if (minor > 0) != (prev > 0):
                changes += 1
            prev = minor
        return changes == self.r


def _det(rows: List[List[Fraction]]) -> Fraction:
    """Fraction determinant by Gaussian elimination."""
    size = len(rows)
    m = [row[:] for row in rows]
    det = Fraction(1)
    for col in range(size):
        pivot = next((i for i in range(col, size) if m[i][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for i in range(col + 1, size):
            factor = m[i][col] * inv
            if factor:
                m[i] = [a - factor * b for a, b in zip(m[i], m[col])]
    return det


@dataclass(frozen=True)
class Weight:
    w: Tuple[Fraction, ...]
    A: Fraction

    def extended(self) -> ExtVector:
        return ExtVector(self.w + (Fraction(0),))


@dataclass(frozen=True)
class OrbitData:
    """Validated principal-orbit combinatorics."""

    name: str
    r: int
    d: Tuple[int, ...]
    n: int
    weights: Tuple[Weight, ...]

    @property
    def form(self) -> LorentzForm:
        return LorentzForm(self.r, self.d, self.n)

    @property
    def d_ext(self) -> ExtVector:
        return ExtVector(tuple(Fraction(x) for x in self.d) + (Fraction(-2),))

    def extended_weights(self) -> List[ExtVector]:
        return [wt.extended() for wt in self.weights]

    def weights_with_zero(self) -> List[Tuple[ExtVector, Optional[Weight]]]:
        """W tilde: the extended weights plus the zero vector (slot for E)."""
        zero = ExtVector(tuple(Fraction(0) for _ in range(self.r + 1)))
        out: List[Tuple[ExtVector, Optional[Weight]]] = [(zero, None)]
        out.extend((wt.extended(), wt) for wt in self.weights)
        return out


def make_orbit(d: Sequence[int], weights: Sequence[Tuple[Sequence, object]],
               name: str = "orbit") -> OrbitData:
    """Validate raw orbit data, reporting the offending entry on failure."""
    dims = []
    for i, di in enumerate(d):
        if not isinstance(di, int) or isinstance(di, bool) or di < 1:
            raise BadDimension(f"d[{i}] = {di!r} is not a positive integer")
        dims.append(di)
    if not dims:
        raise BadDimension("orbit needs at least one summand")
    r = len(dims)
    n = sum(dims)
    parsed: List[Weight] = []
    seen = set()
    for idx, (wvec, coeff) in enumerate(weights):
        wvec = tuple(as_fraction(x) for x in wvec)
        if len(wvec) != r:
            raise DimensionMismatch(
                f"weight #{idx} {wvec} has length {len(wvec)}, expected r={r}"
            )
        if wvec in seen:
            raise DuplicateWeight(f"weight #{idx} {wvec} appears twice")
        seen.add(wvec)
        a = as_fraction(coeff)
        if a == 0:
            raise ZeroCoefficient(f"weight #{idx} {wvec} has A_w = 0")
        parsed.append(Weight(wvec, a))
    orbit = OrbitData(name=name, r=r, d=tuple(dims), n=n, weights=tuple(parsed))
    assert orbit.form.quadratic(orbit.d_ext) == 1, "J(d,-2) != 1 (internal bug)"
    return orbit


def build_orbit(spec) -> OrbitData:
    """Build an orbit from a raw mapping (the CLI configuration shape)."""
    unknown = set(spec) - {"d", "weights", "name"}
    if unknown:
        raise BadDimension(f"unknown orbit keys: {sorted(unknown)}")
    if "d" not in spec:
        raise BadDimension("orbit description must list d")
    weights = [(w["w"], w["A"]) for w in spec.get("weights", [])]
    return make_orbit(spec["d"], weights, name=spec.get("name", "orbit"))


def lorentz_quadratic(form: LorentzForm, v: Sequence) -> Fraction:
    return form.quadratic(v)


def lorentz_bilinear(form: LorentzForm, v: Sequence, w: Sequence) -> Fraction:
    return form.bilinear(v, w)


def shifted_bilinear_check(form: LorentzForm, v: Sequence, w: Sequence) -> Fraction:
    return form.shifted_bilinear(v, w)


def is_null(form: LorentzForm, v: Sequence, tol: float = 0.0) -> bool:
    return form.is_null(v, tol)
