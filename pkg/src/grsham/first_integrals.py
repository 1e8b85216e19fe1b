"""Generalized first integrals, the level recursion, and Darboux polynomials.

Works in the exact ring of exponential sums with momentum-polynomial
coefficients: F = sum_b F_b(p, phi) e^{b.(q,u)} with F_b over Q[s, s^-1]
(E = s^2).  The canonical Poisson bracket is exact, a certificate is valid
only when {F, H} - Phi H reduces to the empty sum, and Phi is always
reconstructed as Phi_b = psi_b + (1/2) d.grad_p F_b rather than solved for.

The level recursion solves, at each exponent b of the lattice generated by
d and d+w over the seed,

    (b.grad J) F_b - psi_b J = -E(psi_{b-d} + d.grad F_{b-d})
                               - sum_w A_w (psi_{b-d-w} + (d+w).grad F_{b-d-w}),

with the free multiples of J removed by lex normal form, so output is
deterministic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import BadParams, DimensionMismatch, OverflowGuard, RecursionObstructed
from .laurent import E_SYMBOLIC, LaurentScalar
from .mompoly import MomPoly
from .orbit_model import ExtVector, OrbitData
from .phase_dynamics import EXP_GUARD, PhasePoint


# -- exponential sums with polynomial coefficients ------------------------------

class ExpPolySum:
    """sum_b  F_b(p, phi) e^{b.(q,u)}  with exact sparse coefficients."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int,
                 terms: Optional[Mapping[ExtVector, MomPoly]] = None):
        self.nvars = nvars
        cleaned: Dict[ExtVector, MomPoly] = {}
        if terms:
            for vec, poly in terms.items():
                if len(vec) != nvars:
                    raise DimensionMismatch(f"exponent {vec} vs nvars {nvars}")
                if not poly.is_zero():
                    cleaned[vec] = poly
        self.terms = cleaned

    @classmethod
    def single(cls, vec: ExtVector, poly: MomPoly) -> "ExpPolySum":
        return cls(len(vec), {vec: poly})

    def is_zero(self) -> bool:
        return not self.terms

    def items(self) -> List[Tuple[ExtVector, MomPoly]]:
        return sorted(self.terms.items(), key=lambda kv: kv[0].entries)

    def __add__(self, other: "ExpPolySum") -> "ExpPolySum":
        terms = dict(self.terms)
        for vec, poly in other.terms.items():
            terms[vec] = terms.get(vec, MomPoly.zero(self.nvars)) + poly
        return ExpPolySum(self.nvars, terms)

    def __neg__(self) -> "ExpPolySum":
        return ExpPolySum(self.nvars, {v: -p for v, p in self.terms.items()})

    def __sub__(self, other: "ExpPolySum") -> "ExpPolySum":
        return self + (-other)

    def __mul__(self, other: "ExpPolySum") -> "ExpPolySum":
        out: Dict[ExtVector, MomPoly] = {}
        for v1, p1 in self.terms.items():
            for v2, p2 in other.terms.items():
                vec = v1 + v2
                prod = p1 * p2
                out[vec] = out.get(vec, MomPoly.zero(self.nvars)) + prod
        return ExpPolySum(self.nvars, out)

    def diff_q(self, index: int) -> "ExpPolySum":
        return ExpPolySum(self.nvars, {
            v: p * Fraction(v[index]) for v, p in self.terms.items()
        })

    def diff_p(self, index: int) -> "ExpPolySum":
        return ExpPolySum(self.nvars, {v: p.diff(index)
                                       for v, p in self.terms.items()})

    def eval(self, pt: PhasePoint,
             subs: Optional[Mapping[str, float]] = None) -> float:
        qext = np.concatenate([pt.q, [pt.u]])
        mom = np.concatenate([pt.p, [pt.phi]])
        total = 0.0
        for vec, poly in self.terms.items():
            expo = float(np.dot(vec.floats(), qext))
            if expo > EXP_GUARD:
                raise OverflowGuard(f"exponent {expo:.3g} in ExpPolySum")
            total += poly.eval(mom, subs) * math.exp(expo)
        return total

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExpPolySum):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def text(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"({poly.text()})*exp[{vec}]"
                          for vec, poly in self.items())

    __str__ = text

    def __repr__(self) -> str:
        return f"ExpPolySum({self.text()})"


def poisson_bracket(f: ExpPolySum, g: ExpPolySum) -> ExpPolySum:
    """Canonical bracket: slot r+1 is the conjugate pair (u, phi)."""
    if f.nvars != g.nvars:
        raise DimensionMismatch("bracket of sums over different orbits")
    out = ExpPolySum(f.nvars)
    for i in range(f.nvars):
        out = out + f.diff_q(i) * g.diff_p(i) - f.diff_p(i) * g.diff_q(i)
    return out


# -- the steady Hamiltonian as an exact object ------------------------------------

def j_mompoly(orbit: OrbitData) -> MomPoly:
    nv = orbit.r + 1
    out = MomPoly.zero(nv)
    phi = MomPoly.variable(nv, orbit.r)
    for i in range(orbit.r):
        p_i = MomPoly.variable(nv, i)
        out = out + p_i * p_i * Fraction(1, orbit.d[i]) + phi * p_i
    out = out + phi * phi * Fraction(orbit.n - 1, 4)
    return -out


def steady_hamiltonian(orbit: OrbitData,
                       E: Optional[LaurentScalar] = None) -> ExpPolySum:
    if E is None:
        E = E_SYMBOLIC
    nv = orbit.r + 1
    half_d = orbit.d_ext.half()
    terms: Dict[ExtVector, MomPoly] = {
        half_d.scale(-1): j_mompoly(orbit),
        half_d: MomPoly.const(nv, -E),
    }
    for wt in orbit.weights:
        vec = half_d + wt.extended()
        terms[vec] = terms.get(vec, MomPoly.zero(nv)) + MomPoly.const(nv, -wt.A)
    return ExpPolySum(nv, terms)


# -- seed factorizations ------------------------------------------------------------

@dataclass(frozen=True)
class SeedFactorization:
    c: ExtVector
    theta: MomPoly


def factorization_seed(orbit: OrbitData) -> Optional[SeedFactorization]:
    """Rational factorization J = (c.grad J) theta for sphere-type orbits.

    Exists over Q iff n is a perfect square; n = 1 uses the second root so
    theta = p + phi (the low-dimensional convention).  Returns None (with
    the reason being the irrationality of sqrt n) otherwise.
    """
    if orbit.r != 1:
        return None
    n = orbit.n
    root = math.isqrt(n)
    if root * root != n:
        return None
    m = -1 if n == 1 else root
    c = ExtVector.of([Fraction(-(n + m), 2), 1])
    theta = -(MomPoly.variable(2, 0) * Fraction(1, m)
              + MomPoly.variable(2, 1) * Fraction(m - 1, 2))
    jpoly = j_mompoly(orbit)
    ell = jpoly.directional(c.entries)
    assert ell * theta == jpoly, "seed factorization failed (internal bug)"
    return SeedFactorization(c=c, theta=theta)


@dataclass(frozen=True)
class Seed:
    c: ExtVector
    F_c: MomPoly
    psi_c: MomPoly


def default_seed(orbit: OrbitData) -> Seed:
    """The seed choices that behind the known 2D and 5D integrals."""
    fact = factorization_seed(orbit)
    if fact is None:
        raise BadParams(
            f"no rational seed factorization for orbit {orbit.name} "
            f"(need r=1 and n a perfect square; n={orbit.n})"
        )
    if orbit.n == 4:
        psi = -fact.theta
    else:
        psi = MomPoly.const(2, 1)
    return Seed(c=fact.c, F_c=fact.theta * psi, psi_c=psi)


def seed_from_level(orbit: OrbitData, c: ExtVector,
                    psi_c: Optional[MomPoly] = None) -> Seed:
    """Build a seed from any level whose (c.grad J) divides J exactly."""
    jpoly = j_mompoly(orbit)
    ell = jpoly.directional(c.entries)
    if ell.is_zero():
        raise BadParams(f"level {c} has c.grad J = 0")
    theta = jpoly.try_exact_div(ell)
    if theta is None:
        raise BadParams(f"J is not divisible by c.grad J at level {c}")
    if psi_c is None:
        psi_c = MomPoly.const(orbit.r + 1, 1)
    return Seed(c=c, F_c=theta * psi_c, psi_c=psi_c)


# -- the recursion ---------------------------------------------------------------------

@dataclass(frozen=True)
class IntegralCertificate:
    F: ExpPolySum
    Phi: ExpPolySum
    residual: ExpPolySum
    trivial: bool
    levels: int
    table: Tuple[Tuple[ExtVector, MomPoly, MomPoly], ...]

    def is_valid(self) -> bool:
        return self.residual.is_zero()


def _solve_level(jpoly: MomPoly, level: ExtVector,
                 rhs: MomPoly) -> Tuple[MomPoly, MomPoly]:
    """Find (F, psi) with (level.grad J) F - psi J = rhs, lex-normalized."""
    nv = jpoly.nvars
    ell = jpoly.directional(level.entries)
    if ell.is_zero():
        psi = (-rhs).try_exact_div(jpoly)
        if psi is None:
            raise RecursionObstructed(
                f"level {level}: J does not divide the forced term",
                level=level, remainder=rhs)
        return MomPoly.zero(nv), psi

    coeffs = [ell.terms.get(tuple(1 if k == i else 0 for k in range(nv)),
                            LaurentScalar.zero()) for i in range(nv)]
    pivot = next(i for i, c in enumerate(coeffs) if not c.is_zero())
    replacement = MomPoly.zero(nv)
    for i, c in enumerate(coeffs):
        if i != pivot and not c.is_zero():
            replacement = replacement - MomPoly.variable(nv, i) * (c / coeffs[pivot])
    sigma_j = jpoly.substitute(pivot, replacement)
    sigma_rhs = rhs.substitute(pivot, replacement)

    if sigma_j.is_zero():
        quo = rhs.try_exact_div(ell)
        if quo is None:
            raise RecursionObstructed(
                f"level {level}: (b.grad J) | J but not the forced term",
                level=level, remainder=rhs)
        f_poly, psi = quo, MomPoly.zero(nv)
    else:
        ratio = sigma_rhs.try_exact_div(sigma_j)
        if ratio is None:
            raise RecursionObstructed(
                f"level {level}: forced term not divisible modulo b.grad J",
                level=level, remainder=rhs)
        psi = -ratio
        f_poly = (rhs + psi * jpoly).try_exact_div(ell)
        assert f_poly is not None, "lift must divide exactly (internal bug)"

    quo, rem = f_poly.divmod_by(jpoly)
    f_poly = rem
    psi = psi - ell * quo
    assert ell * f_poly - psi * jpoly == rhs, "level equation lost (internal bug)"
    return f_poly, psi


def recursion_solve(orbit: OrbitData, seed: Seed, levels: int = 3,
                    E: Optional[LaurentScalar] = None) -> IntegralCertificate:
    """Propagate the level recursion and certify the result exactly.

    ``levels`` bounds the lattice depth explored; the recursion must close
    (all forced right-hand sides on the frontier vanish) or
    :class:`RecursionObstructed` is raised.
    """
    if E is None:
        E = E_SYMBOLIC
    nv = orbit.r + 1
    jpoly = j_mompoly(orbit)
    e_const = MomPoly.const(nv, E)
    gens: List[Tuple[ExtVector, MomPoly]] = [(orbit.d_ext, e_const)]
    for wt in orbit.weights:
        gens.append((orbit.d_ext + wt.extended(), MomPoly.const(nv, wt.A)))

    ell_seed = jpoly.directional(seed.c.entries)
    if not (ell_seed * seed.F_c - seed.psi_c * jpoly).is_zero():
        raise RecursionObstructed(
            "seed does not satisfy its own level equation", level=seed.c)

    quo = seed.F_c.try_exact_div(jpoly)
    trivial = quo is not None and seed.psi_c == ell_seed * quo

    table: Dict[ExtVector, Tuple[MomPoly, MomPoly]] = {
        seed.c: (seed.F_c, seed.psi_c)}

    def forced_rhs(level: ExtVector) -> MomPoly:
        rhs = MomPoly.zero(nv)
        for gen_vec, coeff in gens:
            prev = table.get(level - gen_vec)
            if prev is None:
                continue
            f_prev, psi_prev = prev
            direction = gen_vec.entries
            rhs = rhs - coeff * (psi_prev + f_prev.directional(direction))
        return rhs

    for depth in range(1, levels + 1):
        for combo in itertools.combinations_with_replacement(range(len(gens)), depth):
            level = seed.c
            for idx in combo:
                level = level + gens[idx][0]
            if level in table:
                continue
            rhs = forced_rhs(level)
            if rhs.is_zero():
                continue
            table[level] = _solve_level(jpoly, level, rhs)

    # frontier: one step beyond every stored level must be force-free
    for level in list(table):
        for gen_vec, _ in gens:
            nxt = level + gen_vec
            if nxt in table:
                continue
            rhs = forced_rhs(nxt)
            if not rhs.is_zero():
                raise RecursionObstructed(
                    f"recursion does not close within {levels} levels at {nxt}",
                    level=nxt, remainder=rhs)

    f_total = ExpPolySum(nv, {v: fp for v, (fp, _) in table.items()})
    phi_total = ExpPolySum(nv, {
        v: psi + fp.directional(orbit.d_ext.entries) * Fraction(1, 2)
        for v, (fp, psi) in table.items()
    })
    ham = steady_hamiltonian(orbit, E)
    residual = poisson_bracket(f_total, ham) - phi_total * ham
    return IntegralCertificate(
        F=f_total, Phi=phi_total, residual=residual, trivial=trivial,
        levels=levels,
        table=tuple((v, fp, psi) for v, (fp, psi) in sorted(
            table.items(), key=lambda kv: kv[0].entries)),
    )


# -- drift of a putative integral along a trajectory -----------------------------------

def integral_drift(orbit: OrbitData, params, f: ExpPolySum, trajectory) -> float:
    """max |F(t) - F(0)| along a trajectory lying on the constraint surface."""
    if hasattr(trajectory, "phase_points"):
        points = trajectory.phase_points()
    else:
        points = list(trajectory)
    subs = {"s": math.sqrt(params.E)} if params.E >= 0 else {}
    values = [f.eval(pt, subs) for pt in points]
    if not values:
        return 0.0
    return max(abs(v - values[0]) for v in values)


# -- Darboux polynomials for the planar Bryant reduction --------------------------------

X_VAR, Y_VAR = 0, 1


def _xy(n_value: Optional[int]):
    x = MomPoly.variable(2, X_VAR)
    y = MomPoly.variable(2, Y_VAR)
    if n_value is None:
        n = MomPoly.const(2, LaurentScalar.gen("n"))
    else:
        n = MomPoly.const(2, n_value)
    return x, y, n


def bryant_planar_system(n_value: Optional[int] = None) -> Tuple[MomPoly, MomPoly]:
    """The planar reduction x' = x^2 - xy + n - 1, y' = x(y - nx)."""
    x, y, n = _xy(n_value)
    p = x * x - x * y + n - 1
    q = x * (y - n * x)
    return p, q


def darboux_j1(n_value: Optional[int] = None) -> MomPoly:
    x, y, n = _xy(n_value)
    return n * x * x - y * y + n * (n - 1)


def darboux_j2() -> MomPoly:
    x, y, _ = _xy(4)
    return 2 * x * x - x * y + 3


def darboux_verify(p: MomPoly, q: MomPoly, jpoly: MomPoly) -> Optional[MomPoly]:
    """Return the cofactor g with X(J) = g J, or None if J is not Darboux."""
    xj = jpoly.diff(X_VAR) * p + jpoly.diff(Y_VAR) * q
    return xj.try_exact_div(jpoly)


def divergence(p: MomPoly, q: MomPoly) -> MomPoly:
    return p.diff(X_VAR) + q.diff(Y_VAR)


def integrating_factor_check(n_value: int = 4,
                             grid: Optional[Sequence[Tuple[float, float]]] = None,
                             ) -> float:
    """max |X(R) + div(X) R| with R = sqrt(J1)/J2 over a grid (analytically 0).

    X(R) is evaluated from analytic partial derivatives of J1 and J2, not
    from the cofactor identities, so this is an independent floating check.
    """
    p, q = bryant_planar_system(n_value)
    j1, j2 = darboux_j1(n_value), darboux_j2()
    if grid is None:
        grid = default_grid()
    worst = 0.0
    for x, y in grid:
        vals = (x, y)
        j1v, j2v = j1.eval(vals), j2.eval(vals)
        if j1v <= 0 or abs(j2v) < 1e-9:
            continue
        pv, qv = p.eval(vals), q.eval(vals)
        r = math.sqrt(j1v) / j2v
        r_x = (j1.diff(X_VAR).eval(vals) / (2 * math.sqrt(j1v)) * j2v
               - math.sqrt(j1v) * j2.diff(X_VAR).eval(vals)) / j2v ** 2
        r_y = (j1.diff(Y_VAR).eval(vals) / (2 * math.sqrt(j1v)) * j2v
               - math.sqrt(j1v) * j2.diff(Y_VAR).eval(vals)) / j2v ** 2
        dev = r_x * pv + r_y * qv + divergence(p, q).eval(vals) * r
        worst = max(worst, abs(dev))
    return worst


def closedness_fd_check(n_value: int = 4, step: float = 1e-5,
                        grid: Optional[Sequence[Tuple[float, float]]] = None,
                        ) -> float:
    """max |(RQ)_y + (RP)_x| by central finite differences."""
    p, q = bryant_planar_system(n_value)
    j1, j2 = darboux_j1(n_value), darboux_j2()

    def r_at(x, y):
        j1v = j1.eval((x, y))
        j2v = j2.eval((x, y))
        return math.sqrt(j1v) / j2v

    if grid is None:
        grid = default_grid()
    worst = 0.0
    for x, y in grid:
        if j1.eval((x, y)) <= 0.05 or abs(j2.eval((x, y))) < 0.05:
            continue
        rq_y = (r_at(x, y + step) * q.eval((x, y + step))
                - r_at(x, y - step) * q.eval((x, y - step))) / (2 * step)
        rp_x = (r_at(x + step, y) * p.eval((x + step, y))
                - r_at(x - step, y) * p.eval((x - step, y))) / (2 * step)
        worst = max(worst, abs(rq_y + rp_x))
    return worst


def default_grid(side: int = 20, lo: float = 0.1, hi: float = 2.0
                 ) -> List[Tuple[float, float]]:
    xs = np.linspace(lo, hi, side)
    return [(float(x), float(y)) for x in xs for y in xs]
