"""Superpotentials of exponential type and their first-order subsystems.

A superpotential is a function f(q, u) on configuration space whose gradient
graph lies inside the zero set of the steady Hamiltonian; for exponential
ansatz f = sum f_c e^{c.(q,u)} this reduces to the quadratic system

    sum_{a+c=b} J(a, c) f_a f_c  =  A_w  (b = d+w),   E  (b = d),   0  (else),

solved here exactly over Q[s, s^-1] with E = s^2.  The module provides the
exact residual, candidate-set construction, a branching exact solver (free
parameters are adjoined for one-parameter families), the non-existence
certificate for candidate hulls without J-null vertices, and extraction of
the induced first-order flow on configuration space.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import BadParams, DimensionMismatch, InconsistentSystem, OverflowGuard
from .laurent import E_SYMBOLIC, LaurentScalar
from .orbit_model import ExtVector, OrbitData
from .phase_dynamics import EXP_GUARD

PARAM_NAMES = "abcghjkm"


# -- exponential sums on configuration space -----------------------------------

class ExpSum:
    """Finite sum  sum_c  f_c e^{c.(q,u)}  with exact Laurent coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[ExtVector, LaurentScalar]] = None):
        cleaned: Dict[ExtVector, LaurentScalar] = {}
        if terms:
            for vec, coeff in terms.items():
                coeff = LaurentScalar.coerce(coeff)
                if not coeff.is_zero():
                    cleaned[vec] = coeff
        self.terms = cleaned

    @classmethod
    def single(cls, vec: ExtVector, coeff) -> "ExpSum":
        return cls({vec: LaurentScalar.coerce(coeff)})

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def items(self) -> List[Tuple[ExtVector, LaurentScalar]]:
        return sorted(self.terms.items(), key=lambda kv: kv[0].entries)

    def __add__(self, other: "ExpSum") -> "ExpSum":
        terms = dict(self.terms)
        for vec, coeff in other.terms.items():
            terms[vec] = terms.get(vec, LaurentScalar.zero()) + coeff
        return ExpSum(terms)

    def __neg__(self) -> "ExpSum":
        return ExpSum({v: -c for v, c in self.terms.items()})

    def __sub__(self, other: "ExpSum") -> "ExpSum":
        return self + (-other)

    def scale(self, factor) -> "ExpSum":
        factor = LaurentScalar.coerce(factor)
        return ExpSum({v: c * factor for v, c in self.terms.items()})

    def subs_gen(self, name: str, value: LaurentScalar) -> "ExpSum":
        return ExpSum({v: c.subs_gen(name, value) for v, c in self.terms.items()})

    def parameters(self) -> Tuple[str, ...]:
        gens = set()
        for coeff in self.terms.values():
            gens |= {g for g in coeff.generators()
                     if g != "s" and not g.startswith("sqrt(")}
        return tuple(sorted(gens))

    def eval(self, qext: Sequence[float],
             subs: Optional[Mapping[str, float]] = None) -> float:
        total = 0.0
        for vec, coeff in self.terms.items():
            expo = float(np.dot(vec.floats(), qext))
            if expo > EXP_GUARD:
                raise OverflowGuard(f"exponent {expo:.3g} in ExpSum evaluation")
            total += coeff.eval(subs) * math.exp(expo)
        return total

    def grad_eval(self, qext: Sequence[float],
                  subs: Optional[Mapping[str, float]] = None) -> np.ndarray:
        """Euclidean (q,u)-gradient evaluated at a point."""
        out = np.zeros(len(qext))
        for vec, coeff in self.terms.items():
            expo = float(np.dot(vec.floats(), qext))
            if expo > EXP_GUARD:
                raise OverflowGuard(f"exponent {expo:.3g} in ExpSum gradient")
            out += coeff.eval(subs) * math.exp(expo) * np.array(vec.floats())
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExpSum):
            return NotImplemented
        return self.terms == other.terms

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        chunks = []
        for vec, coeff in self.items():
            ctext = str(coeff)
            if " " in ctext:
                ctext = f"({ctext})"
            chunks.append(f"{ctext}*exp[{vec}]")
        return " + ".join(chunks)

    __repr__ = __str__


def superpotential_residual(orbit: OrbitData, f: ExpSum,
                            E: Optional[LaurentScalar] = None) -> ExpSum:
    """J(grad f, grad f) - e^{d.q}(E + sum A_w e^{w.q}), exactly.

    Empty result certifies f as a superpotential (no tolerance anywhere).
    """
    if E is None:
        E = E_SYMBOLIC
    form = orbit.form
    items = list(f.terms.items())
    for vec, _ in items:
        if len(vec) != orbit.r + 1:
            raise DimensionMismatch(f"term exponent {vec} has wrong length")
    out: Dict[ExtVector, LaurentScalar] = {}

    def bump(vec: ExtVector, value: LaurentScalar) -> None:
        out[vec] = out.get(vec, LaurentScalar.zero()) + value

    for i, (ci, fi) in enumerate(items):
        for j in range(i, len(items)):
            cj, fj = items[j]
            jij = form.bilinear(ci.entries, cj.entries)
            if jij == 0:
                continue
            mult = Fraction(1) if i == j else Fraction(2)
            bump(ci + cj, fi * fj * (mult * jij))
    bump(orbit.d_ext, -E)
    for wt in orbit.weights:
        bump(orbit.d_ext + wt.extended(), LaurentScalar.rational(-wt.A))
    return ExpSum(out)


# -- exact convex hulls in low dimension -----------------------------------------

def _solve_exact(rows: List[List[Fraction]], rhs: List[Fraction]
                 ) -> Optional[List[Fraction]]:
    """Unique exact solution of rows . x = rhs, or None (singular/inconsistent)."""
    m, k = len(rows), len(rows[0]) if rows else 0
    aug = [row[:] + [rhs[i]] for i, row in enumerate(rows)]
    pivots = []
    row = 0
    for col in range(k):
        piv = next((i for i in range(row, m) if aug[i][col] != 0), None)
        if piv is None:
            continue
        aug[row], aug[piv] = aug[piv], aug[row]
        inv = 1 / aug[row][col]
        aug[row] = [a * inv for a in aug[row]]
        for i in range(m):
            if i != row and aug[i][col] != 0:
                factor = aug[i][col]
                aug[i] = [a - factor * b for a, b in zip(aug[i], aug[row])]
        pivots.append(col)
        row += 1
        if row == m:
            break
    for i in range(row, m):
        if aug[i][k] != 0:
            return None
    if len(pivots) < k:
        return None
    sol = [Fraction(0)] * k
    for i, col in enumerate(pivots):
        sol[col] = aug[i][k]
    return sol


def in_convex_hull(x: Sequence[Fraction], points: Sequence[Sequence[Fraction]]) -> bool:
    """Exact membership test via Caratheodory subsets."""
    dim = len(x)
    pts = [list(p) for p in points]
    if not pts:
        return False
    for size in range(1, min(len(pts), dim + 1) + 1):
        for subset in itertools.combinations(pts, size):
            rows = [[subset[j][i] for j in range(size)] for i in range(dim)]
            rows.append([Fraction(1)] * size)
            sol = _solve_exact(rows, list(x) + [Fraction(1)])
            if sol is not None and all(lam >= 0 for lam in sol):
                return True
    return False


def hull_vertices(points: Sequence[ExtVector]) -> List[ExtVector]:
    """Vertices of the convex hull of a small exact point set."""
    unique = sorted(set(points), key=lambda v: v.entries)
    out = []
    for vec in unique:
        others = [p.entries for p in unique if p != vec]
        if not others or not in_convex_hull(vec.entries, others):
            out.append(vec)
    return out


# -- candidate sets ------------------------------------------------------------------

@dataclass(frozen=True)
class Candidate:
    vec: ExtVector
    null: bool
    realizes: Optional[ExtVector]  # w in W tilde with 2c = d + w, if any


def candidate_set(orbit: OrbitData,
                  augment: Optional[Iterable[ExtVector]] = None,
                  extended: bool = False) -> List[Candidate]:
    """Default candidates (1/2)(d + W tilde), plus user augments.

    ``extended`` additionally scans (1/2)(d + x) for half-integer x inside
    the convex hull of the weight set (a small controlled search; the
    examples' extra candidates lie outside that hull and stay user-supplied).
    """
    form = orbit.form
    wtilde = orbit.weights_with_zero()
    vecs: List[ExtVector] = [(orbit.d_ext + w).half() for w, _ in wtilde]
    if extended:
        vecs.extend(_half_integer_hull_points(orbit))
    if augment:
        vecs.extend(augment)
    seen = set()
    out: List[Candidate] = []
    realized = {(orbit.d_ext + w).half(): w for w, _ in wtilde}
    for vec in vecs:
        if len(vec) != orbit.r + 1:
            raise DimensionMismatch(f"candidate {vec} has wrong length")
        if vec in seen:
            continue
        seen.add(vec)
        double = vec.scale(2) - orbit.d_ext
        realizes = realized.get(vec)
        if realizes is None and any(double == w for w, _ in wtilde):
            realizes = double
        out.append(Candidate(vec=vec, null=form.quadratic(vec.entries) == 0,
                             realizes=realizes))
    return out


def bbc_augment(orbit: OrbitData) -> List[ExtVector]:
    """The circle-bundle candidate pair (1/2)(d + (-+1, 0, ..., 0)).

    Together with the default set these reproduce the candidate geometry of
    the circle-bundle ansatz: both augments are null because d_1 = 1.
    """
    if orbit.d[0] != 1:
        raise BadParams("circle-bundle candidates need d_1 = 1")
    minus = ExtVector.of([-1] + [0] * orbit.r)
    plus = ExtVector.of([1] + [0] * orbit.r)
    return [(orbit.d_ext + minus).half(), (orbit.d_ext + plus).half()]


def _half_integer_hull_points(orbit: OrbitData) -> List[ExtVector]:
    wvecs = [[Fraction(0)] * orbit.r] + [list(wt.w) for wt in orbit.weights]
    lo = [min(w[i] for w in wvecs) for i in range(orbit.r)]
    hi = [max(w[i] for w in wvecs) for i in range(orbit.r)]
    axes = []
    for i in range(orbit.r):
        start = math.ceil(lo[i] * 2)
        stop = math.floor(hi[i] * 2)
        axes.append([Fraction(k, 2) for k in range(start, stop + 1)])
    out = []
    for combo in itertools.product(*axes):
        if in_convex_hull(list(combo), wvecs):
            x = ExtVector(tuple(combo) + (Fraction(0),))
            out.append((orbit.d_ext + x).half())
    return out


# -- non-existence certificate: the no-null-vertex obstruction -----------------

@dataclass(frozen=True)
class NoNullVertexCertificate:
    """Witness data for the no-null-vertex obstruction.

    Every hull vertex of the candidate set is non-null, so the affine
    function J(c0, .) is constant (= 1/4) along the hull edge from
    c0 = d/2 towards c1 = (d+w)/2, which contradicts the vertex law for the
    candidate adjacent to c0 on that edge.
    """

    vertices: Tuple[Tuple[ExtVector, Fraction], ...]
    edge_w: ExtVector
    c0: ExtVector
    c1: ExtVector
    j_c0_c0: Fraction
    j_c0_c1: Fraction


def nonexistence_certificate(orbit: OrbitData,
                             candidates: Sequence[Candidate | ExtVector]
                             ) -> Optional[NoNullVertexCertificate]:
    """Emit the non-existence certificate when no hull vertex is J-null.

    Returns None when inapplicable: some vertex is null, or the orbit has an
    empty weight set (the argument needs a vertex weight; for the circle the
    conclusion would in fact be false).
    """
    if not orbit.weights:
        return None
    vecs = [c.vec if isinstance(c, Candidate) else c for c in candidates]
    form = orbit.form
    verts = hull_vertices(vecs)
    tagged = tuple((v, form.quadratic(v.entries)) for v in verts)
    if any(j == 0 for _, j in tagged):
        return None
    wverts = hull_vertices([w for w, wt in orbit.weights_with_zero()
                            if wt is not None])
    w = wverts[0]
    c0 = orbit.d_ext.half()
    c1 = (orbit.d_ext + w).half()
    return NoNullVertexCertificate(
        vertices=tagged, edge_w=w, c0=c0, c1=c1,
        j_c0_c0=form.quadratic(c0.entries),
        j_c0_c1=form.bilinear(c0.entries, c1.entries),
    )


# -- the exact quadratic solver --------------------------------------------------------

@dataclass(frozen=True)
class SuperpotentialCertificate:
    kind: str  # "solution" | "nonexistence" | "no_solution"
    solution: Optional[ExpSum] = None
    parameters: Tuple[str, ...] = ()
    numeric: bool = False
    numeric_solution: Optional[Dict[ExtVector, float]] = None
    witness: Optional[NoNullVertexCertificate] = None
    obstruction: Optional[str] = None
    warnings: Tuple[str, ...] = ()

    def is_solution(self) -> bool:
        return self.kind == "solution"


@dataclass
class _Equation:
    level: ExtVector
    pairs: List[Tuple[int, int, Fraction]]
    rhs: LaurentScalar

    def describe(self, vecs) -> str:
        left = " + ".join(
            f"{m}*f[{vecs[i]}]*f[{vecs[j]}]" for i, j, m in self.pairs
        ) or "0"
        return f"level {self.level}: {left} = {self.rhs}"


def _build_equations(orbit: OrbitData, vecs: Sequence[ExtVector],
                     E: LaurentScalar) -> List[_Equation]:
    form = orbit.form
    pair_map: Dict[ExtVector, List[Tuple[int, int, Fraction]]] = {}
    for i in range(len(vecs)):
        for j in range(i, len(vecs)):
            jij = form.bilinear(vecs[i].entries, vecs[j].entries)
            if jij == 0:
                continue
            mult = Fraction(1) if i == j else Fraction(2)
            pair_map.setdefault(vecs[i] + vecs[j], []).append((i, j, mult * jij))
    rhs_map: Dict[ExtVector, LaurentScalar] = {orbit.d_ext: E}
    for wt in orbit.weights:
        rhs_map[orbit.d_ext + wt.extended()] = LaurentScalar.rational(wt.A)
    levels = set(pair_map) | set(rhs_map)
    out = []
    for level in sorted(levels, key=lambda v: v.entries):
        out.append(_Equation(level, pair_map.get(level, []),
                             rhs_map.get(level, LaurentScalar.zero())))
    return out


def vertex_sign_warnings(orbit: OrbitData) -> List[str]:
    """Vertex sign law of the candidate geometry, as non-blocking warnings."""
    form = orbit.form
    out = []
    for wvec, wt in orbit.weights_with_zero():
        if wt is None:
            continue  # zero vector carries E = s^2, positive for real s
        jdd = form.quadratic((orbit.d_ext + wvec).entries)
        if jdd == 0 or (jdd > 0) != (wt.A > 0):
            out.append(
                f"sign law: J(d+w, d+w) = {jdd} vs A_w = {wt.A} for w = {wvec}"
            )
    return out


class _Branch:
    __slots__ = ("values", "param_count", "dead")

    def __init__(self, nvals: int):
        self.values: List[Optional[LaurentScalar]] = [None] * nvals
        self.param_count = 0
        self.dead = False

    def clone(self) -> "_Branch":
        other = _Branch(len(self.values))
        other.values = list(self.values)
        other.param_count = self.param_count
        return other

    def radical_count(self) -> int:
        rads = set()
        for v in self.values:
            if v is not None:
                rads |= v.radical_names()
        return len(rads)

    def subs_param(self, name: str, value: LaurentScalar) -> None:
        try:
            self.values = [None if v is None else v.subs_gen(name, value)
                           for v in self.values]
        except ValueError:
            # e.g. a := 0 while some assigned value carries a^-1
            self.dead = True


class _NeedNumeric(Exception):
    pass


def _reduce(eq: _Equation, branch: _Branch):
    lin: Dict[int, LaurentScalar] = {}
    quad: Dict[Tuple[int, int], Fraction] = {}
    const = -eq.rhs
    for i, j, m in eq.pairs:
        vi, vj = branch.values[i], branch.values[j]
        if vi is not None and vj is not None:
            const = const + vi * vj * m
        elif vi is not None:
            lin[j] = lin.get(j, LaurentScalar.zero()) + vi * m
        elif vj is not None:
            lin[i] = lin.get(i, LaurentScalar.zero()) + vj * m
        else:
            quad[(i, j)] = quad.get((i, j), Fraction(0)) + m
    lin = {k: v for k, v in lin.items() if not v.is_zero()}
    quad = {k: v for k, v in quad.items() if v != 0}
    return lin, quad, const


def _params_of(value: LaurentScalar) -> List[str]:
    return sorted(g for g in value.generators()
                  if g != "s" and not g.startswith("sqrt("))


def _solve_param_constraint(const: LaurentScalar) -> Optional[List[Tuple[str, LaurentScalar]]]:
    """Solve a pure-parameter constraint = 0 for one parameter, if possible.

    Tries every parameter present; handles degree <= 2 after clearing a
    monomial.  Returns the exact roots for the first solvable parameter, or
    None (square roots outside the ring also end a branch here).
    """
    for name in _params_of(const):
        roots = _roots_in_param(const, name)
        if roots is not None:
            return [(name, root) for root in roots]
    return None


def _roots_in_param(const: LaurentScalar, name: str
                    ) -> Optional[List[LaurentScalar]]:
    buckets: Dict[int, LaurentScalar] = {}
    for mono, coeff in const.terms.items():
        exp = dict(mono).get(name, 0)
        rest = tuple((g, e) for g, e in mono if g != name)
        cur = buckets.get(exp, LaurentScalar.zero())
        buckets[exp] = cur + LaurentScalar({rest: coeff})
    shift = min(buckets)
    buckets = {k - shift: v for k, v in buckets.items()}
    degree = max(buckets)
    a2 = buckets.get(2, LaurentScalar.zero())
    a1 = buckets.get(1, LaurentScalar.zero())
    a0 = buckets.get(0, LaurentScalar.zero())
    if degree > 2:
        return None
    if degree <= 1:
        if a1.is_zero():
            return None
        root = (-a0).try_div(a1)
        return None if root is None else [root]
    try:
        disc = (a1 * a1 - 4 * a2 * a0).sqrt()
    except ValueError:
        return None
    roots = []
    for sgn in (1, -1):
        root = (-a1 + disc * sgn).try_div(2 * a2)
        if root is None:
            return None
        roots.append(root)
    return roots


def solve_superpotential(orbit: OrbitData,
                         candidates: Sequence[Candidate | ExtVector],
                         E: Optional[LaurentScalar] = None,
                         numeric_E: float = 1.0,
                         ) -> List[SuperpotentialCertificate]:
    """Exactly solve the quadratic coefficient system over the candidates.

    Every returned solution has been re-verified through
    :func:`superpotential_residual` (exact, zero tolerance).  When no
    assignment satisfies the system the single returned certificate carries
    the first obstructing equation.  Free one-parameter families keep a
    symbolic parameter.
    """
    if E is None:
        E = E_SYMBOLIC
    vecs = [c.vec if isinstance(c, Candidate) else c for c in candidates]
    if len(set(vecs)) != len(vecs):
        raise BadParams("duplicate candidate vectors")
    equations = _build_equations(orbit, vecs, E)
    warnings = tuple(vertex_sign_warnings(orbit))

    solutions: List[_Branch] = []
    obstructions: List[str] = []
    stack = [_Branch(len(vecs))]
    need_numeric = False

    while stack:
        branch = stack.pop()
        try:
            status = _advance(branch, equations, vecs, stack, obstructions)
        except _NeedNumeric:
            need_numeric = True
            continue
        if status:
            solutions.append(branch)

    certs: List[SuperpotentialCertificate] = []
    seen = set()
    for branch in solutions:
        expsum = _branch_to_expsum(vecs, branch)
        resid = superpotential_residual(orbit, expsum, E)
        if not resid.is_zero():
            # free parameters can hide a missed constraint; drop unsound output
            obstructions.append(f"residual check failed: {resid}")
            continue
        expsum = _normalise_solution(expsum)
        key = str(expsum)
        if key in seen:
            continue
        seen.add(key)
        certs.append(SuperpotentialCertificate(
            kind="solution", solution=expsum,
            parameters=expsum.parameters(), warnings=warnings))
    certs.sort(key=lambda c: str(c.solution))

    if need_numeric and not certs:
        numeric = solve_superpotential_numeric(orbit, vecs, numeric_E)
        if numeric:
            return numeric
    if not certs:
        detail = obstructions[0] if obstructions else "empty candidate set"
        return [SuperpotentialCertificate(
            kind="no_solution", obstruction=detail, warnings=warnings,
            witness=nonexistence_certificate(orbit, vecs))]
    return certs


def _advance(branch: _Branch, equations: List[_Equation], vecs,
             stack: List[_Branch], obstructions: List[str]) -> bool:
    """Run one branch to completion; push alternatives onto the stack.

    Returns True when the branch reached a fully consistent assignment.
    """
    guard = 0
    while True:
        guard += 1
        if guard > 400:
            raise InconsistentSystem("solver failed to converge (internal)")
        if branch.dead:
            return False
        progress = False
        single: Optional[Tuple[_Equation, dict, dict, LaurentScalar]] = None
        unknown_counts: Dict[int, int] = {}
        for eq in equations:
            lin, quad, const = _reduce(eq, branch)
            unknowns = set(lin) | {i for pair in quad for i in pair}
            for i in unknowns:
                unknown_counts[i] = unknown_counts.get(i, 0) + 1
            if not unknowns:
                if const.is_zero():
                    continue
                roots = _solve_param_constraint(const)
                if roots is None:
                    obstructions.append(eq.describe(vecs) + f" (residual {const})")
                    return False
                for name, value in roots[1:]:
                    alt = branch.clone()
                    alt.subs_param(name, value)
                    stack.append(alt)
                name, value = roots[0]
                branch.subs_param(name, value)
                progress = True
                break
            if len(unknowns) == 1 and single is None:
                single = (eq, lin, quad, const)
        if progress:
            continue
        if single is not None:
            eq, lin, quad, const = single
            i = next(iter(set(lin) | {k for pair in quad for k in pair}))
            k2 = quad.get((i, i), Fraction(0))
            k1 = lin.get(i, LaurentScalar.zero())
            if k2 == 0:
                if not _assign_linear(branch, i, k1, const, stack):
                    obstructions.append(eq.describe(vecs))
                    return False
            else:
                if not _assign_quadratic(branch, i, k2, k1, const, stack,
                                         obstructions, eq, vecs):
                    return False
            continue
        if all(v is not None for v in branch.values):
            return True
        # no single-unknown equation: adjoin a free parameter
        target = max(unknown_counts, key=lambda k: (unknown_counts[k], -k),
                     default=None)
        if target is None:
            target = next(k for k, v in enumerate(branch.values) if v is None)
        if branch.param_count >= len(PARAM_NAMES):
            raise _NeedNumeric
        name = PARAM_NAMES[branch.param_count]
        branch.param_count += 1
        branch.values[target] = LaurentScalar.gen(name)


def _assign_linear(branch: _Branch, i: int, k1: LaurentScalar,
                   const: LaurentScalar, stack: List[_Branch]) -> bool:
    """Solve k1*f + const = 0; branch on parameters k1 could vanish at."""
    for name in _params_of(k1):
        alt = branch.clone()
        alt.subs_param(name, LaurentScalar.zero())
        stack.append(alt)
    value = (-const).try_div(k1)
    if value is None:
        return False
    branch.values[i] = value
    return True


def _assign_quadratic(branch: _Branch, i: int, k2: Fraction, k1: LaurentScalar,
                      const: LaurentScalar, stack: List[_Branch],
                      obstructions: List[str], eq: _Equation, vecs) -> bool:
    try:
        disc = (k1 * k1 - 4 * Fraction(k2) * const).sqrt()
    except ValueError as exc:
        obstructions.append(eq.describe(vecs) + f" ({exc})")
        return False
    two_k2 = LaurentScalar.rational(2 * k2)
    plus = (-k1 + disc).try_div(two_k2)
    minus = (-k1 - disc).try_div(two_k2)
    if plus is None or minus is None:
        obstructions.append(eq.describe(vecs))
        return False
    if branch.radical_count() + len(disc.radical_names()) > 2:
        raise _NeedNumeric
    if plus != minus:
        alt = branch.clone()
        alt.values[i] = minus
        stack.append(alt)
    branch.values[i] = plus
    return True


def _branch_to_expsum(vecs, branch: _Branch) -> ExpSum:
    terms = {}
    for vec, value in zip(vecs, branch.values):
        if value is not None and not value.is_zero():
            terms[vec] = value
    return ExpSum(terms)


def _normalise_solution(expsum: ExpSum) -> ExpSum:
    """Canonical parameter names; global sign fixed at the smallest exponent."""
    params = expsum.parameters()
    renamed = expsum
    for old, new in zip(params, PARAM_NAMES):
        if old != new:
            renamed = renamed.subs_gen(old, LaurentScalar.gen(new))
    items = renamed.items()
    if not items:
        return renamed
    lead = items[0][1].lead_rational_at_s_inf()
    if lead < 0:
        renamed = renamed.scale(-1)
    return renamed


# -- numeric fallback ---------------------------------------------------------------

def solve_superpotential_numeric(orbit: OrbitData, vecs: Sequence[ExtVector],
                                 E_value: float = 1.0, tol: float = 1e-10,
                                 ) -> List[SuperpotentialCertificate]:
    """Gauss-Newton fallback for systems outside the exact coefficient ring."""
    vecs = [c.vec if isinstance(c, Candidate) else c for c in vecs]
    equations = _build_equations(orbit, vecs, LaurentScalar.rational(1))
    levels = [eq.level for eq in equations]
    rhs = np.array([eq.rhs.eval({}) for eq in equations])
    rhs[[i for i, level in enumerate(levels) if level == orbit.d_ext]] = E_value

    def residual(x):
        out = np.zeros(len(equations))
        for k, eq in enumerate(equations):
            acc = 0.0
            for i, j, m in eq.pairs:
                acc += float(m) * x[i] * x[j]
            out[k] = acc - rhs[k]
        return out

    def jacobian(x):
        jac = np.zeros((len(equations), len(vecs)))
        for k, eq in enumerate(equations):
            for i, j, m in eq.pairs:
                jac[k, i] += float(m) * x[j]
                jac[k, j] += float(m) * x[i]
        return jac

    rng = np.random.default_rng(20240811)
    found: List[np.ndarray] = []
    for _ in range(64):
        x = rng.normal(scale=2.0, size=len(vecs))
        for _ in range(80):
            res = residual(x)
            if np.max(np.abs(res)) < 1e-13:
                break
            step, *_ = np.linalg.lstsq(jacobian(x), -res, rcond=None)
            x = x + step
        if np.max(np.abs(residual(x))) < tol:
            if not any(np.allclose(x, y, atol=1e-8) for y in found):
                found.append(x)
    certs = []
    for x in sorted(found, key=lambda v: tuple(np.round(v, 8))):
        certs.append(SuperpotentialCertificate(
            kind="solution", numeric=True,
            numeric_solution={vec: float(val) for vec, val in zip(vecs, x)
                              if abs(val) > 1e-12}))
    if not certs:
        return [SuperpotentialCertificate(
            kind="no_solution", numeric=True,
            obstruction="numeric fallback found no root")]
    return certs


# -- first order subsystem -----------------------------------------------------------

class SubsystemField:
    """The flow  qdot = 2 v^{-1} J grad f  on configuration space.

    ``rhs`` is in integrator form over y = (q_1..q_r, u); ``lift`` returns
    the momenta (p, phi) = grad f of the invariant Lagrangian section.
    """

    def __init__(self, orbit: OrbitData, f: ExpSum, E_value: float):
        if E_value < 0:
            raise BadParams("E must be nonnegative for the first-order flow")
        s = math.sqrt(E_value)
        if s == 0.0:
            for coeff in f.terms.values():
                if any(dict(m).get("s", 0) < 0 for m in coeff.terms):
                    raise BadParams("E = 0 but the superpotential has s^-1 terms")
        if f.parameters():
            raise BadParams(
                f"superpotential still has free parameters {f.parameters()}; "
                "substitute them first"
            )
        self.orbit = orbit
        self.f = f
        self.E_value = float(E_value)
        self.subs = {"s": s}
        self.matrix = np.array([[float(x) for x in row]
                                for row in orbit.form.matrix()])
        self._dext = np.array([float(x) for x in orbit.d_ext.floats()])

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        expo = -0.5 * float(np.dot(self._dext, y))
        if expo > EXP_GUARD:
            raise OverflowGuard(f"subsystem volume exponent {expo:.3g}")
        grad = self.f.grad_eval(y, self.subs)
        return 2.0 * math.exp(expo) * (self.matrix @ grad)

    def lift(self, y: np.ndarray) -> Tuple[np.ndarray, float]:
        grad = self.f.grad_eval(y, self.subs)
        return grad[:-1], float(grad[-1])


def first_order_subsystem(orbit: OrbitData, f: ExpSum, E_value: float) -> SubsystemField:
    return SubsystemField(orbit, f, E_value)
