"""Closed-form soliton catalog with analytic first and second derivatives.

Every entry hand-codes h_i, u and their derivatives (no numeric
differentiation anywhere), states its domain, and knows its orbit, so the
residual machinery can verify each curve solves the full second-order
system.  Conventions: the additive constant of u is fixed by u(1) = 0
whenever t = 1 lies in the domain (callers may override with ``u0``); the
first-integral constant mu rescales accordingly and is surfaced by reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import BadParams
from .orbit_model import OrbitData, make_orbit
from .phase_dynamics import CurveSample, Params, PhasePoint, VelocityPoint, \
    legendre_forward


# -- orbit presets ---------------------------------------------------------------

def sphere_orbit(n: int) -> OrbitData:
    if n < 1:
        raise BadParams("sphere orbit needs n >= 1")
    if n == 1:
        return make_orbit([1], [], name="circle")
    return make_orbit([n], [((-1,), n * (n - 1))], name=f"sphere{n}")


def circle_orbit() -> OrbitData:
    return sphere_orbit(1)


def warped_orbit(d1: int, d2: int) -> OrbitData:
    weights = []
    if d1 > 1:
        weights.append(((-1, 0), d1 * (d1 - 1)))
    if d2 > 1:
        weights.append(((0, -1), d2 * (d2 - 1)))
    return make_orbit([d1, d2], weights, name=f"warped{d1}{d2}")


def bbc_orbit(ms: Sequence[int], bs: Sequence[int], kappas: Sequence,
              name: str = "bbc") -> OrbitData:
    """Circle-bundle orbit over a product of Fano factors.

    ``ms`` are complex dimensions (summand dims 2 m_i), ``bs`` Euler-class
    coefficients, ``kappas`` Fano indices.  Weight coefficients follow the
    ansatz arithmetic: A = -(1/4) d_i b_i^2 on the (1, ..., -2, ...) weights
    and A = d_i kappa_i on the (0, ..., -1, ...) weights.
    """
    if not (len(ms) == len(bs) == len(kappas)):
        raise BadParams("ms, bs, kappas must have equal length")
    r = len(ms) + 1
    dims = [1] + [2 * int(m) for m in ms]
    weights = []
    for idx, (m, b, kap) in enumerate(zip(ms, bs, kappas), start=1):
        d_i = 2 * int(m)
        w3 = [0] * r
        w3[0], w3[idx] = 1, -2
        weights.append((tuple(w3), Fraction(-d_i * b * b, 4)))
        w1 = [0] * r
        w1[idx] = -1
        weights.append((tuple(w1), Fraction(d_i) * Fraction(kap)))
    return make_orbit(dims, weights, name=name)


# -- the solution-curve container ---------------------------------------------------

@dataclass(frozen=True)
class SolutionCurve:
    """A catalog entry: analytic evaluators on an open t-domain."""

    id: str
    orbit: OrbitData
    params: Dict[str, float]
    domain: Tuple[float, float]
    h: Callable[[float], np.ndarray]
    hdot: Callable[[float], np.ndarray]
    hddot: Callable[[float], np.ndarray]
    u: Callable[[float], float]
    udot: Callable[[float], float]
    uddot: Callable[[float], float]
    collapsing: Optional[int] = None

    @property
    def E(self) -> float:
        return self.params.get("E", 0.0)

    def params_obj(self) -> Params:
        return Params.make(self.orbit, epsilon=0.0, E=self.E)

    def check_domain(self, t: float) -> None:
        lo, hi = self.domain
        if not (lo < t < hi):
            raise BadParams(f"t={t} outside domain ({lo}, {hi}) of {self.id}")

    def sample(self, t: float) -> CurveSample:
        self.check_domain(t)
        h = self.h(t)
        hd = self.hdot(t)
        hdd = self.hddot(t)
        q = 2.0 * np.log(h)
        qdot = 2.0 * hd / h
        qddot = 2.0 * (hdd / h - (hd / h) ** 2)
        return CurveSample(q=q, u=self.u(t), qdot=qdot, udot=self.udot(t),
                           qddot=qddot, uddot=self.uddot(t))

    def velocity_point(self, t: float) -> VelocityPoint:
        sm = self.sample(t)
        return VelocityPoint(q=sm.q, u=sm.u, qdot=sm.qdot, udot=sm.udot)

    def phase_point(self, t: float, params: Optional[Params] = None) -> PhasePoint:
        if params is None:
            params = self.params_obj()
        return legendre_forward(self.orbit, params, self.velocity_point(t))

    def grid(self, lo: Optional[float] = None, hi: Optional[float] = None,
             count: int = 100) -> np.ndarray:
        dlo, dhi = self.domain
        if lo is None:
            if math.isfinite(dlo):
                lo = dlo + 0.05
            elif math.isfinite(dhi):
                lo = dhi - 5.05
            else:
                lo = 0.05
        if hi is None:
            hi = lo + 5.0
            if math.isfinite(dhi):
                hi = min(hi, dhi - 0.05)
        if not lo < hi:
            raise BadParams(f"empty grid for domain ({dlo}, {dhi})")
        return np.linspace(lo, hi, count)


def _sqrt_curve(alpha: Callable[[float], float],
                alphadot: Callable[[float], float],
                alphaddot: Callable[[float], float]):
    """h = sqrt(alpha) and derivatives from alpha and its derivatives."""

    def h(t):
        return math.sqrt(alpha(t))

    def hdot(t):
        return alphadot(t) / (2.0 * h(t))

    def hddot(t):
        a, ad, add = alpha(t), alphadot(t), alphaddot(t)
        return add / (2.0 * math.sqrt(a)) - ad * ad / (4.0 * a ** 1.5)

    return h, hdot, hddot


def _require_positive(name: str, value: float) -> float:
    value = float(value)
    if value <= 0:
        raise BadParams(f"{name} must be positive (blow-up families need E > 0)")
    return value


# -- catalog families -----------------------------------------------------------------

def _bryant_conical(E: float = 1.0, t0: float = 0.0,
                    u0: Optional[float] = None) -> SolutionCurve:
    E = _require_positive("E", E)
    rE = math.sqrt(E)
    slope = 6.0 / rE
    if u0 is None:
        u0 = rE - math.log(1.0 + t0) if 1.0 + t0 > 0 else 0.0

    def alpha(t):
        return slope * (t + t0)

    h, hdot, hddot = _sqrt_curve(alpha, lambda t: slope, lambda t: 0.0)
    return SolutionCurve(
        id="bryant5-conical", orbit=sphere_orbit(4),
        params={"E": E, "t0": t0, "u0": u0}, domain=(-t0, math.inf),
        h=lambda t: np.array([h(t)]),
        hdot=lambda t: np.array([hdot(t)]),
        hddot=lambda t: np.array([hddot(t)]),
        u=lambda t: -rE * t + math.log(t + t0) + u0,
        udot=lambda t: -rE + 1.0 / (t + t0),
        uddot=lambda t: -1.0 / (t + t0) ** 2,
        collapsing=0,
    )


def _bryant_coth_family(curve_id: str, E: float, t1: float,
                        u0: Optional[float]) -> SolutionCurve:
    """alpha = (6/sqrt E)((t + t1) coth((sqrt E/2) t) - 2/sqrt E); t1=0 smooth."""
    E = _require_positive("E", E)
    rE = math.sqrt(E)

    def coth(t):
        return 1.0 / math.tanh(0.5 * rE * t)

    def cdot(t):
        c = coth(t)
        return -0.5 * rE * (c * c - 1.0)

    def cddot(t):
        return -rE * coth(t) * cdot(t)

    def alpha(t):
        return (6.0 / rE) * ((t + t1) * coth(t) - 2.0 / rE)

    def alphadot(t):
        return (6.0 / rE) * (coth(t) + (t + t1) * cdot(t))

    def alphaddot(t):
        return (6.0 / rE) * (2.0 * cdot(t) + (t + t1) * cddot(t))

    def u_raw(t):
        c = coth(t)
        return math.log(c * c - 1.0) + math.log(alpha(t))

    if u0 is None:
        u0 = -u_raw(1.0)

    def udot(t):
        return -rE * coth(t) + alphadot(t) / alpha(t)

    def uddot(t):
        return -rE * cdot(t) + alphaddot(t) / alpha(t) \
            - (alphadot(t) / alpha(t)) ** 2

    h, hdot, hddot = _sqrt_curve(alpha, alphadot, alphaddot)
    return SolutionCurve(
        id=curve_id, orbit=sphere_orbit(4),
        params={"E": E, "t1": t1, "u0": u0}, domain=(0.0, math.inf),
        h=lambda t: np.array([h(t)]),
        hdot=lambda t: np.array([hdot(t)]),
        hddot=lambda t: np.array([hddot(t)]),
        u=lambda t: u_raw(t) + u0, udot=udot, uddot=uddot,
        collapsing=0,
    )


def _bryant_smooth(E: float = 1.0, u0: Optional[float] = None) -> SolutionCurve:
    return _bryant_coth_family("bryant5-smooth", E, 0.0, u0)


def _bryant_singular_negmu(E: float = 1.0, t1: float = 1.0,
                           u0: Optional[float] = None) -> SolutionCurve:
    if t1 <= 0:
        raise BadParams("the 1/t blow-up family needs t1 > 0")
    return _bryant_coth_family("bryant5-singular-negmu", E, t1, u0)


def posmu_t0_root(E: float, tol: float = 1e-13) -> float:
    """Unique positive root of (sqrt E / 2) t0 tanh((sqrt E / 2) t0) = 1."""
    E = _require_positive("E", E)
    rE = math.sqrt(E)

    def g(t0):
        return 0.5 * rE * t0 * math.tanh(0.5 * rE * t0) - 1.0

    lo, hi = 1e-6, 50.0 / rE
    if g(lo) >= 0 or g(hi) <= 0:
        raise BadParams("bisection bracket failed for the t0 root")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _bryant_posmu(E: float = 1.0, u0: Optional[float] = None) -> SolutionCurve:
    E = _require_positive("E", E)
    rE = math.sqrt(E)
    t0 = posmu_t0_root(E)

    def th(t):
        return math.tanh(0.5 * rE * (t + t0))

    def thdot(t):
        v = th(t)
        return 0.5 * rE * (1.0 - v * v)

    def thddot(t):
        return -rE * th(t) * thdot(t)

    def alpha(t):
        return (6.0 / rE) * ((t + t0) * th(t) - 2.0 / rE)

    def alphadot(t):
        return (6.0 / rE) * (th(t) + (t + t0) * thdot(t))

    def alphaddot(t):
        return (6.0 / rE) * (2.0 * thdot(t) + (t + t0) * thddot(t))

    def u_raw(t):
        return -2.0 * math.log(math.cosh(0.5 * rE * (t + t0))) \
            + math.log(alpha(t))

    if u0 is None:
        u0 = -u_raw(1.0)

    def udot(t):
        return -rE * th(t) + alphadot(t) / alpha(t)

    def uddot(t):
        return -rE * thdot(t) + alphaddot(t) / alpha(t) \
            - (alphadot(t) / alpha(t)) ** 2

    h, hdot, hddot = _sqrt_curve(alpha, alphadot, alphaddot)
    return SolutionCurve(
        id="bryant5-posmu", orbit=sphere_orbit(4),
        params={"E": E, "t0": t0, "u0": u0}, domain=(0.0, math.inf),
        h=lambda t: np.array([h(t)]),
        hdot=lambda t: np.array([hdot(t)]),
        hddot=lambda t: np.array([hddot(t)]),
        u=lambda t: u_raw(t) + u0, udot=udot, uddot=uddot,
        collapsing=0,
    )


def _warped_smooth(E: float = 1.0, swap: bool = False,
                   u0: Optional[float] = None) -> SolutionCurve:
    E = _require_positive("E", E)
    rE = math.sqrt(E)

    def tanh_half(t):
        return math.tanh(0.5 * rE * t)

    def alpha_pair(t):
        th = tanh_half(t)
        a1 = (2.0 / rE) * t * th
        a2 = (2.0 / rE) * t / th
        return (a2, a1) if swap else (a1, a2)

    def alphadot_pair(t):
        th = tanh_half(t)
        thd = 0.5 * rE * (1.0 - th * th)
        a1 = (2.0 / rE) * (th + t * thd)
        a2 = (2.0 / rE) * (1.0 / th - t * thd / th ** 2)
        return (a2, a1) if swap else (a1, a2)

    def alphaddot_pair(t):
        th = tanh_half(t)
        thd = 0.5 * rE * (1.0 - th * th)
        thdd = -rE * th * thd
        a1 = (2.0 / rE) * (2.0 * thd + t * thdd)
        # d^2/dt^2 [t/th] = -2 thd/th^2 - t thdd/th^2 + 2 t thd^2/th^3
        a2 = (2.0 / rE) * (-2.0 * thd / th ** 2 - t * thdd / th ** 2
                           + 2.0 * t * thd * thd / th ** 3)
        return (a2, a1) if swap else (a1, a2)

    if u0 is None:
        u0 = 0.0  # log(t sinh(rE)/sinh(rE t)) already vanishes at t = 1

    def u(t):
        return math.log(t) - math.log(math.sinh(rE * t)) \
            + math.log(math.sinh(rE)) + u0

    def udot(t):
        return 1.0 / t - rE / math.tanh(rE * t)

    def uddot(t):
        c = 1.0 / math.tanh(rE * t)
        return -1.0 / t ** 2 + E * (c * c - 1.0)

    def h(t):
        return np.array([math.sqrt(a) for a in alpha_pair(t)])

    def hdot(t):
        return np.array([ad / (2.0 * math.sqrt(a))
                         for a, ad in zip(alpha_pair(t), alphadot_pair(t))])

    def hddot(t):
        out = []
        for a, ad, add in zip(alpha_pair(t), alphadot_pair(t),
                              alphaddot_pair(t)):
            out.append(add / (2.0 * math.sqrt(a)) - ad * ad / (4.0 * a ** 1.5))
        return np.array(out)

    return SolutionCurve(
        id="warped-smooth" + ("-swapped" if swap else ""),
        orbit=warped_orbit(2, 2), params={"E": E, "u0": u0},
        domain=(0.0, math.inf), h=h, hdot=hdot, hddot=hddot,
        u=u, udot=udot, uddot=uddot,
        collapsing=1 if swap else 0,
    )


def _warped_special(E: float = 1.0, t0: float = 0.0, sign: int = 1,
                    u0: Optional[float] = None) -> SolutionCurve:
    E = _require_positive("E", E)
    if sign not in (1, -1):
        raise BadParams("sign must be +1 or -1")
    rE = math.sqrt(E)
    domain = (-t0, math.inf) if sign == 1 else (-math.inf, -t0)
    if u0 is None:
        u0 = (rE - math.log(1.0 + t0)) if sign == 1 and 1.0 + t0 > 0 else 0.0

    def alpha(t):
        return sign * (2.0 / rE) * (t + t0)

    h1, h1dot, h1ddot = _sqrt_curve(alpha, lambda t: sign * 2.0 / rE,
                                    lambda t: 0.0)
    return SolutionCurve(
        id="warped-special", orbit=warped_orbit(2, 2),
        params={"E": E, "t0": t0, "sign": sign, "u0": u0}, domain=domain,
        h=lambda t: np.array([h1(t), h1(t)]),
        hdot=lambda t: np.array([h1dot(t), h1dot(t)]),
        hddot=lambda t: np.array([h1ddot(t), h1ddot(t)]),
        u=lambda t: -sign * rE * t + math.log(sign * (t + t0)) + u0,
        udot=lambda t: -sign * rE + 1.0 / (t + t0),
        uddot=lambda t: -1.0 / (t + t0) ** 2,
    )


def _cigar(a: float = 1.0, u0: Optional[float] = None) -> SolutionCurve:
    a = _require_positive("a", a)
    E = 2.0 * a  # smoothness ties the energy to the superpotential slope
    rE = math.sqrt(E)
    scale = rE / a

    def th(t):
        return math.tanh(0.5 * rE * t)

    def thdot(t):
        v = th(t)
        return 0.5 * rE * (1.0 - v * v)

    if u0 is None:
        u0 = 2.0 * math.log(math.cosh(0.5 * rE))
    return SolutionCurve(
        id="cigar", orbit=circle_orbit(), params={"E": E, "a": a, "u0": u0},
        domain=(0.0, math.inf),
        h=lambda t: np.array([scale * th(t)]),
        hdot=lambda t: np.array([scale * thdot(t)]),
        hddot=lambda t: np.array([-scale * rE * th(t) * thdot(t)]),
        u=lambda t: -2.0 * math.log(math.cosh(0.5 * rE * t)) + u0,
        udot=lambda t: -rE * th(t),
        uddot=lambda t: -rE * thdot(t),
        collapsing=0,
    )


def _cylinder(E: float = 1.0, a: float = 1.0,
              u0: Optional[float] = None) -> SolutionCurve:
    E = _require_positive("E", E)
    a = _require_positive("a", a)
    rE = math.sqrt(E)
    radius = rE / a
    if u0 is None:
        u0 = rE
    return SolutionCurve(
        id="cylinder", orbit=circle_orbit(), params={"E": E, "a": a, "u0": u0},
        domain=(-math.inf, math.inf),
        h=lambda t: np.array([radius]),
        hdot=lambda t: np.array([0.0]),
        hddot=lambda t: np.array([0.0]),
        u=lambda t: -rE * t + u0,
        udot=lambda t: -rE,
        uddot=lambda t: 0.0,
    )


def _flatcone(a: float = 2.0, t0: float = 0.0,
              u0: float = 0.0) -> SolutionCurve:
    if a == 0:
        raise BadParams("flat cone needs a != 0")
    return SolutionCurve(
        id="flatcone", orbit=circle_orbit(),
        params={"E": 0.0, "a": a, "t0": t0, "u0": u0}, domain=(-t0, math.inf),
        h=lambda t: np.array([0.5 * a * (t + t0)]),
        hdot=lambda t: np.array([0.5 * a]),
        hddot=lambda t: np.array([0.0]),
        u=lambda t: u0,
        udot=lambda t: 0.0,
        uddot=lambda t: 0.0,
        collapsing=0,
    )


def _exploding(a: float = 1.0, t0: float = 0.0,
               u0: Optional[float] = None) -> SolutionCurve:
    a = _require_positive("a", a)
    if u0 is None:
        u0 = 2.0 * math.log(1.0 + t0) if 1.0 + t0 > 0 else 0.0
    return SolutionCurve(
        id="exploding", orbit=circle_orbit(),
        params={"E": 0.0, "a": a, "t0": t0, "u0": u0}, domain=(-t0, math.inf),
        h=lambda t: np.array([2.0 / (a * (t + t0))]),
        hdot=lambda t: np.array([-2.0 / (a * (t + t0) ** 2)]),
        hddot=lambda t: np.array([4.0 / (a * (t + t0) ** 3)]),
        u=lambda t: -2.0 * math.log(t + t0) + u0,
        udot=lambda t: -2.0 / (t + t0),
        uddot=lambda t: 2.0 / (t + t0) ** 2,
    )


CATALOG: Dict[str, Callable[..., SolutionCurve]] = {
    "bryant5-conical": _bryant_conical,
    "bryant5-smooth": _bryant_smooth,
    "bryant5-singular-negmu": _bryant_singular_negmu,
    "bryant5-posmu": _bryant_posmu,
    "warped-smooth": _warped_smooth,
    "warped-special": _warped_special,
    "cigar": _cigar,
    "cylinder": _cylinder,
    "flatcone": _flatcone,
    "exploding": _exploding,
}


def closed_form(curve_id: str, **params) -> SolutionCurve:
    if curve_id == "warped-smooth-swapped":
        params.setdefault("swap", True)
        curve_id = "warped-smooth"
    if curve_id not in CATALOG:
        raise BadParams(f"unknown catalog id {curve_id!r}; "
                        f"known: {', '.join(sorted(CATALOG))}")
    try:
        return CATALOG[curve_id](**params)
    except TypeError as exc:
        raise BadParams(f"{curve_id} does not take {sorted(params)}: {exc}")


def catalog_ids() -> List[str]:
    return sorted(CATALOG) + ["warped-smooth-swapped"]


def volume_balanced(curve_id: str, t_mid: float, **params) -> SolutionCurve:
    """Rebuild a catalog curve in the u-gauge with unit dilaton volume at t_mid.

    u is only defined up to a constant; this gauge keeps the momenta O(1)
    near the middle of an integration span, which is the regime where an
    absolute tolerance on the Hamiltonian drift is meaningful.
    """
    base = closed_form(curve_id, **params)
    q = 2.0 * np.log(base.h(t_mid))
    delta = 0.5 * float(np.dot(base.orbit.d, q)) - base.u(t_mid)
    params = dict(params)
    params["u0"] = base.params["u0"] + delta
    return closed_form(curve_id, **params)


# -- quadrature route to the rotationally symmetric 5D family -----------------------------

@dataclass(frozen=True)
class BetaQuadrature:
    """Evaluators from integrating the conservation law and the linear step.

    beta solves (beta')^2 = E - mu e^{-beta}; alpha solves the linear
    equation 2 beta' alpha' - mu e^{-beta} alpha = 12; u = -beta + log alpha.
    """

    E: float
    mu: float
    t0: float
    t1: float
    beta: Callable[[float], float]
    alpha: Callable[[float], float]
    u: Callable[[float], float]


def beta_quadrature(E: float, mu: float, t0: float = 0.0,
                    t1: float = 0.0) -> BetaQuadrature:
    E = _require_positive("E", E)
    rE = math.sqrt(E)

    if mu < 0:
        def beta(t):
            return math.log(-mu / E) + 2.0 * math.log(math.sinh(0.5 * rE * (t + t0)))

        def alpha(t):
            return (6.0 / rE) * ((t + t0 + t1) / math.tanh(0.5 * rE * (t + t0))
                                 - 2.0 / rE)
    elif mu > 0:
        def beta(t):
            return math.log(mu / E) + 2.0 * math.log(math.cosh(0.5 * rE * (t + t0)))

        def alpha(t):
            return (6.0 / rE) * ((t + t0 + t1) * math.tanh(0.5 * rE * (t + t0))
                                 - 2.0 / rE)
    else:
        def beta(t):
            return rE * (t + t0)

        def alpha(t):
            return (6.0 / rE) * (t + t0 + t1)

    def u(t):
        return -beta(t) + math.log(alpha(t))

    return BetaQuadrature(E=E, mu=mu, t0=t0, t1=t1, beta=beta, alpha=alpha, u=u)
