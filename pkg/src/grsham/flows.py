"""Flows: canonical and first-order integration, residual scans, smoothness.

The canonical flow runs on packed (q, u, p, phi); the first-order flow runs
on configuration space and is lifted to phase space through the gradient of
its superpotential for diagnostics.  Both record the Hamiltonian and any
registered conserved quantities along the way.  Residual scans apply the
second-order residuals with analytic derivative data from the catalog
curves, so integrator error never enters a verification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import dopri
from .catalog import SolutionCurve
from .errors import BadParams, OverflowGuard
from .orbit_model import OrbitData
from .phase_dynamics import (
    Params,
    PhasePoint,
    ambient_scalar_curvature,
    canonical_rhs,
    conservation_quantities,
    grs_residuals,
    hamiltonian_value,
)
from .superpotential import SubsystemField

ConservedMap = Mapping[str, Callable[[PhasePoint], float]]


@dataclass(frozen=True)
class Trajectory:
    """Sampled flow with per-sample diagnostics and integrator statistics."""

    orbit: OrbitData
    params: Params
    times: np.ndarray
    states: np.ndarray  # rows are packed (q, u, p, phi)
    hvalues: np.ndarray
    conserved: Dict[str, np.ndarray]
    stats: dopri.IntegratorStats
    reason: str

    def __post_init__(self):
        if len(self.times) != len(self.states) or len(self.times) != len(self.hvalues):
            raise ValueError("diagnostics do not match samples")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0) \
                and not np.all(np.diff(self.times) < 0):
            raise ValueError("sample times must be strictly monotone")

    def phase_points(self) -> List[PhasePoint]:
        return [PhasePoint.unpack(row, self.orbit.r) for row in self.states]

    def point(self, idx: int) -> PhasePoint:
        return PhasePoint.unpack(self.states[idx], self.orbit.r)

    def max_h_drift(self) -> float:
        return float(np.max(np.abs(self.hvalues - self.hvalues[0])))


def _collect(orbit: OrbitData, params: Params, result: dopri.IntegrationResult,
             t0: float, t1: float, n_samples: int,
             conserved: Optional[ConservedMap],
             lift: Optional[Callable[[np.ndarray], np.ndarray]] = None
             ) -> Trajectory:
    t_end = result.t_end
    stop = t_end if result.reason != "completed" else t1
    times = np.linspace(t0, stop, n_samples)
    rows, hvals = [], []
    extra: Dict[str, List[float]] = {name: [] for name in (conserved or {})}
    reason = result.reason
    for t in times:
        # diagnostics may overflow right at a blow-up; keep the samples so far
        try:
            y = result.sample(float(t))
            if lift is not None:
                y = lift(y)
            pt = PhasePoint.unpack(y, orbit.r)
            hval = hamiltonian_value(orbit, params, pt)
            vals = [func(pt) for func in (conserved or {}).values()]
        except OverflowGuard:
            reason = "overflow_guard"
            break
        rows.append(y)
        hvals.append(hval)
        for name, value in zip((conserved or {}), vals):
            extra[name].append(value)
    return Trajectory(
        orbit=orbit, params=params, times=times[:len(rows)],
        states=np.array(rows), hvalues=np.array(hvals),
        conserved={k: np.array(v) for k, v in extra.items()},
        stats=result.stats, reason=reason,
    )


def integrate_canonical(orbit: OrbitData, params: Params, init: PhasePoint,
                        tspan: Tuple[float, float], tol: float = 1e-10,
                        n_samples: int = 200,
                        conserved: Optional[ConservedMap] = None) -> Trajectory:
    """Integrate the canonical equations; blow-up returns a partial trajectory."""
    if tol <= 0:
        raise BadParams("tol must be positive")
    t0, t1 = tspan

    def rhs(t, y):
        _blowup_guard(y, orbit.r + 1)
        return canonical_rhs(orbit, params, y)

    result = dopri.integrate(rhs, t0, init.pack(), t1, rtol=tol, atol=tol)
    return _collect(orbit, params, result, t0, t1, n_samples, conserved)


def integrate_first_order(field: SubsystemField, init: Sequence[float],
                          tspan: Tuple[float, float], tol: float = 1e-10,
                          n_samples: int = 200,
                          conserved: Optional[ConservedMap] = None) -> Trajectory:
    """Integrate the superpotential subsystem on (q, u); lift for diagnostics."""
    if tol <= 0:
        raise BadParams("tol must be positive")
    t0, t1 = tspan
    orbit = field.orbit
    params = Params.make(orbit, epsilon=0.0, E=field.E_value)

    def rhs(t, y):
        _blowup_guard(y, orbit.r + 1)
        return field.rhs(t, y)

    def lift(y):
        p, phi = field.lift(y)
        return np.concatenate([y[:orbit.r], [y[orbit.r]], p, [phi]])

    result = dopri.integrate(rhs, t0, np.asarray(init, dtype=float), t1,
                             rtol=tol, atol=tol)
    return _collect(orbit, params, result, t0, t1, n_samples, conserved, lift)


def _blowup_guard(y: np.ndarray, n_config: int) -> None:
    if not np.all(np.isfinite(y)):
        raise OverflowGuard("state left the finite range")
    if np.any(np.abs(y[:n_config]) > 700.0):
        raise OverflowGuard("exponential coordinate beyond 700")


# -- residual scans -------------------------------------------------------------

@dataclass(frozen=True)
class ScanReport:
    curve_id: str
    grid: np.ndarray
    max_res3: float
    max_res4: float
    max_res7: float
    max_res8: float
    max_hamiltonian: float
    max_ambient_mismatch: float
    extras: Dict[str, float] = field(default_factory=dict)

    def worst(self) -> float:
        return max(self.max_res3, self.max_res4, self.max_res7, self.max_res8,
                   self.max_hamiltonian, self.max_ambient_mismatch)

    def lines(self) -> List[str]:
        out = [
            f"max |res3| = {self.max_res3:.3e}",
            f"max |res4| = {self.max_res4:.3e}",
            f"max |res7| = {self.max_res7:.3e}",
            f"max |res8| = {self.max_res8:.3e}",
            f"max |H|    = {self.max_hamiltonian:.3e}",
            f"max |R(10) - R(12)| = {self.max_ambient_mismatch:.3e}",
        ]
        out.extend(f"max |{k}| = {v:.3e}" for k, v in sorted(self.extras.items()))
        return out


def warped_smooth_ambient_display(E: float, t: float) -> float:
    """The displayed scalar-curvature formula for the smooth warped family."""
    rE = math.sqrt(E)
    em = math.exp(2.0 * rE * t) - 1.0
    return (2.0 * rE / t - 1.0 / t ** 2
            - (4.0 * rE / em) * (rE - 1.0 / t)
            - 4.0 * E / em ** 2)


def residual_scan(curve: SolutionCurve, orbit: Optional[OrbitData] = None,
                  params: Optional[Params] = None,
                  grid: Optional[Sequence[float]] = None) -> ScanReport:
    """Max residuals of the full soliton system along a catalog curve.

    For the smooth warped family the scan additionally compares the ambient
    scalar curvature against its displayed closed form and the mean
    curvature against 2/t.
    """
    orbit = orbit or curve.orbit
    params = params or curve.params_obj()
    if grid is None:
        grid = curve.grid()
    worst3 = worst4 = worst7 = worst8 = worst_h = worst_amb = 0.0
    extras: Dict[str, float] = {}
    for t in grid:
        sm = curve.sample(float(t))
        res = grs_residuals(orbit, params, sm)
        worst3 = max(worst3, float(np.max(np.abs(res.res3))))
        worst4 = max(worst4, abs(res.res4))
        worst7 = max(worst7, abs(res.res7))
        cons = conservation_quantities(orbit, params, sm)
        worst8 = max(worst8, abs(cons.res8))
        pt = curve.phase_point(float(t), params)
        worst_h = max(worst_h, abs(hamiltonian_value(orbit, params, pt)))
        r10, r12 = ambient_scalar_curvature(orbit, params, sm)
        worst_amb = max(worst_amb, abs(r10 - r12))
        if curve.id.startswith("warped-smooth"):
            rbar = warped_smooth_ambient_display(curve.E, float(t))
            extras["Rbar-display"] = max(extras.get("Rbar-display", 0.0),
                                         abs(r12 - rbar))
            tr_l = 0.5 * float(np.dot(orbit.d, sm.qdot))
            extras["trL-2/t"] = max(extras.get("trL-2/t", 0.0),
                                    abs(tr_l - 2.0 / float(t)))
    return ScanReport(curve_id=curve.id, grid=np.asarray(grid, dtype=float),
                      max_res3=worst3, max_res4=worst4, max_res7=worst7,
                      max_res8=worst8, max_hamiltonian=worst_h,
                      max_ambient_mismatch=worst_amb, extras=extras)


# -- smoothness triage at the singular orbit ----------------------------------------

@dataclass(frozen=True)
class LimitEstimate:
    value: float
    diverges: bool
    samples: Tuple[float, ...]


def _richardson(values: Sequence[float]) -> float:
    """Iterated Richardson extrapolation for step-halving sequences."""
    table = [list(values)]
    levels = len(values)
    for j in range(1, levels):
        prev = table[-1]
        row = []
        for i in range(len(prev) - 1):
            row.append((2 ** j * prev[i + 1] - prev[i]) / (2 ** j - 1))
        table.append(row)
    return table[-1][0]


def one_sided_limit(func: Callable[[float], float], base: float = 1e-2,
                    levels: int = 4) -> LimitEstimate:
    """Limit as t -> 0+ via Richardson at t = base * 2^-k, k = 0..levels-1."""
    steps = [base * 2.0 ** -k for k in range(levels)]
    samples = []
    for t in steps:
        try:
            samples.append(float(func(t)))
        except (OverflowError, ValueError, ZeroDivisionError):
            samples.append(math.inf)
    finite = [v for v in samples if math.isfinite(v)]
    if len(finite) < len(samples):
        return LimitEstimate(math.inf, True, tuple(samples))
    magnitudes = [abs(v) for v in samples]
    growing = all(m2 > 1.3 * m1 for m1, m2 in zip(magnitudes, magnitudes[1:]))
    if growing and magnitudes[-1] > 10.0:
        sign = 1.0 if samples[-1] > 0 else -1.0
        return LimitEstimate(sign * math.inf, True, tuple(samples))
    return LimitEstimate(_richardson(samples), False, tuple(samples))


@dataclass(frozen=True)
class SmoothnessReport:
    curve_id: str
    collapsing: int
    verdict: str  # "smooth" | "conical" | "blowup"
    h0: LimitEstimate
    hdot0: LimitEstimate
    udot0: LimitEstimate
    others: Dict[int, Tuple[LimitEstimate, LimitEstimate]]

    def lines(self) -> List[str]:
        def fmt(est: LimitEstimate) -> str:
            return "+inf" if est.diverges and est.value > 0 else (
                "-inf" if est.diverges else f"{est.value:.6g}")

        out = [
            f"verdict: {self.verdict}",
            f"h_{self.collapsing + 1}(0) = {fmt(self.h0)}",
            f"hdot_{self.collapsing + 1}(0) = {fmt(self.hdot0)}",
            f"udot(0) = {fmt(self.udot0)}",
        ]
        for j, (hj, hdj) in sorted(self.others.items()):
            out.append(f"h_{j + 1}(0) = {fmt(hj)}, hdot_{j + 1}(0) = {fmt(hdj)}")
        return out


def smoothness_check(curve: SolutionCurve, collapsing: Optional[int] = None,
                     tol: float = 1e-3) -> SmoothnessReport:
    """Classify the t -> 0+ behaviour by extrapolated one-sided limits.

    smooth: h_k -> 0, hdot_k -> 1, udot -> 0, and every other factor has
    h_j > 0 with hdot_j -> 0.  conical: h_k -> 0 with a finite slope != 1.
    blowup: a required limit diverges (h or hdot).
    """
    if collapsing is None:
        collapsing = curve.collapsing if curve.collapsing is not None else 0
    lo, _ = curve.domain
    if lo > 0 or not math.isfinite(lo):
        raise BadParams(f"domain of {curve.id} does not touch t = 0")
    k = collapsing
    h0 = one_sided_limit(lambda t: curve.h(t)[k])
    hdot0 = one_sided_limit(lambda t: curve.hdot(t)[k])
    udot0 = one_sided_limit(curve.udot)
    others: Dict[int, Tuple[LimitEstimate, LimitEstimate]] = {}
    for j in range(curve.orbit.r):
        if j == k:
            continue
        others[j] = (one_sided_limit(lambda t: curve.h(t)[j]),
                     one_sided_limit(lambda t: curve.hdot(t)[j]))

    if h0.diverges or hdot0.diverges:
        verdict = "blowup"
    else:
        collapsed = abs(h0.value) <= tol
        slope_one = abs(hdot0.value - 1.0) <= tol
        udot_zero = (not udot0.diverges) and abs(udot0.value) <= tol
        others_ok = all(
            (not hj.diverges) and hj.value > tol
            and (not hdj.diverges) and abs(hdj.value) <= tol
            for hj, hdj in others.values()
        )
        if collapsed and slope_one and udot_zero and others_ok:
            verdict = "smooth"
        elif collapsed:
            verdict = "conical"
        else:
            verdict = "blowup" if any(
                hj.diverges for hj, _ in others.values()) else "conical"
    return SmoothnessReport(curve_id=curve.id, collapsing=k, verdict=verdict,
                            h0=h0, hdot0=hdot0, udot0=udot0, others=others)
