"""Adaptive Dormand-Prince 5(4) integrator with dense output.

Seven stages, FSAL, the standard quartic interpolant, and a PI-flavoured
step controller.  Step underflow and overflow of the right-hand side stop
the integration cleanly and return the partial result, which is what the
blow-up families of the solution catalog need.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import OverflowGuard, StepUnderflow

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# local error weights: b5 - b4
ERR = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
                -17253 / 339200, 22 / 525, -1 / 40])
# dense-output polynomial (theta * P(theta) per stage), as in Hairer II.6
P_DENSE = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608,
     -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933,
     87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304,
     -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408,
     701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883,
     -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


@dataclass
class StepRecord:
    t: float
    h: float
    y: np.ndarray
    stages: np.ndarray  # (7, dim)

    def interpolate(self, t_query: float) -> np.ndarray:
        theta = (t_query - self.t) / self.h
        powers = np.array([theta, theta ** 2, theta ** 3, theta ** 4])
        weights = P_DENSE @ powers
        return self.y + self.h * (self.stages.T @ weights)


@dataclass
class IntegratorStats:
    steps: int = 0
    rejected: int = 0
    nfev: int = 0
    rtol: float = 0.0
    atol: float = 0.0


@dataclass
class IntegrationResult:
    records: List[StepRecord]
    t_end: float
    y_end: np.ndarray
    stats: IntegratorStats
    reason: str  # "completed" | "step_underflow" | "overflow_guard"

    def sample(self, t_query: float) -> np.ndarray:
        if not self.records:
            return self.y_end
        t0 = self.records[0].t
        lo_t, hi_t = sorted((t0, self.t_end))
        slack = 1e-12 * max(1.0, abs(lo_t), abs(hi_t))
        if not (lo_t - slack <= t_query <= hi_t + slack):
            raise ValueError("sample time outside the integrated span")
        lo, hi = 0, len(self.records) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            rec = self.records[mid]
            if (t_query - rec.t - rec.h) * np.sign(rec.h) > 0:
                lo = mid + 1
            else:
                hi = mid
        return self.records[lo].interpolate(t_query)

    def mean_step(self) -> float:
        if not self.records:
            return 0.0
        return float(np.mean([abs(rec.h) for rec in self.records]))


def _rms(v: np.ndarray) -> float:
    return float(np.linalg.norm(v) / max(len(v), 1) ** 0.5)


def _initial_step(call, t0: float, y0: np.ndarray, f0: np.ndarray,
                  direction: float, rtol: float, atol: float,
                  span: float) -> float:
    """Starting step via the usual two-sample heuristic (error order 4)."""
    scale = atol + rtol * np.abs(y0)
    d0, d1 = _rms(y0 / scale), _rms(f0 / scale)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    try:
        f1 = call(t0 + h0 * direction, y0 + h0 * direction * f0)
        d2 = _rms((f1 - f0) / scale) / h0
    except OverflowGuard:
        d2 = np.inf
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)


def integrate(rhs: Callable[[float, np.ndarray], np.ndarray],
              t0: float, y0: np.ndarray, t1: float,
              rtol: float = 1e-10, atol: float = 1e-10,
              max_step: Optional[float] = None,
              fixed_step: Optional[float] = None) -> IntegrationResult:
    """Integrate to t1 (either direction); partial results are not an error.

    ``fixed_step`` disables error control (used by the order-measurement
    invariant).  A first step that already underflows raises StepUnderflow;
    later underflow or an OverflowGuard from the right-hand side end the
    run early with the corresponding reason.
    """
    y = np.array(y0, dtype=float)
    t = float(t0)
    direction = 1.0 if t1 >= t0 else -1.0
    span = abs(t1 - t0)
    stats = IntegratorStats(rtol=rtol, atol=atol)
    records: List[StepRecord] = []

    def call(tt, yy):
        stats.nfev += 1
        return np.asarray(rhs(tt, yy), dtype=float)

    try:
        k_first = call(t, y)
    except OverflowGuard:
        raise StepUnderflow("right-hand side overflows at the initial point")

    if fixed_step is not None:
        h = direction * abs(fixed_step)
    else:
        h = direction * _initial_step(call, t, y, k_first, direction,
                                      rtol, atol, span)
    if max_step is not None:
        h = direction * min(abs(h), max_step)

    reason = "completed"
    fsal: Optional[np.ndarray] = k_first
    min_h = 1e-14 * max(1.0, abs(t0), abs(t1))

    while (t1 - t) * direction > 1e-15 * max(1.0, abs(t)):
        if abs(h) < min_h:
            if not records:
                raise StepUnderflow("step size underflow before first step")
            reason = "step_underflow"
            break
        if (t + h - t1) * direction > 0:
            h = t1 - t
        stages = np.empty((7, len(y)))
        try:
            stages[0] = fsal if fsal is not None else call(t, y)
            failed = False
            for i in range(1, 7):
                yi = y + h * (np.array(A[i]) @ stages[:i])
                stages[i] = call(t + C[i] * h, yi)
        except OverflowGuard:
            if fixed_step is not None:
                reason = "overflow_guard"
                break
            stats.rejected += 1
            h *= 0.5
            fsal = None if fsal is None else fsal
            if abs(h) < min_h:
                reason = "overflow_guard"
                break
            continue

        y_new = y + h * (B5 @ stages)
        if fixed_step is None:
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.linalg.norm((h * (ERR @ stages)) / scale)
                        / max(len(y), 1) ** 0.5)
            if not np.isfinite(err) or err > 1.0:
                stats.rejected += 1
                factor = MIN_FACTOR if not np.isfinite(err) else \
                    max(MIN_FACTOR, SAFETY * err ** -0.2)
                h *= factor
                continue
            factor = MAX_FACTOR if err == 0 else \
                min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * err ** -0.2))
        else:
            factor = 1.0

        records.append(StepRecord(t=t, h=h, y=y.copy(), stages=stages.copy()))
        stats.steps += 1
        t = t + h
        y = y_new
        fsal = stages[6].copy()
        h = h * factor
        if max_step is not None:
            h = direction * min(abs(h), max_step)

    return IntegrationResult(records=records, t_end=t, y_end=y,
                             stats=stats, reason=reason)


def measure_order(problem_rhs=None, exact=None, t1: float = 1.0,
                  steps: Tuple[float, ...] = (0.1, 0.05, 0.025, 0.0125)
                  ) -> float:
    """Fixed-step global-order estimate on qdot = q (default), slope of log err."""
    if problem_rhs is None:
        problem_rhs = lambda t, y: y
        exact = np.exp(t1)
    errs, hs = [], []
    for h in steps:
        res = integrate(problem_rhs, 0.0, np.array([1.0]), t1, fixed_step=h)
        errs.append(abs(res.y_end[0] - exact))
        hs.append(h)
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    return float(slope)


def measure_order_tolerance_sweep(tols=(1e-6, 1e-7, 1e-8, 1e-9, 1e-10),
                                  t1: float = 5.0) -> float:
    """Order estimate from an adaptive tolerance sweep on qdot = q.

    For each tolerance the run selects its own mean step h(tol); the slope
    of log(error) against log(h) recovers the method order.
    """
    errs, hs = [], []
    for tol in tols:
        res = integrate(lambda t, y: y, 0.0, np.array([1.0]), t1,
                        rtol=tol, atol=tol)
        err = abs(res.y_end[0] - np.exp(t1))
        if err == 0:
            continue
        errs.append(err)
        hs.append(res.mean_step())
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    return float(slope)
