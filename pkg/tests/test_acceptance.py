"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines; every
tolerance is pinned here, nothing is deferred to calibration.
"""

import math
import time
from fractions import Fraction as F

import numpy as np
import pytest

from grsham import (
    ExpPolySum,
    ExpSum,
    ExtVector,
    LaurentScalar,
    MomPoly,
    Params,
    PhasePoint,
    bryant_planar_system,
    candidate_set,
    circle_orbit,
    closed_form,
    darboux_verify,
    default_seed,
    hamiltonian_gradient,
    hamiltonian_value,
    integral_drift,
    integrate_canonical,
    integrate_first_order,
    first_order_subsystem,
    posmu_t0_root,
    nonexistence_certificate,
    recursion_solve,
    residual_scan,
    smoothness_check,
    solve_superpotential,
    sphere_orbit,
    steady_hamiltonian,
    superpotential_residual,
    warped_orbit,
)
from grsham.catalog import volume_balanced
from grsham.first_integrals import darboux_j1, darboux_j2, \
    integrating_factor_check, j_mompoly, poisson_bracket
from grsham.laurent import E_SYMBOLIC, S


def report(criterion: str, ok: bool, detail: str = "") -> None:
    tag = "PASS" if ok else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"[{tag}] {criterion}{suffix}")
    assert ok, f"{criterion}{suffix}"


def vec(*entries):
    return ExtVector.of(entries)


def bryant_f():
    return ExpSum({vec(2, -1): LaurentScalar.s_power(1, 2),
                   vec(1, -1): LaurentScalar.s_power(-1, 12)})


def warped_f():
    return ExpSum({vec(F(1, 2), F(3, 2), -1): S,
                   vec(F(3, 2), F(1, 2), -1): S,
                   vec(F(1, 2), F(1, 2), -1): LaurentScalar.s_power(-1, 4)})


def circle_f(a):
    return ExpSum({vec(1, -1): LaurentScalar.rational(a),
                   vec(0, -1): E_SYMBOLIC * LaurentScalar.rational(F(1, a))})


def test_criterion_1_exact_superpotential_verification():
    """Exact residuals are the empty sum; zero tolerance; < 1 s each."""
    zero = LaurentScalar.zero()
    cases = [
        ("Bryant n=4", sphere_orbit(4), bryant_f(), None),
        ("warped d=(2,2)", warped_orbit(2, 2), warped_f(), None),
        ("circle family a=3", circle_orbit(), circle_f(3), None),
        ("circle family a=-5/2", circle_orbit(), circle_f(F(-5, 2)), None),
        ("circle limiting q-u", circle_orbit(),
         ExpSum({vec(1, -1): LaurentScalar.rational(7)}), zero),
        ("circle limiting -u", circle_orbit(),
         ExpSum({vec(0, -1): LaurentScalar.rational(-3)}), zero),
    ]
    for label, orbit, f, e_value in cases:
        start = time.perf_counter()
        resid = superpotential_residual(orbit, f, E=e_value)
        elapsed = time.perf_counter() - start
        report(f"criterion 1 [{label}]",
               resid.is_zero() and elapsed < 1.0,
               f"empty={resid.is_zero()}, {elapsed * 1e3:.1f} ms")


def test_criterion_2_search_rediscovery():
    """solve_superpotential recovers the known coefficient families; < 5 s total."""
    start = time.perf_counter()

    s4 = sphere_orbit(4)
    certs = solve_superpotential(s4, candidate_set(s4, augment=[vec(1, -1)]))
    ok_a = len(certs) == 1 and certs[0].solution == bryant_f()

    w22 = warped_orbit(2, 2)
    aug = [(w22.d_ext + vec(-1, -1, 0)).half(),
           (w22.d_ext + vec(-1, 1, 0)).half(),
           (w22.d_ext + vec(1, -1, 0)).half()]
    certs_w = solve_superpotential(w22, candidate_set(w22, augment=aug))
    sols_w = [c for c in certs_w if c.is_solution()]
    ok_b = len(sols_w) == 1 and sols_w[0].solution == warped_f()

    circ = circle_orbit()
    cands_c = candidate_set(circ, augment=[vec(1, -1), vec(0, -1)])
    certs_c = solve_superpotential(circ, cands_c)
    families = [c for c in certs_c if c.is_solution() and c.parameters]
    ok_c1 = len(families) == 1 and \
        families[0].solution.terms[vec(1, -1)] == LaurentScalar.gen("a") and \
        families[0].solution.terms[vec(0, -1)] == \
        E_SYMBOLIC * LaurentScalar.gen("a", -1)
    certs_c0 = solve_superpotential(circ, cands_c, E=LaurentScalar.zero())
    got0 = sorted(str(c.solution) for c in certs_c0 if c.is_solution())
    ok_c2 = got0 == ["a*exp[(0, -1)]", "a*exp[(1, -1)]"]

    w33 = warped_orbit(3, 3)
    certs_33 = solve_superpotential(w33, candidate_set(w33))
    ok_d = len(certs_33) == 1 and certs_33[0].kind == "no_solution"

    elapsed = time.perf_counter() - start
    report("criterion 2 [search rediscovery]",
           ok_a and ok_b and ok_c1 and ok_c2 and ok_d and elapsed < 5.0,
           f"bryant={ok_a} warped={ok_b} circle={ok_c1 and ok_c2} "
           f"w33={ok_d} in {elapsed:.2f} s")


def test_criterion_3_nonexistence_certificate():
    w33 = warped_orbit(3, 3)
    cert = nonexistence_certificate(w33, candidate_set(w33))
    ok_emitted = cert is not None and cert.j_c0_c0 == F(1, 4) \
        and all(j != 0 for _, j in cert.vertices)
    s4 = sphere_orbit(4)
    none = nonexistence_certificate(s4, candidate_set(s4, augment=[vec(1, -1)]))
    report("criterion 3 [non-existence certificate]",
           ok_emitted and none is None,
           f"warped33 emitted={cert is not None}, bryant suppressed={none is None}")


def test_criterion_4_first_integral_reproduction():
    circ = circle_orbit()
    cert1 = recursion_solve(circ, default_seed(circ), levels=3)
    p, phi = MomPoly.variable(2, 0), MomPoly.variable(2, 1)
    ok_41 = (cert1.F - ExpPolySum.single(vec(0, 1), p + phi)).is_zero() \
        and cert1.residual.is_zero()

    s4 = sphere_orbit(4)
    cert2 = recursion_solve(s4, default_seed(s4), levels=3)
    expected = ExpPolySum(2, {
        vec(-3, 1): (p + phi) * (p + phi) * F(-1, 4),
        vec(1, -1): MomPoly.const(2, E_SYMBOLIC),
    })
    ok_42 = (cert2.F - expected).is_zero() and cert2.residual.is_zero()

    # independent certification: {F, H} - Phi H via the exact bracket
    ham1 = steady_hamiltonian(circ)
    ok_b1 = (poisson_bracket(cert1.F, ham1) - cert1.Phi * ham1).is_zero()
    ham4 = steady_hamiltonian(s4)
    ok_b2 = (poisson_bracket(cert2.F, ham4) - cert2.Phi * ham4).is_zero()

    report("criterion 4 [first integrals]",
           ok_41 and ok_42 and ok_b1 and ok_b2,
           f"n=1 exact={ok_41}, n=4 exact={ok_42}, brackets={ok_b1 and ok_b2}")


def test_criterion_5_darboux_identities():
    p_formal, q_formal = bryant_planar_system(None)
    g1 = darboux_verify(p_formal, q_formal, darboux_j1(None))
    x, y = MomPoly.variable(2, 0), MomPoly.variable(2, 1)
    ok_j1 = g1 == 2 * x
    p4, q4 = bryant_planar_system(4)
    g2 = darboux_verify(p4, q4, darboux_j2())
    ok_j2 = g2 == 4 * x - y
    dev = integrating_factor_check(4)
    report("criterion 5 [Darboux identities]",
           ok_j1 and ok_j2 and dev < 1e-10,
           f"g1=2x: {ok_j1}, g2=4x-y: {ok_j2}, factor dev {dev:.2e}")


CATALOG_SWEEP = [
    ("bryant5-conical", {}), ("bryant5-smooth", {}),
    ("bryant5-singular-negmu", {}), ("bryant5-posmu", {}),
    ("warped-smooth", {}), ("warped-smooth", {"swap": True}),
    ("warped-special", {}), ("cylinder", {}),
]


def test_criterion_6_closed_form_residuals():
    worst_overall = 0.0
    for cid, extra in CATALOG_SWEEP:
        for E in (0.5, 1.0, 4.0):
            rep = residual_scan(closed_form(cid, E=E, **extra))
            worst_overall = max(worst_overall, rep.worst())
            assert rep.worst() < 1e-8, (cid, E, rep.lines())
            if cid == "warped-smooth":
                assert rep.extras["Rbar-display"] < 1e-8
                assert rep.extras["trL-2/t"] < 1e-8
    # E-free circle families
    for cid, kwargs in [("cigar", {"a": 0.5}), ("cigar", {"a": 2.0}),
                        ("flatcone", {"a": 1.0}), ("exploding", {"a": 1.0})]:
        rep = residual_scan(closed_form(cid, **kwargs))
        worst_overall = max(worst_overall, rep.worst())
        assert rep.worst() < 1e-8, (cid, kwargs)
    report("criterion 6 [catalog residuals]", worst_overall < 1e-8,
           f"worst over catalog x E sweep: {worst_overall:.2e}")


def test_criterion_7_constraint_preservation():
    curve = volume_balanced("warped-smooth", 3.5, E=1.0)
    init = curve.phase_point(1.0)
    traj = integrate_canonical(curve.orbit, curve.params_obj(), init,
                               (1.0, 6.0), tol=1e-10)
    drift_h = traj.max_h_drift()
    ok_h = abs(hamiltonian_value(curve.orbit, curve.params_obj(), init)) < 1e-9 \
        and drift_h < 1e-8 and traj.reason == "completed"

    s4 = sphere_orbit(4)
    cert = recursion_solve(s4, default_seed(s4), levels=3)
    smooth = closed_form("bryant5-smooth", E=1.0)
    params = smooth.params_obj()
    pts = [smooth.phase_point(float(t), params)
           for t in np.linspace(0.1, 5.0, 150)]
    drift_f = integral_drift(s4, params, cert.F, pts)
    report("criterion 7 [constraint preservation]",
           ok_h and drift_f < 1e-7,
           f"|H| drift {drift_h:.2e} (<1e-8), F drift {drift_f:.2e} (<1e-7)")


def test_criterion_8_subsystem_oracle_agreement():
    worst = {}

    field_b = first_order_subsystem(sphere_orbit(4), bryant_f(), 1.0)
    con = closed_form("bryant5-conical", E=1.0)
    init = [2 * math.log(con.h(0.5)[0]), con.u(0.5)]
    traj = integrate_first_order(field_b, init, (0.5, 5.0), tol=1e-11)
    worst["bryant-conical"] = max(
        max(abs(math.exp(pt.q[0] / 2) - con.h(float(t))[0]),
            abs(pt.u - con.u(float(t))))
        for t, pt in zip(traj.times, traj.phase_points()))

    field_w = first_order_subsystem(warped_orbit(2, 2), warped_f(), 1.0)
    ws = closed_form("warped-smooth", E=1.0)
    init = [2 * math.log(ws.h(0.5)[0]), 2 * math.log(ws.h(0.5)[1]), ws.u(0.5)]
    traj = integrate_first_order(field_w, init, (0.5, 5.0), tol=1e-11)
    worst["warped-smooth"] = max(
        max(float(np.max(np.abs(np.exp(pt.q / 2) - ws.h(float(t))))),
            abs(pt.u - ws.u(float(t))))
        for t, pt in zip(traj.times, traj.phase_points()))

    field_c = first_order_subsystem(circle_orbit(), circle_f(1), 2.0)
    cig = closed_form("cigar", a=1.0)
    init = [2 * math.log(cig.h(0.5)[0]), cig.u(0.5)]
    traj = integrate_first_order(field_c, init, (0.5, 5.0), tol=1e-11)
    worst["cigar"] = max(
        max(abs(math.exp(pt.q[0] / 2) - cig.h(float(t))[0]),
            abs(pt.u - cig.u(float(t))))
        for t, pt in zip(traj.times, traj.phase_points()))

    bad = max(worst.values())
    report("criterion 8 [subsystem vs closed forms]", bad < 1e-6,
           ", ".join(f"{k}: {v:.2e}" for k, v in worst.items()))


def test_criterion_9_smoothness_triage():
    ws = smoothness_check(closed_form("warped-smooth", E=1.0))
    ok_smooth = ws.verdict == "smooth" \
        and abs(ws.h0.value) < 1e-4 \
        and abs(ws.hdot0.value - 1.0) < 1e-4 \
        and abs(ws.udot0.value) < 1e-4
    (h2, h2dot), = ws.others.values()
    ok_smooth = ok_smooth and abs(h2.value - 2.0) < 1e-4 \
        and abs(h2dot.value) < 1e-4

    con = smoothness_check(closed_form("bryant5-conical", E=1.0))
    ok_conical = con.verdict != "smooth" and con.hdot0.diverges

    pos = smoothness_check(closed_form("bryant5-posmu", E=1.0))
    ok_posmu = pos.verdict == "blowup" and pos.hdot0.diverges \
        and pos.hdot0.value > 0

    report("criterion 9 [smoothness triage]",
           ok_smooth and ok_conical and ok_posmu,
           f"smooth={ws.verdict}, conical hdot(0)={con.hdot0.value}, "
           f"posmu={pos.verdict}")


def test_criterion_10_gradient_correctness():
    step = 1e-6
    rng = np.random.default_rng(2024)
    worst = 0.0
    for orbit in (sphere_orbit(4), circle_orbit(), warped_orbit(2, 2)):
        params = Params.make(orbit, tau=1.0, epsilon=0.5, E=2.0)
        for _ in range(200):
            pt = PhasePoint.of(rng.uniform(-3, 3, orbit.r), rng.uniform(-3, 3),
                               rng.uniform(-2, 2, orbit.r), rng.uniform(-2, 2))
            grad = hamiltonian_gradient(orbit, params, pt)
            analytic = np.concatenate([grad.dq, [grad.du], grad.dp, [grad.dphi]])
            packed = pt.pack()
            fd = np.empty_like(analytic)
            for k in range(len(packed)):
                plus, minus = packed.copy(), packed.copy()
                plus[k] += step
                minus[k] -= step
                fd[k] = (hamiltonian_value(orbit, params,
                                           PhasePoint.unpack(plus, orbit.r))
                         - hamiltonian_value(orbit, params,
                                             PhasePoint.unpack(minus, orbit.r))
                         ) / (2 * step)
            scale = max(1.0, float(np.max(np.abs(analytic))))
            worst = max(worst, float(np.max(np.abs(fd - analytic))) / scale)
    report("criterion 10 [gradient vs finite differences]", worst < 1e-6,
           f"worst relative deviation {worst:.2e} over 600 points")


def test_criterion_11_posmu_root():
    t0 = posmu_t0_root(4.0)
    resid = abs(t0 * math.tanh(t0) - 1.0)
    report("criterion 11 [positive-branch origin root]",
           abs(t0 - 1.19968) < 1e-5 and resid < 1e-12,
           f"t0 = {t0:.10f}, |t0 tanh t0 - 1| = {resid:.2e}")
