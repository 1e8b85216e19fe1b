"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage error.  Every
numeric report can also be written as CSV via --out; trajectory-shaped
output accepts --plot PATH to render a figure alongside the CSV.
"""

from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction
from typing import List, Optional

import numpy as np

from .catalog import SolutionCurve, catalog_ids, closed_form
from .config import RunConfig, resolve_orbit
from .errors import BadParams, GrsError
from .first_integrals import (
    bryant_planar_system,
    closedness_fd_check,
    darboux_j1,
    darboux_j2,
    darboux_verify,
    default_grid,
    default_seed,
    integral_drift,
    integrating_factor_check,
    recursion_solve,
    seed_from_level,
)
from .flows import integrate_canonical, integrate_first_order, residual_scan, \
    smoothness_check
from .laurent import LaurentScalar
from .orbit_model import ExtVector
from .phase_dynamics import PhasePoint, hamiltonian_value
from .reporting import (
    curve_trajectory,
    render_trajectory_figure,
    write_table_csv,
    write_trajectory_csv,
)
from .superpotential import (
    candidate_set,
    first_order_subsystem,
    nonexistence_certificate,
    solve_superpotential,
    superpotential_residual,
)

USAGE_ERROR = 2
VERIFY_ERROR = 1


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


def _tspan(text: str):
    try:
        a, b = text.split(":")
        return float(a), float(b)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"tspan must be A:B, got {text!r}") from exc


def _floats(text: str) -> List[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _vector(text: str) -> ExtVector:
    return ExtVector.of([Fraction(x) for x in text.split(",") if x.strip()])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grs",
        description="Cohomogeneity-one gradient Ricci solitons: exact "
                    "superpotentials, first integrals, constrained flows.")
    sub = parser.add_subparsers(dest="group", required=True)

    def add_orbit(p):
        p.add_argument("--orbit", required=True,
                       help="TOML config path or preset "
                            "(circle, sphere:<n>, warped:<d1>,<d2>, bbc:<m;b;k>)")

    orbit = sub.add_parser("orbit", help="orbit data utilities")
    orbit_sub = orbit.add_subparsers(dest="command", required=True)
    p = orbit_sub.add_parser("validate", help="build and validate an orbit")
    add_orbit(p)

    sp = sub.add_parser("superpotential", help="exact superpotential search")
    sp_sub = sp.add_subparsers(dest="command", required=True)
    p = sp_sub.add_parser("search")
    add_orbit(p)
    p.add_argument("--augment", default=None,
                   help="extra candidates 'c1,c2;c1,c2' (rational entries)")
    p.add_argument("--extended", action="store_true",
                   help="also scan half-integer points of the weight hull")
    p.add_argument("--E", type=_fraction, default=None,
                   help="substitute an exact rational for E (default: symbolic s^2)")
    p.add_argument("--out", default=None)
    p = sp_sub.add_parser("verify")
    add_orbit(p)
    p.add_argument("--E", type=_fraction, default=None)

    ssub = sub.add_parser("subsystem", help="first-order subsystem flows")
    ssub_sub = ssub.add_subparsers(dest="command", required=True)
    p = ssub_sub.add_parser("integrate")
    add_orbit(p)
    p.add_argument("--E", type=_fraction, default=Fraction(1))
    p.add_argument("--init", required=True, help="q1,..,qr,u")
    p.add_argument("--tspan", type=_tspan, required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--out", default=None)
    p.add_argument("--plot", default=None)

    can = sub.add_parser("canonical", help="canonical Hamiltonian flows")
    can_sub = can.add_subparsers(dest="command", required=True)
    p = can_sub.add_parser("integrate")
    add_orbit(p)
    p.add_argument("--E", type=_fraction, default=None)
    p.add_argument("--epsilon", type=_fraction, default=None)
    p.add_argument("--init", required=True, help="q1..qr,u,p1..pr,phi")
    p.add_argument("--tspan", type=_tspan, required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--out", default=None)
    p.add_argument("--plot", default=None)

    integ = sub.add_parser("integral", help="generalized first integrals")
    integ_sub = integ.add_subparsers(dest="command", required=True)
    p = integ_sub.add_parser("recursion")
    add_orbit(p)
    p.add_argument("--seed-level", type=_vector, default=None,
                   help="override the factorization level c (rational pair)")
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--out", default=None)
    p = integ_sub.add_parser("drift")
    p.add_argument("--id", required=True, choices=catalog_ids())
    p.add_argument("--E", type=_fraction, default=Fraction(1),
                   help="energy for the 5D families (circle families fix E "
                        "from their own parameters)")
    p.add_argument("--tspan", type=_tspan, default=(0.1, 5.0))
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--out", default=None)

    p = sub.add_parser("darboux", help="Darboux polynomials of the planar system")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--grid-side", type=int, default=20)
    p.add_argument("--fd-step", type=float, default=1e-5)
    p.add_argument("--out", default=None)

    cat = sub.add_parser("catalog", help="closed-form solution catalog")
    cat_sub = cat.add_subparsers(dest="command", required=True)
    cat_sub.add_parser("list")
    for name in ("eval", "check"):
        p = cat_sub.add_parser(name)
        p.add_argument("--id", required=True, choices=catalog_ids())
        p.add_argument("--E", type=_fraction, default=None)
        p.add_argument("--a", type=float, default=None)
        p.add_argument("--t0", type=float, default=None)
        p.add_argument("--t1", type=float, default=None)
        p.add_argument("--sign", type=int, default=None)
        p.add_argument("--u0", type=float, default=None)
        p.add_argument("--tspan", type=_tspan, default=None)
        p.add_argument("--samples", type=int, default=100)
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--out", default=None)
        p.add_argument("--plot", default=None)

    p = sub.add_parser("smoothness", help="singular-orbit smoothness triage")
    p.add_argument("--id", required=True, choices=catalog_ids())
    p.add_argument("--E", type=_fraction, default=None)
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--k", type=int, default=None, help="collapsing factor index")
    return parser


def _curve_from_args(args) -> SolutionCurve:
    kwargs = {}
    for key in ("E", "a", "t0", "t1", "sign", "u0"):
        value = getattr(args, key, None)
        if value is not None:
            kwargs[key] = float(value) if key == "E" else value
    return closed_form(args.id, **kwargs)


def _plot_if_asked(args, traj, title) -> None:
    if getattr(args, "plot", None):
        render_trajectory_figure(args.plot, traj, title)
        print(f"figure written to {args.plot}")


def cmd_orbit_validate(args) -> int:
    cfg = resolve_orbit(args.orbit)
    orbit = cfg.orbit
    form = orbit.form
    print(f"orbit {orbit.name}: r={orbit.r}, d={list(orbit.d)}, n={orbit.n}")
    for wt in orbit.weights:
        print(f"  weight {tuple(str(x) for x in wt.w)}  A = {wt.A}")
    print(f"J(d,-2) = {form.quadratic(orbit.d_ext)}")
    print(f"Lorentz signature (1, r): {'ok' if form.signature_ok() else 'VIOLATED'}")
    return 0 if form.signature_ok() else VERIFY_ERROR


def _parse_augment(text: Optional[str], cfg: RunConfig) -> List[ExtVector]:
    out = list(cfg.augment)
    if text:
        for chunk in text.split(";"):
            if chunk.strip():
                out.append(_vector(chunk))
    return out


def cmd_superpotential_search(args) -> int:
    cfg = resolve_orbit(args.orbit)
    orbit = cfg.orbit
    cands = candidate_set(orbit, augment=_parse_augment(args.augment, cfg),
                          extended=args.extended)
    print(f"candidates ({len(cands)}):")
    for c in cands:
        tag = "null" if c.null else "non-null"
        realizes = f", 2c = d+{c.realizes}" if c.realizes is not None else ""
        print(f"  {c.vec}  [{tag}{realizes}]")
    e_value = None if args.E is None else LaurentScalar.rational(args.E)
    certs = solve_superpotential(orbit, cands, E=e_value)
    witness = nonexistence_certificate(orbit, cands)
    rows = []
    ok = False
    for idx, cert in enumerate(certs):
        if cert.kind == "solution":
            ok = True
            print(f"solution #{idx}: {cert.solution}")
            if cert.parameters:
                print(f"  free parameters: {', '.join(cert.parameters)}")
            for vec, coeff in cert.solution.items():
                rows.append([idx] + [str(x) for x in vec.entries] + [str(coeff)])
        else:
            print(f"{cert.kind}: {cert.obstruction}")
        for warning in cert.warnings:
            print(f"  warning: {warning}")
    if witness is not None:
        print("non-existence certificate: no J-null hull vertex "
              f"(edge d/2 -> (d+w)/2 with w = {witness.edge_w}; "
              f"J(c0,c0) = {witness.j_c0_c0}, J(c0,c1) = {witness.j_c0_c1})")
    if args.out and rows:
        header = ["solution", *[f"c{i + 1}" for i in range(orbit.r)], "c_u", "coeff"]
        write_table_csv(args.out, header, rows)
        print(f"solutions written to {args.out}")
    return 0 if ok else VERIFY_ERROR


def cmd_superpotential_verify(args) -> int:
    cfg = resolve_orbit(args.orbit)
    if cfg.superpotential is None:
        print("config has no [superpotential] terms to verify", file=sys.stderr)
        return USAGE_ERROR
    if args.E is not None:
        attempts = [(f"E = {args.E}", LaurentScalar.rational(args.E))]
    else:
        attempts = [("symbolic E = s^2", None)]
        if cfg.E is not None:
            attempts.append((f"E = {cfg.E} (from config)",
                             LaurentScalar.rational(cfg.E)))
    resid = None
    for label, e_value in attempts:
        resid = superpotential_residual(cfg.orbit, cfg.superpotential, E=e_value)
        if resid.is_zero():
            print(f"residual: empty  [{label}]")
            return 0
    vec, coeff = resid.items()[0]
    print(f"residual: NOT empty; first failing term {coeff} at exponent {vec}")
    return VERIFY_ERROR


def cmd_subsystem_integrate(args) -> int:
    cfg = resolve_orbit(args.orbit)
    orbit = cfg.orbit
    e_value = float(args.E)
    f = cfg.superpotential
    if f is None:
        certs = solve_superpotential(
            orbit, candidate_set(orbit, augment=list(cfg.augment)))
        solutions = [c for c in certs if c.kind == "solution"
                     and not c.parameters]
        if not solutions:
            print("no parameter-free superpotential found; supply "
                  "[superpotential] terms in the config", file=sys.stderr)
            return USAGE_ERROR
        f = solutions[0].solution
        print(f"using superpotential: {f}")
    resid = superpotential_residual(orbit, f)  # symbolic E = s^2
    if not resid.is_zero():
        resid = superpotential_residual(orbit, f,
                                        E=LaurentScalar.rational(args.E))
    if not resid.is_zero():
        vec, coeff = resid.items()[0]
        print(f"superpotential residual NOT empty at E={args.E}: "
              f"{coeff} at {vec}")
        return VERIFY_ERROR
    init = _floats(args.init)
    if len(init) != orbit.r + 1:
        print(f"--init needs {orbit.r + 1} values (q_1..q_r, u)", file=sys.stderr)
        return USAGE_ERROR
    field = first_order_subsystem(orbit, f, e_value)
    traj = integrate_first_order(field, init, args.tspan, tol=args.tol,
                                 n_samples=args.samples)
    print(f"integrated {traj.reason}; steps {traj.stats.steps} "
          f"(rejected {traj.stats.rejected})")
    print(f"max |H| along lifted section: {np.max(np.abs(traj.hvalues)):.3e}")
    if args.out:
        write_trajectory_csv(args.out, traj)
        print(f"trajectory written to {args.out}")
    _plot_if_asked(args, traj, f"subsystem flow on {orbit.name}")
    return 0


def cmd_canonical_integrate(args) -> int:
    cfg = resolve_orbit(args.orbit)
    orbit = cfg.orbit
    params = cfg.params(
        E_override=None if args.E is None else float(args.E),
        epsilon_override=None if args.epsilon is None else float(args.epsilon))
    init = _floats(args.init)
    if len(init) != 2 * orbit.r + 2:
        print(f"--init needs {2 * orbit.r + 2} values "
              "(q_1..q_r, u, p_1..p_r, phi)", file=sys.stderr)
        return USAGE_ERROR
    pt = PhasePoint.unpack(np.array(init), orbit.r)
    print(f"H(init) = {hamiltonian_value(orbit, params, pt):.6e}")
    traj = integrate_canonical(orbit, params, pt, args.tspan, tol=args.tol,
                               n_samples=args.samples)
    print(f"integrated {traj.reason}; steps {traj.stats.steps} "
          f"(rejected {traj.stats.rejected})")
    print(f"max |H - H(init)| drift: {traj.max_h_drift():.3e}")
    if args.out:
        write_trajectory_csv(args.out, traj)
        print(f"trajectory written to {args.out}")
    _plot_if_asked(args, traj, f"canonical flow on {orbit.name}")
    return 0


def cmd_integral_recursion(args) -> int:
    cfg = resolve_orbit(args.orbit)
    orbit = cfg.orbit
    if args.seed_level is not None:
        seed = seed_from_level(orbit, args.seed_level)
    else:
        seed = default_seed(orbit)
    cert = recursion_solve(orbit, seed, levels=args.levels)
    names = tuple(f"p{i + 1}" for i in range(orbit.r)) + ("phi",)
    if orbit.r == 1:
        names = ("p", "phi")
    print(f"seed level c = {seed.c}, F_c = {seed.F_c.text(names)}, "
          f"psi_c = {seed.psi_c.text(names)}")
    rows = []
    for level, f_poly, psi in cert.table:
        phi_b = psi + f_poly.directional(orbit.d_ext.entries) * Fraction(1, 2)
        print(f"  level {level}: F = {f_poly.text(names)}; "
              f"psi = {psi.text(names)}; Phi = {phi_b.text(names)}")
        rows.append([str(level), f_poly.text(names), psi.text(names),
                     phi_b.text(names)])
    print(f"conserved quantity F = {cert.F}")
    print(f"Phi = {cert.Phi}")
    print(f"bracket residual {{F,H}} - Phi H: "
          f"{'empty' if cert.residual.is_zero() else cert.residual}")
    print(f"trivial (ideal) integral: {cert.trivial}")
    if args.out:
        write_table_csv(args.out, ["level", "F", "psi", "Phi"], rows)
        print(f"table written to {args.out}")
    return 0 if cert.residual.is_zero() else VERIFY_ERROR


_DRIFT_ORBITS = {
    "bryant5-conical": 4, "bryant5-smooth": 4,
    "bryant5-singular-negmu": 4, "bryant5-posmu": 4,
    "cigar": 1, "cylinder": 1, "flatcone": 1, "exploding": 1,
}


def cmd_integral_drift(args) -> int:
    if args.id not in _DRIFT_ORBITS:
        print(f"no recursion integral available for {args.id} "
              "(factorization seeds need a single-summand orbit)",
              file=sys.stderr)
        return USAGE_ERROR
    curve = closed_form(args.id, **({"E": float(args.E)}
                                    if args.id.startswith("bryant") else {}))
    orbit = curve.orbit
    cert = recursion_solve(orbit, default_seed(orbit), levels=args.levels)
    params = curve.params_obj()
    lo = max(args.tspan[0], curve.domain[0] + 1e-3)
    grid = np.linspace(lo, args.tspan[1], args.samples)
    pts = [curve.phase_point(float(t), params) for t in grid]
    drift = integral_drift(orbit, params, cert.F, pts)
    subs = {"s": math.sqrt(params.E)}
    f0 = cert.F.eval(pts[0], subs)
    print(f"F = {cert.F}")
    print(f"F({grid[0]:.3f}) = {f0:.12g}  (effective mu in this u-gauge)")
    print(f"max |F(t) - F(t0)| over [{grid[0]:.3f}, {grid[-1]:.3f}]: {drift:.3e}")
    if args.out:
        rows = [[float(t), cert.F.eval(pt, subs)] for t, pt in zip(grid, pts)]
        write_table_csv(args.out, ["t", "F"], rows)
        print(f"values written to {args.out}")
    return 0


def cmd_darboux(args) -> int:
    names = ("x", "y")
    rows = []
    p_formal, q_formal = bryant_planar_system(None)
    g1 = darboux_verify(p_formal, q_formal, darboux_j1(None))
    print(f"planar system: x' = {p_formal.text(names)}, y' = {q_formal.text(names)}")
    print(f"J1 = {darboux_j1(None).text(names)} (n formal): "
          f"cofactor g = {g1.text(names) if g1 else 'NOT Darboux'}")
    rows.append(["J1(n formal)", g1.text(names) if g1 else ""])
    ok = g1 is not None
    if args.n == 4:
        p4, q4 = bryant_planar_system(4)
        g2 = darboux_verify(p4, q4, darboux_j2())
        print(f"J2 = {darboux_j2().text(names)} (n=4): "
              f"cofactor g = {g2.text(names) if g2 else 'NOT Darboux'}")
        rows.append(["J2(n=4)", g2.text(names) if g2 else ""])
        ok = ok and g2 is not None
        grid = default_grid(args.grid_side)
        dev = integrating_factor_check(4, grid)
        fd = closedness_fd_check(4, args.fd_step, grid)
        print(f"integrating factor R = sqrt(J1)/J2: "
              f"max |X(R) + div(X) R| = {dev:.3e}")
        print(f"closedness by finite differences: max |(RQ)_y + (RP)_x| = {fd:.3e}")
        rows.append(["max|X(R)+div(X)R|", f"{dev:.17g}"])
        rows.append(["max|(RQ)_y+(RP)_x|", f"{fd:.17g}"])
    if args.out:
        write_table_csv(args.out, ["item", "value"], rows)
        print(f"results written to {args.out}")
    return 0 if ok else VERIFY_ERROR


def cmd_catalog_list(args) -> int:
    for cid in catalog_ids():
        print(cid)
    return 0


def cmd_catalog_eval(args) -> int:
    curve = _curve_from_args(args)
    if args.tspan is not None:
        grid = np.linspace(args.tspan[0], args.tspan[1], args.samples)
    else:
        grid = curve.grid(count=args.samples)
    traj = curve_trajectory(curve, grid)
    print(f"{curve.id}: params {curve.params}")
    print(f"sampled {len(grid)} points on [{grid[0]:.4g}, {grid[-1]:.4g}]")
    print(f"max |H| along curve: {np.max(np.abs(traj.hvalues)):.3e}")
    if args.out:
        write_trajectory_csv(args.out, traj)
        print(f"samples written to {args.out}")
    _plot_if_asked(args, traj, curve.id)
    return 0


def cmd_catalog_check(args) -> int:
    curve = _curve_from_args(args)
    if args.tspan is not None:
        grid = np.linspace(args.tspan[0], args.tspan[1], args.samples)
    else:
        grid = curve.grid(count=args.samples)
    report = residual_scan(curve, grid=grid)
    for line in report.lines():
        print(line)
    worst = report.worst()
    verdict = "<" if worst < args.tol else ">="
    print(f"max residual {worst:.3e} {verdict} {args.tol:g}")
    if args.out:
        rows = [["res3", report.max_res3], ["res4", report.max_res4],
                ["res7", report.max_res7], ["res8", report.max_res8],
                ["H", report.max_hamiltonian],
                ["ambient-mismatch", report.max_ambient_mismatch]]
        rows += [[k, v] for k, v in sorted(report.extras.items())]
        write_table_csv(args.out, ["residual", "max"], rows)
        print(f"report written to {args.out}")
    if args.plot:
        traj = curve_trajectory(curve, grid)
        render_trajectory_figure(args.plot, traj, f"{curve.id} (checked)")
        print(f"figure written to {args.plot}")
    return 0 if worst < args.tol else VERIFY_ERROR


def cmd_smoothness(args) -> int:
    kwargs = {}
    if args.E is not None:
        kwargs["E"] = float(args.E)
    if args.a is not None:
        kwargs["a"] = args.a
    curve = closed_form(args.id, **kwargs)
    report = smoothness_check(curve, collapsing=args.k)
    for line in report.lines():
        print(line)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        ("orbit", "validate"): cmd_orbit_validate,
        ("superpotential", "search"): cmd_superpotential_search,
        ("superpotential", "verify"): cmd_superpotential_verify,
        ("subsystem", "integrate"): cmd_subsystem_integrate,
        ("canonical", "integrate"): cmd_canonical_integrate,
        ("integral", "recursion"): cmd_integral_recursion,
        ("integral", "drift"): cmd_integral_drift,
        ("darboux", None): cmd_darboux,
        ("catalog", "list"): cmd_catalog_list,
        ("catalog", "eval"): cmd_catalog_eval,
        ("catalog", "check"): cmd_catalog_check,
        ("smoothness", None): cmd_smoothness,
    }
    key = (args.group, getattr(args, "command", None))
    handler = handlers.get(key)
    if handler is None:
        parser.print_usage(sys.stderr)
        return USAGE_ERROR
    try:
        return handler(args)
    except GrsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return VERIFY_ERROR if not isinstance(exc, BadParams) else USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
