"""Concrete identities of the closed-form families: matrices, devices, roots.

These pin the concrete numbers these families satisfy (J matrices, the
two-ways decomposition behind the 5D integral, quadrature constants) against
the implementation, independently of the higher-level machinery tests.
"""

import math
from fractions import Fraction as F

import numpy as np
import pytest

from grsham import (
    ExtVector,
    beta_quadrature,
    closed_form,
    factorization_seed,
    sphere_orbit,
    warped_orbit,
)
from grsham.first_integrals import j_mompoly
from grsham.mompoly import MomPoly


def test_j_matrix_bryant4(sphere4):
    m = sphere4.form.matrix()
    assert m == [[F(-1, 4), F(-1, 2)], [F(-1, 2), F(-3, 4)]]


def test_j_matrix_warped22(warped22):
    m = warped22.form.matrix()
    assert m == [
        [F(-1, 2), F(0), F(-1, 2)],
        [F(0), F(-1, 2), F(-1, 2)],
        [F(-1, 2), F(-1, 2), F(-3, 4)],
    ]


def test_bryant_theta_directional_values():
    """d.grad theta = -1; (d+w).grad theta = -1 + 1/sqrt(n)."""
    for n in (4, 9):
        orbit = sphere_orbit(n)
        theta = factorization_seed(orbit).theta
        d = orbit.d_ext.entries
        dw = (orbit.d_ext + ExtVector.of([-1, 0])).entries
        assert theta.directional(d) == MomPoly.const(2, -1)
        root = math.isqrt(n)
        assert theta.directional(dw) == MomPoly.const(2, F(-1) + F(1, root))
    # -1 + 1/sqrt(n) is minus the reciprocal of an integer only for n = 4
    assert F(-1) + F(1, 2) == F(-1, 2)
    assert F(-1) + F(1, 3) == F(-2, 3)  # not -1/k


def test_two_ways_decomposition_n4(sphere4):
    """-theta^2 = -J + tau theta with tau = p + 2 phi, d.grad tau = 0."""
    p, phi = MomPoly.variable(2, 0), MomPoly.variable(2, 1)
    theta = factorization_seed(sphere4).theta
    tau = p + 2 * phi
    assert tau.directional(sphere4.d_ext.entries).is_zero()
    jpoly = j_mompoly(sphere4)
    assert -theta * theta == -jpoly + tau * theta
    assert -theta * theta == (p + phi) * (p + phi) * F(-1, 4)


def test_warped_udot_two_forms():
    """-sqrt(E) + 1/(t+t0) - 2 sqrt(E)/(e^{2 sqrt(E)(t+t1)} - 1) equals
    1/(t+t0) - sqrt(E) coth(sqrt(E)(t+t1))."""
    rE = math.sqrt(2.0)
    for t0, t1 in [(0.0, 0.0), (0.3, 0.7)]:
        for t in (0.2, 1.0, 3.0):
            display = -rE + 1.0 / (t + t0) \
                - 2.0 * rE / (math.exp(2.0 * rE * (t + t1)) - 1.0)
            compact = 1.0 / (t + t0) - rE / math.tanh(rE * (t + t1))
            assert display == pytest.approx(compact, rel=1e-13)
    # the catalog's smooth-family udot is the t0 = t1 = 0 case
    curve = closed_form("warped-smooth", E=2.0)
    for t in (0.5, 2.0):
        display = -rE + 1.0 / t - 2.0 * rE / (math.exp(2.0 * rE * t) - 1.0)
        assert curve.udot(t) == pytest.approx(display, rel=1e-12)


def test_bryant_smooth_u_display():
    """u = log((coth^2(x) - 1)(t coth(x) - 2/sqrt(E))) + const, x = sqrt(E)t/2."""
    E = 1.7
    rE = math.sqrt(E)
    curve = closed_form("bryant5-smooth", E=E)

    def display(t):
        c = 1.0 / math.tanh(0.5 * rE * t)
        return math.log((c * c - 1.0) * (t * c - 2.0 / rE))

    offsets = [curve.u(t) - display(t) for t in np.linspace(0.3, 4.0, 15)]
    assert max(offsets) - min(offsets) < 1e-12


def test_negmu_quadrature_with_offsets():
    """General (t0, t1) quadrature reproduces the shifted coth family."""
    E, t0, t1 = 1.3, 0.4, 0.9
    rE = math.sqrt(E)
    bq = beta_quadrature(E, -2.5, t0=t0, t1=t1)
    for t in (0.5, 1.0, 2.0):
        x = 0.5 * rE * (t + t0)
        alpha = (6.0 / rE) * ((t + t0 + t1) / math.tanh(x) - 2.0 / rE)
        assert bq.alpha(t) == pytest.approx(alpha, rel=1e-13)
        # (beta')^2 = E - mu e^{-beta} via finite differences of beta
        step = 1e-6
        beta_dot = (bq.beta(t + step) - bq.beta(t - step)) / (2 * step)
        assert beta_dot ** 2 == pytest.approx(
            E + 2.5 * math.exp(-bq.beta(t)), rel=1e-8)
        # the linear alpha equation 2 beta' alpha' - mu e^{-beta} alpha = 12
        alpha_dot = (bq.alpha(t + step) - bq.alpha(t - step)) / (2 * step)
        lhs = 2.0 * beta_dot * alpha_dot + 2.5 * math.exp(-bq.beta(t)) * bq.alpha(t)
        assert lhs == pytest.approx(12.0, rel=1e-7)


def test_posmu_quadrature_equation():
    E, mu, t0 = 4.0, 3.0, 0.8
    bq = beta_quadrature(E, mu, t0=t0)
    step = 1e-6
    for t in (0.5, 1.5):
        beta_dot = (bq.beta(t + step) - bq.beta(t - step)) / (2 * step)
        assert beta_dot ** 2 == pytest.approx(
            E - mu * math.exp(-bq.beta(t)), rel=1e-8)
        alpha_dot = (bq.alpha(t + step) - bq.alpha(t - step)) / (2 * step)
        lhs = 2.0 * beta_dot * alpha_dot - mu * math.exp(-bq.beta(t)) * bq.alpha(t)
        assert lhs == pytest.approx(12.0, rel=1e-7)


def test_warped_special_not_smooth():
    from grsham import smoothness_check
    rep = smoothness_check(closed_form("warped-special", E=1.0), collapsing=0)
    assert rep.verdict != "smooth"
