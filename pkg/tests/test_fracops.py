from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from fracpoint.fracops import (
    OperatorSpec,
    caputo_mcbride,
    ek_fractional_derivative,
    ek_integral,
    mcbride_power,
    ml_eigenfunction,
)
from fracpoint.specfun import AccuracyError, ml

one = lambda u: np.ones_like(np.asarray(u, dtype=float))
zero = lambda u: np.zeros_like(np.asarray(u, dtype=float))


def raw_ek(m, eta, a, f, t):
    """Direct quadrature of t^{-m(eta+a)} / Gamma(a) int_0^t (t^m - u^m)^{a-1} u^{m eta} f(u) m u^{m-1} du."""
    g = lambda u: (t**m - u**m) ** (a - 1) * u ** (m * eta) * f(u) * m * u ** (m - 1)
    v = integrate.quad(g, 0, t, limit=200, epsabs=1e-13)[0]
    return t ** (-m * (eta + a)) * v / math.gamma(a)


def test_operator_spec():
    s = OperatorSpec(0.7, 0.4)
    assert s.m == pytest.approx(1.4) and s.b == 1
    assert OperatorSpec(0.5, 1.5).b == 2
    with pytest.raises(ValueError):
        OperatorSpec(1.2, 0.5)


def test_monomial_rule_example():
    assert ek_integral(1.0, 0.0, 0.5, lambda u: u, 1.0) == pytest.approx(math.gamma(2) / math.gamma(2.5), abs=1e-8)
    assert ek_integral(1.0, 0.0, 0.5, one, 1.0) == pytest.approx(1 / math.gamma(1.5), abs=1e-8)
    assert ek_integral(1.0, 0.0, 1.0, lambda u: u, 2.0) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("m,eta,a,q", [(1.4, 0.0, 0.6, 1.0), (0.6, 0.5, 0.3, 2.0), (1.0, 0.2, 1.7, 0.5)])
def test_monomial_rule_general(m, eta, a, q):
    t = 1.3
    f = lambda u: np.asarray(u, dtype=float) ** (m * q)
    ref = math.gamma(eta + q + 1) / math.gamma(eta + a + q + 1) * t ** (m * q)
    assert ek_integral(m, eta, a, f, t) == pytest.approx(ref, rel=1e-8)


def test_against_raw_quadrature():
    f = lambda u: np.cos(np.asarray(u, dtype=float)) + 2.0
    for m, eta, a in [(1.0, 0.0, 0.5), (1.4, 0.3, 0.7), (0.6, 0.0, 1.5)]:
        assert ek_integral(m, eta, a, f, 1.7) == pytest.approx(raw_ek(m, eta, a, lambda u: math.cos(u) + 2.0, 1.7), rel=1e-8)


def test_fractional_derivative_monomial():
    val = ek_fractional_derivative(1.0, 0.0, -0.5, lambda u: u, one, 1.0)
    assert val == pytest.approx(math.gamma(2) / math.gamma(1.5), abs=1e-8)
    assert ek_fractional_derivative(1.0, 0.0, 0.0, lambda u: u**2, lambda u: 2 * u, 1.5) == pytest.approx(2.25)


def test_linearity_and_homogeneity():
    f, df = np.sin, np.cos
    g, dg = (lambda u: np.asarray(u) ** 2), (lambda u: 2 * np.asarray(u))
    h = lambda u: 2.5 * f(u) - g(u)
    dh = lambda u: 2.5 * df(u) - dg(u)
    spec = OperatorSpec(0.7, 0.4)
    lhs = mcbride_power(spec, h, dh, 1.2)
    rhs = 2.5 * mcbride_power(spec, f, df, 1.2) - mcbride_power(spec, g, dg, 1.2)
    assert lhs == pytest.approx(rhs, abs=1e-10)
    a = ek_integral(1.4, 0.0, 0.3, h, 1.2)
    b = 2.5 * ek_integral(1.4, 0.0, 0.3, f, 1.2) - ek_integral(1.4, 0.0, 0.3, g, 1.2)
    assert a == pytest.approx(b, abs=1e-10)


def test_semigroup_on_monomial():
    m, eta, q, t = 1.4, 0.2, 1.5, 1.1
    f = lambda u: np.asarray(u, dtype=float) ** (m * q)
    inner = lambda u: np.array([ek_integral(m, eta + 0.3, 0.4, f, float(v)) for v in np.atleast_1d(u)]).reshape(np.shape(u))
    lhs = ek_integral(m, eta, 0.3, inner, t)
    rhs = ek_integral(m, eta, 0.7, f, t)
    assert lhs == pytest.approx(rhs, abs=1e-8)


@pytest.mark.parametrize("H", [0.3, 0.5, 0.7])
def test_order_one_anchor(H):
    spec = OperatorSpec(H, 1.0)
    for t in (0.4, 1.0, 1.9):
        got = mcbride_power(spec, np.sin, np.cos, t)
        assert got == pytest.approx(t ** (1 - 2 * H) * math.cos(t), abs=1e-6)
    assert mcbride_power(OperatorSpec(0.5, 1.0), lambda u: u**2, lambda u: 2 * u, 1.0) == pytest.approx(2.0, abs=1e-6)


def test_order_zero_and_power_rule():
    assert mcbride_power(OperatorSpec(0.6, 0.0), np.exp, np.exp, 0.8) == pytest.approx(math.exp(0.8))
    assert mcbride_power(OperatorSpec(0.5, 0.5), lambda u: u, one, 1.0) == pytest.approx(math.gamma(2) / math.gamma(1.5), abs=1e-8)
    H, a, q, t = 0.7, 0.4, 1.3, 1.6
    m = 2 * H
    f = lambda u: np.asarray(u, dtype=float) ** (m * q)
    df = lambda u: m * q * np.asarray(u, dtype=float) ** (m * q - 1)
    ref = m**a * math.gamma(q + 1) / math.gamma(q - a + 1) * t ** (m * (q - a))
    assert mcbride_power(OperatorSpec(H, a), f, df, t) == pytest.approx(ref, rel=1e-8)


def test_caputo_kills_constants():
    assert caputo_mcbride(OperatorSpec(0.7, 0.4), lambda u: 3.0 * one(u), zero, [3.0], 1.3) == pytest.approx(0.0, abs=1e-14)


def test_caputo_needs_taylor_data():
    with pytest.raises(ValueError):
        caputo_mcbride(OperatorSpec(0.5, 1.5), np.exp, np.exp, [1.0], 1.0)


@pytest.mark.parametrize("H,nu", [(0.5, 1.0), (0.7, 0.8), (0.3, 1.4)])
@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
def test_eigenrelation(H, nu, c):
    g, gp, p = ml_eigenfunction(H, nu, c)
    spec = OperatorSpec(H, nu / 2)
    for t in np.linspace(0.1, 2.0, 4):
        lhs = caputo_mcbride(spec, g, gp, [1.0], float(t), smoothing=p)
        assert lhs == pytest.approx(-c * float(g(t)), rel=1e-4)


def test_eigenrelation_without_smoothing():
    g, gp, _ = ml_eigenfunction(0.7, 0.8, 1.0)
    lhs = caputo_mcbride(OperatorSpec(0.7, 0.4), g, gp, [1.0], 1.0)
    assert lhs == pytest.approx(-float(g(1.0)), rel=1e-4)


def test_classical_caputo_half():
    # H = 1/2 makes L = d/dt, so the operator is the classical Caputo derivative of
    # order 1/2.  With g(s) = E_{1/2}(-sqrt s), g'(s) = -E_{1/2,1/2}(-sqrt s) / sqrt s and
    # D^{1/2} g(t) = (1/sqrt pi) int_0^t g'(s) (t-s)^{-1/2} ds, done with an algebraic weight.
    t = 1.2
    h = lambda s: -float(ml(0.5, 0.5, -math.sqrt(s)))
    ref = integrate.quad(h, 0, t, weight="alg", wvar=(-0.5, -0.5))[0] / math.sqrt(math.pi)
    f, fp, p = ml_eigenfunction(0.5, 1.0, 1.0)
    got = caputo_mcbride(OperatorSpec(0.5, 0.5), f, fp, [1.0], t, smoothing=p)
    assert got == pytest.approx(ref, rel=1e-4)
    assert got == pytest.approx(-float(ml(0.5, 1.0, -math.sqrt(t))), rel=1e-4)


def test_quadrature_failure_is_flagged():
    rough = lambda u: np.sign(np.sin(400 * np.asarray(u, dtype=float)))
    with pytest.raises(AccuracyError):
        ek_integral(1.0, 0.0, 0.5, rough, 1.0)


def test_domain_checks():
    with pytest.raises(ValueError):
        ek_integral(1.0, 0.0, 0.0, one, 1.0)
    with pytest.raises(ValueError):
        ek_integral(1.0, -1.5, 0.5, one, 1.0)
    with pytest.raises(ValueError):
        ek_fractional_derivative(1.0, 0.0, -1.5, one, zero, 1.0)
