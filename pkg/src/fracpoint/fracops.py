"""Erdelyi-Kober integrals and McBride fractional powers of L = t^{1-2H} d/dt.

With m = 2H the operator L acts on t^{mq} as ``m q t^{m(q-1)}``, and its
fractional powers are

    L^a f(t) = m^a t^{-m a} I_m^{0,-a} f(t),

where ``I_m^{eta,a}`` is the Erdelyi-Kober integral

    I_m^{eta,a} f(t) = (1/Gamma(a)) int_0^1 (1-x)^{a-1} x^eta f(t x^{1/m}) dx,   a > 0,

and, for ``-1 <= a <= 0``, the recursion

    I_m^{eta,a} f = (eta + a + 1) I_m^{eta,a+1} f + (1/m) I_m^{eta,a+1}(u f'(u)).

The x-integral is done by Gauss-Jacobi quadrature with the endpoint weight
built in.  Functions whose expansion at 0 runs in powers of ``t^{m s}`` with
non-integer ``s`` converge slowly in x; ``smoothing = p`` substitutes
``x = y^p`` first (``p = 1/s`` turns them back into polynomials in y).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .specfun import AccuracyError, ml

__all__ = [
    "OperatorSpec",
    "ek_integral",
    "ek_fractional_derivative",
    "mcbride_power",
    "caputo_mcbride",
    "ml_eigenfunction",
]

N_START = 64
N_CAP = 4096
TOL = 1e-8


@dataclass(frozen=True)
class OperatorSpec:
    """The power ``order`` of ``L = t^{1-2H} d/dt``; ``m = 2H``, ``b = ceil(order)``."""

    H: float
    order: float

    def __post_init__(self):
        if not 0.0 < self.H < 1.0:
            raise ValueError(f"H must lie in (0, 1), got {self.H}")
        if not self.order >= 0:
            raise ValueError(f"order must be >= 0, got {self.order}")

    @property
    def m(self) -> float:
        return 2.0 * self.H

    @property
    def b(self) -> int:
        return max(1, math.ceil(self.order))


@functools.lru_cache(maxsize=256)
def _jacobi(n, alpha, beta):
    x, w = special.roots_jacobi(n, alpha, beta)
    return x, w


def _vec(f):
    def g(u):
        try:
            out = np.asarray(f(u), dtype=float)
            if out.shape == np.shape(u):
                return out
        except (TypeError, ValueError):
            pass
        return np.array([float(f(v)) for v in np.ravel(u)]).reshape(np.shape(u))

    return g


def _ek_rule(m, eta, a, f, t, n, p):
    """One Gauss-Jacobi estimate with n nodes of the a > 0 integral."""
    beta = p * (eta + 1.0) - 1.0
    y, w = _jacobi(n, a - 1.0, beta)
    yy = (1.0 + y) / 2.0
    x = yy**p
    # ((1 - y^p) / (1 - y))^{a-1}, smooth on [0, 1]
    ratio = np.where(yy < 1.0, -np.expm1(p * np.log(yy)) / (1.0 - yy), p)
    vals = f(t * x ** (1.0 / m))
    s = np.dot(w, ratio ** (a - 1.0) * vals)
    return p * s * 2.0 ** (-(a - 1.0) - beta - 1.0) / math.gamma(a)


def ek_integral(m: float, eta: float, a: float, f, t: float, smoothing: float = 1.0, tol: float = TOL) -> float:
    """Erdelyi-Kober integral I_m^{eta,a} f(t) for a > 0.

    Parameters
    ----------
    f : callable
        Evaluated on arrays of points in (0, t].
    smoothing : float
        Exponent p of the substitution x = y^p.
    tol : float
        Node counts double from 64 until successive estimates differ by less
        than ``tol`` (absolute, or relative to the value when it exceeds 1).

    Raises
    ------
    AccuracyError
        If 4096 nodes do not reach the tolerance.
    """
    if a <= 0:
        raise ValueError("ek_integral needs a > 0; use ek_fractional_derivative for a <= 0")
    if m <= 0 or t <= 0:
        raise ValueError("need m > 0 and t > 0")
    if eta <= -1:
        raise ValueError("need eta > -1 for the integral to exist")
    fv = _vec(f)
    n = N_START
    prev = _ek_rule(m, eta, a, fv, t, n, smoothing)
    while n < N_CAP:
        n *= 2
        cur = _ek_rule(m, eta, a, fv, t, n, smoothing)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return float(cur)
        prev = cur
    raise AccuracyError(f"Erdelyi-Kober quadrature did not settle below {tol:g} with {N_CAP} nodes")


def ek_fractional_derivative(m: float, eta: float, a: float, f, fprime, t: float, smoothing: float = 1.0) -> float:
    """I_m^{eta,a} f(t) for -1 <= a <= 0 by one step of the order-raising recursion."""
    if not -1.0 <= a <= 0.0:
        raise ValueError(f"a must lie in [-1, 0], got {a}")
    if a == 0.0:
        return float(np.asarray(f(t), dtype=float))
    fv, dv = _vec(f), _vec(fprime)
    if a == -1.0:
        # I^{eta,0} is the identity
        return float(eta * fv(np.asarray(t)) + t * dv(np.asarray(t)) / m)

    def uf(u):
        return u * dv(u)

    c = eta + a + 1.0
    first = c * ek_integral(m, eta, a + 1.0, fv, t, smoothing) if c != 0 else 0.0
    return float(first + ek_integral(m, eta, a + 1.0, uf, t, smoothing) / m)


def mcbride_power(spec: OperatorSpec, f, fprime, t: float, smoothing: float = 1.0) -> float:
    """L^a f(t) = m^a t^{-m a} I_m^{0,-a} f(t) with a = spec.order in [0, 1]."""
    a = spec.order
    if a > 1.0:
        raise ValueError("only orders in [0, 1] are implemented")
    if a == 0.0:
        return float(np.asarray(f(t), dtype=float))
    m = spec.m
    return m**a * t ** (-m * a) * ek_fractional_derivative(m, 0.0, -a, f, fprime, t, smoothing)


def caputo_mcbride(spec: OperatorSpec, f, fprime, f_at_0, t: float, smoothing: float = 1.0) -> float:
    """Caputo-regularised power: L^a applied to f minus its Taylor polynomial of degree b-1.

    ``f_at_0`` lists f(0+), f'(0+), ... at least up to order b-1.
    """
    b = spec.b
    coef = list(f_at_0)
    if len(coef) < b:
        raise ValueError(f"need {b} Taylor coefficients at 0, got {len(coef)}")
    coef = coef[:b]
    fv, dv = _vec(f), _vec(fprime)

    def g(u):
        u = np.asarray(u, dtype=float)
        return fv(u) - sum(c * u**k / math.factorial(k) for k, c in enumerate(coef))

    def dg(u):
        u = np.asarray(u, dtype=float)
        return dv(u) - sum(c * u ** (k - 1) / math.factorial(k - 1) for k, c in enumerate(coef) if k >= 1)

    return mcbride_power(spec, g, dg, t, smoothing)


def ml_eigenfunction(H: float, nu: float, c: float):
    """g(t) = E_{nu/2}(-c t^{H nu} / (2H)^{nu/2}) and g'(t), the eigenfunction of ^C L^{nu/2}.

    Uses E_mu'(z) = E_{mu,mu}(z) / mu, so t g'(t) = 2H z E_{mu,mu}(z) with
    z = -c t^{H nu} / (2H)^{nu/2}.  Returns ``(g, g_prime, smoothing)`` where
    the last entry is the substitution exponent that makes the quadrature
    integrand polynomial.
    """
    mu = nu / 2.0
    scale = c / (2.0 * H) ** mu

    def z(t):
        return -scale * np.asarray(t, dtype=float) ** (H * nu)

    def g(t):
        return ml(mu, 1.0, z(t))

    def gp(t):
        t = np.asarray(t, dtype=float)
        zz = z(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = 2.0 * H * zz * ml(mu, mu, zz) / t
        return np.where(t > 0, out, 0.0) if np.ndim(out) else out

    return g, gp, 1.0 / mu
