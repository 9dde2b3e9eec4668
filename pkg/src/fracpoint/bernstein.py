"""Closed catalog of Bernstein functions and the derivative recursions built on them.

Every catalog member ``f`` is the Laplace exponent of a subordinator,
``E exp(-mu H^f(t)) = exp(-t f(mu))``.  Besides values and derivatives the
recursions below need only the nonnegative numbers

    a_n(lam) = lam^n |f^(n)(lam)| / n!,     n >= 1,

which are the Taylor coefficients of ``f(lam) - f(lam (1 - w))`` in ``w``.
Working with them instead of signed derivatives keeps every recursion a sum of
positive terms, so nothing cancels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

__all__ = [
    "BernsteinFunction",
    "Linear",
    "Stable",
    "TemperedStable",
    "Gamma",
    "parse_bernstein",
    "exp_comp_derivs",
    "exp_comp_coefficients",
    "reciprocal_derivs",
    "reciprocal_coefficients",
]


def _binom_abs(alpha: float, n_max: int) -> np.ndarray:
    """|binom(alpha, n)| for n = 0..n_max, by the stable product recursion."""
    out = np.zeros(n_max + 1)
    out[0] = 1.0
    for n in range(1, n_max + 1):
        out[n] = out[n - 1] * abs(alpha - n + 1) / n
    return out


def _falling(alpha: float, n: int) -> float:
    """alpha (alpha-1) ... (alpha-n+1)."""
    p = 1.0
    for j in range(n):
        p *= alpha - j
    return p


def _check_x(x, allow_zero=True):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or (not allow_zero and np.any(arr == 0)) or np.any(np.isnan(arr)):
        raise ValueError(f"argument outside the domain of the Bernstein function: {x!r}")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


class BernsteinFunction:
    """Base class; subclasses are frozen dataclasses."""

    family = "abstract"

    def value(self, x):
        raise NotImplementedError

    def deriv(self, n: int, x):
        raise NotImplementedError

    def jump_rates(self, lam: float, n_max: int) -> np.ndarray:
        """Array ``a`` with ``a[0] = 0`` and ``a[n] = lam^n |f^(n)(lam)| / n!``."""
        raise NotImplementedError

    def deriv_at_zero(self) -> float:
        """f'(0+), possibly infinite."""
        return float(self.deriv(1, 0.0))

    def second_deriv_at_zero(self) -> float:
        return float(self.deriv(2, 0.0))

    def levy_moment(self, m: int, lam: float) -> float:
        """int s^m exp(-lam s) nu(ds) = (-1)^(m+1) f^(m)(lam) for m >= 1."""
        if m < 1:
            raise ValueError("Levy moments are provided for m >= 1")
        return (-1) ** (m + 1) * float(self.deriv(m, lam))

    def encode(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.encode()

    def _check_order(self, n):
        if int(n) != n or n < 1:
            raise ValueError(f"derivative order must be an integer >= 1, got {n}")


@dataclass(frozen=True)
class Linear(BernsteinFunction):
    """f(x) = c x.  c = 1 is the identity (plain Poisson); c = 0 is the null function."""

    c: float = 1.0
    family = "linear"

    def __post_init__(self):
        if not (self.c >= 0 and math.isfinite(self.c)):
            raise ValueError(f"linear coefficient must be >= 0, got {self.c}")

    def value(self, x):
        return _out(self.c * _check_x(x))

    def deriv(self, n, x):
        self._check_order(n)
        arr = _check_x(x)
        return _out(np.full_like(arr, self.c if n == 1 else 0.0))

    def jump_rates(self, lam, n_max):
        a = np.zeros(n_max + 1)
        if n_max >= 1:
            a[1] = self.c * lam
        return a

    def encode(self):
        return "linear" if self.c == 1.0 else f"linear:{self.c!r}"


@dataclass(frozen=True)
class Stable(BernsteinFunction):
    """f(x) = x^alpha, alpha in (0, 1]."""

    alpha: float
    family = "stable"

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"stable index must lie in (0, 1], got {self.alpha}")

    def value(self, x):
        return _out(_check_x(x) ** self.alpha)

    def deriv(self, n, x):
        self._check_order(n)
        a = self.alpha
        if a == 1.0:
            return Linear().deriv(n, x)
        arr = _check_x(x)
        if np.any(arr == 0):
            raise ValueError("derivatives of x^alpha diverge at x = 0")
        return _out(_falling(a, n) * arr ** (a - n))

    def jump_rates(self, lam, n_max):
        a = lam**self.alpha * _binom_abs(self.alpha, n_max)
        a[0] = 0.0
        return a

    def deriv_at_zero(self):
        return 1.0 if self.alpha == 1.0 else math.inf

    def second_deriv_at_zero(self):
        return 0.0 if self.alpha == 1.0 else -math.inf

    def encode(self):
        return f"stable:{self.alpha!r}"


@dataclass(frozen=True)
class TemperedStable(BernsteinFunction):
    """f(x) = (x + theta)^alpha - theta^alpha."""

    alpha: float
    theta: float

    family = "tempered"

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"stable index must lie in (0, 1], got {self.alpha}")
        if not (self.theta >= 0 and math.isfinite(self.theta)):
            raise ValueError(f"tempering must be >= 0, got {self.theta}")

    def value(self, x):
        arr = _check_x(x)
        a, th = self.alpha, self.theta
        if th == 0:
            return _out(arr**a)
        # (x+th)^a - th^a: the expm1 form avoids cancellation for x < th,
        # the plain difference is safe (and cannot overflow) above
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            small = th**a * np.expm1(a * np.log1p(arr / th))
        return _out(np.where(arr < th, small, (arr + th) ** a - th**a))

    def deriv(self, n, x):
        self._check_order(n)
        arr = _check_x(x)
        if self.theta == 0 and np.any(arr == 0) and self.alpha < 1:
            raise ValueError("derivatives diverge at x = 0 without tempering")
        return _out(_falling(self.alpha, n) * (arr + self.theta) ** (self.alpha - n))

    def jump_rates(self, lam, n_max):
        a, th = self.alpha, self.theta
        n = np.arange(n_max + 1)
        out = (lam + th) ** a * _binom_abs(a, n_max) * (lam / (lam + th)) ** n
        out[0] = 0.0
        return out

    def deriv_at_zero(self):
        if self.theta == 0:
            return Stable(self.alpha).deriv_at_zero()
        return self.alpha * self.theta ** (self.alpha - 1)

    def second_deriv_at_zero(self):
        if self.theta == 0:
            return Stable(self.alpha).second_deriv_at_zero()
        return self.alpha * (self.alpha - 1) * self.theta ** (self.alpha - 2)

    def encode(self):
        return f"tempered:{self.alpha!r},{self.theta!r}"


@dataclass(frozen=True)
class Gamma(BernsteinFunction):
    """f(x) = b log(1 + x/b): the gamma subordinator with Levy measure b e^{-bs} s^{-1} ds."""

    b: float

    family = "gamma"

    def __post_init__(self):
        if not (self.b > 0 and math.isfinite(self.b)):
            raise ValueError(f"gamma parameter must be positive, got {self.b}")

    def value(self, x):
        return _out(self.b * np.log1p(_check_x(x) / self.b))

    def deriv(self, n, x):
        self._check_order(n)
        arr = _check_x(x)
        sign = 1.0 if n % 2 == 1 else -1.0
        return _out(sign * self.b * math.factorial(n - 1) / (self.b + arr) ** n)

    def jump_rates(self, lam, n_max):
        n = np.arange(n_max + 1, dtype=float)
        out = np.zeros(n_max + 1)
        out[1:] = self.b / n[1:] * (lam / (self.b + lam)) ** n[1:]
        return out

    def encode(self):
        return f"gamma:{self.b!r}"


def parse_bernstein(text: str) -> BernsteinFunction:
    """Parse ``linear``, ``linear:c``, ``stable:a``, ``tempered:a,theta`` or ``gamma:b``."""
    name, _, args = text.strip().partition(":")
    name = name.strip().lower()
    try:
        vals = [float(v) for v in args.split(",")] if args.strip() else []
    except ValueError:
        raise ValueError(f"bad numeric parameters in {text!r}") from None
    expected = {"linear": (0, 1), "stable": (1,), "tempered": (2,), "gamma": (1,)}
    if name not in expected:
        raise ValueError(f"unknown Bernstein family {name!r} in {text!r}")
    if len(vals) not in expected[name]:
        raise ValueError(f"wrong number of parameters for {name!r} in {text!r}")
    if name == "linear":
        return Linear(*vals)
    if name == "stable":
        return Stable(vals[0])
    if name == "tempered":
        return TemperedStable(vals[0], vals[1])
    return Gamma(vals[0])


# --------------------------------------------------------------------------
# derivative recursions
# --------------------------------------------------------------------------


def _rates(fs, lam, k_max):
    if isinstance(fs, BernsteinFunction):
        fs = (fs,)
    a = np.zeros(k_max + 1)
    f0 = 0.0
    for f in fs:
        a += f.jump_rates(lam, k_max)
        f0 += f.value(lam)
    return a, f0


def exp_comp_coefficients(f, lam: float, t: float, k_max: int) -> np.ndarray:
    """p_k = ((-1)^k / k!) d^k/du^k exp(-t f(lam u)) at u = 1, for k = 0..k_max.

    ``f`` may be a single catalog member or a sequence, in which case the
    exponents add.  Computed by the Panjer form of the Bell recursion,

        (k+1) p_{k+1} = t sum_{j<=k} (k+1-j) a_{k+1-j} p_j,

    whose terms are all nonnegative.  These are the state probabilities of
    ``N(H^f(t))`` for a rate-``lam`` Poisson process ``N``.
    """
    if lam <= 0 or t < 0:
        raise ValueError("need lam > 0 and t >= 0")
    a, f0 = _rates(f, lam, k_max)
    p = np.zeros(k_max + 1)
    p[0] = math.exp(-t * f0)
    ja = np.arange(k_max + 1) * a
    for k in range(k_max):
        # sum_j (k+1-j) a_{k+1-j} p_j
        p[k + 1] = t * np.dot(ja[k + 1 : 0 : -1], p[: k + 1]) / (k + 1)
    return p


def exp_comp_derivs(f, lam: float, t: float, k_max: int) -> np.ndarray:
    """g_k = d^k/du^k exp(-t f(lam u)) at u = 1 for k = 0..k_max.

    Raises
    ------
    OverflowError
        If some ``|g_k|`` is not representable as a float.
    """
    p = exp_comp_coefficients(f, lam, t, k_max)
    k = np.arange(k_max + 1)
    with np.errstate(over="ignore", invalid="ignore"):
        g = (-1.0) ** k * np.exp(np.log(np.where(p > 0, p, 1.0)) + _lfact(k)) * (p > 0)
    if not np.all(np.isfinite(g)):
        raise OverflowError(f"exp-composite derivative exceeds float range before order {k_max}")
    return g


def reciprocal_coefficients(f, lam: float, k_max: int, shift: float = 0.0) -> np.ndarray:
    """rho_n with d^n/du^n [1/(shift + f(lam u))] at u=1 equal to (-1)^n n! rho_n.

    From ``f(lam(1-w)) = f(lam) - sum_n a_n w^n`` one gets
    ``rho_n = (1/g) sum_{j<n} a_{n-j} rho_j`` with ``g = shift + f(lam)``; all
    terms are nonnegative when ``shift >= 0``.
    """
    a, f0 = _rates(f, lam, k_max)
    f0 += shift
    if f0 <= 0:
        raise ZeroDivisionError("1/f(lam) is singular: f(lam) = 0")
    rho = np.zeros(k_max + 1)
    rho[0] = 1.0 / f0
    for n in range(1, k_max + 1):
        rho[n] = np.dot(a[n:0:-1], rho[:n]) / f0
    return rho


def reciprocal_derivs(f, lam: float, k_max: int) -> np.ndarray:
    """Derivatives of h(u) = 1/f(lam u) at u = 1, orders 0..k_max."""
    rho = reciprocal_coefficients(f, lam, k_max)
    k = np.arange(k_max + 1)
    with np.errstate(over="ignore"):
        r = (-1.0) ** k * np.exp(np.log(np.where(rho > 0, rho, 1.0)) + _lfact(k)) * (rho > 0)
    if not np.all(np.isfinite(r)):
        raise OverflowError("reciprocal derivative exceeds float range")
    return r


def _lfact(k):
    return gammaln(np.asarray(k, dtype=float) + 1.0)
