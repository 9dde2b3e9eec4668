"""Marginal laws of the subordinated Poisson families.

Six families are described by small frozen dataclasses (:class:`SpaceFractional`,
:class:`TimeFractional`, :class:`SpaceTime`, :class:`BernsteinPoisson`,
:class:`MultiSubordinated`, :class:`GgbmTime`).  All parameters are the
physical rate ``lam`` of the underlying Poisson process.

Every family reduces to one of two computational shapes:

* ``N(H^f(t))`` is compound Poisson with total rate ``f(lam)`` and jump law
  ``a_n / f(lam)`` (see :mod:`fracpoint.bernstein`); its pmf comes from the
  Panjer recursion.
* Time changing by an inverse stable subordinator ``L^nu(t)`` turns the jump
  count ``M`` into a time-fractional Poisson variable, whose pmf is an
  M-Wright mixture of Poisson laws.  The composite pmf is then
  ``sum_n P(M = n) q^{*n}``.

The closed-form alternating series for each family are kept too; they are used
where their rounding error is provably small.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, signal, special, stats

from . import specfun
from .bernstein import (
    BernsteinFunction,
    Stable,
    exp_comp_coefficients,
    parse_bernstein,
)
from .specfun import AccuracyError

__all__ = [
    "SpaceFractional",
    "TimeFractional",
    "SpaceTime",
    "BernsteinPoisson",
    "MultiSubordinated",
    "GgbmTime",
    "ProcessSpec",
    "PmfTable",
    "MomentSummary",
    "UnsupportedError",
    "InfiniteMomentError",
    "parse_process",
    "pmf_space_fractional",
    "sibuya_jump_pmf",
    "sibuya_tail",
    "pmf_time_fractional",
    "pmf_space_time",
    "pmf_bernstein",
    "pmf_multi",
    "pmf_ggbm_time",
    "pmf_vector",
    "pmf_table",
    "pgf",
    "moments_multi_timechanged",
]

TAIL_TOL = 1e-8
K_CAP = 10_000
EPS = np.finfo(float).eps
# the closed-form series are used when their rounding error is below this
_SERIES_SAFE = 1e-13


class UnsupportedError(ValueError):
    """Requested quantity has no exact formula for these parameters."""


class InfiniteMomentError(ArithmeticError):
    """A moment of the process is infinite."""


def _rate(lam):
    if not (lam > 0 and math.isfinite(lam)):
        raise ValueError(f"rate must be positive and finite, got {lam}")


def _unit(name, v, closed_low=False, high=1.0):
    ok = (0.0 <= v if closed_low else 0.0 < v) and v <= high
    if not ok:
        raise ValueError(f"{name} must lie in (0, {high:g}], got {v}")


@dataclass(frozen=True)
class SpaceFractional:
    alpha: float
    lam: float = 1.0

    def __post_init__(self):
        _unit("alpha", self.alpha)
        _rate(self.lam)

    def encode(self):
        return f"space:{self.alpha!r}"


@dataclass(frozen=True)
class TimeFractional:
    nu: float
    lam: float = 1.0

    def __post_init__(self):
        _unit("nu", self.nu)
        _rate(self.lam)

    def encode(self):
        return f"time:{self.nu!r}"


@dataclass(frozen=True)
class SpaceTime:
    alpha: float
    nu: float
    lam: float = 1.0

    def __post_init__(self):
        _unit("alpha", self.alpha)
        _unit("nu", self.nu)
        _rate(self.lam)

    def encode(self):
        return f"spacetime:{self.alpha!r},{self.nu!r}"


@dataclass(frozen=True)
class BernsteinPoisson:
    f: BernsteinFunction
    lam: float = 1.0

    def __post_init__(self):
        _rate(self.lam)

    def encode(self):
        return self.f.encode()


@dataclass(frozen=True)
class MultiSubordinated:
    """N(H^{f_1}(tau) + ... + H^{f_n}(tau)) with tau = t, or tau = L^nu(t) if nu is given."""

    fs: tuple
    lam: float = 1.0
    nu: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "fs", tuple(self.fs))
        if not self.fs:
            raise ValueError("need at least one Bernstein function")
        _rate(self.lam)
        if self.nu is not None:
            _unit("nu", self.nu)

    def encode(self):
        s = "multi:" + "+".join(f.encode() for f in self.fs)
        return s if self.nu is None else f"{s}@{self.nu!r}"


@dataclass(frozen=True)
class GgbmTime:
    """Poisson process run by the absolute value of generalized grey Brownian motion."""

    H: float
    nu: float
    lam: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.H < 1.0:
            raise ValueError(f"H must lie in (0, 1), got {self.H}")
        _unit("nu", self.nu, high=2.0)
        _rate(self.lam)

    def encode(self):
        return f"ggbm:{self.H!r},{self.nu!r}"


ProcessSpec = SpaceFractional | TimeFractional | SpaceTime | BernsteinPoisson | MultiSubordinated | GgbmTime


def parse_process(text: str, lam: float = 1.0):
    """Parse a process encoding.

    Accepted forms: ``space:a``, ``time:nu``, ``spacetime:a,nu``, ``ggbm:H,nu``,
    ``multi:f1+f2[@nu]`` and any Bernstein encoding (``stable:a``, ``gamma:b``...),
    the latter meaning ``BernsteinPoisson``.
    """
    name, _, args = text.strip().partition(":")
    name = name.strip().lower()

    def nums(k):
        try:
            vals = [float(v) for v in args.split(",")]
        except ValueError:
            raise ValueError(f"bad numeric parameters in {text!r}") from None
        if len(vals) != k:
            raise ValueError(f"{name!r} takes {k} parameter(s), got {text!r}")
        return vals

    if name == "space":
        return SpaceFractional(*nums(1), lam=lam)
    if name == "time":
        return TimeFractional(*nums(1), lam=lam)
    if name == "spacetime":
        return SpaceTime(*nums(2), lam=lam)
    if name == "ggbm":
        return GgbmTime(*nums(2), lam=lam)
    if name == "multi":
        body, _, outer = args.partition("@")
        fs = tuple(parse_bernstein(p) for p in body.split("+"))
        nu = float(outer) if outer.strip() else None
        return MultiSubordinated(fs, lam=lam, nu=nu)
    return BernsteinPoisson(parse_bernstein(text), lam=lam)


# --------------------------------------------------------------------------
# Sibuya jumps
# --------------------------------------------------------------------------


def sibuya_jump_pmf(alpha: float, k: int) -> float:
    """P(J = k) for the Sibuya(alpha) jump law, k >= 1."""
    _unit("alpha", alpha)
    if k < 1:
        return 0.0
    if alpha == 1.0:
        return 1.0 if k == 1 else 0.0
    if k <= 200:
        return float(_sibuya_vector(alpha, k)[k])
    # alpha Gamma(k - alpha) / (Gamma(1 - alpha) k!)
    return float(alpha * special.poch(k + 1, -1 - alpha) * special.rgamma(1 - alpha))


def sibuya_tail(alpha: float, k):
    """P(J > k) = prod_{j<=k} (1 - alpha/j) = Gamma(k+1-alpha) / (Gamma(1-alpha) k!)."""
    k = np.asarray(k, dtype=float)
    if alpha == 1.0:
        out = np.where(k < 1, 1.0, 0.0)
    else:
        out = np.where(k < 1, 1.0, special.poch(np.maximum(k, 1) + 1, -alpha) * special.rgamma(1 - alpha))
    return float(out) if out.ndim == 0 else out


def _sibuya_vector(alpha, k_max):
    q = np.zeros(k_max + 1)
    if k_max >= 1:
        q[1] = alpha
    for k in range(1, k_max):
        q[k + 1] = q[k] * (k - alpha) / (k + 1)
    return q


# --------------------------------------------------------------------------
# time-fractional counts: P(M = n) with pgf E_nu(-x (1-u))
# --------------------------------------------------------------------------


def _tf_series(nu, x, n_max):
    """Alternating series p_n = sum_{j>=n} C(j,n) (-1)^{j-n} x^j / Gamma(nu j + 1).

    Returns (p, worst rounding error).  Only called for moderate x.
    """
    lx = math.log(x)
    j = np.arange(0, SERIES_J_CAP)
    logT = j * lx - special.gammaln(nu * j + 1)
    n = np.arange(n_max + 1)[:, None]
    jj = j[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        logc = special.gammaln(jj + 1) - special.gammaln(n + 1) - special.gammaln(np.maximum(jj - n, 0) + 1)
        logmag = np.where(jj >= n, logc + logT[None, :], -np.inf)
    mag = np.exp(logmag)
    sign = np.where((jj - n) % 2 == 0, 1.0, -1.0)
    p = np.sum(sign * mag, axis=1)
    abs_sum = np.sum(mag, axis=1)
    last = mag[:, -1]
    err = 4 * EPS * abs_sum + last
    return p, float(np.max(err))


SERIES_J_CAP = 600


def _mw_upper(mu):
    """y beyond which M_mu(y) < ~1e-19 (from its exp(-c y^{1/(1-mu)}) decay)."""
    c = (1 - mu) * mu ** (mu / (1 - mu))
    return 1.0 + 1.5 * (45.0 / c) ** (1 - mu)


def _tf_mixture(nu, x, n_max):
    """p_n = int_0^inf Poisson(n; x y) M_nu(y) dy, the subordination form."""
    n = np.arange(n_max + 1)
    upper = _mw_upper(nu)

    def integrand(y):
        w = specfun.m_wright(nu, y).value
        return stats.poisson.pmf(n, x * y) * w

    pts = sorted({1.0, min(max(n_max / x, 0.1), upper / 2)} - {upper})
    pts = [p for p in pts if 0 < p < upper]
    res = integrate.quad_vec(integrand, 0.0, upper, epsabs=1e-14, epsrel=1e-11, norm="max", points=pts, limit=400)
    p, err = res[0], res[1]
    if err > 1e-10:
        raise AccuracyError(f"time-fractional mixture quadrature error {err:.2g}")
    return np.clip(p, 0.0, 1.0)


def _tf_vector(nu, x, n_max):
    """P(M = n), n = 0..n_max, for M with pgf E_nu(-x (1-u))."""
    if x == 0:
        p = np.zeros(n_max + 1)
        p[0] = 1.0
        return p
    if nu == 1.0:
        return stats.poisson.pmf(np.arange(n_max + 1), x)
    if x ** (1.0 / nu) < 25.0 and n_max <= 200:
        p, err = _tf_series(nu, x, n_max)
        if err <= _SERIES_SAFE:
            return np.clip(p, 0.0, 1.0)
    return _tf_mixture(nu, x, n_max)


def _tf_needed(nu, x):
    """A count n with P(M > n) < 1e-16, for the inner count of a compound mixture."""
    if x == 0:
        return 0
    # E M^2 bounds the tail crudely; grow geometrically instead of trusting it
    mean = x / math.gamma(nu + 1)
    return int(max(16, 4 * mean + 40 * math.sqrt(mean + 1) + 20))


def pmf_time_fractional(nu: float, lam: float, t: float, k: int) -> float:
    """P(N(L^nu(t)) = k) for a rate-lam Poisson process N."""
    _unit("nu", nu)
    _rate(lam)
    return float(_tf_vector(nu, lam * t**nu, int(k))[int(k)])


def pmf_ggbm_time(H: float, nu: float, lam: float, t: float, k: int) -> float:
    """State probability of the Poisson process time changed by |G_{H,nu}(t)|.

    Same law as the time-fractional process of order nu/2 at x = lam t^{H nu}.
    """
    spec = GgbmTime(H, nu, lam)
    return float(_tf_vector(spec.nu / 2, lam * t ** (H * nu), int(k))[int(k)])


# --------------------------------------------------------------------------
# space-fractional and space-time
# --------------------------------------------------------------------------


def _alt_series(alpha, nu, x, k):
    """((-1)^k/k!) sum_m (-x)^m Gamma(alpha m + 1)/(Gamma(nu m + 1)) / Gamma(alpha m + 1 - k).

    nu = None means the 1/m! of the space-fractional form.  Returns (value, err).
    """
    total = 0.0
    abs_sum = 0.0
    lx = math.log(x)
    lk = special.gammaln(k + 1)
    m = 0
    last = math.inf
    prev = -math.inf
    while m < specfun.SERIES_CAP:
        den = special.gammaln(m + 1) if nu is None else special.gammaln(nu * m + 1)
        z = alpha * m + 1 - k
        rg = special.rgamma(z)
        if rg != 0.0:
            lmag = m * lx - den + special.gammaln(alpha * m + 1) - special.gammaln(z) - lk
            if lmag > 700:
                return math.nan, math.inf
            mag = math.exp(lmag)
            total += math.copysign(mag, rg) * (-1) ** (m + k)
            abs_sum += mag
            last = mag
            if m > k / alpha + 2 and lmag > prev and m > 4 * x + 50:
                # terms growing again: the series diverges for these parameters
                return math.nan, math.inf
            prev = lmag
        m += 1
        if m > k / alpha + 2 and last <= 1e-17 * max(abs_sum, 1e-300) and m > x:
            break
    else:
        return math.nan, math.inf
    return total, 4 * EPS * abs_sum + last


def _check_series(val, err, what):
    if not err <= 1e-10:
        raise AccuracyError(f"{what} series error {err:.3g} exceeds 1e-10")
    return min(max(val, 0.0), 1.0)


def pmf_space_fractional(alpha: float, lam: float, t: float, k: int, method: str = "auto") -> float:
    """P(N^alpha(t) = k) for the space-fractional Poisson process.

    Parameters
    ----------
    method : {"auto", "series", "bell"}
        ``series`` is the alternating closed-form series, ``bell`` the
        derivative form of ``exp(-t lam^alpha u^alpha)`` evaluated by the
        positive Panjer recursion.  ``auto`` uses the series when its rounding
        error is below 1e-13 and the recursion otherwise.
    """
    _unit("alpha", alpha)
    _rate(lam)
    k = int(k)
    if k < 0:
        return 0.0
    x = lam**alpha * t
    if method not in ("auto", "series", "bell"):
        raise ValueError(f"unknown method {method!r}")
    if method != "bell" and x > 0 and k <= 150:
        val, err = _alt_series(alpha, None, x, k)
        if method == "series":
            return _check_series(val, err, "space-fractional")
        if err <= _SERIES_SAFE:
            return min(max(val, 0.0), 1.0)
    elif method == "series":
        raise AccuracyError("series form unavailable for these arguments")
    return float(exp_comp_coefficients(Stable(alpha), lam, t, k)[k])


def _compound_mixture(jumps, x, nu, k_max):
    """pmf of sum_{i<=M} J_i, J_i ~ jumps (jumps[0] = 0), M with pgf E_nu(-x(1-u))."""
    out = np.zeros(k_max + 1)
    n_need = _tf_needed(nu, x)
    while True:
        n_max = min(n_need, k_max)
        pm = _tf_vector(nu, x, n_max)
        if n_max == k_max or pm[-4:].max() < 1e-19 or pm.sum() >= 1 - 2 * EPS:
            break
        n_need *= 2
    out[0] = pm[0]
    conv = np.zeros(k_max + 1)
    conv[0] = 1.0
    q = np.asarray(jumps[: k_max + 1], dtype=float)
    for n in range(1, n_max + 1):
        conv = signal.convolve(conv, q)[: k_max + 1]
        np.maximum(conv, 0.0, out=conv)
        out += pm[n] * conv
    return out


def pmf_space_time(alpha: float, nu: float, lam: float, t: float, k: int) -> float:
    """P(N^{alpha,nu}(t) = k), i.e. N(H^alpha(L^nu(t))).

    The closed-form series diverges when alpha > nu, so a compound mixture is
    used whenever the series is not safe.
    """
    _unit("alpha", alpha)
    _unit("nu", nu)
    _rate(lam)
    k = int(k)
    if k < 0:
        return 0.0
    x = lam**alpha * t**nu
    if x > 0 and k <= 150 and (alpha < nu or (alpha == nu and x < 0.5)):
        val, err = _alt_series(alpha, nu, x, k)
        if err <= _SERIES_SAFE:
            return min(max(val, 0.0), 1.0)
    return float(_spacetime_vector(alpha, nu, lam, t, k)[k])


def _spacetime_vector(alpha, nu, lam, t, k_max):
    x = lam**alpha * t**nu
    return _compound_mixture(_sibuya_vector(alpha, k_max), x, nu, k_max)


def pmf_bernstein(f: BernsteinFunction, lam: float, t: float, k: int) -> float:
    """P(N(H^f(t)) = k) = ((-1)^k/k!) d^k/du^k exp(-t f(lam u)) at u = 1."""
    _rate(lam)
    k = int(k)
    if k < 0:
        return 0.0
    return float(exp_comp_coefficients(f, lam, t, k)[k])


def _multi_vector(fs, lam, t, k_max, nu=None):
    if len(fs) > 2:
        raise UnsupportedError(
            "exact state probabilities are only available for one or two subordinators; use pgf()"
        )
    if nu is None:
        # convolution of the marginal laws: the Leibniz product of the two derivative factors
        out = exp_comp_coefficients(fs[0], lam, t, k_max)
        for f in fs[1:]:
            out = np.convolve(out, exp_comp_coefficients(f, lam, t, k_max))[: k_max + 1]
        return out
    a = sum(f.jump_rates(lam, k_max) for f in fs)
    total = sum(f.value(lam) for f in fs)
    if total == 0:
        out = np.zeros(k_max + 1)
        out[0] = 1.0
        return out
    return _compound_mixture(a / total, total * t**nu, nu, k_max)


def pmf_multi(fs: Sequence[BernsteinFunction], lam: float, t: float, k: int, nu: float | None = None) -> float:
    """State probability of N(H^{f_1}(tau) + ... + H^{f_n}(tau)), n <= 2.

    ``tau = t`` by default, ``tau = L^nu(t)`` when ``nu`` is given.

    Raises
    ------
    UnsupportedError
        For more than two subordinators.
    """
    _rate(lam)
    k = int(k)
    if k < 0:
        return 0.0
    return float(_multi_vector(tuple(fs), lam, t, k, nu)[k])


# --------------------------------------------------------------------------
# tables
# --------------------------------------------------------------------------


def pmf_vector(spec, t: float, k_max: int) -> np.ndarray:
    """p_0 .. p_{k_max} at time t."""
    if t < 0:
        raise ValueError("t must be >= 0")
    k_max = int(k_max)
    if t == 0:
        p = np.zeros(k_max + 1)
        p[0] = 1.0
        return p
    if isinstance(spec, SpaceFractional):
        p = exp_comp_coefficients(Stable(spec.alpha), spec.lam, t, k_max)
    elif isinstance(spec, TimeFractional):
        p = _tf_vector(spec.nu, spec.lam * t**spec.nu, k_max)
    elif isinstance(spec, SpaceTime):
        if spec.alpha == 1.0:
            p = _tf_vector(spec.nu, spec.lam * t**spec.nu, k_max)
        else:
            p = _spacetime_vector(spec.alpha, spec.nu, spec.lam, t, k_max)
    elif isinstance(spec, BernsteinPoisson):
        p = exp_comp_coefficients(spec.f, spec.lam, t, k_max)
    elif isinstance(spec, MultiSubordinated):
        p = _multi_vector(spec.fs, spec.lam, t, k_max, spec.nu)
    elif isinstance(spec, GgbmTime):
        p = _tf_vector(spec.nu / 2, spec.lam * t ** (spec.H * spec.nu), k_max)
    else:
        raise TypeError(f"not a process spec: {spec!r}")
    return np.clip(p, 0.0, 1.0)


@dataclass(frozen=True)
class PmfTable:
    """Truncated pmf ``p_0 .. p_kmax`` with ``tail_bound = 1 - sum``."""

    probabilities: np.ndarray
    tail_bound: float
    t: float
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or not np.all(np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
            raise ValueError("probabilities must be finite and lie in [0, 1]")
        object.__setattr__(self, "probabilities", p)

    @property
    def k_max(self) -> int:
        return len(self.probabilities) - 1

    def __len__(self):
        return len(self.probabilities)

    def __getitem__(self, k):
        return self.probabilities[k]

    def to_csv(self, fh=None) -> str:
        """Write ``k,probability`` rows and a ``tail,<bound>`` footer."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "probability"])
        for k, p in enumerate(self.probabilities):
            w.writerow([k, repr(float(p))])
        w.writerow(["tail", repr(float(self.tail_bound))])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text

    def to_dict(self):
        return {
            "t": self.t,
            "probabilities": [float(p) for p in self.probabilities],
            "tail_bound": float(self.tail_bound),
            **({"meta": self.meta} if self.meta else {}),
        }


def pmf_table(spec, t: float, k_max: int | None = None, tol: float = TAIL_TOL, cap: int = K_CAP) -> PmfTable:
    """Tabulate the pmf, doubling k_max until ``1 - sum p_k < tol`` or ``k_max = cap``.

    A fixed ``k_max`` skips the adaptive growth.
    """
    if k_max is not None:
        p = pmf_vector(spec, t, k_max)
    else:
        k = 32
        while True:
            p = pmf_vector(spec, t, k)
            if 1.0 - p.sum() < tol or k >= cap:
                break
            k = min(2 * k, cap)
    tail = max(1.0 - float(p.sum()), 0.0)
    return PmfTable(p, tail, t, {"process": spec.encode(), "lambda": spec.lam})


# --------------------------------------------------------------------------
# pgf and moments
# --------------------------------------------------------------------------


def _ml1(nu, z):
    """E_{nu,1}(-z), z >= 0."""
    if nu == 1.0:
        return math.exp(-z)
    return specfun.mittag_leffler(nu, 1.0, -z).value


def pgf(spec, u: float, t: float) -> float:
    """E u^{N(t)} for |u| <= 1."""
    if not -1.0 <= u <= 1.0:
        raise ValueError(f"u must lie in [-1, 1], got {u}")
    if t < 0:
        raise ValueError("t must be >= 0")
    w = 1.0 - u
    if isinstance(spec, SpaceFractional):
        return math.exp(-t * spec.lam**spec.alpha * w**spec.alpha)
    if isinstance(spec, TimeFractional):
        return _ml1(spec.nu, spec.lam * w * t**spec.nu)
    if isinstance(spec, SpaceTime):
        return _ml1(spec.nu, spec.lam**spec.alpha * w**spec.alpha * t**spec.nu)
    if isinstance(spec, BernsteinPoisson):
        return math.exp(-t * spec.f.value(spec.lam * w))
    if isinstance(spec, MultiSubordinated):
        s = sum(f.value(spec.lam * w) for f in spec.fs)
        if spec.nu is None:
            return math.exp(-t * s)
        return _ml1(spec.nu, t**spec.nu * s)
    if isinstance(spec, GgbmTime):
        return _ml1(spec.nu / 2, spec.lam * w * t ** (spec.H * spec.nu))
    raise TypeError(f"not a process spec: {spec!r}")


@dataclass(frozen=True)
class MomentSummary:
    mean: float
    variance: float
    # the literal expression lam t [lam sum f''(0) + sum f'(0)], kept for comparison only
    variance_diagnostic: float


def moments_multi_timechanged(fs, lam: float, nu: float, t: float) -> MomentSummary:
    """Mean and variance of N(sum_j H^{f_j}(L^nu(t))).

    ``nu = 1`` means no time change.  The variance comes from the second
    derivative of the pgf ``E_nu(-t^nu S(lam(1-u)))``, ``S = sum_j f_j``:

        E N(N-1) = 2 t^{2nu} lam^2 S'(0)^2 / Gamma(2nu+1) - t^nu lam^2 S''(0) / Gamma(nu+1).

    Raises
    ------
    InfiniteMomentError
        If some ``f_j'(0)`` is infinite (a pure stable component).
    """
    if isinstance(fs, BernsteinFunction):
        fs = (fs,)
    _rate(lam)
    _unit("nu", nu)
    d1 = sum(f.deriv_at_zero() for f in fs)
    d2 = sum(f.second_deriv_at_zero() for f in fs)
    if not math.isfinite(d1):
        raise InfiniteMomentError("mean is infinite: a component has f'(0) = +inf")
    mean = lam * t**nu * d1 / math.gamma(nu + 1)
    fact2 = 2 * t ** (2 * nu) * lam**2 * d1**2 / math.gamma(2 * nu + 1) - t**nu * lam**2 * d2 / math.gamma(nu + 1)
    var = fact2 + mean - mean**2
    diag = lam * t * (lam * d2 + d1)
    return MomentSummary(mean, var, diag)

