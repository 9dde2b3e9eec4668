"""Probabilities that a subordinated Poisson process ever occupies level k.

For ``N(H^f(t))`` (compound Poisson with jump rates ``a_n``) the last jump into
level ``k`` comes from some level ``j < k``; integrating the state
probabilities over time gives

    P(T_k < inf) = sum_{j<k} rho_j a_{k-j},

with ``rho_j`` the Taylor coefficients of ``1/f(lam(1-w))``.  For
``f(x) = x^alpha`` this is ``Gamma(k+alpha) / (Gamma(alpha) k!)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .bernstein import BernsteinFunction, exp_comp_coefficients, reciprocal_coefficients
from .samplers import RngStream, _sibuya_inverse, as_generator, run_chunked

__all__ = [
    "HittingResult",
    "hitting_prob_exact",
    "hitting_prob_recursive",
    "hitting_prob_asymptotic",
    "hitting_prob_bernstein",
    "hitting_time_density",
    "hitting_prob_mc",
    "hitting_prob_mc_levels",
    "default_horizon",
]

METHODS = ("exact", "asymptotic", "monte_carlo")


@dataclass(frozen=True)
class HittingResult:
    value: float
    method: str
    stderr: float | None = None
    truncation_bound: float | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"probability out of range: {self.value}")
        if (self.stderr is not None) != (self.method == "monte_carlo"):
            raise ValueError("stderr is reported exactly for Monte Carlo results")

    def covers(self, target: float, k: float = 3.0) -> bool:
        """|value - target| <= k stderr + truncation bound."""
        slack = (self.stderr or 0.0) * k + (self.truncation_bound or 0.0)
        return abs(self.value - target) <= slack


def _check_alpha(alpha, open_top=False):
    if not (0.0 < alpha < 1.0 if open_top else 0.0 < alpha <= 1.0):
        raise ValueError(f"alpha out of range: {alpha}")


def _gamma_ratio(k, a):
    """Gamma(k + a) / Gamma(k + 1) for integer arrays k >= 1 and 0 < a <= 1.

    Direct Gamma values while they are finite; beyond that the generalized
    Stirling series

        log Gamma(z+a) - log Gamma(z+b) = (a-b) log z
            + sum_n (-1)^(n+1) (B_{n+1}(a) - B_{n+1}(b)) / (n (n+1) z^n)

    with Bernoulli polynomials B_n, which is accurate to rounding for z > 20.
    """
    k = np.asarray(k, dtype=float)
    out = np.empty_like(k)
    small = k <= _K_DIRECT
    out[small] = special.gamma(k[small] + a) / special.gamma(k[small] + 1.0)
    if np.any(~small):
        z = k[~small]
        s = np.zeros_like(z)
        for n in range(1, _STIRLING_TERMS + 1):
            c = (-1) ** (n + 1) * (_bernoulli_poly(n + 1, a) - _bernoulli_poly(n + 1, 1.0)) / (n * (n + 1))
            s += c / z**n
        out[~small] = np.exp((a - 1.0) * np.log(z) + s)
    return out


_K_DIRECT = 20
_STIRLING_TERMS = 12


def _bernoulli_poly(n, x):
    b = special.bernoulli(n)
    return sum(math.comb(n, j) * b[j] * x ** (n - j) for j in range(n + 1))


def hitting_prob_exact(alpha: float, k):
    """P(T_k^alpha < inf) = Gamma(k + alpha) / (Gamma(alpha) k!).

    Safe for k in the billions (see :func:`_gamma_ratio`); relative error a
    few ulp throughout.
    """
    _check_alpha(alpha)
    k = np.asarray(k)
    if np.any(k < 1) or np.any(k != np.floor(k)):
        raise ValueError("levels must be integers >= 1")
    if alpha == 1.0:
        out = np.ones(k.shape)
    else:
        out = _gamma_ratio(np.atleast_1d(k), alpha).reshape(k.shape) / math.gamma(alpha)
    return float(out) if out.ndim == 0 else out


def hitting_prob_recursive(alpha: float, k_max: int) -> np.ndarray:
    """Levels 1..k_max from P_1 = alpha and P_k = ((alpha + k - 1)/k) P_{k-1}."""
    _check_alpha(alpha)
    out = np.empty(k_max)
    p = alpha
    for k in range(1, k_max + 1):
        if k > 1:
            p *= (alpha + k - 1) / k
        out[k - 1] = p
    return out


def hitting_prob_asymptotic(alpha: float, k, form: str = "leading"):
    """Large-k approximation of P(T_k^alpha < inf).

    Parameters
    ----------
    form : {"leading", "published"}
        ``leading`` is the true leading term ``k^{alpha-1} / Gamma(alpha)``
        (ratio to the exact value is ``1 + O(1/k)``).  ``published`` is the
        commonly quoted estimate ``e^{-alpha} / (Gamma(alpha) k^{1-alpha})``, whose
        ratio to the exact value tends to ``e^{alpha}``: the Stirling step drops
        the limit ``(1 + alpha/k)^k -> e^alpha``.
    """
    _check_alpha(alpha, open_top=True)
    if form not in ("leading", "published"):
        raise ValueError(f"unknown form {form!r}")
    k = np.asarray(k, dtype=float)
    c = math.exp(-alpha) if form == "published" else 1.0
    out = c / math.gamma(alpha) * k ** (alpha - 1.0)
    return float(out) if out.ndim == 0 else out


def hitting_prob_bernstein(f: BernsteinFunction, lam: float, k: int) -> float:
    """P(T_k^f < inf) for N(H^f(t)) with a rate-lam Poisson process N.

    Equal to ``(-1)^{k-1} sum_j (1/j!) (1/f)^{(j)} lam^{k-j} f^{(k-j)}(lam) / (k-j)!``
    with derivatives in ``u`` at ``u = 1``; computed from the positive
    coefficients ``rho_j`` and ``a_n``.

    Raises
    ------
    ZeroDivisionError
        If f(lam) = 0.
    """
    if k < 1:
        raise ValueError("levels must be >= 1")
    rho = reciprocal_coefficients(f, lam, k)
    a = f.jump_rates(lam, k)
    return float(min(np.dot(rho[:k], a[k:0:-1]), 1.0))


def hitting_time_density(f: BernsteinFunction, lam: float, k: int, s):
    """Density of T_k^f on (0, inf): sum_{j<k} p_j(s) a_{k-j}.

    Its total mass is :func:`hitting_prob_bernstein`; the rest of the
    probability sits at T_k = inf.
    """
    if k < 1:
        raise ValueError("levels must be >= 1")
    a = f.jump_rates(lam, k)
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr < 0):
        raise ValueError("s must be >= 0")
    out = np.array([np.dot(exp_comp_coefficients(f, lam, si, k - 1), a[k:0:-1]) for si in s_arr])
    return float(out[0]) if np.ndim(s) == 0 else out.reshape(np.shape(s))


def default_horizon(alpha: float, lam: float, k_max: int, bound: float = 1e-4) -> float:
    """Smallest horizon with P(fewer than k_max jumps by then) <= bound."""
    # P(Poisson(mu) < k) = P(Gamma(k, 1) > mu)
    mu = stats.gamma.isf(bound, k_max)
    return float(mu / lam**alpha)


def _hits(alpha, levels, rate_h, gen, m):
    """Boolean matrix (m, len(levels)): did the path occupy each level by the horizon."""
    k_top = int(max(levels))
    n_jumps = gen.poisson(rate_h, size=m) if math.isfinite(rate_h) else np.full(m, k_top)
    n_jumps = np.minimum(n_jumps, k_top)
    # only jumps landing at or below k_top matter, so draws are capped at k_top + 1
    if alpha == 1.0:
        jumps = np.ones((m, k_top), dtype=np.int64)
    else:
        u = 1.0 - gen.random((m, k_top))
        jumps = _sibuya_inverse(alpha, u, cap=k_top + 1, warn=False)
    pos = np.cumsum(jumps, axis=1)
    pos = np.where(np.arange(k_top)[None, :] < n_jumps[:, None], pos, -1)
    return np.stack([(pos == lv).any(axis=1) for lv in levels], axis=1)


def hitting_prob_mc_levels(
    alpha: float,
    lam: float,
    levels,
    horizon: float | None = None,
    n_paths: int = 10**6,
    rng=None,
    threads: int = 1,
) -> list[HittingResult]:
    """Monte Carlo hitting probabilities of several levels from shared paths.

    Paths are jump chains of the compound Poisson form: ``M ~ Poisson(lam^alpha
    horizon)`` Sibuya(alpha) jumps.  A level counts as hit only when a partial
    sum equals it exactly; overshoot is a miss.  The horizon can only turn
    hits into misses, and does so with probability at most
    ``P(M < k)``, reported as ``truncation_bound``.
    """
    _check_alpha(alpha)
    levels = [int(v) for v in levels]
    if min(levels) < 1 or n_paths < 2:
        raise ValueError("levels must be >= 1 and n_paths >= 2")
    if horizon is None:
        horizon = default_horizon(alpha, lam, max(levels))
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    rate_h = lam**alpha * horizon

    def chunk(gen, m):
        return _hits(alpha, levels, rate_h, gen, m)

    if isinstance(rng, RngStream):
        hits = run_chunked(chunk, n_paths, rng, threads=threads)
    else:
        hits = chunk(as_generator(rng), n_paths)
    p = hits.mean(axis=0)
    out = []
    for lv, pv in zip(levels, p):
        trunc = float(stats.poisson.cdf(lv - 1, rate_h)) if math.isfinite(rate_h) else 0.0
        out.append(
            HittingResult(float(pv), "monte_carlo", math.sqrt(pv * (1 - pv) / n_paths), trunc)
        )
    return out


def hitting_prob_mc(alpha, lam, k, horizon=None, n_paths=10**6, rng=None, threads=1) -> HittingResult:
    """Monte Carlo estimate of P(T_k^alpha < inf); see :func:`hitting_prob_mc_levels`."""
    return hitting_prob_mc_levels(alpha, lam, [k], horizon, n_paths, rng, threads)[0]
