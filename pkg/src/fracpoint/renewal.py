"""Laplace transforms of state probabilities versus their renewal counterparts.

A counting process with i.i.d. intertimes of transform ``K(gamma)`` has

    int e^{-gamma t} P(N(t) = k) dt = K(gamma)^k (1 - K(gamma)) / gamma.

Comparing this with the transform of the actual state probabilities on a grid
of ``gamma`` certifies (or refutes) the renewal structure.  Two families are
covered: the space-time fractional process ``N^{alpha,nu}`` and the Poisson
process time changed by ``|G_{H,nu}|``.
"""

from __future__ import annotations

import csv
import functools
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .bernstein import Stable, reciprocal_coefficients
from .processes import GgbmTime, _tf_vector
from .specfun import EPS, AccuracyError

__all__ = [
    "TransformGrid",
    "DivergenceError",
    "default_gamma_grid",
    "lt_renewal_spacetime",
    "lt_process_spacetime",
    "renewal_gap_spacetime",
    "lt_ggbm_process",
    "lt_ggbm_renewal",
    "ggbm_k",
    "renewal_gap_ggbm",
    "intertime_survival",
]


class DivergenceError(AccuracyError):
    """A formal transform series does not converge (or cancels too badly) here."""


def default_gamma_grid(lo: float = 0.1, hi: float = 100.0, points: int = 50) -> np.ndarray:
    if not 0 < lo < hi or points < 2:
        raise ValueError("need 0 < lo < hi and at least two points")
    return np.geomspace(lo, hi, points)


@dataclass(frozen=True)
class TransformGrid:
    """Values of a transform statistic on a gamma grid.

    ``values`` holds the main statistic (the gap for comparisons); ``columns``
    carries the underlying transforms.
    """

    gammas: np.ndarray
    values: np.ndarray
    label: str
    columns: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        g = np.asarray(self.gammas, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.shape != v.shape or g.ndim != 1:
            raise ValueError("gammas and values must be 1-d of equal length")
        if np.any(np.diff(g) <= 0) or np.any(g <= 0):
            raise ValueError("gammas must be positive and strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("transform values must be finite")
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "values", v)

    @property
    def supremum(self) -> float:
        return float(np.max(np.abs(self.values)))

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO()
        meta = ",".join(f"{k}={v}" for k, v in self.params.items())
        buf.write(f"# {self.label},{meta}\n")
        w = csv.writer(buf, lineterminator="\n")
        names = ["lt_process", "lt_renewal"]
        extra = [c for c in self.columns if c not in names]
        w.writerow(["gamma", *names, "gap", *extra])
        for i, g in enumerate(self.gammas):
            row = [repr(float(g))]
            row += [repr(float(self.columns[c][i])) if c in self.columns else "" for c in names]
            row.append(repr(float(self.values[i])))
            row += [_cell(self.columns[c][i]) for c in extra]
            w.writerow(row)
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text

    def to_dict(self):
        return {
            "label": self.label,
            "params": self.params,
            "gamma": self.gammas.tolist(),
            "gap": self.values.tolist(),
            "supremum": self.supremum,
            **{c: [_plain(v) for v in col] for c, col in self.columns.items()},
        }


def _cell(v):
    return repr(float(v)) if isinstance(v, (float, np.floating, int)) else str(v)


def _plain(v):
    return float(v) if isinstance(v, (float, np.floating, int)) else str(v)


# --------------------------------------------------------------------------
# space-time fractional
# --------------------------------------------------------------------------


def lt_renewal_spacetime(gamma: float, k: int, alpha: float, nu: float, lam: float) -> float:
    """lam^{alpha k} gamma^{nu-1} / (gamma^nu + lam^alpha)^{k+1}.

    The transform of P(N(t) = k) for the renewal process whose intertimes
    have survival E_nu(-lam^alpha t^nu).
    """
    if gamma <= 0 or k < 0:
        raise ValueError("need gamma > 0 and k >= 0")
    la = lam**alpha
    # log form keeps large k finite
    return math.exp(k * math.log(la) + (nu - 1) * math.log(gamma) - (k + 1) * math.log(gamma**nu + la))


def lt_process_spacetime(gamma: float, k: int, alpha: float, nu: float, lam: float) -> float:
    """Transform of the space-time fractional state probability p_k(t).

    ``((-1)^k lam^k / k!) d^k/dlam^k [gamma^{nu-1} / (lam^alpha + gamma^nu)]``,
    evaluated as ``gamma^{nu-1} rho_k`` where ``rho`` are the positive
    reciprocal coefficients of ``gamma^nu + (lam u)^alpha``.
    """
    if gamma <= 0 or k < 0:
        raise ValueError("need gamma > 0 and k >= 0")
    rho = reciprocal_coefficients(Stable(alpha), lam, int(k), shift=gamma**nu)
    return float(gamma ** (nu - 1) * rho[int(k)])


def renewal_gap_spacetime(k: int, alpha: float, nu: float, lam: float = 1.0, gamma_grid=None) -> TransformGrid:
    """|lt_process - lt_renewal| over the grid, with the ratio as an extra column."""
    g = default_gamma_grid() if gamma_grid is None else np.asarray(gamma_grid, dtype=float)
    proc = np.array([lt_process_spacetime(x, k, alpha, nu, lam) for x in g])
    ren = np.array([lt_renewal_spacetime(x, k, alpha, nu, lam) for x in g])
    return TransformGrid(
        g,
        np.abs(proc - ren),
        "spacetime",
        {"lt_process": proc, "lt_renewal": ren, "ratio": proc / ren},
        {"k": k, "alpha": alpha, "nu": nu, "lambda": lam},
    )


# --------------------------------------------------------------------------
# grey-Brownian time change
# --------------------------------------------------------------------------


def _series(logmag_fn, sign_fn, what, j0=0):
    """Sum sign(m) exp(logmag(m)) for m >= 0 with divergence / cancellation checks."""
    total = 0.0
    abs_sum = 0.0
    peak_seen = False
    prev = -math.inf
    for m in range(j0, 4000):
        lm = logmag_fn(m)
        if lm > 700:
            raise DivergenceError(f"{what}: terms overflow")
        mag = math.exp(lm)
        total += sign_fn(m) * mag
        abs_sum += mag
        if lm < prev:
            peak_seen = True
        elif peak_seen and m > 50:
            raise DivergenceError(f"{what}: terms grow again, series is only asymptotic")
        prev = lm
        if peak_seen and mag <= 1e-17 * abs_sum:
            err = 4 * EPS * abs_sum + mag
            if err > max(1e-12 * abs(total), 1e-15):
                raise DivergenceError(f"{what}: cancellation error {err:.2g}")
            return total
    raise DivergenceError(f"{what}: no convergence within 4000 terms")


def _lt_ggbm_series(gamma, k, H, nu, lam):
    b = H * nu
    mu = nu / 2
    lg, ll = math.log(gamma), math.log(lam)
    lk = special.gammaln(k + 1)

    def logmag(m):
        j = m + k
        return (
            special.gammaln(j + 1) - lk - special.gammaln(m + 1)
            + j * ll
            + special.gammaln(b * j + 1)
            - special.gammaln(mu * j + 1)
            - (b * j + 1) * lg
        )

    return _series(logmag, lambda m: -1.0 if m % 2 else 1.0, "ggbm transform")


def _k_series(gamma, H, nu, lam):
    b = H * nu
    mu = nu / 2
    lg, ll = math.log(gamma), math.log(lam)

    def logmag(m):
        return (
            math.log(2 * H) + (m + 1) * ll
            + special.gammaln(b * (m + 1))
            - special.gammaln(mu * (m + 1))
            - b * (m + 1) * lg
        )

    return _series(logmag, lambda m: -1.0 if m % 2 else 1.0, "K(gamma)")


# Gauss-Legendre panels in s = log t
_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)
_S_MIN = math.log(1e-15)


@functools.lru_cache(maxsize=64)
def _ggbm_lt_quadrature(H, nu, lam, gammas: tuple, k_max: int) -> np.ndarray:
    """Matrix LT[i, k] = int e^{-gamma_i t} p_k(t) dt by composite Gauss-Legendre in log t."""
    g = np.asarray(gammas)
    s_max = math.log(50.0 / g.min())
    edges = np.arange(_S_MIN, s_max + 1.0, 1.0)
    s = ((edges[:-1, None] + edges[1:, None]) / 2 + 0.5 * _GL_X[None, :]).ravel()
    w = np.tile(0.5 * _GL_W, len(edges) - 1)
    t = np.exp(s)
    mu = nu / 2
    p = np.empty((t.size, k_max + 1))
    for i, ti in enumerate(t):
        p[i] = _tf_vector(mu, lam * ti ** (H * nu), k_max)
    kern = np.exp(-np.outer(g, t)) * (w * t)[None, :]
    return kern @ p


def _lt_quad(gamma, k, H, nu, lam):
    return float(_ggbm_lt_quadrature(float(H), float(nu), float(lam), (float(gamma),), int(k))[0, int(k)])


def lt_ggbm_process(gamma: float, k: int, H: float, nu: float, lam: float, method: str = "auto", return_method=False):
    """Transform of p_k(t) for the Poisson process at time |G_{H,nu}(t)|.

    The term-by-term series

        (lam^k/k!) sum_m ((m+k)!/m!) Gamma(H nu (m+k) + 1) / Gamma((nu/2)(m+k) + 1)
                   (-lam)^m / gamma^{H nu (m+k) + 1}

    converges only for H < 1/2 (and for H = 1/2 when lam < gamma^{nu/2}).
    ``method="auto"`` falls back to quadrature of the time-domain pmf when the
    series diverges or cancels; ``return_method`` also returns the tag.
    """
    GgbmTime(H, nu, lam)
    if gamma <= 0 or k < 0:
        raise ValueError("need gamma > 0 and k >= 0")
    if method not in ("auto", "series", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    val = None
    tag = "series"
    if method in ("auto", "series"):
        try:
            val = _lt_ggbm_series(gamma, k, H, nu, lam)
        except DivergenceError:
            if method == "series":
                raise
    if val is None:
        val, tag = _lt_quad(gamma, k, H, nu, lam), "quadrature"
    return (val, tag) if return_method else val


def ggbm_k(gamma: float, H: float, nu: float, lam: float, method: str = "auto", return_method=False):
    """Transform K(gamma) of the intertime law with survival E_{nu/2}(-lam t^{H nu}).

    Series ``2H lam sum_m (-lam)^m Gamma(H nu (m+1)) / (Gamma((nu/2)(m+1)) gamma^{H nu (m+1)})``
    when it converges, else ``1 - gamma * LT[p_0](gamma)`` by quadrature.
    """
    GgbmTime(H, nu, lam)
    val = None
    tag = "series"
    if method in ("auto", "series"):
        try:
            val = _k_series(gamma, H, nu, lam)
        except DivergenceError:
            if method == "series":
                raise
    if val is None:
        val, tag = 1.0 - gamma * _lt_quad(gamma, 0, H, nu, lam), "quadrature"
    return (val, tag) if return_method else val


def lt_ggbm_renewal(gamma: float, k: int, H: float, nu: float, lam: float, method: str = "auto", return_method=False):
    """(1/gamma) K(gamma)^k (1 - K(gamma))."""
    if gamma <= 0 or k < 0:
        raise ValueError("need gamma > 0 and k >= 0")
    kv, tag = ggbm_k(gamma, H, nu, lam, method, return_method=True)
    val = kv**k * (1.0 - kv) / gamma
    return (val, tag) if return_method else val


def renewal_gap_ggbm(k: int, H: float, nu: float, lam: float = 1.0, gamma_grid=None) -> TransformGrid:
    """|lt_ggbm_process - lt_ggbm_renewal| over the grid; evaluation tags are kept per row.

    Rows whose series diverge share one quadrature pass over the whole grid.
    """
    GgbmTime(H, nu, lam)
    g = default_gamma_grid() if gamma_grid is None else np.asarray(gamma_grid, dtype=float)
    quad = None

    def fallback():
        nonlocal quad
        if quad is None:
            quad = _ggbm_lt_quadrature(float(H), float(nu), float(lam), tuple(float(x) for x in g), int(k))
        return quad

    proc, ren, tags = [], [], []
    for i, x in enumerate(g):
        try:
            p, tp = _lt_ggbm_series(x, k, H, nu, lam), "series"
        except DivergenceError:
            p, tp = float(fallback()[i, k]), "quadrature"
        try:
            kv, tr = _k_series(x, H, nu, lam), "series"
        except DivergenceError:
            kv, tr = 1.0 - x * float(fallback()[i, 0]), "quadrature"
        proc.append(p)
        ren.append(kv**k * (1.0 - kv) / x)
        tags.append(tp if tp == tr else f"{tp}/{tr}")
    proc, ren = np.array(proc), np.array(ren)
    return TransformGrid(
        g,
        np.abs(proc - ren),
        "ggbm",
        {"lt_process": proc, "lt_renewal": ren, "method": tags},
        {"k": k, "H": H, "nu": nu, "lambda": lam},
    )


def intertime_survival(H: float, nu: float, lam: float, t) -> np.ndarray:
    """E_{nu/2}(-lam t^{H nu}) on an array of times.

    It is nonincreasing from 1 to 0 for every admissible (H, nu), hence a
    valid survival function; it is completely monotone only when H <= 1/2.
    """
    from .specfun import ml

    t = np.asarray(t, dtype=float)
    if nu == 2.0:
        return np.exp(-lam * t ** (2 * H))
    return np.asarray(ml(nu / 2, 1.0, -lam * t ** (H * nu)))
