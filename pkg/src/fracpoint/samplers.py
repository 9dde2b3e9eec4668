"""Random variates for the subordinators and the composed counting processes.

Randomness always flows through an explicit source.  :class:`RngStream` is a
small immutable ``(seed, stream_id)`` pair; every call that receives one builds
a fresh ``numpy.random.Generator(PCG64(SeedSequence(seed, spawn_key=...)))``,
so calling a sampler twice with the same stream reproduces the draws exactly.
Plain ``numpy.random.Generator`` objects are accepted as well and are simply
advanced.

Generator algorithm: PCG64 as shipped with numpy >= 1.17, seeded through
``SeedSequence``; the version is recorded in CLI artifact headers.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .bernstein import BernsteinFunction, Gamma, Linear, Stable, TemperedStable

__all__ = [
    "RngStream",
    "McEstimate",
    "as_generator",
    "run_chunked",
    "sample_stable",
    "log_sample_stable",
    "sample_inverse_stable",
    "sample_sibuya",
    "sample_space_fractional",
    "sample_time_fractional",
    "sample_space_time",
    "sample_iterated",
    "sample_subordinator",
    "sample_tempered_stable",
    "sample_gamma_subordinator",
    "sample_bernstein_poisson",
    "sample_multi",
    "sample_ggbm_clock",
    "sample_ggbm_time",
    "sample_ggbm_subordinated",
    "sample_compound_path",
    "sample_process",
    "chi_square_gof",
    "SIBUYA_CAP",
    "RETRY_GUARD",
]

SIBUYA_CAP = 10**9
RETRY_GUARD = 1e4
COUNT_CAP = 2**62
_TABLE = 4096
CHUNK = 1 << 16


@dataclass(frozen=True)
class RngStream:
    """Seeded, splittable random source.

    ``RngStream(seed, j)`` for distinct ``j`` are independent streams (numpy's
    ``SeedSequence`` spawn keys).  ``substream(i)`` derives a child stream,
    used to give each Monte Carlo chunk its own generator.
    """

    seed: int
    stream_id: int = 0
    path: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if int(self.stream_id) < 0:
            raise ValueError("stream_id must be >= 0")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id), *self.path))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, i: int) -> RngStream:
        return RngStream(self.seed, self.stream_id, (*self.path, int(i)))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng)
    raise TypeError(f"expected RngStream, Generator, int or None, got {type(rng).__name__}")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("a Monte Carlo estimate needs n >= 2")

    @classmethod
    def from_samples(cls, x) -> McEstimate:
        x = np.asarray(x, dtype=float)
        return cls(float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size)), int(x.size))

    def contains(self, value: float, k: float = 3.0, slack: float = 0.0) -> bool:
        return abs(self.mean - value) <= k * self.stderr + slack


def run_chunked(fn, n: int, rng: RngStream, threads: int = 1, chunk: int = CHUNK):
    """Evaluate ``fn(gen, m)`` over fixed-size chunks and concatenate the results.

    Chunk ``i`` always uses ``rng.substream(i)``, so the output does not depend
    on ``threads``.
    """
    if not isinstance(rng, RngStream):
        raise TypeError("run_chunked needs an RngStream so chunks can be split reproducibly")
    sizes = [chunk] * (n // chunk) + ([n % chunk] if n % chunk else [])
    jobs = [(rng.substream(i), m) for i, m in enumerate(sizes)]

    def one(job):
        s, m = job
        return fn(s.generator(), m)

    if threads <= 1 or len(jobs) <= 1:
        parts = [one(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(one, jobs))
    return np.concatenate(parts) if parts else np.array([])


def _shape(size):
    return () if size is None else size


def _out(x, size):
    return x.item() if size is None and np.ndim(x) == 0 else x


# --------------------------------------------------------------------------
# stable, inverse stable
# --------------------------------------------------------------------------


def _log_kanter(alpha, gen, size):
    """log S, S standard one-sided alpha-stable with E exp(-mu S) = exp(-mu^alpha)."""
    u = gen.uniform(0.0, math.pi, size=size)
    e = gen.standard_exponential(size=size)
    a = alpha
    # S = sin(a U) / sin(U)^(1/a) * (sin((1-a)U) / E)^((1-a)/a)
    return (
        np.log(np.sin(a * u))
        - np.log(np.sin(u)) / a
        + (1 - a) / a * (np.log(np.sin((1 - a) * u)) - np.log(e))
    )


def log_sample_stable(alpha: float, log_t, rng=None, size=None):
    """log H^alpha(t) given log t; safe when H over- or underflows."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    gen = as_generator(rng)
    log_t = np.asarray(log_t, dtype=float)
    shape = _shape(size) if size is not None else log_t.shape
    if alpha == 1.0:
        return _out(np.broadcast_to(log_t, shape).copy(), size)
    return _out(log_t / alpha + _log_kanter(alpha, gen, shape), size)


def sample_stable(alpha: float, t=1.0, rng=None, size=None):
    """Draw H^alpha(t) = t^(1/alpha) S (Kanter's representation).

    Parameters
    ----------
    alpha : float
        Index in (0, 1]; alpha = 1 returns t.
    t : float or array
        Time, > 0.  Arrays broadcast against ``size``.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    gen = as_generator(rng)
    shape = _shape(size) if size is not None else t.shape
    if alpha == 1.0:
        return _out(np.broadcast_to(t, shape).astype(float), size)
    with np.errstate(divide="ignore", over="ignore"):
        s = np.exp(_log_kanter(alpha, gen, shape))
        x = t ** (1.0 / alpha) * s
    return _out(x, size)


def sample_inverse_stable(nu: float, t=1.0, rng=None, size=None):
    """Draw L^nu(t) = (t / S)^nu, S standard one-sided nu-stable."""
    if not 0.0 < nu <= 1.0:
        raise ValueError(f"nu must lie in (0, 1], got {nu}")
    t = np.asarray(t, dtype=float)
    gen = as_generator(rng)
    shape = _shape(size) if size is not None else t.shape
    if nu == 1.0:
        return _out(np.broadcast_to(t, shape).astype(float), size)
    log_s = _log_kanter(nu, gen, shape)
    with np.errstate(divide="ignore"):
        return _out(np.exp(nu * (np.log(t) - log_s)), size)


# --------------------------------------------------------------------------
# Sibuya jumps
# --------------------------------------------------------------------------


def _sibuya_tail(alpha, k):
    # P(J > k) = Gamma(k+1-alpha) / (Gamma(1-alpha) Gamma(k+1)); poch keeps large k accurate
    return special.poch(k + 1.0, -alpha) * special.rgamma(1.0 - alpha)


_tail_cache: dict = {}


def _tail_table(alpha):
    tab = _tail_cache.get(alpha)
    if tab is None:
        k = np.arange(_TABLE + 1)
        tab = np.empty(_TABLE + 1)
        tab[0] = 1.0
        tab[1:] = np.cumprod(1.0 - alpha / k[1:])
        if len(_tail_cache) > 64:
            _tail_cache.clear()
        _tail_cache[alpha] = tab
    return tab


def _sibuya_inverse(alpha, u, cap=SIBUYA_CAP, warn=True):
    """Smallest k >= 1 with P(J > k) <= u, capped at ``cap``.

    With ``warn`` a RuntimeWarning reports draws that the cap truncated.
    """
    u = np.asarray(u, dtype=float)
    tab = _tail_table(alpha)
    j = np.searchsorted(-tab, -u, side="left").astype(np.int64)
    j = np.maximum(j, 1)
    far = j > _TABLE
    if np.any(far) and cap > _TABLE:
        uf = u[far]
        lo = np.full(uf.shape, float(_TABLE))  # tail(lo) > u
        hi = np.full(uf.shape, float(cap))
        top = _sibuya_tail(alpha, hi) > uf
        # bisection on integers in log scale
        for _ in range(80):
            mid = np.floor(np.sqrt(lo * hi))
            mid = np.where(mid <= lo, lo + 1, np.where(mid >= hi, hi - 1, mid))
            go_hi = _sibuya_tail(alpha, mid) <= uf
            hi = np.where(go_hi, mid, hi)
            lo = np.where(go_hi, lo, mid)
            if np.all(hi - lo <= 1):
                break
        res = np.where(top, float(cap), hi)
        j[far] = res.astype(np.int64)
    if warn and np.any(u < _sibuya_tail(alpha, float(cap))):
        warnings.warn(f"Sibuya draw truncated at the cap {cap}", RuntimeWarning, stacklevel=3)
    return np.minimum(j, cap)


def sample_sibuya(alpha: float, rng=None, size=None, cap: int = SIBUYA_CAP):
    """Draw J with P(J > k) = prod_{j<=k} (1 - alpha/j) by inversion.

    Draws beyond ``cap`` are returned as ``cap`` with a ``RuntimeWarning``.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    gen = as_generator(rng)
    if alpha == 1.0:
        return _out(np.ones(_shape(size), dtype=np.int64), size)
    u = gen.random(_shape(size))
    # P(J > k) <= u  <=>  J <= k; use 1 - random so u lies in (0, 1]
    return _out(_sibuya_inverse(alpha, 1.0 - u, cap), size)


# --------------------------------------------------------------------------
# counting processes
# --------------------------------------------------------------------------


def _poisson(gen, mean):
    """Poisson counts that saturate at COUNT_CAP instead of failing on huge means."""
    mean = np.asarray(mean, dtype=float)
    big = ~(mean < 1e15)
    if not np.any(big):
        return gen.poisson(mean)
    out = np.empty(mean.shape, dtype=np.int64)
    small = ~big
    out[small] = gen.poisson(mean[small])
    mb = mean[big]
    with np.errstate(over="ignore", invalid="ignore"):
        approx = np.rint(mb + np.sqrt(mb) * gen.standard_normal(mb.shape))
    out[big] = np.where(approx < COUNT_CAP, approx, COUNT_CAP).astype(np.int64)
    return out


def _compound_sum(gen, counts, jump_fn):
    """sum of counts[i] i.i.d. jumps per entry, jumps from ``jump_fn(gen, m)``."""
    counts = np.asarray(counts, dtype=np.int64)
    flat = counts.ravel()
    total = int(flat.sum())
    jumps = jump_fn(gen, total) if total else np.zeros(0, dtype=np.int64)
    owner = np.repeat(np.arange(flat.size), flat)
    out = np.bincount(owner, weights=jumps.astype(float), minlength=flat.size)
    return np.rint(out).astype(np.int64).reshape(counts.shape)


def sample_space_fractional(alpha: float, lam: float, t: float, rng=None, size=None, method: str = "compound"):
    """Draw N^alpha(t).

    ``compound``: M ~ Poisson(lam^alpha t) Sibuya(alpha) jumps summed.
    ``subordinated``: Poisson(lam H^alpha(t)).
    """
    gen = as_generator(rng)
    if method == "compound":
        m = gen.poisson(lam**alpha * t, size=_shape(size))
        if alpha == 1.0:
            return _out(m, size)
        n = _compound_sum(gen, m, lambda g, k: sample_sibuya(alpha, g, size=k))
    elif method == "subordinated":
        n = _poisson(gen, lam * sample_stable(alpha, t, gen, size=_shape(size)))
    else:
        raise ValueError(f"unknown method {method!r}")
    return _out(n, size)


def sample_time_fractional(nu: float, lam: float, t: float, rng=None, size=None):
    """Draw N(L^nu(t))."""
    gen = as_generator(rng)
    return _out(_poisson(gen, lam * sample_inverse_stable(nu, t, gen, size=_shape(size))), size)


def sample_space_time(alpha: float, nu: float, lam: float, t: float, rng=None, size=None):
    """Draw N^{alpha,nu}(t) = N^alpha(L^nu(t)) through the compound form."""
    gen = as_generator(rng)
    tau = sample_inverse_stable(nu, t, gen, size=_shape(size))
    m = _poisson(gen, lam**alpha * tau)
    if alpha == 1.0:
        return _out(m, size)
    return _out(_compound_sum(gen, m, lambda g, k: sample_sibuya(alpha, g, size=k)), size)


def sample_iterated(alpha: float, gammas, t: float, rng=None, size=None, lam: float = 1.0):
    """Draw N^alpha(H^{g_1}(... H^{g_n}(t) ...)) by nested subordination.

    Everything runs in log space, so the near-degenerate regime (tiny product
    of indices, astronomically large or small clocks) does not overflow.
    Counts saturate at 2^62.
    """
    gammas = tuple(float(g) for g in gammas)
    for g in (alpha, *gammas):
        if not 0.0 < g <= 1.0:
            raise ValueError(f"indices must lie in (0, 1], got {g}")
    if alpha * math.prod(gammas) < 1e-3:
        warnings.warn(
            "product of stable indices below 1e-3: near-degenerate regime, counts saturate",
            RuntimeWarning,
            stacklevel=2,
        )
    gen = as_generator(rng)
    shape = _shape(size)
    log_tau = np.full(shape, math.log(t))
    for g in reversed(gammas):
        log_tau = log_sample_stable(g, log_tau, gen)
    log_h = log_sample_stable(alpha, log_tau, gen)
    with np.errstate(over="ignore"):
        mean = lam * np.exp(np.minimum(log_h, 700.0))
    return _out(_poisson(gen, mean), size)


# --------------------------------------------------------------------------
# subordinators
# --------------------------------------------------------------------------


def sample_gamma_subordinator(b: float, t, rng=None, size=None):
    """H(t) ~ Gamma(shape b t, rate b), the subordinator of f(x) = b log(1 + x/b)."""
    gen = as_generator(rng)
    t = np.asarray(t, dtype=float)
    shape = _shape(size) if size is not None else t.shape
    return _out(gen.gamma(b * np.broadcast_to(t, shape), 1.0 / b), size)


def sample_tempered_stable(alpha: float, theta: float, t, rng=None, size=None):
    """Tempered stable subordinator at time t by exponential tilting.

    A stable increment over a piece of length tau is accepted with probability
    exp(-theta S); expected retries are exp(tau theta^alpha).  The time is cut
    into pieces with tau theta^alpha <= 1, so each piece needs at most e
    attempts on average.
    """
    if theta < 0:
        raise ValueError("theta must be >= 0")
    gen = as_generator(rng)
    t = np.asarray(t, dtype=float)
    shape = _shape(size) if size is not None else t.shape
    t = np.broadcast_to(t, shape).astype(float)
    if theta == 0 or alpha == 1.0:
        return _out(sample_stable(alpha, t, gen) if alpha < 1 else t.copy(), size)
    rate = theta**alpha
    pieces = np.maximum(np.ceil(t * rate), 1).astype(np.int64)
    tau = t / pieces
    if np.any(tau * rate > math.log(RETRY_GUARD)):
        raise ArithmeticError("tempered-stable rejection would need more than 1e4 expected retries")
    total = np.zeros(shape)
    flat_tau = tau.ravel()
    flat_pieces = pieces.ravel()
    acc = total.ravel()
    for p in range(int(flat_pieces.max()) if flat_pieces.size else 0):
        idx = np.nonzero(flat_pieces > p)[0]
        pending = idx
        while pending.size:
            s = sample_stable(alpha, flat_tau[pending], gen)
            ok = gen.random(pending.size) < np.exp(-theta * s)
            acc[pending[ok]] += s[ok]
            pending = pending[~ok]
    return _out(acc.reshape(shape), size)


def sample_subordinator(f: BernsteinFunction, t, rng=None, size=None):
    """Draw H^f(t) for a catalog Bernstein function."""
    gen = as_generator(rng)
    if isinstance(f, Linear):
        t = np.asarray(t, dtype=float)
        shape = _shape(size) if size is not None else t.shape
        return _out(f.c * np.broadcast_to(t, shape).astype(float), size)
    if isinstance(f, Stable):
        return sample_stable(f.alpha, t, gen, size)
    if isinstance(f, TemperedStable):
        return sample_tempered_stable(f.alpha, f.theta, t, gen, size)
    if isinstance(f, Gamma):
        return sample_gamma_subordinator(f.b, t, gen, size)
    raise TypeError(f"no sampler for {f!r}")


def sample_bernstein_poisson(f: BernsteinFunction, lam: float, t: float, rng=None, size=None):
    """Draw N(H^f(t))."""
    gen = as_generator(rng)
    return _out(_poisson(gen, lam * sample_subordinator(f, t, gen, _shape(size))), size)


def sample_multi(fs, lam: float, t: float, nu: float | None = None, rng=None, size=None):
    """Draw N(sum_j H^{f_j}(tau)), tau = t or tau = L^nu(t)."""
    if isinstance(fs, BernsteinFunction):
        fs = (fs,)
    gen = as_generator(rng)
    shape = _shape(size)
    tau = np.full(shape, float(t)) if nu is None else sample_inverse_stable(nu, t, gen, size=shape)
    x = np.zeros(shape)
    for f in fs:
        x = x + sample_subordinator(f, tau, gen)
    return _out(_poisson(gen, lam * x), size)


def sample_ggbm_clock(H: float, nu: float, t: float, rng=None, size=None):
    """Draw |G_{H,nu}(t)| in law: L^{nu/2}(t^{2H}); deterministic t^{2H} when nu = 2."""
    if not 0.0 < H < 1.0 or not 0.0 < nu <= 2.0:
        raise ValueError("need H in (0, 1) and nu in (0, 2]")
    return sample_inverse_stable(nu / 2, t ** (2 * H), rng, size)


def sample_ggbm_time(H: float, nu: float, lam: float, t: float, rng=None, size=None):
    """Draw N(|G_{H,nu}(t)|)."""
    gen = as_generator(rng)
    return _out(_poisson(gen, lam * sample_ggbm_clock(H, nu, t, gen, _shape(size))), size)


def sample_ggbm_subordinated(f: BernsteinFunction, H: float, nu: float, lam: float, t: float, rng=None, size=None):
    """Draw N(H^f(|G_{H,nu}(t)|)); its pgf is E_{nu/2}(-t^{H nu} f(lam(1-u)))."""
    gen = as_generator(rng)
    clock = sample_ggbm_clock(H, nu, t, gen, _shape(size))
    return _out(_poisson(gen, lam * sample_subordinator(f, clock, gen)), size)


# --------------------------------------------------------------------------
# paths
# --------------------------------------------------------------------------


def _jump_sampler(f: BernsteinFunction, lam: float):
    """Sampler of the jump law a_n / f(lam) of N(H^f(.))."""
    if isinstance(f, Linear) or (isinstance(f, Stable) and f.alpha == 1.0):
        return lambda g, m: np.ones(m, dtype=np.int64)
    if isinstance(f, Stable):
        return lambda g, m: sample_sibuya(f.alpha, g, size=m)
    if isinstance(f, Gamma):
        p = lam / (f.b + lam)
        return lambda g, m: g.logseries(p, size=m)
    if isinstance(f, TemperedStable):
        r = lam / (lam + f.theta)

        def draw(g, m):
            out = np.empty(m, dtype=np.int64)
            pending = np.arange(m)
            while pending.size:
                j = sample_sibuya(f.alpha, g, size=pending.size)
                ok = g.random(pending.size) < r ** (j - 1.0)
                out[pending[ok]] = j[ok]
                pending = pending[~ok]
            return out

        return draw
    raise TypeError(f"no jump sampler for {f!r}")


def sample_compound_path(f: BernsteinFunction, lam: float, times, rng=None):
    """Counts of one path of N(H^f(.)) at the sorted ``times``.

    The path is a compound Poisson process with rate f(lam) and jump law
    a_n / f(lam); the returned counts are nondecreasing in time.
    """
    gen = as_generator(rng)
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be sorted")
    horizon = float(times[-1]) if times.size else 0.0
    rate = float(f.value(lam))
    m = gen.poisson(rate * horizon)
    arrivals = np.sort(gen.uniform(0.0, horizon, size=m))
    jumps = _jump_sampler(f, lam)(gen, m)
    csum = np.concatenate([[0], np.cumsum(jumps)])
    return csum[np.searchsorted(arrivals, times, side="right")]


def sample_process(spec, t: float, rng=None, size=None):
    """Draw N(t) for any process spec from :mod:`fracpoint.processes`."""
    from . import processes as P

    if isinstance(spec, P.SpaceFractional):
        return sample_space_fractional(spec.alpha, spec.lam, t, rng, size)
    if isinstance(spec, P.TimeFractional):
        return sample_time_fractional(spec.nu, spec.lam, t, rng, size)
    if isinstance(spec, P.SpaceTime):
        return sample_space_time(spec.alpha, spec.nu, spec.lam, t, rng, size)
    if isinstance(spec, P.BernsteinPoisson):
        return sample_bernstein_poisson(spec.f, spec.lam, t, rng, size)
    if isinstance(spec, P.MultiSubordinated):
        return sample_multi(spec.fs, spec.lam, t, spec.nu, rng, size)
    if isinstance(spec, P.GgbmTime):
        return sample_ggbm_time(spec.H, spec.nu, spec.lam, t, rng, size)
    raise TypeError(f"not a process spec: {spec!r}")


def chi_square_gof(samples, probabilities, min_expected: float = 20.0):
    """Pearson goodness-of-fit of integer samples against a pmf p_0, p_1, ...

    Consecutive values are merged left to right until each cell expects at
    least ``min_expected`` counts; everything past the last full cell,
    including mass beyond the table, forms the final cell.  Returns
    ``(statistic, p_value, cells)``.

    The default of 20 (rather than the textbook 5) keeps the chi-square
    approximation honest for heavy-tailed laws with thousands of cells.
    """
    x = np.asarray(samples).ravel()
    n = x.size
    p = np.asarray(probabilities, dtype=float)
    if n < 1 or np.any(x < 0):
        raise ValueError("need non-negative integer samples")
    exp = n * p
    edges = []  # first value of each cell
    acc, start = 0.0, 0
    for k in range(len(p)):
        acc += exp[k]
        if acc >= min_expected and n * (1.0 - p[: k + 1].sum()) >= min_expected:
            edges.append(start)
            acc, start = 0.0, k + 1
    edges.append(start)  # the final cell runs to infinity
    if len(edges) < 2:
        raise ValueError("too few samples for a chi-square test")
    edges = np.asarray(edges)
    cell = np.searchsorted(edges, x, side="right") - 1
    obs = np.bincount(cell, minlength=len(edges)).astype(float)
    cs = np.concatenate([[0.0], np.cumsum(exp)])
    e = np.append(cs[edges[1:]] - cs[edges[:-1]], n * max(1.0 - p[: edges[-1]].sum(), 0.0))
    e *= n / e.sum()
    res = stats.chisquare(obs, e)
    return float(res.statistic), float(res.pvalue), len(e)
