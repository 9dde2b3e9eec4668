from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from scipy import stats

from fracpoint.bernstein import Gamma, Linear, Stable, TemperedStable
from fracpoint.processes import (
    BernsteinPoisson,
    SpaceFractional,
    TimeFractional,
    pmf_table,
    sibuya_jump_pmf,
)
from fracpoint.samplers import (
    McEstimate,
    RngStream,
    chi_square_gof,
    run_chunked,
    sample_compound_path,
    sample_gamma_subordinator,
    sample_ggbm_clock,
    sample_ggbm_subordinated,
    sample_inverse_stable,
    sample_iterated,
    sample_multi,
    sample_process,
    sample_sibuya,
    sample_space_fractional,
    sample_stable,
    sample_subordinator,
    sample_tempered_stable,
)
from fracpoint.specfun import m_wright_cdf_grid, ml

N = 200_000


def lt_check(x, s, target, k=4.0):
    est = McEstimate.from_samples(np.exp(-s * x))
    assert est.contains(target, k=k, slack=1e-12), (est, target)


@pytest.mark.parametrize("alpha", [0.3, 0.6, 0.9])
def test_stable_laplace_transform(rng, alpha):
    t = 1.7
    x = sample_stable(alpha, t, rng, N)
    assert np.all(x > 0)
    for s in (0.3, 1.0, 4.0):
        lt_check(x, s, math.exp(-t * s**alpha))


def test_stable_alpha_one_is_deterministic(rng):
    assert np.all(sample_stable(1.0, 2.5, rng, 10) == 2.5)


@pytest.mark.parametrize("nu", [0.3, 0.7])
def test_inverse_stable_moments(rng, nu):
    t = 2.0
    x = sample_inverse_stable(nu, t, rng, N)
    # E L = t^nu / Gamma(1+nu); E e^{-s L} = E_nu(-s t^nu)
    assert McEstimate.from_samples(x).contains(t**nu / math.gamma(1 + nu), k=4)
    from fracpoint.specfun import ml

    lt_check(x, 0.8, float(ml(nu, 1.0, -0.8 * t**nu)))


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
def test_sibuya_chi_square(alpha):
    x = sample_sibuya(alpha, np.random.default_rng(3), N)
    p = np.array([0.0] + [sibuya_jump_pmf(alpha, k) for k in range(1, 3000)])
    _, pval, _ = chi_square_gof(x, p)
    assert pval > 1e-3
    assert x.min() >= 1


def test_sibuya_cap_warns():
    with pytest.warns(RuntimeWarning):
        x = sample_sibuya(0.05, np.random.default_rng(1), 20_000, cap=50)
    assert x.max() == 50


def test_gamma_subordinator_law(rng):
    b, t = 2.0, 1.5
    x = sample_gamma_subordinator(b, t, rng, N)
    assert stats.kstest(x, stats.gamma(t * b, scale=1 / b).cdf).pvalue > 1e-3


@pytest.mark.parametrize("alpha,theta", [(0.5, 1.0), (0.8, 0.2), (0.3, 5.0)])
def test_tempered_stable_laplace(rng, alpha, theta):
    t = 1.2
    f = TemperedStable(alpha, theta)
    x = sample_tempered_stable(alpha, theta, t, rng, N)
    for s in (0.5, 2.0):
        lt_check(x, s, math.exp(-t * float(f.value(s))))


@pytest.mark.parametrize("f", [Linear(2.0), Stable(0.6), Gamma(1.0), TemperedStable(0.5, 1.0)], ids=str)
def test_generic_subordinator_laplace(rng, f):
    x = sample_subordinator(f, 0.9, rng, N)
    lt_check(x, 1.3, math.exp(-0.9 * float(f.value(1.3))))


@pytest.mark.parametrize(
    "spec",
    [SpaceFractional(0.7), TimeFractional(0.6, 2.0), BernsteinPoisson(Gamma(1.0)), BernsteinPoisson(TemperedStable(0.5, 1.0))],
    ids=lambda s: s.encode(),
)
def test_process_samplers_chi_square(spec):
    x = sample_process(spec, 1.0, np.random.default_rng(11), N)
    _, pval, _ = chi_square_gof(x, pmf_table(spec, 1.0).probabilities)
    assert pval > 1e-3


def test_space_fractional_two_routes_agree():
    a = sample_space_fractional(0.6, 1.0, 1.0, np.random.default_rng(5), N, method="compound")
    b = sample_space_fractional(0.6, 1.0, 1.0, np.random.default_rng(6), N, method="subordinated")
    p = pmf_table(SpaceFractional(0.6), 1.0).probabilities
    assert chi_square_gof(a, p)[1] > 1e-3
    assert chi_square_gof(b, p)[1] > 1e-3


def test_iterated_degenerate_regime_warns():
    with pytest.warns(RuntimeWarning):
        x = sample_iterated(0.5, [0.01, 0.1], 1.0, np.random.default_rng(2), 20_000)
    assert abs(np.mean(x == 0) - math.exp(-1.0)) < 0.02


def test_multi_sampler_mean(rng):
    fs = (Gamma(1.0), Linear(0.5))
    x = sample_multi(fs, 1.0, 2.0, None, rng, N)
    assert McEstimate.from_samples(x).contains(2.0 * (1.0 + 0.5), k=4)


@pytest.mark.parametrize("H,nu", [(0.7, 0.8), (0.3, 1.4)])
def test_ggbm_clock_is_m_wright(H, nu):
    t = 1.3
    x = sample_ggbm_clock(H, nu, t, np.random.default_rng(9), 50_000)
    scale = t ** (H * nu)
    d = stats.kstest(x / scale, lambda v: m_wright_cdf_grid(nu / 2, v))
    assert d.statistic < 0.01


def test_compound_path_is_nondecreasing_with_right_marginal():
    times = np.linspace(0.1, 2.0, 5)
    rng = np.random.default_rng(4)
    paths = np.array([sample_compound_path(Gamma(1.0), 1.0, times, rng) for _ in range(20_000)])
    assert np.all(np.diff(paths, axis=1) >= 0)
    p = pmf_table(BernsteinPoisson(Gamma(1.0)), 2.0).probabilities
    assert chi_square_gof(paths[:, -1], p)[1] > 1e-3


def test_rng_stream_reproducible_and_independent():
    a = RngStream(7).generator().random(5)
    b = RngStream(7).generator().random(5)
    c = RngStream(7, 1).generator().random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert RngStream(7).substream(3) == RngStream(7, 0, (3,))
    with pytest.raises(ValueError):
        RngStream(-1)


def test_run_chunked_independent_of_threads():
    fn = lambda g, m: sample_stable(0.5, 1.0, g, m)
    r = RngStream(99)
    one = run_chunked(fn, 200_001, r, threads=1)
    four = run_chunked(fn, 200_001, r, threads=4)
    assert one.shape == (200_001,)
    assert np.array_equal(one, four)
    with pytest.raises(TypeError):
        run_chunked(fn, 10, np.random.default_rng(1))


def test_chi_square_detects_wrong_law():
    x = np.random.default_rng(1).poisson(2.0, N)
    assert chi_square_gof(x, stats.poisson.pmf(np.arange(60), 2.0))[1] > 1e-3
    assert chi_square_gof(x, stats.poisson.pmf(np.arange(60), 2.1))[1] < 1e-6


def test_mc_estimate():
    e = McEstimate.from_samples([1.0, 2.0, 3.0])
    assert e.mean == 2.0 and e.n == 3
    assert e.contains(2.5, k=1)
    with pytest.raises(ValueError):
        McEstimate(1.0, 0.0, 1)


def test_sampler_validation():
    with pytest.raises(ValueError):
        sample_stable(1.5)
    with pytest.raises(ValueError):
        sample_inverse_stable(0.0)
    with pytest.raises(TypeError):
        sample_process("space:0.5", 1.0)


@pytest.mark.parametrize("f", [Gamma(1.0), Stable(0.6)], ids=["gamma", "stable"])
@pytest.mark.parametrize("H,nu", [(0.7, 0.8), (0.3, 1.4)])
def test_ggbm_subordinated_pgf(f, H, nu):
    # no pmf is available for N(H^f(|G(t)|)); its pgf is E_{nu/2}(-t^{H nu} f(lam(1-u)))
    gen = np.random.default_rng(99)
    lam, t = 2.0, 1.5
    x = sample_ggbm_subordinated(f, H, nu, lam, t, gen, 200_000)
    for u in (0.3, 0.7):
        w = u**x
        ref = float(ml(nu / 2, 1.0, -float(f.value(lam * (1 - u))) * t ** (H * nu)))
        assert abs(w.mean() - ref) < 4 * w.std() / np.sqrt(x.size)
