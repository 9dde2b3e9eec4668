from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from fracpoint.bernstein import Gamma, Linear, Stable, TemperedStable
from fracpoint.hitting import (
    HittingResult,
    default_horizon,
    hitting_prob_asymptotic,
    hitting_prob_bernstein,
    hitting_prob_exact,
    hitting_prob_mc,
    hitting_prob_mc_levels,
    hitting_prob_recursive,
    hitting_time_density,
)
from fracpoint.samplers import RngStream


def renewal_visit_probs(q, k_max):
    """u_k = P(jump chain with step law q visits k): u_0 = 1, u_k = sum_j q_j u_{k-j}."""
    u = np.zeros(k_max + 1)
    u[0] = 1.0
    for k in range(1, k_max + 1):
        u[k] = sum(q[j] * u[k - j] for j in range(1, k + 1))
    return u


def test_half_is_central_binomial():
    k = np.arange(1, 21)
    ref = np.array([math.comb(2 * int(j), int(j)) / 4**j for j in k])
    assert np.max(np.abs(hitting_prob_exact(0.5, k) - ref)) < 1e-12


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.8, 1.0])
def test_exact_matches_gamma_ratio(alpha):
    for k in (1, 2, 7, 100, 10**5, 10**9):
        with mp.workdps(40):
            a = mp.mpf(alpha)
            ref = float(mp.gamma(k + a) / (mp.gamma(a) * mp.factorial(k)))
        assert hitting_prob_exact(alpha, k) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
def test_recursion_matches_closed_form(alpha):
    rec = hitting_prob_recursive(alpha, 50)
    assert np.max(np.abs(rec - hitting_prob_exact(alpha, np.arange(1, 51)))) < 1e-14


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
def test_asymptotic_forms(alpha):
    k = 10**4
    ex = hitting_prob_exact(alpha, k)
    assert ex / hitting_prob_asymptotic(alpha, k) == pytest.approx(1.0, abs=1e-3)
    # the alternative constant is off by exactly e^alpha in the limit
    assert ex / hitting_prob_asymptotic(alpha, k, form="published") == pytest.approx(math.exp(alpha), rel=1e-3)
    with pytest.raises(ValueError):
        hitting_prob_asymptotic(alpha, k, form="other")


def test_published_form_value():
    # e^{-1/2} / sqrt(100 pi) = 0.0342198...
    assert hitting_prob_asymptotic(0.5, 100, form="published") == pytest.approx(math.exp(-0.5) / math.sqrt(100 * math.pi), rel=1e-14)


@pytest.mark.parametrize("f", [Stable(0.4), Gamma(1.0), TemperedStable(0.5, 0.7), Gamma(0.3)], ids=str)
@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_bernstein_hitting_equals_renewal_visits(f, lam):
    k_max = 15
    a = f.jump_rates(lam, k_max)
    q = a / float(f.value(lam))
    u = renewal_visit_probs(q, k_max)
    for k in range(1, k_max + 1):
        assert hitting_prob_bernstein(f, lam, k) == pytest.approx(u[k], rel=1e-12)


def test_stable_hitting_independent_of_lambda():
    for lam in (0.1, 1.0, 7.0):
        assert hitting_prob_bernstein(Stable(0.3), lam, 6) == pytest.approx(hitting_prob_exact(0.3, 6), rel=1e-12)


def test_poisson_hits_everything():
    assert hitting_prob_bernstein(Linear(), 1.0, 9) == pytest.approx(1.0)


@pytest.mark.parametrize("f,k", [(Stable(0.6), 3), (Gamma(1.0), 2)], ids=["stable", "gamma"])
def test_density_integrates_to_hitting_probability(f, k):
    lam = 1.0
    dens = lambda s: hitting_time_density(f, lam, k, s)
    mass = integrate.quad(dens, 0, 1)[0] + integrate.quad(dens, 1, np.inf, limit=200)[0]
    assert mass == pytest.approx(hitting_prob_bernstein(f, lam, k), rel=1e-7)
    assert np.all(hitting_time_density(f, lam, k, np.array([0.1, 1.0, 5.0])) >= 0)


def test_monte_carlo_covers_exact():
    res = hitting_prob_mc_levels(0.5, 1.0, range(1, 6), n_paths=200_000, rng=RngStream(1))
    for k, r in enumerate(res, start=1):
        assert r.method == "monte_carlo"
        assert r.truncation_bound < 1e-3
        assert r.covers(hitting_prob_exact(0.5, k))


def test_short_horizon_reports_truncation():
    r = hitting_prob_mc(0.5, 1.0, 4, horizon=0.5, n_paths=50_000, rng=RngStream(2))
    assert r.truncation_bound > 0.5
    assert r.value < hitting_prob_exact(0.5, 4)


def test_default_horizon_bound():
    from scipy import stats

    h = default_horizon(0.5, 2.0, 8, bound=1e-4)
    assert stats.poisson.cdf(7, 2.0**0.5 * h) == pytest.approx(1e-4, rel=1e-6)


def test_hitting_result_validation():
    with pytest.raises(ValueError):
        HittingResult(1.2, "exact")
    with pytest.raises(ValueError):
        HittingResult(0.5, "monte_carlo")
    with pytest.raises(ValueError):
        HittingResult(0.5, "guess")
    assert HittingResult(0.5, "exact").covers(0.5)


def test_domain_errors():
    with pytest.raises(ValueError):
        hitting_prob_exact(0.5, 0)
    with pytest.raises(ValueError):
        hitting_prob_exact(1.5, 3)
    with pytest.raises(ValueError):
        hitting_prob_bernstein(Stable(0.5), 1.0, 0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 1.0), st.integers(1, 10**6))
def test_exact_is_probability_and_nonincreasing(alpha, k):
    p = hitting_prob_exact(alpha, k)
    q = hitting_prob_exact(alpha, k + 1)
    assert 0 < q <= p <= 1
