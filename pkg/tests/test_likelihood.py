"""Censored-Gaussian per-datum quantities.

The pinned constants were computed at 40-digit precision from the
defining integrals; derivative identities are checked against central
finite differences, and the information scalar against the truncated
normal variance identity h sigma^2 = 1 - Var(Z | z_l < Z < z_u).
"""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from cendre.errors import DomainError, UsageError
from cendre.likelihood import (
    CensoredTerm,
    ScoreInfo,
    evaluate,
    info_scalar,
    interval_bounds,
    loss,
    score_scalar,
)

import oracles


def censored_term(z_l, z_u, sigma=1.0):
    """Build a one-feature censored term whose bounds at theta are (z_l, z_u)."""
    tau = 0.5 * (z_u - z_l)
    shift = -0.5 * (z_l + z_u)  # (x'theta - anchor)/sigma
    term = CensoredTerm(True, 0.0, np.array([1.0]), tau, sigma)
    theta = np.array([shift * sigma])
    return term, theta


# ---------------------------------------------------------------------
# construction and interval endpoints
# ---------------------------------------------------------------------

def test_term_validation():
    with pytest.raises(DomainError):
        CensoredTerm(False, 1.0, np.ones(2), 1.0, 0.0)
    with pytest.raises(DomainError):
        CensoredTerm(True, 1.0, np.ones(2), -0.5, 1.0)


def test_bounds_centered():
    term = CensoredTerm(True, 0.0, np.array([1.0, -1.0]), 2.0, 1.0)
    assert interval_bounds(term, np.zeros(2)) == (-2.0, 2.0)


def test_bounds_shifted():
    term = CensoredTerm(True, 0.0, np.array([1.0]), 1.0, 1.0)
    z_l, z_u = interval_bounds(term, np.array([0.5]))
    assert (z_l, z_u) == pytest.approx((-1.5, 0.5), abs=1e-15)


def test_bounds_width_is_two_tau():
    rng = np.random.default_rng(21)
    for _ in range(100):
        p = rng.integers(1, 6)
        term = CensoredTerm(True, rng.normal(), rng.standard_normal(p),
                            float(rng.uniform(0, 3)), float(rng.uniform(0.1, 4)))
        z_l, z_u = interval_bounds(term, rng.standard_normal(p))
        assert z_u - z_l == pytest.approx(2 * term.tau, rel=1e-12)


def test_bounds_rejects_uncensored():
    term = CensoredTerm(False, 1.0, np.ones(2), 1.0, 1.0)
    with pytest.raises(UsageError):
        interval_bounds(term, np.zeros(2))


# ---------------------------------------------------------------------
# loss
# ---------------------------------------------------------------------

def test_loss_zero_residual():
    term = CensoredTerm(False, 1.5, np.array([3.0]), 1.0, 2.0)
    assert loss(term, np.array([0.5])) == 0.0


def test_loss_quadratic():
    term = CensoredTerm(False, 2.0, np.array([1.0]), 1.0, 2.0)
    # (2 - 0.5)^2 / (2 * 4)
    assert loss(term, np.array([0.5])) == pytest.approx(1.5**2 / 8.0, rel=1e-15)


def test_loss_censored_centered():
    # -log P(|Z| < 1) = 0.38171514630212607 (quadrature oracle)
    term, theta = censored_term(-1.0, 1.0)
    assert loss(term, theta) == pytest.approx(0.3817151463021261, rel=1e-12)


def test_loss_censored_nonnegative():
    rng = np.random.default_rng(31)
    for _ in range(200):
        z_l = rng.uniform(-6, 5.5)
        term, theta = censored_term(z_l, z_l + rng.uniform(1e-3, 4))
        assert loss(term, theta) >= 0.0


def test_loss_censored_matches_quadrature():
    rng = np.random.default_rng(41)
    for _ in range(50):
        z_l = rng.uniform(-5, 4)
        z_u = z_l + rng.uniform(0.01, 3)
        term, theta = censored_term(z_l, z_u, sigma=float(rng.uniform(0.2, 3)))
        want = -math.log(oracles.quad_interval_prob(z_l, z_u))
        assert loss(term, theta) == pytest.approx(want, rel=1e-9)


# ---------------------------------------------------------------------
# score scalar
# ---------------------------------------------------------------------

def test_score_uncensored():
    term = CensoredTerm(False, 2.0, np.array([1.0]), 1.0, 1.0)
    assert score_scalar(term, np.array([0.5])) == pytest.approx(1.5, rel=1e-15)


def test_score_centered_zero():
    term, theta = censored_term(-1.7, 1.7)
    assert score_scalar(term, theta) == pytest.approx(0.0, abs=1e-15)


def test_score_pinned():
    # (phi(-1.5) - phi(0.5)) / (Q(-1.5) - Q(0.5)) = -0.35627288417705976
    term, theta = censored_term(-1.5, 0.5)
    assert score_scalar(term, theta) == pytest.approx(-0.3562728841770598, rel=1e-12)


def test_score_pulls_toward_interval():
    # The prediction sits above the anchor (interval pushed left), so the
    # descent direction must push x'theta back down: beta < 0 for x > 0.
    term, theta = censored_term(-2.5, -0.5)
    assert score_scalar(term, theta) < 0.0
    term, theta = censored_term(0.5, 2.5)
    assert score_scalar(term, theta) > 0.0


def test_score_odd_under_reflection():
    rng = np.random.default_rng(51)
    for _ in range(50):
        z_l = rng.uniform(-6, 5)
        z_u = z_l + rng.uniform(0.01, 3)
        t1, th1 = censored_term(z_l, z_u)
        t2, th2 = censored_term(-z_u, -z_l)
        assert score_scalar(t1, th1) == pytest.approx(-score_scalar(t2, th2),
                                                      rel=1e-12, abs=1e-15)


# ---------------------------------------------------------------------
# information scalar
# ---------------------------------------------------------------------

def test_info_uncensored():
    term = CensoredTerm(False, 0.0, np.ones(1), 1.0, 2.0)
    assert info_scalar(term, np.zeros(1)) == 0.25


def test_info_pinned():
    # ratio^2 + curvature = 0.12693037 + 0.59282148 = 0.7197518498487749
    term, theta = censored_term(-1.5, 0.5)
    assert info_scalar(term, theta) == pytest.approx(0.7197518498487749, rel=1e-12)


def test_info_range_sweep():
    # 10,000 random censored intervals: h in (0, 1/sigma^2], strictly
    # below the uncensored information except in the wide-interval limit.
    rng = np.random.default_rng(61)
    for _ in range(10_000):
        z_l = rng.uniform(-8, 7.9)
        z_u = z_l + rng.uniform(1e-3, 6)
        sigma = float(rng.uniform(0.2, 3))
        term, theta = censored_term(z_l, z_u, sigma)
        h = info_scalar(term, theta)
        assert 0.0 < h <= 1.0 / sigma**2 + 1e-12


def test_info_truncated_variance_identity():
    # h sigma^2 = 1 - Var(Z | z_l < Z < z_u), evaluated by quadrature.
    rng = np.random.default_rng(71)
    for _ in range(40):
        z_l = rng.uniform(-4, 3)
        z_u = z_l + rng.uniform(0.05, 3)
        sigma = float(rng.uniform(0.3, 2.5))
        term, theta = censored_term(z_l, z_u, sigma)
        P = oracles.quad_interval_prob(z_l, z_u)
        mean, _ = integrate.quad(lambda t: t * oracles.pdf(t) / P, z_l, z_u)
        second, _ = integrate.quad(lambda t: t * t * oracles.pdf(t) / P, z_l, z_u)
        var_trunc = second - mean**2
        want = (1.0 - var_trunc) / sigma**2
        assert info_scalar(term, theta) == pytest.approx(want, rel=1e-7)


def test_info_even_under_reflection():
    rng = np.random.default_rng(81)
    for _ in range(50):
        z_l = rng.uniform(-6, 5)
        z_u = z_l + rng.uniform(0.01, 3)
        t1, th1 = censored_term(z_l, z_u)
        t2, th2 = censored_term(-z_u, -z_l)
        assert info_scalar(t1, th1) == pytest.approx(info_scalar(t2, th2), rel=1e-12)


# ---------------------------------------------------------------------
# derivative identities
# ---------------------------------------------------------------------

def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(91)
    for _ in range(100):
        p = int(rng.integers(1, 5))
        x = rng.standard_normal(p)
        theta = rng.standard_normal(p) * 0.7
        sigma = float(rng.uniform(0.3, 2.0))
        censored = bool(rng.integers(0, 2))
        tau = float(rng.uniform(0.1, 2.0)) if censored else float(rng.uniform(0, 2))
        term = CensoredTerm(censored, float(rng.normal()), x, tau, sigma)
        grad = oracles.central_diff_grad(lambda th: loss(term, th), theta)
        want = -score_scalar(term, theta) * x
        np.testing.assert_allclose(grad, want, rtol=1e-6, atol=1e-8)


def test_hessian_matches_finite_differences():
    # d(beta)/d(theta) = -h x, so a central difference of beta along e_i
    # must equal -h x_i.
    rng = np.random.default_rng(101)
    for _ in range(100):
        p = int(rng.integers(1, 5))
        x = rng.standard_normal(p)
        theta = rng.standard_normal(p) * 0.7
        sigma = float(rng.uniform(0.3, 2.0))
        censored = bool(rng.integers(0, 2))
        tau = float(rng.uniform(0.1, 2.0)) if censored else 0.5
        term = CensoredTerm(censored, float(rng.normal()), x, tau, sigma)
        h_info = info_scalar(term, theta)
        for i in range(p):
            e = np.zeros(p)
            e[i] = 1e-5
            fd = (score_scalar(term, theta + e) - score_scalar(term, theta - e)) / 2e-5
            assert fd == pytest.approx(-h_info * x[i], rel=1e-5, abs=1e-7)


def test_evaluate_consistent_with_parts():
    rng = np.random.default_rng(111)
    for _ in range(100):
        p = int(rng.integers(1, 4))
        x = rng.standard_normal(p)
        theta = rng.standard_normal(p)
        censored = bool(rng.integers(0, 2))
        term = CensoredTerm(censored, float(rng.normal()), x,
                            float(rng.uniform(0.1, 2)), float(rng.uniform(0.3, 2)))
        si = evaluate(term, theta)
        assert isinstance(si, ScoreInfo)
        assert si.loss == pytest.approx(loss(term, theta), rel=1e-14)
        assert si.beta == pytest.approx(score_scalar(term, theta), rel=1e-14)
        assert si.info == pytest.approx(info_scalar(term, theta), rel=1e-14)


# ---------------------------------------------------------------------
# tail stability
# ---------------------------------------------------------------------

def test_tail_pinned_values():
    # 40-digit oracle at (20, 21): beta = 20.049753067339751,
    # h = 0.99753673956998917.
    term, theta = censored_term(20.0, 21.0)
    assert score_scalar(term, theta) == pytest.approx(20.049753067339751, rel=1e-10)
    assert info_scalar(term, theta) == pytest.approx(0.9975367395699892, rel=1e-10)


def test_tail_finite_out_to_35_sigma():
    for z in (8.0, 15.0, 25.0, 35.0, -35.0):
        z_l, z_u = (z, z + 1.0) if z > 0 else (z - 1.0, z)
        term, theta = censored_term(z_l, z_u)
        beta = score_scalar(term, theta)
        h = info_scalar(term, theta)
        assert math.isfinite(beta) and math.isfinite(h)
        assert 0.0 < h <= 1.0


def test_tail_approaches_clipping_limit():
    # For a far interval the score approaches the inverse Mills ratio of
    # the near edge, which itself approaches z_near.
    for z in (10.0, 20.0, 30.0):
        term, theta = censored_term(z, z + 0.5)
        beta = score_scalar(term, theta)
        assert z < beta < z + 0.6


@given(st.floats(-30.0, 29.0), st.floats(0.05, 4.0), st.floats(0.3, 3.0))
def test_score_info_finite_property(z_l, width, sigma):
    term, theta = censored_term(z_l, z_l + width, sigma)
    si = evaluate(term, theta)
    assert math.isfinite(si.beta)
    assert 0.0 < si.info <= 1.0 / sigma**2 + 1e-9
