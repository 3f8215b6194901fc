"""Per-datum censored-Gaussian likelihood quantities.

A datum either arrives intact (its value y is known) or censored, in
which case all that is known is that y fell within sigma*tau of a
prediction anchor y_hat.  Each datum contributes one convex term to the
negative log-likelihood:

    uncensored:  (y - x'theta)^2 / (2 sigma^2)
    censored:    -log P(z_l < Z < z_u),   Z ~ N(0,1)

with z_l = -tau - (x'theta - y_hat)/sigma and z_u = z_l + 2 tau.  The
gradient of a term is -beta * x and its Hessian is h * x x', where beta
(the score scalar) and h (the information scalar) are computed here.
beta is oriented as the DESCENT scalar: theta + mu*beta*x reduces the
loss, and for an uncensored datum it is exactly the LMS correction
(y - x'theta)/sigma^2.

Scalar hot paths use the math module; the tail regime (interval bounds
sharing a sign beyond z ~ 6) switches to scaled Mills ratios via erfcx
so the beta and h ratios stay finite out to arbitrarily distant
intervals, approaching the clipping limit beta -> z_near/sigma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, UsageError
from .numkit.gaussian import interval_log_prob

__all__ = [
    "CensoredTerm",
    "ScoreInfo",
    "interval_bounds",
    "loss",
    "score_scalar",
    "info_scalar",
    "evaluate",
]

_INV_SQRT_2PI = 0.3989422804014327
_SQRT_2 = 1.4142135623730951
_SQRT_HALF_PI = 1.2533141373155003  # sqrt(pi/2)
_TAIL_SWITCH = 6.0


@dataclass(frozen=True, slots=True)
class CensoredTerm:
    """One datum's contribution to the censored negative log-likelihood.

    Attributes
    ----------
    censored : bool
        True when only the censoring interval is known.
    y_or_anchor : float
        The observed value y when uncensored; the prediction anchor
        y_hat the censor compared against when censored.
    x : ndarray
        Regressor vector.
    tau : float
        Censoring threshold (half-width of the interval in sigma units).
    sigma : float
        Noise standard deviation.
    """

    censored: bool
    y_or_anchor: float
    x: np.ndarray
    tau: float
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise DomainError("sigma must be positive")
        if self.tau < 0.0:
            raise DomainError("tau must be non-negative")


@dataclass(frozen=True, slots=True)
class ScoreInfo:
    """Loss value, descent score scalar, and information scalar at theta."""

    loss: float
    beta: float
    info: float


def _phi(z):
    return _INV_SQRT_2PI * math.exp(-0.5 * z * z)


def _q(z):
    return 0.5 * math.erfc(z / _SQRT_2)


def _mills(z):
    """Mills ratio Q(z)/phi(z), stable for large positive z."""
    return _SQRT_HALF_PI * special.erfcx(z / _SQRT_2)


def interval_bounds(term: CensoredTerm, theta) -> tuple[float, float]:
    """Standardized censoring-interval endpoints (z_l, z_u) at theta.

    Only meaningful for censored terms; z_u - z_l = 2 tau always.
    """
    if not term.censored:
        raise UsageError("interval_bounds is defined only for censored terms")
    shift = (float(term.x @ theta) - term.y_or_anchor) / term.sigma
    return (-term.tau - shift, term.tau - shift)


def _censored_scalars(z_l: float, z_u: float, sigma: float) -> tuple[float, float]:
    """(beta, h) for a censored term with standardized bounds (z_l, z_u).

    Central intervals use phi/Q directly.  Once both bounds sit in one
    tail, everything is rescaled by phi(z_near): the probability becomes
    a difference of Mills ratios and the ratios stay well conditioned.
    """
    sign = 1.0
    if z_l + z_u < 0.0:
        # Mirror into the right tail; beta is odd under the reflection,
        # h is even.
        z_l, z_u = -z_u, -z_l
        sign = -1.0
    if z_l > _TAIL_SWITCH:
        # r = phi(z_u)/phi(z_l) decays like exp(-2*tau*z_l); underflow to
        # zero is harmless and yields the one-sided clipping limits
        # beta -> 1/(sigma*mills(z_l)) ~ z_l/sigma.
        r = math.exp(-0.5 * (z_u - z_l) * (z_u + z_l))
        scaled_p = _mills(z_l) - r * _mills(z_u)  # P / phi(z_l)
        ratio = (1.0 - r) / scaled_p  # (phi(z_l)-phi(z_u))/P
        curve = (z_u * r - z_l) / scaled_p  # (z_u phi(z_u)-z_l phi(z_l))/P
    else:
        p = _q(z_l) - _q(z_u)
        ratio = (_phi(z_l) - _phi(z_u)) / p
        curve = (z_u * _phi(z_u) - z_l * _phi(z_l)) / p
    beta = sign * ratio / sigma
    info = (ratio * ratio + curve) / (sigma * sigma)
    return beta, info


def loss(term: CensoredTerm, theta) -> float:
    """The term's negative log-likelihood contribution at theta."""
    if term.censored:
        z_l, z_u = interval_bounds(term, theta)
        return -interval_log_prob(z_l, z_u)
    resid = term.y_or_anchor - float(term.x @ theta)
    return 0.5 * resid * resid / (term.sigma * term.sigma)


def score_scalar(term: CensoredTerm, theta) -> float:
    """Descent score beta: the term's negative gradient is beta * x."""
    if term.censored:
        z_l, z_u = interval_bounds(term, theta)
        return _censored_scalars(z_l, z_u, term.sigma)[0]
    return (term.y_or_anchor - float(term.x @ theta)) / (term.sigma * term.sigma)


def info_scalar(term: CensoredTerm, theta) -> float:
    """Information scalar h: the term's Hessian is h * x x'.

    h = 1/sigma^2 exactly for uncensored terms, and lies in
    (0, 1/sigma^2] for censored ones (an interval can never carry more
    curvature than an exact observation).
    """
    if term.censored:
        z_l, z_u = interval_bounds(term, theta)
        return _censored_scalars(z_l, z_u, term.sigma)[1]
    return 1.0 / (term.sigma * term.sigma)


def evaluate(term: CensoredTerm, theta) -> ScoreInfo:
    """Loss, beta, and h in one pass (shares the interval evaluation)."""
    if not term.censored:
        inv_var = 1.0 / (term.sigma * term.sigma)
        resid = term.y_or_anchor - float(term.x @ theta)
        return ScoreInfo(0.5 * resid * resid * inv_var, resid * inv_var, inv_var)
    z_l, z_u = interval_bounds(term, theta)
    beta, info = _censored_scalars(z_l, z_u, term.sigma)
    return ScoreInfo(-interval_log_prob(z_l, z_u), beta, info)
