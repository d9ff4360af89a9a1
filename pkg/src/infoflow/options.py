"""European calls on credit-risky discount bonds.

Binary bonds admit a closed form of the Black-Scholes type; general
discrete spectra reduce to one root-find plus a finite sum of normal
CDFs.  The information flow rate plays the role of the volatility.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import DiscountCurve
from .errors import GreeksUndefinedError, InvalidInputError
from .processes import (
    DiscretePayoff,
    InformationProcessSpec,
    conditional_probs,
    norm_cdf,
)

__all__ = [
    "OptionSpec",
    "OptionGreeks",
    "price_binary_call",
    "price_multirecovery_call",
    "option_price_process",
    "greeks",
]

#: Absolute tolerance for the critical-information bisection.
ROOT_TOL = 1e-13


@dataclass(frozen=True)
class OptionSpec:
    """Call exercisable at t on a bond maturing at T > t."""

    strike: float
    expiry: float
    payoff: DiscretePayoff
    spec: InformationProcessSpec
    curve: DiscountCurve

    def __post_init__(self):
        if not (0.0 < self.expiry < self.spec.horizon):
            raise InvalidInputError("option expiry must lie strictly inside (0, T)")
        if self.strike <= 0.0:
            raise InvalidInputError("strike must be positive")

    @property
    def tau(self) -> float:
        """Effective variance scale tau = t T/(T - t)."""
        t, T = self.expiry, self.spec.horizon
        return t * T / (T - t)

    @property
    def p_tT(self) -> float:
        return self.curve.forward(self.expiry, self.spec.horizon)


@dataclass(frozen=True)
class OptionGreeks:
    vega: float
    delta: float


def _d_plus_minus(opt: OptionSpec):
    h0, h1 = opt.payoff.levels
    p0, p1 = opt.payoff.probs
    a = opt.p_tT * h1 - opt.strike
    b = opt.strike - opt.p_tT * h0
    s = opt.spec.sigma * math.sqrt(opt.tau) * (h1 - h0)
    log_ratio = math.log((p1 * a) / (p0 * b))
    return (log_ratio + 0.5 * s * s) / s, (log_ratio - 0.5 * s * s) / s


def price_binary_call(opt: OptionSpec) -> float:
    """Time-0 call value on a binary bond.

    Strike below P_tT h0: certain exercise, B_0T - P_0t K.  Above
    P_tT h1: worthless.  In between:

        C0 = P_0t [ p1 (P_tT h1 - K) N(d+) - p0 (K - P_tT h0) N(d-) ].
    """
    if not opt.payoff.is_binary:
        raise InvalidInputError("binary pricer expects a two-level payoff")
    h0, h1 = opt.payoff.levels
    p0, p1 = opt.payoff.probs
    p_0t = opt.curve.df(opt.expiry)
    p_tT = opt.p_tT
    if opt.strike <= p_tT * h0:
        b_0T = opt.curve.df(opt.spec.horizon) * opt.payoff.mean()
        return b_0T - p_0t * opt.strike
    if opt.strike >= p_tT * h1:
        return 0.0
    if opt.spec.sigma == 0.0:
        # No information flow: the bond value at expiry is deterministic.
        return p_0t * max(p_tT * opt.payoff.mean() - opt.strike, 0.0)
    d_plus, d_minus = _d_plus_minus(opt)
    a = p_tT * h1 - opt.strike
    b = opt.strike - p_tT * h0
    return p_0t * (p1 * a * norm_cdf(d_plus) - p0 * b * norm_cdf(d_minus))


def _critical_information(opt: OptionSpec) -> float:
    """Unique xi at which the expiry bond value crosses the strike.

    The weighted sum sum_i p_i (P_tT h_i - K) exp[...] is strictly
    increasing in xi, so bisection with an expanding bracket is safe.
    """
    t, T = opt.expiry, opt.spec.horizon
    sigma = opt.spec.sigma
    h = opt.payoff.levels
    p = opt.payoff.probs
    coeff = opt.p_tT * h - opt.strike
    a_fac = T / (T - t)

    def f(xi):
        expo = a_fac * (sigma * h * xi - 0.5 * sigma ** 2 * h ** 2 * t)
        expo = expo - expo.max()
        return float((p * coeff * np.exp(expo)).sum())

    scale = math.sqrt(t * (T - t) / T)
    lo, hi = -50.0 * scale, 50.0 * scale
    f_lo, f_hi = f(lo), f(hi)
    while f_lo > 0.0 or f_hi < 0.0:
        lo *= 2.0
        hi *= 2.0
        f_lo, f_hi = f(lo), f(hi)
        if hi > 1e12 * scale:
            raise InvalidInputError("critical information value is not bracketed")
    while hi - lo > ROOT_TOL:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def price_multirecovery_call(opt: OptionSpec) -> float:
    """Semi-analytic call on a bond with n+1 recovery levels.

        C0 = P_0t sum_i p_i (P_tT h_i - K) N(sigma h_i sqrt(tau) - Zbar),

    with Zbar the critical information value rescaled by the bridge
    standard deviation sqrt(t(T-t)/T).  Strikes outside the attainable
    band fall back to the analytic boundary results.
    """
    h = opt.payoff.levels
    p = opt.payoff.probs
    p_0t = opt.curve.df(opt.expiry)
    p_tT = opt.p_tT
    if opt.strike <= p_tT * h[0]:
        b_0T = opt.curve.df(opt.spec.horizon) * opt.payoff.mean()
        return b_0T - p_0t * opt.strike
    if opt.strike >= p_tT * h[-1]:
        return 0.0
    if opt.spec.sigma == 0.0:
        return p_0t * max(p_tT * opt.payoff.mean() - opt.strike, 0.0)
    t, T = opt.expiry, opt.spec.horizon
    xi_bar = _critical_information(opt)
    z_bar = xi_bar / math.sqrt(t * (T - t) / T)
    sqrt_tau = math.sqrt(opt.tau)
    args = opt.spec.sigma * h * sqrt_tau - z_bar
    return p_0t * float((p * (p_tT * h - opt.strike) * norm_cdf(args)).sum())


def option_price_process(opt: OptionSpec, s: float, xi_s: float) -> float:
    """Call value at 0 <= s <= t given the information value xi_s.

    C_s = P_st [ pi_1s (P_tT h1 - K) N(d_s+) - pi_0s (K - P_tT h0) N(d_s-) ],
    where v_st^2 = (t-s)/((T-t)(T-s)) and the posteriors pi_is replace
    the a-priori weights.  At s = 0 this is the time-0 closed form; at
    s = t it collapses to the payoff.
    """
    if not opt.payoff.is_binary:
        raise InvalidInputError("option price process implemented for binary bonds")
    if s < 0.0 or s > opt.expiry:
        raise InvalidInputError("valuation time must lie in [0, expiry]")
    t, T = opt.expiry, opt.spec.horizon
    h0, h1 = opt.payoff.levels
    probs = conditional_probs(opt.payoff, opt.spec, s, xi_s)
    p_st = opt.curve.df(t) / opt.curve.df(s)
    p_tT = opt.p_tT
    bond_expiry_mean = p_tT * float(probs @ opt.payoff.levels)
    if s == t:
        return max(bond_expiry_mean - opt.strike, 0.0)
    if opt.strike <= p_tT * h0:
        return p_st * (bond_expiry_mean - opt.strike)
    if opt.strike >= p_tT * h1:
        return 0.0
    if opt.spec.sigma == 0.0:
        return p_st * max(bond_expiry_mean - opt.strike, 0.0)
    a = p_tT * h1 - opt.strike
    b = opt.strike - p_tT * h0
    v2 = (t - s) / ((T - t) * (T - s))
    sv = opt.spec.sigma * math.sqrt(v2) * T * (h1 - h0)
    log_ratio = math.log((probs[1] * a) / (probs[0] * b))
    d_plus = (log_ratio + 0.5 * sv * sv) / sv
    d_minus = (log_ratio - 0.5 * sv * sv) / sv
    return p_st * (probs[1] * a * norm_cdf(d_plus) - probs[0] * b * norm_cdf(d_minus))


def greeks(opt: OptionSpec) -> OptionGreeks:
    """Sensitivities of the binary-bond call in the mixed-strike case.

    Vega is the derivative in the information flow rate,

        V = (1/sqrt(2 pi)) P_0t e^{-A/2} (h1-h0)
            sqrt(tau p0 p1 (P_tT h1 - K)(K - P_tT h0)),
        A = ln^2[p1(P_tT h1-K)/(p0(K-P_tT h0))] / (sigma^2 tau (h1-h0)^2)
            + sigma^2 tau (h1-h0)^2 / 4,

    and delta is the derivative in the initial bond price,

        Delta = [(P_tT h1 - K) N(d+) + (K - P_tT h0) N(d-)] / (P_tT (h1-h0)).
    """
    if not opt.payoff.is_binary:
        raise GreeksUndefinedError("greeks require a binary underlying")
    h0, h1 = opt.payoff.levels
    p0, p1 = opt.payoff.probs
    p_tT = opt.p_tT
    if not (p_tT * h0 < opt.strike < p_tT * h1):
        raise GreeksUndefinedError(
            "strike outside (P_tT h0, P_tT h1); the mixed-exercise sensitivities "
            "are undefined there")
    if opt.spec.sigma == 0.0:
        raise GreeksUndefinedError("vega requires a positive information flow rate")
    a = p_tT * h1 - opt.strike
    b = opt.strike - p_tT * h0
    tau = opt.tau
    spread = h1 - h0
    s2 = opt.spec.sigma ** 2 * tau * spread ** 2
    big_a = math.log((p1 * a) / (p0 * b)) ** 2 / s2 + 0.25 * s2
    vega = (opt.curve.df(opt.expiry) * math.exp(-0.5 * big_a) * spread
            * math.sqrt(tau * p0 * p1 * a * b) / math.sqrt(2.0 * math.pi))
    d_plus, d_minus = _d_plus_minus(opt)
    delta = (a * norm_cdf(d_plus) + b * norm_cdf(d_minus)) / (p_tT * spread)
    return OptionGreeks(vega=float(vega), delta=float(delta))
