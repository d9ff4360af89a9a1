"""Single-dividend assets with continuous factors.

Closed-form prices for exponential and gamma dividend priors, the
bridge-measure call formula, price-dynamics coefficients, and the
log-normal special case that recovers geometric Brownian motion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .curves import DiscountCurve
from .errors import InvalidInputError
from .processes import (
    ContinuousDensity,
    ExponentialDensity,
    GammaDensity,
    InformationProcessSpec,
    conditional_density,
    gaussian_tail_powers,
    norm_cdf,
)

__all__ = [
    "SingleDividendAsset",
    "GammaAux",
    "gamma_aux",
    "price_single_dividend",
    "price_exponential_closed",
    "price_gamma_closed",
    "price_call_bridge_measure",
    "asset_dynamics_coeffs",
    "bs_recovery_price",
]

CANCELLATION_GUARD = 1e12


@dataclass(frozen=True)
class SingleDividendAsset:
    """Asset paying one random dividend at the information horizon."""

    prior: ContinuousDensity
    spec: InformationProcessSpec
    curve: DiscountCurve

    def __post_init__(self):
        if self.spec.factor is not None and self.spec.factor is not self.prior:
            raise InvalidInputError("spec.factor must be the dividend prior (or None)")


@dataclass(frozen=True)
class GammaAux:
    """Auxiliary quantities for the exponential/gamma closed forms.

    A_t = sigma^2 t T/(T-t); B_t = sigma T xi/(T-t) - rate, where rate is
    the prior's exponential-decay rate (1/delta for the exponential
    family, delta for the gamma family).
    """

    A: float
    B: float

    def f_table(self, k_max: int) -> np.ndarray:
        """F_k(-B/sqrt(A)) for k = 0..k_max via the upward recursion."""
        return gaussian_tail_powers(-self.B / math.sqrt(self.A), k_max)


def gamma_aux(asset: SingleDividendAsset, t: float, xi: float) -> GammaAux:
    spec = asset.spec
    spec.check_time(t)
    if not isinstance(asset.prior, (ExponentialDensity, GammaDensity)):
        raise InvalidInputError("auxiliary quantities exist for exponential/gamma priors")
    T = spec.horizon
    A = spec.sigma ** 2 * t * T / (T - t)
    B = spec.sigma * T * xi / (T - t) - asset.prior.rate
    return GammaAux(A=A, B=B)


def price_single_dividend(asset: SingleDividendAsset, t: float, xi: float,
                          method: str = "closed") -> float:
    """S_t = P_tT E[D | xi_t]; closed-form posterior mean where available.

    ``method="quad"`` forces the adaptive-quadrature route (the
    cross-check path).
    """
    spec = asset.spec
    spec.check_time(t)
    if t == 0.0 and xi == 0.0:
        return asset.curve.df(spec.horizon) * asset.prior.mean()
    post = conditional_density(asset.prior, spec, t, xi)
    mean = post.moment(1, method="quad" if method == "quad" else "closed")
    return asset.curve.forward(t, spec.horizon) * mean


def price_exponential_closed(asset: SingleDividendAsset, t: float, xi: float) -> float:
    """Closed form for an exponentially distributed dividend (mean delta):

        S_t = P_tT [ exp(-B^2/(2A)) / (sqrt(2 pi A) N(B/sqrt(A))) + B/A ].

    sigma = 0 or t = 0 reduce to the static value P_tT delta.
    """
    if not isinstance(asset.prior, ExponentialDensity):
        raise InvalidInputError("exponential closed form needs an exponential prior")
    spec = asset.spec
    spec.check_time(t)
    p_tT = asset.curve.forward(t, spec.horizon)
    if spec.sigma == 0.0 or t == 0.0:
        return p_tT * asset.prior.delta
    aux = gamma_aux(asset, t, xi)
    u = aux.B / math.sqrt(aux.A)
    if u < -30.0:
        # Far-left tail: Mills-ratio asymptotics keep the ratio finite.
        mean = -1.0 / aux.B + 2.0 * aux.A / aux.B ** 3
    else:
        mean = (math.exp(-0.5 * u * u)
                / (math.sqrt(2.0 * math.pi * aux.A) * float(norm_cdf(u)))
                + aux.B / aux.A)
    return p_tT * mean


def _shifted_tail_sums(order: int, aux: GammaAux):
    """S_m(y) = int_y^inf (z-y)^m e^{-z^2/2} dz for m = 0..order, with the
    worst per-sum cancellation ratio for the fallback guard."""
    y = -aux.B / math.sqrt(aux.A)
    fk = aux.f_table(order)
    sums = np.empty(order + 1)
    worst = 0.0
    for m in range(order + 1):
        ks = np.arange(m + 1)
        terms = np.array([math.comb(m, k) for k in ks], dtype=float) \
            * (-y) ** (m - ks) * fk[: m + 1]
        s = terms.sum()
        sums[m] = s
        if m >= 1:
            worst = max(worst, np.abs(terms).max() / max(abs(s), 1e-300))
    return sums, worst


def price_gamma_closed(asset: SingleDividendAsset, t: float, xi: float) -> float:
    """Closed form for a gamma(delta, n) dividend via the F_k table.

    The binomial sums run over F_k(-B/sqrt(A)); if their dynamic range
    exceeds 1e12 (catastrophic cancellation) the price falls back to the
    quadrature route.
    """
    if not isinstance(asset.prior, GammaDensity):
        raise InvalidInputError("gamma closed form needs a gamma prior")
    spec = asset.spec
    spec.check_time(t)
    n = asset.prior.n
    p_tT = asset.curve.forward(t, spec.horizon)
    if spec.sigma == 0.0 or t == 0.0:
        return p_tT * asset.prior.mean()
    aux = gamma_aux(asset, t, xi)
    sums, worst = _shifted_tail_sums(n, aux)
    if (not np.all(np.isfinite(sums))) or sums[n - 1] <= 0.0 \
            or worst > CANCELLATION_GUARD:
        return price_single_dividend(asset, t, xi, method="quad")
    return p_tT * sums[n] / (sums[n - 1] * math.sqrt(aux.A))


def price_call_bridge_measure(asset: SingleDividendAsset, strike: float,
                              expiry: float) -> float:
    """Call on the single-dividend asset via the Gaussian-information route.

        C_0 = P_0T int x p(x) N(sigma x sqrt(tau) - z*) dx
              - P_0t K int p(x) N(sigma x sqrt(tau) - z*) dx,

    tau = t T/(T-t) and z* = xi* sqrt(T/(t(T-t))) with xi* the critical
    information value found by bisection on the increasing price map.
    """
    spec = asset.spec
    if not (0.0 < expiry < spec.horizon):
        raise InvalidInputError("expiry must lie strictly inside (0, T)")
    T = spec.horizon
    p_0t = asset.curve.df(expiry)
    p_0T = asset.curve.df(T)
    p_tT = asset.curve.forward(expiry, T)
    if spec.sigma == 0.0:
        return p_0t * max(p_tT * asset.prior.mean() - strike, 0.0)

    def price_gap(x):
        return p_tT * conditional_density(asset.prior, spec, expiry, float(x)).mean() \
            - strike

    scale = math.sqrt(expiry * (T - expiry) / T)
    lo, hi = -50.0 * scale, 50.0 * scale
    f_lo, f_hi = price_gap(lo), price_gap(hi)
    while f_lo > 0.0 or f_hi < 0.0:
        lo *= 2.0
        hi *= 2.0
        if hi > 1e9 * scale:
            if f_lo > 0.0:
                return p_0T * asset.prior.mean() - p_0t * strike
            return 0.0
        f_lo, f_hi = price_gap(lo), price_gap(hi)
    while hi - lo > 1e-13 * max(1.0, scale):
        mid = 0.5 * (lo + hi)
        if price_gap(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    xi_star = 0.5 * (lo + hi)
    z_star = xi_star * math.sqrt(T / (expiry * (T - expiry)))
    sqrt_tau = math.sqrt(expiry * T / (T - expiry))

    prior = asset.prior
    m = prior.mean()
    s = math.sqrt(prior.var())
    z_lo = max(prior.support[0], m - 14.0 * s)
    z_hi = min(prior.support[1], m + 50.0 * s)

    def weight(x):
        return norm_cdf(spec.sigma * x * sqrt_tau - z_star)

    i_asset, _ = quad(lambda x: x * prior.pdf(x) * weight(x), z_lo, z_hi,
                      epsabs=1e-14, epsrel=1e-10, limit=500)
    i_strike, _ = quad(lambda x: prior.pdf(x) * weight(x), z_lo, z_hi,
                       epsabs=1e-14, epsrel=1e-10, limit=500)
    return p_0T * float(i_asset) - p_0t * strike * float(i_strike)


def asset_dynamics_coeffs(asset: SingleDividendAsset, t: float,
                          xi: float) -> tuple[float, float]:
    """(drift, absolute volatility) of the price at (t, xi).

    drift = r_t S_t; the volatility is Gamma_tT = P_tT sigma T/(T-t) V_t
    with V_t the posterior dividend variance, and equals dS/dxi exactly.
    """
    spec = asset.spec
    spec.check_time(t)
    post = conditional_density(asset.prior, spec, t, xi)
    p_tT = asset.curve.forward(t, spec.horizon)
    s_t = p_tT * post.mean()
    gamma = p_tT * spec.sigma * spec.horizon / (spec.horizon - t) * post.var()
    return asset.curve.short_rate(t) * s_t, gamma


def bs_recovery_price(s0: float, r: float, nu: float, horizon: float,
                      sigma: float, t: float, xi: float) -> tuple[float, float]:
    """Price and deterministic volatility of the log-normal terminal-value asset.

    The terminal value S_T = S_0 exp(rT - nu^2 T/2 + nu sqrt(T) X) with a
    standard-normal factor gives

        S_t = P_tT S_0 exp[ rT - nu^2 T/2 + nu^2 T/(2(sigma^2 tau + 1))
                            + nu sqrt(T) sigma T xi / ((T-t)(sigma^2 tau + 1)) ],

    tau = t T/(T-t), and instantaneous volatility
    nu sigma T^(3/2) / (T + (sigma^2 T - 1) t).  When sigma^2 T = 1 the
    volatility is the constant nu and the price is geometric Brownian
    motion: S_t = S_0 exp(rt + nu xi_t - nu^2 t/2).
    """
    if horizon <= 0.0 or t < 0.0 or t >= horizon:
        raise InvalidInputError("need 0 <= t < T")
    tau = t * horizon / (horizon - t)
    denom = sigma ** 2 * tau + 1.0
    coef_xi = nu * math.sqrt(horizon) * sigma * horizon / ((horizon - t) * denom)
    log_s = (r * horizon - 0.5 * nu ** 2 * horizon
             + 0.5 * nu ** 2 * horizon / denom + coef_xi * xi)
    p_tT = math.exp(-r * (horizon - t))
    price = p_tT * s0 * math.exp(log_s)
    vol = nu * sigma * horizon ** 1.5 / (horizon + (sigma ** 2 * horizon - 1.0) * t)
    return price, vol
