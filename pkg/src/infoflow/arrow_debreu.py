"""Arrow-Debreu densities of the information value, and pricing by quadrature.

The time-t information value xi_t has an explicit density: a Gaussian
mixture over the factor outcomes (discrete case) or a Gaussian-smoothed
prior (continuous case).  Discounting that density gives the price system
A_0t(x) against which any payoff written on xi_t is priced by integration.
Delta-function payoffs are never represented directly; the API exposes the
integrated densities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .curves import DiscountCurve
from .errors import DivergenceError, InvalidInputError
from .processes import (
    ContinuousDensity,
    DiscretePayoff,
    GammaTiltPosterior,
    GaussianPosterior,
    InformationProcessSpec,
    TabulatedDensity,
    conditional_density,
    norm_cdf,
    norm_pdf,
)

__all__ = [
    "ADensity",
    "ad_density",
    "price_info_derivative",
    "price_continuous_call_via_ad",
    "bivariate_ad_density",
    "BivariateADensity",
]

QUAD_REL_TOL = 1e-10


@dataclass(frozen=True)
class ADensity:
    """Discounted density x -> A_0t(x) of the information value.

    ``undiscounted`` integrates to one; ``discounted`` to P_0t.
    """

    t: float
    spec: InformationProcessSpec
    factor: DiscretePayoff | ContinuousDensity
    discount: float
    _undiscounted: Callable[[np.ndarray], np.ndarray]
    #: means of the mixture components (or effective signal range) and the
    #: common bridge std, used to truncate integrals.
    signal_range: tuple[float, float]
    bridge_std: float

    def undiscounted(self, x):
        return self._undiscounted(np.asarray(x, dtype=float))

    def discounted(self, x):
        return self.discount * self.undiscounted(x)

    def __call__(self, x):
        return self.discounted(x)

    def integration_range(self, n_std: float = 12.0) -> tuple[float, float]:
        lo, hi = self.signal_range
        return lo - n_std * self.bridge_std, hi + n_std * self.bridge_std


def ad_density(spec: InformationProcessSpec,
               factor: DiscretePayoff | ContinuousDensity,
               t: float, curve: DiscountCurve) -> ADensity:
    """Density of xi_t, discounted by P_0t.

    Discrete factor:  sum_j p_j Normal(x; sigma h_j t, t(T-t)/T).
    Continuous factor: the same location mixture against the prior, which
    equals Normal(x; 0, v) times the posterior normalizing integral.
    """
    spec.check_time(t)
    if t <= 0.0:
        raise InvalidInputError("the information density needs t > 0")
    T = spec.horizon
    v = t * (T - t) / T
    sd = math.sqrt(v)

    if isinstance(factor, DiscretePayoff):
        means = spec.sigma * factor.levels * t
        probs = factor.probs

        def undisc(x):
            z = (x[..., None] - means) / sd
            return (probs * norm_pdf(z)).sum(axis=-1) / sd

        signal_range = (float(means.min()), float(means.max()))
    elif isinstance(factor, TabulatedDensity):
        grid = factor.grid
        w = factor.weights
        means = spec.sigma * grid * t

        def undisc(x):
            z = (x[..., None] - means) / sd
            return np.trapezoid(w * norm_pdf(z) / sd, grid, axis=-1)

        signal_range = (float(means.min()), float(means.max()))
    elif isinstance(factor, ContinuousDensity):
        log_norm_const = -0.5 * math.log(2.0 * math.pi * v)

        def undisc(x):
            x = np.atleast_1d(np.asarray(x, dtype=float))
            out = np.empty(x.shape)
            for i, xi in enumerate(x):
                post = conditional_density(factor, spec, t, float(xi))
                log_a = (log_norm_const - 0.5 * xi * xi / v
                         + post.log_normalizer())
                out[i] = math.exp(log_a)
            return out if out.size > 1 else out[0]

        m = factor.mean()
        s = math.sqrt(factor.var())
        lo_z = max(factor.support[0], m - 12.0 * s)
        hi_z = min(factor.support[1], m + 40.0 * s)
        signal_range = (spec.sigma * lo_z * t, spec.sigma * hi_z * t)
    else:
        raise InvalidInputError(f"unsupported factor type {type(factor).__name__}")

    return ADensity(
        t=t, spec=spec, factor=factor, discount=curve.df(t),
        _undiscounted=undisc, signal_range=signal_range, bridge_std=sd,
    )


def price_info_derivative(ad: ADensity, payoff: Callable[[float], float],
                          rel_tol: float = 1e-9) -> float:
    """V_0 = integral of A_0t(x) g(x) dx for a payoff g written on xi_t.

    Adaptive quadrature over the mixture support, truncated 12 bridge
    standard deviations beyond the extreme signal means.
    """
    lo, hi = ad.integration_range()
    val, err = quad(lambda x: ad.undiscounted(x) * payoff(x), lo, hi,
                    epsabs=1e-14, epsrel=min(rel_tol, QUAD_REL_TOL), limit=500)
    if not math.isfinite(val):
        raise DivergenceError("information-derivative integral diverged")
    return ad.discount * float(val)


def _critical_signal(density: ContinuousDensity, spec: InformationProcessSpec,
                     t: float, strike: float, p_tT: float):
    """Critical x* with P_tT E[X | xi_t = x*] = K on the increasing price map.

    Returns None when the strike is unattainable; the caller maps that to
    the analytic boundary value.
    """
    def price_gap(x):
        post = conditional_density(density, spec, t, float(x))
        return p_tT * post.mean() - strike

    scale = math.sqrt(t * (spec.horizon - t) / spec.horizon)
    lo, hi = -50.0 * scale, 50.0 * scale
    f_lo, f_hi = price_gap(lo), price_gap(hi)
    while f_lo > 0.0 or f_hi < 0.0:
        lo *= 2.0
        hi *= 2.0
        if hi > 1e9 * scale:
            return None if f_lo > 0.0 else math.inf
        f_lo, f_hi = price_gap(lo), price_gap(hi)
    while hi - lo > 1e-13 * max(1.0, scale):
        mid = 0.5 * (lo + hi)
        if price_gap(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def price_continuous_call_via_ad(density: ContinuousDensity,
                                 spec: InformationProcessSpec,
                                 curve: DiscountCurve,
                                 strike: float, expiry: float) -> float:
    """Call on a single-dividend asset, priced through the A-density route.

        C_0 = P_0t [ P_tT int z p(z) N(-nu*(z)) dz - K int p(z) N(-nu*(z)) dz ],
        nu*(z) = (x* - sigma z t) / sqrt(t(T-t)/T),

    with x* the critical information value.  Unattainable strikes return
    the boundary values S_0 - P_0t K (sure exercise) or 0.
    """
    if not (0.0 < expiry < spec.horizon):
        raise InvalidInputError("expiry must lie strictly inside (0, T)")
    T = spec.horizon
    p_0t = curve.df(expiry)
    p_tT = curve.forward(expiry, T)
    s0 = curve.df(T) * density.mean()
    if spec.sigma == 0.0:
        return p_0t * max(p_tT * density.mean() - strike, 0.0)
    x_star = _critical_signal(density, spec, expiry, strike, p_tT)
    if x_star is None:
        return s0 - p_0t * strike
    if x_star == math.inf:
        return 0.0
    root_v = math.sqrt(expiry * (T - expiry) / T)

    def weight(z):
        nu = (x_star - spec.sigma * z * expiry) / root_v
        return norm_cdf(-nu)

    m = density.mean()
    s = math.sqrt(density.var())
    lo = max(density.support[0], m - 14.0 * s)
    hi = min(density.support[1], m + 50.0 * s)
    i_asset, _ = quad(lambda z: z * density.pdf(z) * weight(z), lo, hi,
                      epsabs=1e-14, epsrel=QUAD_REL_TOL, limit=500)
    i_strike, _ = quad(lambda z: density.pdf(z) * weight(z), lo, hi,
                       epsabs=1e-14, epsrel=QUAD_REL_TOL, limit=500)
    return p_0t * (p_tT * float(i_asset) - strike * float(i_strike))


class BivariateADensity:
    """Joint density of (xi_t1, xi_t2) for a discrete factor.

    A(x1, x2) = Normal(x1; (t1/t2) x2, t1(t2-t1)/t2)
                * sum_j p_j Normal(x2; sigma h_j t2, t2(T-t2)/T).

    The x1 factor is a normalized Gaussian, so marginalizing over x1
    recovers the univariate undiscounted density at t2.
    """

    def __init__(self, spec: InformationProcessSpec, payoff: DiscretePayoff,
                 t1: float, t2: float):
        if t1 > t2:
            raise InvalidInputError("need t1 <= t2")
        if t1 == t2:
            raise InvalidInputError(
                "t1 == t2 degenerates to a one-dimensional density; use ad_density")
        if t1 <= 0.0:
            raise InvalidInputError("need t1 > 0")
        spec.check_time(t2)
        self.spec = spec
        self.payoff = payoff
        self.t1 = t1
        self.t2 = t2
        T = spec.horizon
        self.var1 = t1 * (t2 - t1) / t2
        self.var2 = t2 * (T - t2) / T
        self.means2 = spec.sigma * payoff.levels * t2

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        g1 = norm_pdf((x1 - (self.t1 / self.t2) * x2) / math.sqrt(self.var1)) \
            / math.sqrt(self.var1)
        z2 = (x2[..., None] - self.means2) / math.sqrt(self.var2)
        g2 = (self.payoff.probs * norm_pdf(z2)).sum(axis=-1) / math.sqrt(self.var2)
        return g1 * g2

    def marginal_t2(self, x2):
        """Integral over x1: the univariate undiscounted density at t2."""
        x2 = np.asarray(x2, dtype=float)
        z2 = (x2[..., None] - self.means2) / math.sqrt(self.var2)
        return (self.payoff.probs * norm_pdf(z2)).sum(axis=-1) / math.sqrt(self.var2)

    def integration_range(self, n_std: float = 12.0):
        lo2 = self.means2.min() - n_std * math.sqrt(self.var2)
        hi2 = self.means2.max() + n_std * math.sqrt(self.var2)
        r = self.t1 / self.t2
        lo1 = min(r * lo2, r * hi2) - n_std * math.sqrt(self.var1)
        hi1 = max(r * lo2, r * hi2) + n_std * math.sqrt(self.var1)
        return (lo1, hi1), (lo2, hi2)


def bivariate_ad_density(spec: InformationProcessSpec, payoff: DiscretePayoff,
                         t1: float, t2: float) -> BivariateADensity:
    """Closed-form joint density of the information value at two times."""
    return BivariateADensity(spec, payoff, t1, t2)
