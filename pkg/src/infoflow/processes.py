"""Brownian-bridge information processes and Bayesian filtering.

The market sees a single scalar signal per factor,

    xi_t = sigma * X * t + beta_tT,

where X is the factor value revealed at the horizon T and beta_tT is an
independent Brownian bridge pinned to zero at 0 and T.  Everything else in
the library is built on the posterior law of X given xi_t, which this
module computes in closed form (discrete spectra, exponential / gamma /
Gaussian priors) or by adaptive quadrature (tabulated priors).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln, ndtr

from .errors import (
    MATURITY_EPS_FRACTION,
    DivergenceError,
    InvalidInputError,
    MaturityError,
)

__all__ = [
    "TimeGrid",
    "DiscretePayoff",
    "ContinuousDensity",
    "ExponentialDensity",
    "GammaDensity",
    "GaussianDensity",
    "TabulatedDensity",
    "InformationProcessSpec",
    "PathSample",
    "norm_cdf",
    "norm_pdf",
    "stream_generator",
    "sample_brownian_bridge",
    "sample_information_path",
    "conditional_probs",
    "conditional_density",
    "innovations_path",
]

#: Default relative tolerance for adaptive quadrature.
QUAD_REL_TOL = 1e-10
#: Posterior integrals are truncated at mode + this many posterior stds.
QUAD_TRUNCATION_STDS = 12.0
#: Dynamic-range guard for the Gaussian-tail binomial sums.
CANCELLATION_GUARD = 1e12


def norm_cdf(x):
    """Standard normal CDF, |error| <= 1e-15 on |x| <= 8 (erfc-based)."""
    return ndtr(x)


def norm_pdf(x):
    return np.exp(-0.5 * np.asarray(x) ** 2) / math.sqrt(2.0 * math.pi)


def stream_generator(seed: int, *key: int) -> np.random.Generator:
    """Counter-based splittable stream (seed, *key).

    Streams with distinct keys are statistically independent and
    reproducible in any order, so per-path parallel simulation stays
    deterministic.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing times in years, starting at 0, within [0, horizon]."""

    points: np.ndarray
    horizon: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        if pts.size == 0:
            raise InvalidInputError("time grid must contain at least one point")
        if pts[0] != 0.0:
            raise InvalidInputError("time grid must start at t = 0")
        if np.any(np.diff(pts) <= 0.0):
            raise InvalidInputError("time grid points must be strictly increasing")
        if self.horizon <= 0.0:
            raise InvalidInputError("horizon must be positive")
        if pts[-1] > self.horizon * (1.0 + 1e-12):
            raise InvalidInputError("time grid exceeds the horizon")

    @classmethod
    def regular(cls, horizon: float, steps_per_year: int = 250,
                t_end: float | None = None) -> "TimeGrid":
        """Uniform grid on [0, t_end] (default t_end = horizon) at daily-type resolution."""
        t_end = horizon if t_end is None else t_end
        n = max(1, int(round(steps_per_year * t_end)))
        return cls(np.linspace(0.0, t_end, n + 1), horizon)

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class DiscretePayoff:
    """Payoff spectrum h_0 < h_1 < ... < h_n with a-priori probabilities p_i."""

    levels: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        if levels.shape != probs.shape or levels.ndim != 1 or levels.size < 1:
            raise InvalidInputError("levels and probs must be 1-d arrays of equal length")
        if np.any(np.diff(levels) <= 0.0):
            raise InvalidInputError("payoff levels must be strictly increasing")
        if np.any(probs <= 0.0):
            raise InvalidInputError("payoff probabilities must be strictly positive")
        total = probs.sum()
        if abs(total - 1.0) > 1e-9:
            raise InvalidInputError("payoff probabilities must sum to 1")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "probs", probs / total)

    @property
    def is_binary(self) -> bool:
        return self.levels.size == 2

    def mean(self) -> float:
        return float(self.probs @ self.levels)

    def var(self) -> float:
        m = self.mean()
        return float(self.probs @ (self.levels - m) ** 2)

    def sample(self, rng: np.random.Generator, size: int | None = None):
        idx = rng.choice(self.levels.size, size=size, p=self.probs)
        return self.levels[idx]


class ContinuousDensity:
    """A-priori density of a continuous factor.  Subclasses are parametric."""

    support: tuple[float, float] = (0.0, math.inf)

    def pdf(self, x):  # pragma: no cover - interface
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def var(self) -> float:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError


@dataclass(frozen=True)
class ExponentialDensity(ContinuousDensity):
    """p(x) = (1/delta) exp(-x/delta) on [0, inf); mean delta."""

    delta: float

    def __post_init__(self):
        if self.delta <= 0.0:
            raise InvalidInputError("exponential scale delta must be positive")

    support = (0.0, math.inf)

    @property
    def rate(self) -> float:
        return 1.0 / self.delta

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0.0, np.exp(-x / self.delta) / self.delta, 0.0)

    def mean(self):
        return self.delta

    def var(self):
        return self.delta ** 2

    def sample(self, rng, size=None):
        return rng.exponential(self.delta, size=size)


@dataclass(frozen=True)
class GammaDensity(ContinuousDensity):
    """p(x) = delta^n/(n-1)! x^{n-1} exp(-delta x); integer shape n >= 1."""

    delta: float
    n: int

    def __post_init__(self):
        if self.delta <= 0.0:
            raise InvalidInputError("gamma rate delta must be positive")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidInputError("gamma shape n must be a positive integer")

    support = (0.0, math.inf)

    @property
    def rate(self) -> float:
        return self.delta

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        logp = (self.n * math.log(self.delta) - gammaln(self.n)
                + (self.n - 1) * np.log(np.where(x > 0, x, 1.0)) - self.delta * x)
        out = np.exp(logp)
        if self.n > 1:
            out = np.where(x > 0.0, out, 0.0)
        else:
            out = np.where(x >= 0.0, out, 0.0)
        return out

    def mean(self):
        return self.n / self.delta

    def var(self):
        return self.n / self.delta ** 2

    def sample(self, rng, size=None):
        return rng.gamma(self.n, 1.0 / self.delta, size=size)


@dataclass(frozen=True)
class GaussianDensity(ContinuousDensity):
    mean_: float
    var_: float

    def __post_init__(self):
        if self.var_ <= 0.0:
            raise InvalidInputError("gaussian variance must be positive")

    support = (-math.inf, math.inf)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * (x - self.mean_) ** 2 / self.var_) / math.sqrt(2 * math.pi * self.var_)

    def mean(self):
        return self.mean_

    def var(self):
        return self.var_

    def sample(self, rng, size=None):
        return rng.normal(self.mean_, math.sqrt(self.var_), size=size)


@dataclass(frozen=True)
class TabulatedDensity(ContinuousDensity):
    """Density sampled on a compact grid; trapezoid-normalized on input."""

    grid: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or grid.shape != w.shape:
            raise InvalidInputError("tabulated density needs matching 1-d grid and weights")
        if np.any(np.diff(grid) <= 0.0):
            raise InvalidInputError("tabulated grid must be strictly increasing")
        if np.any(w < 0.0) or w.max() <= 0.0:
            raise InvalidInputError("tabulated weights must be nonnegative, not all zero")
        total = np.trapezoid(w, grid)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "weights", w / total)

    @property
    def support(self):
        return (float(self.grid[0]), float(self.grid[-1]))

    def pdf(self, x):
        return np.interp(np.asarray(x, dtype=float), self.grid, self.weights,
                         left=0.0, right=0.0)

    def mean(self):
        return float(np.trapezoid(self.grid * self.weights, self.grid))

    def var(self):
        m = self.mean()
        return float(np.trapezoid((self.grid - m) ** 2 * self.weights, self.grid))

    def sample(self, rng, size=None):
        cdf = np.concatenate([[0.0], np.cumsum(
            0.5 * (self.weights[1:] + self.weights[:-1]) * np.diff(self.grid))])
        cdf /= cdf[-1]
        u = rng.random(size=size)
        return np.interp(u, cdf, self.grid)


@dataclass(frozen=True)
class InformationProcessSpec:
    """Information flow rate, horizon, and the factor being revealed.

    sigma carries units 1/(value*year) so that sigma * X * t is comparable
    to the dimensionless bridge.  sigma = 0 (pure noise) is permitted.
    """

    sigma: float
    horizon: float
    factor: DiscretePayoff | ContinuousDensity | None = None

    def __post_init__(self):
        if self.sigma < 0.0:
            raise InvalidInputError("information flow rate must be nonnegative")
        if self.horizon <= 0.0:
            raise InvalidInputError("horizon must be positive")

    def check_time(self, t: float) -> None:
        """Reject conditional evaluation within eps of the horizon."""
        if t < 0.0:
            raise InvalidInputError("time must be nonnegative")
        if t > self.horizon * (1.0 - MATURITY_EPS_FRACTION):
            raise MaturityError(
                f"t = {t} is within {MATURITY_EPS_FRACTION:g} * T of the horizon "
                f"T = {self.horizon}; the T/(T-t) factor is singular there")

    def bridge_var(self, t: float) -> float:
        """Var[beta_tT] = t(T-t)/T."""
        return t * (self.horizon - t) / self.horizon


@dataclass(frozen=True)
class PathSample:
    """A sampled path on a grid, optionally tagged with the factor draw."""

    grid: TimeGrid
    values: np.ndarray
    terminal_value: float | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.points.shape:
            raise InvalidInputError("path values must match the grid length")
        object.__setattr__(self, "values", values)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def sample_brownian_bridge(grid: TimeGrid, rng_seed: int, *,
                           rng: np.random.Generator | None = None) -> PathSample:
    """Exact draw of a standard Brownian bridge over [0, T] at the grid times.

    Uses beta_tT = B_t - (t/T) B_T with exact Gaussian increments of B (no
    Euler error); endpoints are exactly zero.  Deterministic given seed and
    grid.
    """
    gen = rng if rng is not None else stream_generator(rng_seed, 1)
    t = grid.points
    T = grid.horizon
    # Brownian increments over the grid, plus a final leg to T if needed.
    dts = np.diff(t)
    b = np.zeros(len(t))
    if dts.size:
        b[1:] = np.cumsum(gen.standard_normal(dts.size) * np.sqrt(dts))
    if t[-1] < T:
        b_T = b[-1] + gen.standard_normal() * math.sqrt(T - t[-1])
    else:
        b_T = b[-1]
    values = b - (t / T) * b_T
    values[0] = 0.0
    if t[-1] >= T:
        values[-1] = 0.0
    return PathSample(grid=grid, values=values)


def sample_information_path(spec: InformationProcessSpec, grid: TimeGrid,
                            rng_seed: int, *, path_index: int = 0,
                            conditioned_value: float | None = None) -> PathSample:
    """Sample xi_t = sigma * X * t + beta_tT along the grid.

    The factor draw and the bridge use decorrelated sub-streams
    (seed, path_index, 0) and (seed, path_index, 1), so paths are
    reproducible and order-independent under parallel generation.
    ``conditioned_value`` forces the factor outcome (scenario-conditioned
    simulation) while consuming the same stream layout.
    """
    if spec.factor is None and conditioned_value is None:
        raise InvalidInputError("spec.factor is required to draw the terminal value")
    if conditioned_value is None:
        factor_rng = stream_generator(rng_seed, path_index, 0)
        x = float(spec.factor.sample(factor_rng))
    else:
        x = float(conditioned_value)
    bridge_rng = stream_generator(rng_seed, path_index, 1)
    bridge = sample_brownian_bridge(grid, rng_seed, rng=bridge_rng)
    values = spec.sigma * x * grid.points + bridge.values
    return PathSample(grid=grid, values=values, terminal_value=x)


# ---------------------------------------------------------------------------
# Filtering: discrete factor
# ---------------------------------------------------------------------------

def _log_weights(levels, probs, spec, t, xi):
    a = spec.horizon / (spec.horizon - t)
    return np.log(probs) + a * (spec.sigma * levels * xi
                                - 0.5 * spec.sigma ** 2 * levels ** 2 * t)


def conditional_probs(payoff: DiscretePayoff, spec: InformationProcessSpec,
                      t: float, xi: float) -> np.ndarray:
    """Posterior probabilities of the payoff levels given xi_t = xi.

    pi_i ~ p_i exp[ T/(T-t) (sigma h_i xi - 0.5 sigma^2 h_i^2 t) ],
    evaluated in log space (max exponent subtracted) so the output is a
    valid probability vector for any finite xi.
    """
    spec.check_time(t)
    if t == 0.0 or spec.sigma == 0.0:
        return payoff.probs.copy()
    logw = _log_weights(payoff.levels, payoff.probs, spec, t, xi)
    logw -= logw.max()
    w = np.exp(logw)
    return w / w.sum()


def discrete_conditional_moments(payoff: DiscretePayoff, probs: np.ndarray):
    """(mean, variance, third central moment) of the payoff under probs."""
    h = payoff.levels
    m = float(probs @ h)
    d = h - m
    return m, float(probs @ d ** 2), float(probs @ d ** 3)


# ---------------------------------------------------------------------------
# Filtering: continuous factor
# ---------------------------------------------------------------------------

class PosteriorDensity:
    """Posterior law of a continuous factor given xi_t = xi.

    pi_t(x) ~ p(x) exp[ T/(T-t)(sigma x xi - 0.5 sigma^2 x^2 t) ].

    Subclasses provide closed-form moments; ``moment(r, method="quad")``
    gives the independent adaptive-quadrature route.
    """

    prior: ContinuousDensity
    #: Gaussian tilt: exponent is B x - 0.5 A x^2 relative to the prior's
    #: own exponential part, see subclasses.
    A: float
    B: float

    def pdf(self, x):
        raise NotImplementedError

    def mean(self) -> float:
        return self.moment(1)

    def var(self) -> float:
        m = self.mean()
        return max(self.moment(2) - m * m, 0.0)

    def moment(self, r: int, method: str = "closed") -> float:
        raise NotImplementedError

    def log_normalizer(self) -> float:
        """log integral of p(x) exp[T/(T-t)(sigma x xi - 0.5 sigma^2 x^2 t)] dx."""
        raise NotImplementedError

    def expect(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        """E[f(X) | xi] by adaptive quadrature against the posterior pdf."""
        lo, hi = self._quad_range()
        val, _ = quad(lambda x: f(x) * self.pdf(x), lo, hi,
                      epsabs=1e-14, epsrel=QUAD_REL_TOL, limit=400)
        return float(val)

    def _quad_range(self, widen: float = 0.0) -> tuple[float, float]:
        lo, hi = self.prior.support
        m, s = self._mode_and_std()
        lo = max(lo, m - (QUAD_TRUNCATION_STDS + widen) * s)
        hi = min(hi, m + (QUAD_TRUNCATION_STDS + widen) * s)
        return lo, hi

    def _mode_and_std(self) -> tuple[float, float]:
        raise NotImplementedError

    def _moment_quad(self, r: int) -> float:
        # Widen the truncation with the moment order: x^r shifts mass right.
        lo, hi = self._quad_range(widen=3.0 * r)
        val, _ = quad(lambda x: x ** r * self.pdf(x), lo, hi,
                      epsabs=1e-14, epsrel=QUAD_REL_TOL, limit=400)
        return float(val)


def gaussian_tail_powers(y: float, k_max: int) -> np.ndarray:
    """F_k(y) = int_y^inf z^k exp(-z^2/2) dz for k = 0..k_max.

    Upward recursion F_{k+2} = (k+1) F_k + y^{k+1} exp(-y^2/2) from
    F_0 = sqrt(2 pi) N(-y), F_1 = exp(-y^2/2).
    """
    e = math.exp(-0.5 * y * y)
    out = np.empty(k_max + 1)
    out[0] = math.sqrt(2.0 * math.pi) * float(norm_cdf(-y))
    if k_max >= 1:
        out[1] = e
    yk = y  # y^{k+1} running power
    for k in range(k_max - 1):
        out[k + 2] = (k + 1) * out[k] + yk * e
        yk *= y
    return out


def _shifted_tail_moment(m: int, y: float, fk: np.ndarray) -> tuple[float, float]:
    """S_m(y) = int_y^inf (z-y)^m exp(-z^2/2) dz via the binomial expansion.

    Returns (value, max |term|) so callers can detect catastrophic
    cancellation for y > 0 of moderate size.
    """
    ks = np.arange(m + 1)
    terms = np.array([math.comb(m, k) for k in ks], dtype=float) \
        * (-y) ** (m - ks) * fk[: m + 1]
    return float(terms.sum()), float(np.abs(terms).max()) if m >= 0 else 0.0


class GammaTiltPosterior(PosteriorDensity):
    """Posterior for exponential/gamma priors: pi(x) ~ x^m exp(Bx - 0.5 A x^2).

    m = shape - 1, A = sigma^2 t T/(T-t), B = sigma T xi/(T-t) - rate.
    Covers the exponential prior as the m = 0 case.
    """

    def __init__(self, prior, m: int, A: float, B: float):
        self.prior = prior
        self.m = int(m)
        self.A = float(A)
        self.B = float(B)
        if self.A == 0.0 and self.B >= 0.0:
            raise DivergenceError(
                "posterior normalization diverges: zero curvature and "
                f"nonnegative linear coefficient B = {self.B}")
        self._fk_cache: dict[int, np.ndarray] = {}

    # -- helpers ---------------------------------------------------------
    def _fk(self, k_max):
        cached = self._fk_cache.get(k_max)
        if cached is None:
            y = -self.B / math.sqrt(self.A)
            cached = gaussian_tail_powers(y, k_max)
            self._fk_cache[k_max] = cached
        return cached

    def _s(self, order: int) -> tuple[float, float]:
        y = -self.B / math.sqrt(self.A)
        fk = self._fk(order)
        return _shifted_tail_moment(order, y, fk)

    def _far_tail(self) -> bool:
        # B very negative relative to sqrt(A): the Gaussian tail integral
        # underflows and the posterior is exponential-dominated.
        return self.A > 0.0 and self.B < 0.0 and -self.B / math.sqrt(self.A) > 36.0

    def _gamma_asymptotic_moment(self, r: int) -> float:
        # Posterior ~ gamma(m+1, -B) with a second-order curvature
        # correction; relative error O((A/B^2)^2) <= 1e-6 in this regime.
        rate = -self.B
        n0 = self.m + 1
        val = 1.0
        for j in range(r):
            val *= (n0 + j) / rate
        if self.A > 0.0 and r > 0:
            kappa = ((n0 + r) * (n0 + r + 1) - n0 * (n0 + 1)) / rate ** 2
            val *= 1.0 - 0.5 * self.A * kappa
        return val

    def moment(self, r: int, method: str = "closed") -> float:
        if method == "quad":
            return self._moment_quad(r)
        if self.A == 0.0 or self._far_tail():
            return self._gamma_asymptotic_moment(r)
        s_den, g_den = self._s(self.m)
        s_num, g_num = self._s(self.m + r)
        if s_den <= 0.0 or s_num <= 0.0:
            return self._gamma_asymptotic_moment(r) if self.B < 0.0 \
                else self._moment_quad(r)
        guard = max(g_den / abs(s_den), g_num / abs(s_num))
        if not np.isfinite(s_num) or not np.isfinite(s_den) or guard > CANCELLATION_GUARD:
            return self._moment_quad(r)
        return self.A ** (-0.5 * r) * s_num / s_den

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        logz = self.log_normalizer()
        tilt = self.B * x - 0.5 * self.A * x * x
        if self.m == 0:
            logp = np.where(x >= 0.0, tilt, -np.inf)
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                logp = np.where(x > 0.0,
                                self.m * np.log(np.where(x > 0, x, 1.0)) + tilt,
                                -np.inf)
        return np.exp(self._prior_lognorm() + logp - logz)

    def _prior_lognorm(self):
        n = self.m + 1
        rate = self.prior.rate
        return n * math.log(rate) - gammaln(n)

    def log_normalizer(self):
        """log int p(x) exp(tilt) dx including the prior's normalization."""
        if self.A == 0.0 or self._far_tail():
            rate = -self.B
            n0 = self.m + 1
            base = self._prior_lognorm() + gammaln(n0) - n0 * math.log(rate)
            if self.A > 0.0:
                base += math.log1p(-0.5 * self.A * n0 * (n0 + 1) / rate ** 2)
            return base
        s, _ = self._s(self.m)
        if s <= 0.0:
            raise DivergenceError("posterior normalizer is nonpositive (cancellation)")
        return (self._prior_lognorm() + 0.5 * self.B ** 2 / self.A
                - 0.5 * math.log(self.A) - 0.5 * self.m * math.log(self.A) + math.log(s))

    def _mode_and_std(self):
        # Laplace estimates only; must not call moment() (quad fallback
        # routes back through here).
        if self.A == 0.0:
            rate = -self.B
            return (self.m + 1) / rate, math.sqrt(self.m + 1) / rate
        mode = (self.B + math.sqrt(self.B ** 2 + 4.0 * self.A * self.m)) / (2.0 * self.A)
        mode = max(mode, 0.0)
        if self.m > 0 and mode > 0.0:
            std = 1.0 / math.sqrt(self.A + self.m / mode ** 2)
        else:
            std = 1.0 / math.sqrt(self.A)
            if self.B < 0.0:
                std = min(std, 1.0 / (-self.B))
        return mode, std

    def _quad_range(self, widen: float = 0.0):
        mode, std = self._mode_and_std()
        hi = mode + (QUAD_TRUNCATION_STDS + widen) * std
        if self.A > 0.0:
            hi = max(hi, self.B / self.A + (QUAD_TRUNCATION_STDS + widen) / math.sqrt(self.A))
        if self.B < 0.0:
            # Exponential-decay direction needs a wider margin than a
            # Gaussian one for the same tolerance.
            hi = max(hi, mode + (40.0 + 6.0 * widen) * (self.m + 1) / (-self.B))
        return 0.0, hi


class GaussianPosterior(PosteriorDensity):
    """Conjugate case: Gaussian prior stays Gaussian after the tilt."""

    def __init__(self, prior: GaussianDensity, A: float, B_raw: float):
        # B_raw = sigma T xi/(T-t) (the prior's quadratic handled here).
        self.prior = prior
        self.A = float(A)
        precision = 1.0 / prior.var_ + self.A
        self.post_var = 1.0 / precision
        self.post_mean = (prior.mean_ / prior.var_ + B_raw) * self.post_var
        self._B_raw = B_raw

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * (x - self.post_mean) ** 2 / self.post_var) \
            / math.sqrt(2 * math.pi * self.post_var)

    def moment(self, r: int, method: str = "closed") -> float:
        if method == "quad":
            return self._moment_quad(r)
        # E[X^r] for X ~ N(mu, v) by the standard recursion.
        mu, v = self.post_mean, self.post_var
        mom = [1.0, mu]
        for k in range(2, r + 1):
            mom.append(mu * mom[k - 1] + (k - 1) * v * mom[k - 2])
        return mom[r]

    def log_normalizer(self):
        m0, v0 = self.prior.mean_, self.prior.var_
        precision = 1.0 / v0 + self.A
        return (0.5 * self.post_mean ** 2 * precision - 0.5 * m0 ** 2 / v0
                - 0.5 * math.log(v0 * precision))

    def _mode_and_std(self):
        return self.post_mean, math.sqrt(self.post_var)


class TabulatedPosterior(PosteriorDensity):
    """Posterior on a compact tabulated grid; moments by trapezoid sums."""

    def __init__(self, prior: TabulatedDensity, A: float, B_raw: float):
        self.prior = prior
        self.A = float(A)
        x = prior.grid
        logw = np.where(prior.weights > 0, np.log(np.maximum(prior.weights, 1e-300)), -np.inf) \
            + B_raw * x - 0.5 * self.A * x * x
        logw -= logw.max()
        w = np.exp(logw)
        z = np.trapezoid(w, x)
        self.post_weights = w / z

    def pdf(self, x):
        return np.interp(np.asarray(x, dtype=float), self.prior.grid,
                         self.post_weights, left=0.0, right=0.0)

    def moment(self, r: int, method: str = "closed") -> float:
        x = self.prior.grid
        return float(np.trapezoid(x ** r * self.post_weights, x))

    def log_normalizer(self):
        raise NotImplementedError("tabulated posteriors track weights, not normalizers")

    def _mode_and_std(self):
        x = self.prior.grid
        return float(x[np.argmax(self.post_weights)]), max(math.sqrt(self.var()), 1e-12)

    def expect(self, f):
        x = self.prior.grid
        return float(np.trapezoid(f(x) * self.post_weights, x))


def conditional_density(density: ContinuousDensity, spec: InformationProcessSpec,
                        t: float, xi: float) -> PosteriorDensity:
    """Posterior evaluator for a continuous factor given xi_t = xi.

    Raises DivergenceError when the normalizing integral does not converge
    (possible only with zero Gaussian curvature, i.e. t = 0 with xi != 0).
    """
    spec.check_time(t)
    T = spec.horizon
    A = spec.sigma ** 2 * t * T / (T - t)
    B_raw = spec.sigma * T * xi / (T - t)
    if isinstance(density, ExponentialDensity):
        return GammaTiltPosterior(density, 0, A, B_raw - density.rate)
    if isinstance(density, GammaDensity):
        return GammaTiltPosterior(density, density.n - 1, A, B_raw - density.rate)
    if isinstance(density, GaussianDensity):
        return GaussianPosterior(density, A, B_raw)
    if isinstance(density, TabulatedDensity):
        return TabulatedPosterior(density, A, B_raw)
    raise InvalidInputError(f"unsupported prior family: {type(density).__name__}")


# ---------------------------------------------------------------------------
# Innovations
# ---------------------------------------------------------------------------

def innovations_path(spec: InformationProcessSpec, xi_path: PathSample,
                     payoff: DiscretePayoff) -> PathSample:
    """Brownian innovations recovered from an information path.

    W_t = xi_t + int_0^t xi_s/(T-s) ds - sigma T int_0^t H_s/(T-s) ds,
    with H_s the posterior payoff mean and trapezoidal integrals on the
    path's grid.  The grid must stay strictly inside [0, T).
    """
    t = xi_path.grid.points
    T = spec.horizon
    if t[-1] > T * (1.0 - MATURITY_EPS_FRACTION):
        raise MaturityError("innovations grid touches the horizon")
    xi = xi_path.values
    h_means = np.array([
        conditional_probs(payoff, spec, ti, xii) @ payoff.levels
        for ti, xii in zip(t, xi)
    ])
    integrand = xi / (T - t) - spec.sigma * T * h_means / (T - t)
    cum = np.concatenate([[0.0], np.cumsum(
        0.5 * (integrand[1:] + integrand[:-1]) * np.diff(t))])
    return PathSample(grid=xi_path.grid, values=xi + cum)
