"""Defaultable discount bonds with a discrete payoff spectrum.

Price, conditional moments, volatility structure, digital decomposition,
re-initialization (dynamic consistency), and path simulation.
"""
from __future__ import annotations

import concurrent.futures
import math
import os
from dataclasses import dataclass

import numpy as np

from .curves import DiscountCurve
from .errors import InvalidInputError, NoSolutionError
from .processes import (
    DiscretePayoff,
    InformationProcessSpec,
    PathSample,
    TimeGrid,
    conditional_probs,
    discrete_conditional_moments,
    sample_brownian_bridge,
    stream_generator,
)

__all__ = [
    "BondState",
    "price_bond",
    "implied_a_priori_probs",
    "digital_decomposition",
    "ReinitializedModel",
    "reinitialize",
    "information_timescale",
    "BondPathSimulation",
    "simulate_bond_paths",
]


@dataclass(frozen=True)
class BondState:
    """Bond price plus the conditional-moment diagnostics behind it.

    price    = P_tT * cond_mean
    abs_vol  = sigma T/(T-t) * P_tT * cond_var          (absolute volatility)
    vol_of_vol = (sigma T/(T-t))^2 * P_tT * cond_skew   (second-order vol)
    """

    t: float
    xi: float
    price: float
    cond_probs: np.ndarray
    cond_mean: float
    cond_var: float
    cond_skew: float
    abs_vol: float
    vol_of_vol: float


def price_bond(payoff: DiscretePayoff, spec: InformationProcessSpec,
               curve: DiscountCurve, t: float, xi: float) -> BondState:
    """Full state of a defaultable discount bond at (t, xi)."""
    probs = conditional_probs(payoff, spec, t, xi)
    mean, var, skew = discrete_conditional_moments(payoff, probs)
    p_tT = curve.forward(t, spec.horizon)
    gain = spec.sigma * spec.horizon / (spec.horizon - t)
    return BondState(
        t=t, xi=xi,
        price=p_tT * mean,
        cond_probs=probs,
        cond_mean=mean, cond_var=var, cond_skew=skew,
        abs_vol=gain * p_tT * var,
        vol_of_vol=gain ** 2 * p_tT * skew,
    )


def implied_a_priori_probs(bond_price: float, curve: DiscountCurve,
                           maturity: float, h0: float, h1: float) -> tuple[float, float]:
    """Invert the t = 0 binary bond price for (p0, p1).

    p0 = (h1 - B/P_0T)/(h1 - h0), p1 = (B/P_0T - h0)/(h1 - h0); requires
    the price to lie strictly inside (P_0T h0, P_0T h1).
    """
    if h1 <= h0:
        raise InvalidInputError("need h1 > h0")
    p0T = curve.df(maturity)
    ratio = bond_price / p0T
    if not (h0 < ratio < h1):
        raise NoSolutionError(
            f"bond price {bond_price} outside the open interval "
            f"({p0T * h0}, {p0T * h1}) spanned by the payoffs")
    p0 = (h1 - ratio) / (h1 - h0)
    p1 = (ratio - h0) / (h1 - h0)
    return p0, p1


def digital_decomposition(payoff: DiscretePayoff, spec: InformationProcessSpec,
                          curve: DiscountCurve, t: float, xi: float) -> tuple[float, float]:
    """Split a binary bond into guaranteed floor plus a digital at risk.

    Returns (digital price D_tT, reconstruction P_tT h0 + D_tT (h1-h0)).
    The digital is priced from its own renormalized information process
    with sigma_bar = sigma (h1 - h0); sharing the underlying scenario
    (same factor draw, same bridge) makes the digital information value
    xi_bar = xi - sigma h0 t for either outcome of the factor.
    """
    if not payoff.is_binary:
        raise InvalidInputError("digital decomposition is defined for binary payoffs")
    h0, h1 = payoff.levels
    sigma_bar = spec.sigma * (h1 - h0)
    xi_bar = xi - spec.sigma * h0 * t
    digital = DiscretePayoff(np.array([0.0, 1.0]), payoff.probs)
    digital_spec = InformationProcessSpec(sigma_bar, spec.horizon, digital)
    probs = conditional_probs(digital, digital_spec, t, xi_bar)
    p_tT = curve.forward(t, spec.horizon)
    d_tT = p_tT * probs[1]
    return d_tT, p_tT * h0 + d_tT * (h1 - h0)


@dataclass(frozen=True)
class ReinitializedModel:
    """Model restarted at time t0 with the posterior as the new prior.

    The restarted information process runs on [t0, T] with flow rate
    sigma_tilde = sigma T/(T - t0); in the shifted clock u' = u - t0 it is
    a standard information process with horizon T - t0.
    """

    spec: InformationProcessSpec
    payoff: DiscretePayoff
    t0: float
    xi_t0: float

    def shifted_information(self, u: float, xi_u: float) -> float:
        """eta_u = xi_u - (T-u)/(T-t0) xi_t0, the restarted signal at u."""
        T = self.spec.horizon + self.t0
        return xi_u - (T - u) / (T - self.t0) * self.xi_t0

    def conditional_probs(self, u: float, xi_u: float) -> np.ndarray:
        """Posterior at u >= t0 computed through the restarted model."""
        if u < self.t0:
            raise InvalidInputError("restarted model starts at t0")
        eta = self.shifted_information(u, xi_u)
        return conditional_probs(self.payoff, self.spec, u - self.t0, eta)


def reinitialize(spec: InformationProcessSpec, payoff: DiscretePayoff,
                 t: float, xi_t: float) -> ReinitializedModel:
    """Re-calibrate the model at (t, xi_t) without changing its form."""
    if t <= 0.0:
        raise InvalidInputError("reinitialization time must be positive")
    spec.check_time(t)
    posterior = conditional_probs(payoff, spec, t, xi_t)
    # The posterior is strictly positive in exact arithmetic; floor the
    # floating-point underflow so the restarted prior stays admissible.
    posterior = np.maximum(posterior, 1e-300)
    sigma_tilde = spec.sigma * spec.horizon / (spec.horizon - t)
    new_payoff = DiscretePayoff(payoff.levels, posterior / posterior.sum())
    new_spec = InformationProcessSpec(sigma_tilde, spec.horizon - t, new_payoff)
    return ReinitializedModel(new_spec, new_payoff, t, xi_t)


def information_timescale(spec: InformationProcessSpec,
                          payoff: DiscretePayoff) -> float:
    """tau_D = 1/(sigma^2 (h1-h0)^2), the revelation timescale; inf if sigma = 0."""
    if not payoff.is_binary:
        raise InvalidInputError("the revelation timescale is defined for binary payoffs")
    h0, h1 = payoff.levels
    if spec.sigma == 0.0:
        return math.inf
    return 1.0 / (spec.sigma ** 2 * (h1 - h0) ** 2)


@dataclass(frozen=True)
class BondPathSimulation:
    """Simulated bond price paths (rows: grid points, columns: paths)."""

    grid: TimeGrid
    prices: np.ndarray
    terminal_values: np.ndarray

    def to_csv(self, path: str) -> None:
        """One row per grid point; final row tagged with the factor draws."""
        n = self.prices.shape[1]
        header = "t," + ",".join(f"path_{k}" for k in range(n))
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for i, t in enumerate(self.grid.points):
                row = ",".join(f"{v:.17g}" for v in self.prices[i])
                fh.write(f"{t:.17g},{row}\n")
            tail = ",".join(f"{v:.17g}" for v in self.terminal_values)
            fh.write(f"terminal_factor,{tail}\n")


def _thread_cap() -> int:
    raw = os.environ.get("INFOFLOW_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _one_price_path(payoff, spec, curve, grid, rng_seed, k, conditioned_value):
    if conditioned_value is None:
        factor_rng = stream_generator(rng_seed, k, 0)
        x = float(payoff.sample(factor_rng))
    else:
        x = float(conditioned_value)
    bridge = sample_brownian_bridge(grid, rng_seed, rng=stream_generator(rng_seed, k, 1))
    xi = spec.sigma * x * grid.points + bridge.values
    prices = np.array([
        price_bond(payoff, spec, curve, t, v).price
        for t, v in zip(grid.points, xi)
    ])
    return prices, x


def simulate_bond_paths(payoff: DiscretePayoff, spec: InformationProcessSpec,
                        curve: DiscountCurve, grid: TimeGrid, n_paths: int,
                        rng_seed: int, *,
                        conditioned_value: float | None = None) -> BondPathSimulation:
    """Simulate bond price trajectories by simulating information paths.

    Path k draws its factor and bridge from streams (seed, k, 0) and
    (seed, k, 1): results are byte-identical regardless of evaluation
    order, so the per-path loop may run on the INFOFLOW_THREADS pool.
    ``conditioned_value`` pins the factor outcome for every path
    (scenario-conditioned figures).
    """
    if n_paths < 1:
        raise InvalidInputError("need at least one path")
    if grid.points[-1] > spec.horizon * (1.0 - 1e-12):
        raise InvalidInputError("simulation grid must stay inside [0, T)")
    workers = _thread_cap()
    args = [(payoff, spec, curve, grid, rng_seed, k, conditioned_value)
            for k in range(n_paths)]
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda a: _one_price_path(*a), args))
    else:
        results = [_one_price_path(*a) for a in args]
    prices = np.column_stack([r[0] for r in results])
    terminal = np.array([r[1] for r in results])
    return BondPathSimulation(grid=grid, prices=prices, terminal_values=terminal)
