"""Deterministic default-free discount curves.

P_tT = P_0T / P_0t throughout; the short rate is r_t = -d ln P_0t / dt.
"""
from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np

from .errors import InvalidInputError

__all__ = ["DiscountCurve", "FlatCurve", "TabulatedCurve"]


class DiscountCurve:
    """Interface: df(t) = P_0t; forward(t, T) = P_tT; short_rate(t)."""

    def df(self, t: float) -> float:
        raise NotImplementedError

    def forward(self, t: float, T: float) -> float:
        if T < t:
            raise InvalidInputError("forward discount needs T >= t")
        return self.df(T) / self.df(t)

    def short_rate(self, t: float) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class FlatCurve(DiscountCurve):
    """Constant continuously-compounded short rate: P_0t = exp(-r t)."""

    rate: float

    def __post_init__(self):
        if self.rate < 0.0:
            raise InvalidInputError("flat curve expects a nonnegative rate")

    def df(self, t: float) -> float:
        if t < 0.0:
            raise InvalidInputError("discount time must be nonnegative")
        return math.exp(-self.rate * t)

    def short_rate(self, t: float) -> float:
        return self.rate


class TabulatedCurve(DiscountCurve):
    """Discount factors on pillar dates, log-linear in between.

    Log-linear interpolation of P_0t keeps forwards positive and the
    short rate piecewise constant.
    """

    def __init__(self, times, dfs):
        times = np.asarray(times, dtype=float)
        dfs = np.asarray(dfs, dtype=float)
        if times.ndim != 1 or times.shape != dfs.shape or times.size < 2:
            raise InvalidInputError("need matching 1-d arrays of at least two pillars")
        if times[0] != 0.0 or dfs[0] != 1.0:
            raise InvalidInputError("curve must start at (t=0, P=1)")
        if np.any(np.diff(times) <= 0.0):
            raise InvalidInputError("pillar times must be strictly increasing")
        if np.any(dfs <= 0.0) or np.any(dfs > 1.0) or np.any(np.diff(dfs) >= 0.0):
            raise InvalidInputError("discount factors must be in (0, 1] and strictly decreasing")
        self.times = times
        self.log_dfs = np.log(dfs)

    def df(self, t: float) -> float:
        if t < 0.0:
            raise InvalidInputError("discount time must be nonnegative")
        if t > self.times[-1]:
            # Extrapolate flat in the last forward rate.
            slope = (self.log_dfs[-1] - self.log_dfs[-2]) / (self.times[-1] - self.times[-2])
            return float(np.exp(self.log_dfs[-1] + slope * (t - self.times[-1])))
        return float(np.exp(np.interp(t, self.times, self.log_dfs)))

    def short_rate(self, t: float) -> float:
        h = max(1e-7, 1e-7 * max(t, 1.0))
        lo = max(t - h, 0.0)
        return -(math.log(self.df(t + h)) - math.log(self.df(lo))) / (t + h - lo)
