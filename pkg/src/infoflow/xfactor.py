"""Multi-factor cash-flow pricing over independent market factors.

Cash flows are expressions over named factors (sums, products, affine
combinations, indicators).  Because the factors are independent, any
polynomial payout expands into monomials whose conditional expectation
factorizes into per-factor posterior moments; that symbolic factorization
is the engine's core shortcut.  Opaque (non-polynomial) payouts fall back
to joint enumeration (discrete factors) or tensor quadrature (up to three
continuous factors).
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.integrate import quad

from .curves import DiscountCurve
from .errors import InvalidInputError, UnsupportedPayoutError
from .processes import (
    ContinuousDensity,
    DiscretePayoff,
    InformationProcessSpec,
    conditional_density,
    conditional_probs,
    stream_generator,
)

__all__ = [
    "Expr", "Const", "Fac", "Ind", "Add", "Mul", "Func", "one_minus",
    "XFactor", "CashFlow", "CashFlowGraph", "MarketScenario",
    "price_asset", "price_asset_mc", "expectation",
    "build_coupon_bond_graph", "price_coupon_bond",
    "price_cds",
    "BasketSpec", "BasketPrices", "price_basket",
    "homogeneous_basket_value", "tranche_digital_value",
    "volatility_vector", "correlated_pair_demo",
]

#: Joint discrete enumeration cutoff; larger jobs must use MC pricing.
ENUMERATION_CUTOFF = 2 ** 16
MAX_QUADRATURE_DIMS = 3


# ---------------------------------------------------------------------------
# Payout expression grammar
# ---------------------------------------------------------------------------

class Expr:
    """Payout expression over factor ids.  Combine with +, -, * or helpers."""

    def __add__(self, other):
        return Add((self, _as_expr(other)))

    __radd__ = __add__

    def __mul__(self, other):
        return Mul((self, _as_expr(other)))

    __rmul__ = __mul__

    def __sub__(self, other):
        return Add((self, Mul((Const(-1.0), _as_expr(other)))))

    def __rsub__(self, other):
        return Add((_as_expr(other), Mul((Const(-1.0), self))))

    def factor_ids(self) -> frozenset[str]:
        raise NotImplementedError


def _as_expr(x) -> "Expr":
    if isinstance(x, Expr):
        return x
    return Const(float(x))


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def factor_ids(self):
        return frozenset()


@dataclass(frozen=True)
class Fac(Expr):
    """The value of factor ``factor_id``."""

    factor_id: str

    def factor_ids(self):
        return frozenset({self.factor_id})


@dataclass(frozen=True)
class Ind(Expr):
    """Indicator that a discrete factor lands on level index ``level``."""

    factor_id: str
    level: int

    def factor_ids(self):
        return frozenset({self.factor_id})


@dataclass(frozen=True)
class Add(Expr):
    terms: tuple

    def factor_ids(self):
        return frozenset().union(*(t.factor_ids() for t in self.terms))


@dataclass(frozen=True)
class Mul(Expr):
    terms: tuple

    def factor_ids(self):
        return frozenset().union(*(t.factor_ids() for t in self.terms))


@dataclass(frozen=True)
class Func(Expr):
    """Opaque payout g(x_1, ..., x_k) of the named factors."""

    ids: tuple
    fn: Callable

    def factor_ids(self):
        return frozenset(self.ids)


def one_minus(factor_id: str) -> Expr:
    """1 - X, the co-factor of a binary factor."""
    return Add((Const(1.0), Mul((Const(-1.0), Fac(factor_id)))))


# Monomial expansion: a monomial is {symbol: power} with coefficient.
# Symbols: ("x", fid), ("ind", fid, level), ("func", Func-node).

def _expand(expr: Expr) -> dict[tuple, float]:
    if isinstance(expr, Const):
        return {(): expr.value}
    if isinstance(expr, Fac):
        return {((("x", expr.factor_id), 1),): 1.0}
    if isinstance(expr, Ind):
        return {((("ind", expr.factor_id, expr.level), 1),): 1.0}
    if isinstance(expr, Func):
        return {((("func", expr), 1),): 1.0}
    if isinstance(expr, Add):
        out: dict[tuple, float] = {}
        for term in expr.terms:
            for key, coeff in _expand(term).items():
                out[key] = out.get(key, 0.0) + coeff
        return out
    if isinstance(expr, Mul):
        out = {(): 1.0}
        for term in expr.terms:
            rhs = _expand(term)
            new: dict[tuple, float] = {}
            for k1, c1 in out.items():
                for k2, c2 in rhs.items():
                    merged: dict = dict(k1)
                    for sym, p in k2:
                        merged[sym] = merged.get(sym, 0) + p
                    key = tuple(sorted(merged.items(), key=lambda kv: repr(kv[0])))
                    new[key] = new.get(key, 0.0) + c1 * c2
                    if len(new) > ENUMERATION_CUTOFF:
                        raise UnsupportedPayoutError(
                            "payout expansion exceeds the enumeration cutoff "
                            f"({ENUMERATION_CUTOFF} monomials); use price_asset_mc")
            out = new
        return out
    raise InvalidInputError(f"unknown expression node {type(expr).__name__}")


# ---------------------------------------------------------------------------
# Factors, cash-flow graphs, scenarios
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class XFactor:
    """Independent market factor revealed at ``revelation`` years."""

    factor_id: str
    revelation: float
    distribution: DiscretePayoff | ContinuousDensity
    sigma: float

    def __post_init__(self):
        if self.revelation <= 0.0:
            raise InvalidInputError("revelation date must be positive")
        if self.sigma < 0.0:
            raise InvalidInputError("information flow rate must be nonnegative")

    @property
    def spec(self) -> InformationProcessSpec:
        return InformationProcessSpec(self.sigma, self.revelation, self.distribution)

    @property
    def is_discrete(self) -> bool:
        return isinstance(self.distribution, DiscretePayoff)


def binary_factor(factor_id: str, revelation: float, p_pay: float,
                  sigma: float) -> XFactor:
    """{0,1} factor paying 1 with probability p_pay.

    p_pay of exactly 0 or 1 collapses to a one-atom distribution (certain
    default / certain payment), which every downstream formula treats as
    the zero-variance limit.
    """
    if not (0.0 <= p_pay <= 1.0):
        raise InvalidInputError("p_pay must lie in [0, 1]")
    if p_pay == 0.0:
        dist = DiscretePayoff(np.array([0.0]), np.array([1.0]))
    elif p_pay == 1.0:
        dist = DiscretePayoff(np.array([1.0]), np.array([1.0]))
    else:
        dist = DiscretePayoff(np.array([0.0, 1.0]), np.array([1.0 - p_pay, p_pay]))
    return XFactor(factor_id, revelation, dist, sigma)


@dataclass(frozen=True)
class CashFlow:
    date: float
    amount: Expr


@dataclass(frozen=True)
class CashFlowGraph:
    """Dated cash flows over a registry of independent factors.

    Every referenced factor must be registered and revealed no later than
    the date of the flow that uses it.
    """

    factors: Mapping[str, XFactor]
    flows: tuple

    def __post_init__(self):
        object.__setattr__(self, "flows", tuple(self.flows))
        for fid, fac in self.factors.items():
            if fac.factor_id != fid:
                raise InvalidInputError(f"factor registered under wrong id: {fid}")
        for flow in self.flows:
            for fid in flow.amount.factor_ids():
                if fid not in self.factors:
                    raise InvalidInputError(f"flow at {flow.date} references "
                                            f"unregistered factor {fid!r}")
                if self.factors[fid].revelation > flow.date + 1e-12:
                    raise InvalidInputError(
                        f"flow at {flow.date} references factor {fid!r} revealed "
                        f"later, at {self.factors[fid].revelation}")


@dataclass(frozen=True)
class MarketScenario:
    """Market state: time t, information values for live factors,
    realized values for factors already revealed."""

    t: float
    info: Mapping[str, float] = field(default_factory=dict)
    realized: Mapping[str, float] = field(default_factory=dict)


class _FactorView:
    """Per-call cache of a factor's conditional law in a scenario."""

    def __init__(self, factor: XFactor, scenario: MarketScenario):
        self.factor = factor
        self.resolved = factor.revelation <= scenario.t
        if self.resolved:
            if factor.factor_id not in scenario.realized:
                raise InvalidInputError(
                    f"factor {factor.factor_id!r} is revealed at t = {scenario.t}; "
                    "the scenario must carry its realized value")
            self.value = float(scenario.realized[factor.factor_id])
            self.posterior = None
            self.probs = None
        else:
            if factor.factor_id not in scenario.info:
                raise InvalidInputError(
                    f"scenario lacks an information value for live factor "
                    f"{factor.factor_id!r}")
            xi = float(scenario.info[factor.factor_id])
            if factor.is_discrete:
                self.probs = conditional_probs(factor.distribution, factor.spec,
                                               scenario.t, xi)
                self.posterior = None
            else:
                self.posterior = conditional_density(factor.distribution, factor.spec,
                                                     scenario.t, xi)
                self.probs = None
            self.value = None

    def local_expect(self, terms: Sequence[tuple]) -> float:
        """E[prod of local symbols | scenario] for this factor alone."""
        if self.resolved:
            return self._eval_at(self.value, terms)
        if self.factor.is_discrete:
            levels = self.factor.distribution.levels
            vals = np.array([self._eval_at_index(i, levels[i], terms)
                             for i in range(levels.size)])
            return float(self.probs @ vals)
        power = 0
        for sym, p in terms:
            if sym[0] != "x":
                raise UnsupportedPayoutError(
                    "indicator symbols are not defined for continuous factors")
            power += p
        return self.posterior.moment(power)

    def _eval_at(self, value, terms):
        out = 1.0
        levels = self.factor.distribution.levels if self.factor.is_discrete else None
        for sym, p in terms:
            if sym[0] == "x":
                out *= value ** p
            else:
                level = levels[sym[2]]
                out *= 1.0 if abs(value - level) < 1e-12 else 0.0
        return out

    def _eval_at_index(self, idx, value, terms):
        out = 1.0
        for sym, p in terms:
            if sym[0] == "x":
                out *= value ** p
            else:
                out *= 1.0 if idx == sym[2] else 0.0
        return out

    def outcome_support(self):
        """(values, probs) of the conditional law, for joint enumeration."""
        if self.resolved:
            return np.array([self.value]), np.array([1.0])
        if self.factor.is_discrete:
            return self.factor.distribution.levels, self.probs
        raise UnsupportedPayoutError("enumeration requires discrete factors")


def _get_view(cache, factors, fid, scenario) -> _FactorView:
    view = cache.get(fid)
    if view is None:
        view = _FactorView(factors[fid], scenario)
        cache[fid] = view
    return view


def _monomial_expectation(key, factors, scenario, cache) -> float:
    # Split symbols into per-factor groups; Func symbols glue factors
    # into joint components.
    plain: dict[str, list] = {}
    funcs: list[tuple] = []
    for sym, p in key:
        if sym[0] == "func":
            funcs.append((sym[1], p))
        else:
            plain.setdefault(sym[1], []).append((sym, p))
    if not funcs:
        out = 1.0
        for fid, terms in plain.items():
            out *= _get_view(cache, factors, fid, scenario).local_expect(terms)
        return out
    # Union-find-lite: merge func components with any plain symbols that
    # share their factors.
    joint_ids: set[str] = set()
    for fn, _ in funcs:
        joint_ids |= set(fn.ids)
    overlap = {fid: terms for fid, terms in plain.items() if fid in joint_ids}
    disjoint = {fid: terms for fid, terms in plain.items() if fid not in joint_ids}
    out = 1.0
    for fid, terms in disjoint.items():
        out *= _get_view(cache, factors, fid, scenario).local_expect(terms)
    out *= _joint_expectation(funcs, overlap, sorted(joint_ids), factors,
                              scenario, cache)
    return out


def _joint_expectation(funcs, plain, fids, factors, scenario, cache) -> float:
    views = [_get_view(cache, factors, fid, scenario) for fid in fids]
    discrete = all(v.resolved or v.factor.is_discrete for v in views)
    if discrete:
        supports = [v.outcome_support() for v in views]
        n_outcomes = math.prod(len(s[0]) for s in supports)
        if n_outcomes > ENUMERATION_CUTOFF:
            raise UnsupportedPayoutError(
                f"joint enumeration over {n_outcomes} outcomes exceeds the "
                f"cutoff {ENUMERATION_CUTOFF}; use price_asset_mc")
        total = 0.0
        for combo in itertools.product(*(range(len(s[0])) for s in supports)):
            prob = 1.0
            values = {}
            for v, s, i in zip(views, supports, combo):
                prob *= s[1][i]
                values[v.factor.factor_id] = s[0][i]
            term = 1.0
            for fn, p in funcs:
                term *= fn.fn(*(values[f] for f in fn.ids)) ** p
            for fid, terms in plain.items():
                view = cache[fid]
                term *= view._eval_at(values[fid], terms)
            total += prob * term
        return total
    live_continuous = [v for v in views if not v.resolved and not v.factor.is_discrete]
    if any(not v.resolved and v.factor.is_discrete for v in views):
        raise UnsupportedPayoutError(
            "opaque payouts over mixed live discrete/continuous factors "
            "are unsupported")
    if len(live_continuous) > MAX_QUADRATURE_DIMS:
        raise UnsupportedPayoutError(
            f"tensor quadrature supports at most {MAX_QUADRATURE_DIMS} "
            "continuous factors")

    def integrate(level, values):
        if level == len(views):
            term = 1.0
            for fn, p in funcs:
                term *= fn.fn(*(values[f] for f in fn.ids)) ** p
            for fid, terms in plain.items():
                term *= cache[fid]._eval_at(values[fid], terms)
            return term
        view = views[level]
        if view.resolved:
            values[view.factor.factor_id] = view.value
            return integrate(level + 1, values)
        post = view.posterior
        lo, hi = post._quad_range()

        def inner(x):
            values[view.factor.factor_id] = x
            return integrate(level + 1, values) * post.pdf(x)

        val, _ = quad(inner, lo, hi, epsabs=1e-12, epsrel=1e-9, limit=200)
        return val

    return integrate(0, {})


def expectation(expr: Expr, factors: Mapping[str, XFactor],
                scenario: MarketScenario) -> float:
    """Conditional expectation of a payout expression in a scenario."""
    cache: dict = {}
    total = 0.0
    for key, coeff in _expand(expr).items():
        if coeff == 0.0:
            continue
        total += coeff * _monomial_expectation(key, factors, scenario, cache)
    return total


# ---------------------------------------------------------------------------
# Pricing
# ---------------------------------------------------------------------------

def price_asset(graph: CashFlowGraph, scenario: MarketScenario,
                curve: DiscountCurve) -> float:
    """Sum of discounted conditional expected cash flows.

    Flows dated at or before the scenario time are excluded: the price
    goes ex-dividend the instant a flow is paid.
    """
    total = 0.0
    for flow in graph.flows:
        if flow.date <= scenario.t:
            continue
        df = curve.df(flow.date) / curve.df(scenario.t)
        total += df * expectation(flow.amount, graph.factors, scenario)
    return total


def price_asset_mc(graph: CashFlowGraph, scenario: MarketScenario,
                   curve: DiscountCurve, n_paths: int,
                   rng_seed: int) -> tuple[float, float]:
    """Monte Carlo price with standard error, sampling factor posteriors.

    The fallback route for payouts beyond the enumeration cutoff; factor
    k's draws use stream (seed, k) so results are order-independent.
    """
    live = sorted({fid for flow in graph.flows if flow.date > scenario.t
                   for fid in flow.amount.factor_ids()})
    cache: dict = {}
    draws = {}
    for k, fid in enumerate(live):
        view = _get_view(cache, graph.factors, fid, scenario)
        rng = stream_generator(rng_seed, k)
        if view.resolved:
            draws[fid] = np.full(n_paths, view.value)
        elif view.factor.is_discrete:
            levels = view.factor.distribution.levels
            idx = rng.choice(levels.size, size=n_paths, p=view.probs)
            draws[fid] = levels[idx]
        else:
            draws[fid] = _sample_posterior(view.posterior, rng, n_paths)
    samples = np.zeros(n_paths)
    for flow in graph.flows:
        if flow.date <= scenario.t:
            continue
        df = curve.df(flow.date) / curve.df(scenario.t)
        samples += df * _eval_expr_samples(flow.amount, draws)
    return float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(n_paths))


def _sample_posterior(post, rng, size):
    lo, hi = post._quad_range(widen=4.0)
    grid = np.linspace(lo, hi, 4001)
    pdf = post.pdf(grid)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(grid))])
    cdf /= cdf[-1]
    return np.interp(rng.random(size), cdf, grid)


def _eval_expr_samples(expr: Expr, draws: Mapping[str, np.ndarray]) -> np.ndarray:
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Fac):
        return draws[expr.factor_id]
    if isinstance(expr, Ind):
        raise UnsupportedPayoutError("indicator sampling needs level metadata; "
                                     "rewrite with Fac arithmetic")
    if isinstance(expr, Add):
        return sum(_eval_expr_samples(t, draws) for t in expr.terms)
    if isinstance(expr, Mul):
        out = 1.0
        for t in expr.terms:
            out = out * _eval_expr_samples(t, draws)
        return out
    if isinstance(expr, Func):
        return np.vectorize(expr.fn)(*(draws[f] for f in expr.ids))
    raise InvalidInputError(f"unknown expression node {type(expr).__name__}")


# ---------------------------------------------------------------------------
# Canned structures
# ---------------------------------------------------------------------------

def build_coupon_bond_graph(coupon: float, principal: float,
                            dates: Sequence[float],
                            recovery: Sequence[float],
                            default_probs: Sequence[float],
                            sigmas: Sequence[float]) -> CashFlowGraph:
    """Defaultable coupon bond over binary no-default factors.

    Before the last date k the flow is c prod_{j<=k} X_j plus recovery
    R_k (c+p) on the first failure; the last flow also repays principal.
    """
    n = len(dates)
    if not (len(recovery) == len(default_probs) == len(sigmas) == n):
        raise InvalidInputError("dates, recovery, default_probs, sigmas must align")
    if any(not (0.0 <= r < 1.0) for r in recovery):
        raise InvalidInputError("recovery rates must lie in [0, 1)")
    factors = {}
    for k in range(n):
        fid = f"X{k + 1}"
        factors[fid] = binary_factor(fid, dates[k], 1.0 - default_probs[k], sigmas[k])
    flows = []
    cp = coupon + principal
    for k in range(n):
        survive = Mul(tuple(Fac(f"X{j + 1}") for j in range(k + 1))) if k >= 0 else Const(1.0)
        prior_survive = Mul(tuple(Fac(f"X{j + 1}") for j in range(k))) if k > 0 else Const(1.0)
        fail_here = Mul((prior_survive, one_minus(f"X{k + 1}")))
        amount_paid = cp if k == n - 1 else coupon
        flows.append(CashFlow(dates[k],
                              Add((Mul((Const(amount_paid), survive)),
                                   Mul((Const(recovery[k] * cp), fail_here))))))
    return CashFlowGraph(factors=factors, flows=flows)


def price_coupon_bond(coupon: float, principal: float, dates: Sequence[float],
                      recovery: Sequence[float], default_probs: Sequence[float],
                      sigmas: Sequence[float], scenario: MarketScenario,
                      curve: DiscountCurve) -> float:
    graph = build_coupon_bond_graph(coupon, principal, dates, recovery,
                                    default_probs, sigmas)
    return price_asset(graph, scenario, curve)


def price_cds(premium: float, protection: float, factor1: XFactor,
              factor2: XFactor, scenario: MarketScenario,
              curve: DiscountCurve) -> float:
    """Default swap on a two-coupon reference bond (seller's value).

    V_t = -n P_tT1 + [(g+n) P_tT1 - n P_tT2] E[X1] + (g+n) P_tT2 E[X1] E[X2].
    """
    for fac in (factor1, factor2):
        if not fac.is_discrete or \
                not set(np.round(fac.distribution.levels, 12)) <= {0.0, 1.0}:
            raise InvalidInputError("CDS reference factors must be binary {0,1}")
    cache: dict = {}
    factors = {factor1.factor_id: factor1, factor2.factor_id: factor2}
    e1 = _get_view(cache, factors, factor1.factor_id, scenario).local_expect(
        [(("x", factor1.factor_id), 1)])
    e2 = _get_view(cache, factors, factor2.factor_id, scenario).local_expect(
        [(("x", factor2.factor_id), 1)])
    p1 = curve.df(factor1.revelation) / curve.df(scenario.t)
    p2 = curve.df(factor2.revelation) / curve.df(scenario.t)
    g, n = premium, protection
    return -n * p1 + ((g + n) * p1 - n * p2) * e1 + (g + n) * p2 * e1 * e2


# -- baskets ---------------------------------------------------------------

@dataclass(frozen=True)
class BasketSpec:
    """Chronological basket of digital bonds over a binary factor tree.

    Node keys are bit-strings: "" is the first bond's factor, "0"/"1"
    condition on the earlier bonds' outcomes, and so on: bond j+1 uses the
    2^j nodes of depth j.  ``pay_probs[key]`` is P(X_key = 1) and
    ``sigmas[key]`` its information flow rate.
    """

    maturities: tuple
    pay_probs: Mapping[str, float]
    sigmas: Mapping[str, float]

    def __post_init__(self):
        n = len(self.maturities)
        if n < 1 or n > 12:
            raise UnsupportedPayoutError("basket size supported for 1 <= N <= 12")
        if any(self.maturities[i] > self.maturities[i + 1] for i in range(n - 1)):
            raise InvalidInputError("basket maturities must be chronological")
        for depth in range(n):
            for bits in itertools.product("01", repeat=depth):
                key = "".join(bits)
                if key not in self.pay_probs or key not in self.sigmas:
                    raise InvalidInputError(f"missing node {key!r} in basket spec")

    @property
    def n_bonds(self) -> int:
        return len(self.maturities)

    def factor_id(self, key: str) -> str:
        return f"N_{key}" if key else "N_root"

    def factors(self) -> dict[str, XFactor]:
        out = {}
        for depth in range(self.n_bonds):
            for bits in itertools.product("01", repeat=depth):
                key = "".join(bits)
                fid = self.factor_id(key)
                out[fid] = binary_factor(fid, self.maturities[depth],
                                         self.pay_probs[key], self.sigmas[key])
        return out

    def bond_payoff(self, j: int) -> Expr:
        """Payoff of bond j (0-based): sum over depth-j outcome paths."""
        terms = []
        for bits in itertools.product((1, 0), repeat=j):
            leaf = Fac(self.factor_id("".join(str(b) for b in bits)))
            path = [Fac(self.factor_id("".join(str(b) for b in bits[:d])))
                    if bits[d] == 1 else
                    one_minus(self.factor_id("".join(str(b) for b in bits[:d])))
                    for d in range(j)]
            terms.append(Mul(tuple(path + [leaf])))
        return Add(tuple(terms)) if terms else Fac(self.factor_id(""))

    def graph(self) -> CashFlowGraph:
        flows = [CashFlow(self.maturities[j], self.bond_payoff(j))
                 for j in range(self.n_bonds)]
        return CashFlowGraph(factors=self.factors(), flows=flows)


@dataclass(frozen=True)
class BasketPrices:
    per_bond: np.ndarray
    total: float


def price_basket(basket: BasketSpec, scenario: MarketScenario,
                 curve: DiscountCurve) -> BasketPrices:
    factors = basket.factors()
    per_bond = []
    for j in range(basket.n_bonds):
        if basket.maturities[j] <= scenario.t:
            per_bond.append(0.0)
            continue
        df = curve.df(basket.maturities[j]) / curve.df(scenario.t)
        per_bond.append(df * expectation(basket.bond_payoff(j), factors, scenario))
    per_bond = np.array(per_bond)
    return BasketPrices(per_bond=per_bond, total=float(per_bond.sum()))


def _chain_factors(chain_probs, sigmas, maturity):
    return {f"Z{j + 1}": binary_factor(f"Z{j + 1}", maturity, p, s)
            for j, (p, s) in enumerate(zip(chain_probs, sigmas))}


def homogeneous_basket_value(n: int, chain_probs: Sequence[float],
                             sigmas: Sequence[float], maturity: float,
                             scenario: MarketScenario,
                             curve: DiscountCurve) -> float:
    """Portfolio of n identical digitals with chained default counts.

    H_T = n - Z1 - Z1 Z2 - ... - Z1...Zn over independent chain factors
    (Z_j = 1 adds a j-th default), so the value telescopes into products
    of conditional means.
    """
    if len(chain_probs) != n or len(sigmas) != n:
        raise InvalidInputError("need one chain factor per name")
    if maturity <= scenario.t:
        return 0.0
    factors = _chain_factors(chain_probs, sigmas, maturity)
    cache: dict = {}
    means = [
        _get_view(cache, factors, f"Z{j + 1}", scenario).local_expect(
            [(("x", f"Z{j + 1}"), 1)])
        for j in range(n)
    ]
    value = float(n)
    running = 1.0
    for m in means:
        running *= m
        value -= running
    return curve.df(maturity) / curve.df(scenario.t) * value


def tranche_digital_value(m: int, chain_probs: Sequence[float],
                          sigmas: Sequence[float], maturity: float,
                          scenario: MarketScenario, curve: DiscountCurve) -> float:
    """Digital paying one unit if there are at least m defaults:
    H = Z1 Z2 ... Zm."""
    if m < 1 or m > len(chain_probs):
        raise InvalidInputError("tranche level must be between 1 and n")
    factors = _chain_factors(chain_probs, sigmas, maturity)
    cache: dict = {}
    prod = 1.0
    for j in range(m):
        prod *= _get_view(cache, factors, f"Z{j + 1}", scenario).local_expect(
            [(("x", f"Z{j + 1}"), 1)])
    return curve.df(maturity) / curve.df(scenario.t) * prod


# -- volatility structure ----------------------------------------------------

def volatility_vector(graph: CashFlowGraph, scenario: MarketScenario,
                      curve: DiscountCurve) -> tuple[dict[str, float], float]:
    """Per-factor absolute volatilities and their Euclidean total.

    Gamma_f = sum_{flows after t} P_{t,T_k} sigma_f T_f/(T_f - t)
              Cov[flow, X_f | scenario];
    resolved factors contribute zero.
    """
    cache: dict = {}
    gammas = {fid: 0.0 for fid in graph.factors}
    for flow in graph.flows:
        if flow.date <= scenario.t:
            continue
        df = curve.df(flow.date) / curve.df(scenario.t)
        e_flow = None
        for fid in sorted(flow.amount.factor_ids()):
            fac = graph.factors[fid]
            if fac.revelation <= scenario.t:
                continue
            if e_flow is None:
                e_flow = expectation(flow.amount, graph.factors, scenario)
            e_joint = expectation(Mul((flow.amount, Fac(fid))), graph.factors,
                                  scenario)
            view = _get_view(cache, graph.factors, fid, scenario)
            e_fac = view.local_expect([(("x", fid), 1)])
            cov = e_joint - e_flow * e_fac
            gain = fac.sigma * fac.revelation / (fac.revelation - scenario.t)
            gammas[fid] += df * gain * cov
    total = math.sqrt(sum(g * g for g in gammas.values()))
    return gammas, total


def correlated_pair_demo(n1: float, n2: float, r1: float, r2a: float,
                         r2b: float, r2c: float, p1_pay: float, p2_pay: float,
                         sigma1: float, sigma2: float, t1: float, t2: float,
                         scenario: MarketScenario,
                         curve: DiscountCurve) -> tuple[float, float, float]:
    """Two debts sharing one default driver; returns both prices and the
    instantaneous price correlation from the volatility vectors.

    Bond 1 pays n1 X1 + R1 n1 (1 - X1) at t1.  Bond 2 pays
    n2 [X1 X2 + R2a (1-X1) X2 + R2b X1 (1-X2) + R2c (1-X1)(1-X2)] at t2.
    """
    if not (r2b > r2a > r2c):
        warnings.warn("recovery ladder does not satisfy R2b > R2a > R2c; "
                      "pricing proceeds but the scenario ordering is unusual",
                      stacklevel=2)
    f1 = binary_factor("X1", t1, p1_pay, sigma1)
    f2 = binary_factor("X2", t2, p2_pay, sigma2)
    factors = {"X1": f1, "X2": f2}
    pay1 = Add((Mul((Const(n1), Fac("X1"))),
                Mul((Const(r1 * n1), one_minus("X1")))))
    pay2 = Mul((Const(n2), Add((
        Mul((Fac("X1"), Fac("X2"))),
        Mul((Const(r2a), one_minus("X1"), Fac("X2"))),
        Mul((Const(r2b), Fac("X1"), one_minus("X2"))),
        Mul((Const(r2c), one_minus("X1"), one_minus("X2"))),
    ))))
    g1 = CashFlowGraph(factors=factors, flows=(CashFlow(t1, pay1),))
    g2 = CashFlowGraph(factors=factors, flows=(CashFlow(t2, pay2),))
    price1 = price_asset(g1, scenario, curve)
    price2 = price_asset(g2, scenario, curve)
    gam1, tot1 = volatility_vector(g1, scenario, curve)
    gam2, tot2 = volatility_vector(g2, scenario, curve)
    if tot1 == 0.0 or tot2 == 0.0:
        return price1, price2, 0.0
    dot = sum(gam1.get(fid, 0.0) * gam2.get(fid, 0.0) for fid in factors)
    return price1, price2, dot / (tot1 * tot2)
