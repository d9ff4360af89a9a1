"""Discrete-time pricing-kernel interest rates and the inflation model.

Everything runs on a finite recombining binomial lattice so that every
expectation is an exact sum and every martingale/supermartingale claim is
a machine-checkable identity.  The kernel is a strictly positive strict
supermartingale; bonds are P_ij = E_i[pi_j]/pi_i; the money-market
account accrues at the previsible one-period rate 1 + r_i =
pi_{i-1}/E_{i-1}[pi_i].
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import InvalidInputError
from .processes import (
    ContinuousDensity,
    DiscretePayoff,
    InformationProcessSpec,
    conditional_density,
    conditional_probs,
)

__all__ = [
    "Lattice",
    "KernelModel",
    "RationalModel",
    "rational_model",
    "bond_price",
    "bond_price_closed",
    "MoneyMarket",
    "money_market",
    "DoobDecomposition",
    "doob_decomposition",
    "FHRepresentation",
    "fh_representation",
    "ConstantValueReport",
    "constant_value_asset_check",
    "GKernelConstruction",
    "build_kernel_from_G",
    "InfoKernelModel",
    "info_kernel",
    "InflationModel",
    "inflation_model",
    "lattice_asset_price",
    "axiom_a_residual",
]

MAX_LATTICE_DEPTH = 30


# ---------------------------------------------------------------------------
# Lattice
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Lattice:
    """Recombining binomial lattice: date i has nodes j = 0..i (j = #ups).

    Transition from (i, j): up to (i+1, j+1) with probability q, down to
    (i+1, j) with 1 - q.
    """

    dates: np.ndarray
    q: float = 0.5

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype=float)
        if dates.ndim != 1 or dates.size < 2:
            raise InvalidInputError("need at least two dates")
        if np.any(np.diff(dates) <= 0.0):
            raise InvalidInputError("dates must be strictly increasing")
        if dates.size - 1 > MAX_LATTICE_DEPTH:
            raise InvalidInputError(f"lattice depth capped at {MAX_LATTICE_DEPTH}")
        if not (0.0 < self.q < 1.0):
            raise InvalidInputError("transition probability must lie in (0, 1)")
        object.__setattr__(self, "dates", dates)

    @property
    def depth(self) -> int:
        return self.dates.size - 1

    def n_nodes(self, i: int) -> int:
        return i + 1

    def expect_next(self, values_next: np.ndarray) -> np.ndarray:
        """One-step conditional expectation: date i+1 values -> date i."""
        v = np.asarray(values_next, dtype=float)
        return self.q * v[1:] + (1.0 - self.q) * v[:-1]

    def cond_expect(self, i: int, j: int, values_j: np.ndarray) -> np.ndarray:
        """E_i[x_j] as an array over date-i nodes (i <= j)."""
        if j < i:
            raise InvalidInputError("conditioning date after value date")
        v = np.asarray(values_j, dtype=float)
        for _ in range(j - i):
            v = self.expect_next(v)
        return v

    def node_probs(self, i: int) -> np.ndarray:
        """Unconditional probabilities of the date-i nodes (binomial)."""
        from scipy.stats import binom
        return binom.pmf(np.arange(i + 1), i, self.q)

    def paths(self):
        """All up/down move sequences (exhaustive; use for small depth)."""
        return itertools.product((0, 1), repeat=self.depth)

    def path_nodes(self, moves: Sequence[int]) -> np.ndarray:
        """Node index (number of ups) after each date along a move sequence."""
        return np.concatenate([[0], np.cumsum(np.asarray(moves, dtype=int))])

    def path_prob(self, moves: Sequence[int]) -> float:
        ups = int(np.sum(moves))
        return self.q ** ups * (1.0 - self.q) ** (len(moves) - ups)


@dataclass
class KernelModel:
    """Strictly positive pricing kernel on a lattice (arrays per date)."""

    lattice: Lattice
    pi: list

    def __post_init__(self):
        if len(self.pi) != self.lattice.depth + 1:
            raise InvalidInputError("need one kernel array per lattice date")
        self.pi = [np.asarray(p, dtype=float) for p in self.pi]
        for i, p in enumerate(self.pi):
            if p.shape != (self.lattice.n_nodes(i),):
                raise InvalidInputError(f"kernel array at date {i} has wrong shape")
            if np.any(p <= 0.0):
                raise InvalidInputError("pricing kernel must be strictly positive")
        for i in range(self.lattice.depth):
            if np.any(self.lattice.expect_next(self.pi[i + 1]) >= self.pi[i]):
                raise InvalidInputError(
                    "kernel must be a strict supermartingale (E_i[pi_{i+1}] < pi_i)")

    @property
    def depth(self) -> int:
        return self.lattice.depth


# ---------------------------------------------------------------------------
# Rational models
# ---------------------------------------------------------------------------

@dataclass
class RationalModel(KernelModel):
    """pi_i = alpha_i + beta_i N_i with N a positive lattice martingale."""

    alpha: np.ndarray = None
    beta: np.ndarray = None
    martingale: list = None

    def closed_form_bond(self, i: int, j: int) -> np.ndarray:
        """P_ij = (alpha_j + beta_j N_i)/(alpha_i + beta_i N_i), exactly."""
        n_i = self.martingale[i]
        return (self.alpha[j] + self.beta[j] * n_i) / (self.alpha[i] + self.beta[i] * n_i)


def rational_model(lattice: Lattice, alpha: Sequence[float],
                   beta: Sequence[float], n0: float = 1.0,
                   up: float = 1.25) -> RationalModel:
    """Rational kernel on the lattice with a multiplicative martingale.

    N steps to N*up or N*down with the lattice probabilities, down chosen
    so that q*up + (1-q)*down = 1 keeps N a martingale exactly.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    depth = lattice.depth
    if alpha.shape != (depth + 1,) or beta.shape != (depth + 1,):
        raise InvalidInputError("alpha/beta must have one entry per date")
    if np.any(alpha <= 0.0) or np.any(beta <= 0.0):
        raise InvalidInputError("alpha and beta must be strictly positive")
    if np.any(np.diff(alpha) >= 0.0) or np.any(np.diff(beta) >= 0.0):
        raise InvalidInputError("alpha and beta must be strictly decreasing")
    down = (1.0 - lattice.q * up) / (1.0 - lattice.q)
    if down <= 0.0:
        raise InvalidInputError("up-multiplier too large for the martingale property")
    if n0 <= 0.0:
        raise InvalidInputError("martingale must start positive")
    martingale = [n0 * up ** np.arange(i + 1) * down ** (i - np.arange(i + 1))
                  for i in range(depth + 1)]
    pi = [alpha[i] + beta[i] * martingale[i] for i in range(depth + 1)]
    model = RationalModel(lattice=lattice, pi=pi)
    model.alpha = alpha
    model.beta = beta
    model.martingale = martingale
    return model


def bond_price(model: KernelModel, i: int, j: int) -> np.ndarray:
    """P_ij = E_i[pi_j]/pi_i over date-i nodes; P_ii = 1 (quote convention).

    Under the cash-flow convention the bond pays one unit at j and the
    ex-dividend value at maturity is 0; the conventional P_jj = 1 quote
    is returned here and the ex-dividend drop is reported by the CLI.
    """
    if j > model.depth or i > j or i < 0:
        raise InvalidInputError("need 0 <= i <= j <= lattice depth")
    if i == j:
        return np.ones(model.lattice.n_nodes(i))
    return model.lattice.cond_expect(i, j, model.pi[j]) / model.pi[i]


def bond_price_closed(model: RationalModel, i: int, j: int) -> np.ndarray:
    return model.closed_form_bond(i, j)


# ---------------------------------------------------------------------------
# Money market
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MoneyMarket:
    """Previsible accumulation: rates[i] is the period-i return, fixed at
    date i-1 (one value per date-(i-1) node)."""

    lattice: Lattice
    rates: list

    def along_path(self, moves: Sequence[int]) -> np.ndarray:
        nodes = self.lattice.path_nodes(moves)
        values = [1.0]
        for i in range(1, len(moves) + 1):
            values.append(values[-1] * (1.0 + self.rates[i - 1][nodes[i - 1]]))
        return np.array(values)


def money_market(model: KernelModel) -> MoneyMarket:
    """The natural previsible money-market account of the kernel.

    1 + r_i = pi_{i-1}/E_{i-1}[pi_i] > 1, so the account is strictly
    increasing, and P_{i-1,i} = B_{i-1}/B_i holds node-wise exactly.
    """
    rates = []
    for i in range(1, model.depth + 1):
        e = model.lattice.expect_next(model.pi[i])
        rates.append(model.pi[i - 1] / e - 1.0)
    return MoneyMarket(lattice=model.lattice, rates=rates)


# ---------------------------------------------------------------------------
# Doob decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DoobDecomposition:
    """pi = Y - A with Y a martingale and A previsible increasing.

    ``a_increments[i-1]`` (per date-(i-1) node) is A_i - A_{i-1} =
    pi_{i-1} - E_{i-1}[pi_i]; the short-rate form pi_{i-1} r_i P_{i-1,i}
    is stored alongside for the agreement check.
    """

    lattice: Lattice
    a_increments: list
    a_increments_short_rate: list

    def a_along_path(self, moves: Sequence[int]) -> np.ndarray:
        nodes = self.lattice.path_nodes(moves)
        a = [0.0]
        for i in range(1, len(moves) + 1):
            a.append(a[-1] + self.a_increments[i - 1][nodes[i - 1]])
        return np.array(a)

    def y_along_path(self, model: KernelModel, moves: Sequence[int]) -> np.ndarray:
        nodes = self.lattice.path_nodes(moves)
        a = self.a_along_path(moves)
        return np.array([model.pi[i][nodes[i]] + a[i] for i in range(len(a))])


def doob_decomposition(model: KernelModel) -> DoobDecomposition:
    mm = money_market(model)
    a_inc = []
    a_inc_sr = []
    for i in range(1, model.depth + 1):
        e = model.lattice.expect_next(model.pi[i])
        a_inc.append(model.pi[i - 1] - e)
        p_prev = e / model.pi[i - 1]
        a_inc_sr.append(model.pi[i - 1] * mm.rates[i - 1] * p_prev)
    return DoobDecomposition(lattice=model.lattice, a_increments=a_inc,
                             a_increments_short_rate=a_inc_sr)


# ---------------------------------------------------------------------------
# Flesaker-Hughston representation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FHRepresentation:
    """Discount bonds as ratios of tail sums of positive martingales.

    m[n][i] is the date-i array of m_in = E_i[g_n], with g_n the
    previsible kernel decrement; the truncated tail beyond the horizon is
    carried by the single pseudo-flow g_{N+1} = pi_N.
    """

    lattice: Lattice
    m: dict  # n -> list of arrays for i = 0..min(n, depth) - ragged

    def tail_sum(self, i: int, start: int) -> np.ndarray:
        """sum_{n >= start} m_in over date-i nodes (tail flow included)."""
        total = None
        for n, arrays in self.m.items():
            if n < start or i >= len(arrays):
                continue
            total = arrays[i] if total is None else total + arrays[i]
        if total is None:
            raise InvalidInputError("empty tail sum")
        return total

    def bond_price(self, i: int, j: int) -> np.ndarray:
        """P_ij = sum_{n>=j+1} m_in / sum_{n>=i+1} m_in."""
        return self.tail_sum(i, j + 1) / self.tail_sum(i, i + 1)


def fh_representation(model: KernelModel) -> FHRepresentation:
    depth = model.depth
    m = {}
    for n in range(1, depth + 2):
        if n <= depth:
            g = model.pi[n - 1] - model.lattice.expect_next(model.pi[n])
            top = n - 1  # g_n known at date n-1
        else:
            g = model.pi[depth]
            top = depth
        arrays = [None] * (top + 1)
        arrays[top] = g
        for i in range(top - 1, -1, -1):
            arrays[i] = model.lattice.expect_next(arrays[i + 1])
        m[n] = arrays
    return FHRepresentation(lattice=model.lattice, m=m)


# ---------------------------------------------------------------------------
# Constant-value asset / axiom checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantValueReport:
    """Residuals of pi_i = E_i[pi_j] + E_i[sum pi_n rbar_n] and of the
    kernel decomposition via the positive-return asset's income."""

    max_identity_residual: float
    max_decomposition_residual: float
    passed: bool


def _transition_values(lattice, fn):
    """fn(i, parent_node, child_node) evaluated for all transitions at i."""
    out = []
    for i in range(1, lattice.depth + 1):
        up = np.array([fn(i, j, j + 1) for j in range(lattice.n_nodes(i - 1))])
        down = np.array([fn(i, j, j) for j in range(lattice.n_nodes(i - 1))])
        out.append((up, down))
    return out


def constant_value_asset_check(model: KernelModel, bbar: Sequence[np.ndarray],
                               tol: float = 1e-13) -> ConstantValueReport:
    """Verify the unit-value asset paying the positive-return asset's income.

    bbar is a strictly increasing adapted positive process (one array per
    date).  Its per-period return rbar_i = (Bbar_i - Bbar_{i-1})/Bbar_{i-1}
    must satisfy, node-wise for all i <= j,

        pi_i = E_i[pi_j] + E_i[ sum_{n=i+1}^j pi_n rbar_n ].
    """
    lattice = model.lattice
    bbar = [np.asarray(b, dtype=float) for b in bbar]
    if len(bbar) != model.depth + 1:
        raise InvalidInputError("need one value array per date")
    for i in range(model.depth):
        up = bbar[i + 1][1:] - bbar[i]
        down = bbar[i + 1][:-1] - bbar[i]
        if np.any(up <= 0.0) or np.any(down <= 0.0):
            raise InvalidInputError("positive-return asset must increase on every path")
    # e_n[node at n-1] = E_{n-1}[pi_n rbar_n], a date-(n-1) node function.
    e_flows = []
    for n in range(1, model.depth + 1):
        rbar_up = bbar[n][1:] / bbar[n - 1] - 1.0
        rbar_down = bbar[n][:-1] / bbar[n - 1] - 1.0
        flow = lattice.q * model.pi[n][1:] * rbar_up \
            + (1.0 - lattice.q) * model.pi[n][:-1] * rbar_down
        e_flows.append(flow)
    worst_identity = 0.0
    worst_decomp = 0.0
    for i in range(model.depth + 1):
        income = np.zeros(lattice.n_nodes(i))
        for j in range(i + 1, model.depth + 1):
            income += lattice.cond_expect(i, j - 1, e_flows[j - 1])
            lhs = lattice.cond_expect(i, j, model.pi[j]) + income
            worst_identity = max(worst_identity,
                                 float(np.max(np.abs(lhs - model.pi[i]))))
        # Truncated decomposition: pi_i = E_i[G_N] - G_i + E_i[pi_N] with
        # G the accumulated income; the identity above at j = N is exactly
        # that statement, so reuse the final residual.
        if i < model.depth:
            decomp = lattice.cond_expect(i, model.depth, model.pi[model.depth]) \
                + income - model.pi[i]
            worst_decomp = max(worst_decomp, float(np.max(np.abs(decomp))))
    scale = float(model.pi[0][0])
    passed = worst_identity <= tol * scale and worst_decomp <= tol * scale
    return ConstantValueReport(max_identity_residual=worst_identity,
                               max_decomposition_residual=worst_decomp,
                               passed=passed)


def lattice_asset_price(model: KernelModel, dividends: Sequence[np.ndarray]) -> list:
    """Ex-dividend price arrays of an asset paying node dividends.

    S_i = E_i[sum_{n > i} pi_n D_n] / pi_i, computed by backward induction.
    """
    dividends = [np.asarray(d, dtype=float) for d in dividends]
    if len(dividends) != model.depth + 1:
        raise InvalidInputError("need one dividend array per date")
    values = [None] * (model.depth + 1)
    acc = np.zeros(model.lattice.n_nodes(model.depth))
    values[model.depth] = acc / model.pi[model.depth]
    for i in range(model.depth - 1, -1, -1):
        acc = model.lattice.expect_next(acc + model.pi[i + 1] * dividends[i + 1])
        values[i] = acc / model.pi[i]
    return values


def axiom_a_residual(model: KernelModel, prices: Sequence[np.ndarray],
                     dividends: Sequence[np.ndarray]) -> float:
    """Max node-wise residual of E_i[pi_{i+1}(S_{i+1} + D_{i+1})] = pi_i S_i."""
    worst = 0.0
    for i in range(model.depth):
        lhs = model.lattice.expect_next(
            model.pi[i + 1] * (np.asarray(prices[i + 1]) + np.asarray(dividends[i + 1])))
        worst = max(worst, float(np.max(np.abs(lhs - model.pi[i] * np.asarray(prices[i])))))
    return worst


# ---------------------------------------------------------------------------
# Kernel construction from an increasing process
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GKernelConstruction:
    """Kernel and positive-return asset built from an increasing process.

    pi_i = E_i[G_N] - G_i + tail, rbar_i = (G_i - G_{i-1})/pi_i,
    Bbar_i = prod (1 + rbar_n).  The deterministic tail > 0 stands in for
    the truncated post-horizon increments and keeps pi positive at N.
    """

    model: KernelModel
    g: list
    tail: float

    def rbar_transitions(self):
        """(up, down) per-period returns indexed by the parent node."""
        lattice = self.model.lattice
        out = []
        for i in range(1, self.model.depth + 1):
            g_up = self.g[i][1:] - self.g[i - 1]
            g_down = self.g[i][:-1] - self.g[i - 1]
            out.append((g_up / self.model.pi[i][1:],
                        g_down / self.model.pi[i][:-1]))
        return out

    def bbar_along_path(self, moves: Sequence[int]) -> np.ndarray:
        nodes = self.model.lattice.path_nodes(moves)
        trans = self.rbar_transitions()
        values = [1.0]
        for i in range(1, len(moves) + 1):
            up, down = trans[i - 1]
            r = up[nodes[i - 1]] if moves[i - 1] else down[nodes[i - 1]]
            values.append(values[-1] * (1.0 + r))
        return np.array(values)

    def rho_martingale_residual(self) -> float:
        """Max node-wise residual of E_{i-1}[pi_i (1 + rbar_i)] = pi_{i-1}."""
        lattice = self.model.lattice
        worst = 0.0
        for i in range(1, self.model.depth + 1):
            lhs = lattice.q * (self.model.pi[i][1:] + self.g[i][1:] - self.g[i - 1]) \
                + (1.0 - lattice.q) * (self.model.pi[i][:-1] + self.g[i][:-1] - self.g[i - 1])
            worst = max(worst, float(np.max(np.abs(lhs - self.model.pi[i - 1]))))
        return worst


def build_kernel_from_G(g_process: Sequence[np.ndarray], lattice: Lattice,
                        tail: float = 0.05) -> GKernelConstruction:
    """Construct (kernel, returns, account) from a strictly increasing G.

    G_0 = 0; G must increase strictly along every transition.  ``tail``
    is the deterministic mass standing in for increments beyond the
    horizon (must be positive: with it, pi_N = tail > 0).
    """
    g = [np.asarray(x, dtype=float) for x in g_process]
    if len(g) != lattice.depth + 1:
        raise InvalidInputError("need one G array per date")
    if g[0].shape != (1,) or g[0][0] != 0.0:
        raise InvalidInputError("G must start at 0")
    for i in range(lattice.depth):
        if np.any(g[i + 1][1:] <= g[i]) or np.any(g[i + 1][:-1] <= g[i]):
            raise InvalidInputError("G must be strictly increasing on every path")
    if tail <= 0.0:
        raise InvalidInputError("tail mass must be positive")
    g_n = g[lattice.depth]
    pi = [None] * (lattice.depth + 1)
    e_gn = g_n.copy()
    pi[lattice.depth] = g_n - g_n + tail
    for i in range(lattice.depth - 1, -1, -1):
        e_gn = lattice.expect_next(e_gn)
        pi[i] = e_gn - g[i] + tail
    model = KernelModel(lattice=lattice, pi=pi)
    return GKernelConstruction(model=model, g=g, tail=tail)


# ---------------------------------------------------------------------------
# Information-based kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InfoFactor:
    """Macro factor revealed at ``revelation`` with its own info process."""

    name: str
    distribution: DiscretePayoff | ContinuousDensity
    sigma: float
    revelation: float
    transform: Callable[[np.ndarray], np.ndarray] = field(default=lambda x: x)


class InfoKernelModel:
    """pi_i = alpha_i + beta_i prod_f E[f(X) | xi_i]: a rational kernel whose
    martingale part is driven by discrete-time information processes.

    Each factor contributes the positive martingale
    N^f_i = E[transform(X_f) | xi_{i}], computed with the discretized
    conditional-expectation formula (horizon = the factor's revelation
    date).  Kernel values depend only on current information values, so
    nothing references unrevealed future observations.
    """

    def __init__(self, dates: Sequence[float], alpha: Sequence[float],
                 beta: Sequence[float], factors: Sequence[InfoFactor]):
        self.dates = np.asarray(dates, dtype=float)
        self.alpha = np.asarray(alpha, dtype=float)
        self.beta = np.asarray(beta, dtype=float)
        if self.dates.ndim != 1 or self.dates.size < 2 or np.any(np.diff(self.dates) <= 0):
            raise InvalidInputError("dates must be strictly increasing")
        if self.alpha.shape != self.dates.shape or self.beta.shape != self.dates.shape:
            raise InvalidInputError("alpha/beta must align with the dates")
        if np.any(self.alpha <= 0) or np.any(self.beta <= 0):
            raise InvalidInputError("alpha and beta must be strictly positive")
        if np.any(np.diff(self.alpha) >= 0) or np.any(np.diff(self.beta) >= 0):
            raise InvalidInputError("alpha and beta must be strictly decreasing")
        if not factors:
            raise InvalidInputError("need at least one information factor")
        last = self.dates[-1]
        for f in factors:
            if f.revelation < last - 1e-12:
                raise InvalidInputError(
                    f"factor {f.name!r} is revealed at {f.revelation}, inside the "
                    "model horizon: kernel values would reference future "
                    "information directly")
        self.factors = tuple(factors)

    def factor_martingale(self, factor: InfoFactor, i: int, xi: float) -> float:
        """N^f_i = E[transform(X) | xi_i] via the Bayes ratio at (t_i, xi)."""
        t_i = self.dates[i]
        spec = InformationProcessSpec(factor.sigma, factor.revelation,
                                      factor.distribution)
        if isinstance(factor.distribution, DiscretePayoff):
            probs = conditional_probs(factor.distribution, spec, t_i, xi)
            return float(probs @ factor.transform(factor.distribution.levels))
        post = conditional_density(factor.distribution, spec, t_i, xi)
        return post.expect(factor.transform)

    def pi(self, i: int, xis: Mapping[str, float]) -> float:
        prod = 1.0
        for f in self.factors:
            prod *= self.factor_martingale(f, i, xis[f.name])
        return float(self.alpha[i] + self.beta[i] * prod)

    def bond_price(self, i: int, j: int, xis: Mapping[str, float]) -> float:
        """P_ij = (alpha_j + beta_j prod N_i)/(alpha_i + beta_i prod N_i).

        The tower property collapses E_i[N_j] to N_i, so the bond is a
        deterministic function of the current information values.
        """
        if not (0 <= i <= j < self.dates.size):
            raise InvalidInputError("need 0 <= i <= j within the date grid")
        prod = 1.0
        for f in self.factors:
            prod *= self.factor_martingale(f, i, xis[f.name])
        return float((self.alpha[j] + self.beta[j] * prod)
                     / (self.alpha[i] + self.beta[i] * prod))


def info_kernel(dates, alpha, beta, factors) -> InfoKernelModel:
    return InfoKernelModel(dates, alpha, beta, factors)


# ---------------------------------------------------------------------------
# Inflation
# ---------------------------------------------------------------------------

@dataclass
class InflationModel:
    """Log-separable-utility monetary economy on a lattice.

    Inputs are strictly positive adapted processes: aggregate consumption
    k, money supply M, liquidity benefit rate lambda.  Outputs:

        price level   C_n = (A/B) lambda_n M_n / k_n
        nominal kernel pi_n = B e^{-gamma t_n} / (mu lambda_n M_n)
        real kernel    pi_n C_n = A e^{-gamma t_n} / (mu k_n)
    """

    lattice: Lattice
    consumption: list
    money: list
    liquidity: list
    util_consumption: float
    util_liquidity: float
    discount_rate: float
    multiplier: float

    def __post_init__(self):
        depth = self.lattice.depth
        for name in ("consumption", "money", "liquidity"):
            arrays = [np.asarray(a, dtype=float) for a in getattr(self, name)]
            if len(arrays) != depth + 1:
                raise InvalidInputError(f"{name} needs one array per date")
            for i, a in enumerate(arrays):
                if a.shape != (self.lattice.n_nodes(i),):
                    raise InvalidInputError(f"{name} array at date {i} has wrong shape")
                if np.any(a <= 0.0):
                    raise InvalidInputError(f"{name} must be strictly positive")
            setattr(self, name, arrays)
        for val, nm in ((self.util_consumption, "A"), (self.util_liquidity, "B"),
                        (self.discount_rate, "gamma"), (self.multiplier, "mu")):
            if val <= 0.0:
                raise InvalidInputError(f"utility parameter {nm} must be positive")

    def price_level(self, i: int) -> np.ndarray:
        a, b = self.util_consumption, self.util_liquidity
        return (a / b) * self.liquidity[i] * self.money[i] / self.consumption[i]

    def nominal_kernel(self, i: int) -> np.ndarray:
        b = self.util_liquidity
        t = self.lattice.dates[i]
        return b * math.exp(-self.discount_rate * t) \
            / (self.multiplier * self.liquidity[i] * self.money[i])

    def real_kernel(self, i: int) -> np.ndarray:
        a = self.util_consumption
        t = self.lattice.dates[i]
        return a * math.exp(-self.discount_rate * t) \
            / (self.multiplier * self.consumption[i])

    def nominal_model(self) -> KernelModel:
        return KernelModel(self.lattice,
                           [self.nominal_kernel(i) for i in range(self.lattice.depth + 1)])

    def price_nominal_claim(self, j: int, payoff: np.ndarray, i: int = 0) -> np.ndarray:
        """Value at date i of a nominal payoff at date j."""
        pi_j = self.nominal_kernel(j)
        return self.lattice.cond_expect(i, j, pi_j * np.asarray(payoff)) \
            / self.nominal_kernel(i)

    def price_index_linked_bond(self, j: int, i: int = 0) -> np.ndarray:
        """Nominal value at i of a bond paying the date-j price level."""
        return self.price_nominal_claim(j, self.price_level(j), i=i)

    def real_discount_bond(self, j: int, i: int = 0) -> np.ndarray:
        """Real (goods-units) value at i of one real unit at j."""
        pi_r = self.real_kernel(j)
        return self.lattice.cond_expect(i, j, pi_r) / self.real_kernel(i)

    def velocity_residual(self) -> float:
        """Max node-wise residual of k C / M = (A/B) lambda."""
        a, b = self.util_consumption, self.util_liquidity
        worst = 0.0
        for i in range(self.lattice.depth + 1):
            lhs = self.consumption[i] * self.price_level(i) / self.money[i]
            rhs = (a / b) * self.liquidity[i]
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        return worst

    def budget_value(self) -> float:
        """E[sum pi_n (C_n k_n + lambda_n M_n)]: the wealth the plan funds."""
        total = 0.0
        for i in range(self.lattice.depth + 1):
            flows = self.nominal_kernel(i) * (
                self.price_level(i) * self.consumption[i]
                + self.liquidity[i] * self.money[i])
            total += float(self.lattice.node_probs(i) @ flows)
        return total


def inflation_model(lattice: Lattice, consumption, money, liquidity,
                    util_consumption: float, util_liquidity: float,
                    discount_rate: float, multiplier: float) -> InflationModel:
    return InflationModel(lattice, list(consumption), list(money), list(liquidity),
                          util_consumption, util_liquidity, discount_rate, multiplier)
