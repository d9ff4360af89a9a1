import itertools
import math

import numpy as np
import pytest

import _oracles as oracles
from infoflow.credit import price_bond
from infoflow.curves import FlatCurve
from infoflow.errors import InvalidInputError, UnsupportedPayoutError
from infoflow.processes import (
    DiscretePayoff,
    ExponentialDensity,
    InformationProcessSpec,
    conditional_probs,
)
from infoflow.equity import SingleDividendAsset, asset_dynamics_coeffs
from infoflow.xfactor import (
    BasketSpec,
    CashFlow,
    CashFlowGraph,
    Const,
    Fac,
    Func,
    Ind,
    MarketScenario,
    Mul,
    XFactor,
    binary_factor,
    build_coupon_bond_graph,
    correlated_pair_demo,
    expectation,
    homogeneous_basket_value,
    one_minus,
    price_asset,
    price_asset_mc,
    price_basket,
    price_cds,
    price_coupon_bond,
    tranche_digital_value,
    volatility_vector,
)

CURVE = FlatCurve(0.05)


def cond_mean_binary(factor, t, xi):
    return conditional_probs(factor.distribution, factor.spec, t, xi) \
        @ factor.distribution.levels


class TestExpectationEngine:
    def test_single_factor_single_date_matches_bond_pricer(self):
        payoff = DiscretePayoff(np.array([0.2, 0.6, 1.0]),
                                np.array([0.25, 0.25, 0.5]))
        fac = XFactor("X", 4.0, payoff, 0.9)
        graph = CashFlowGraph(factors={"X": fac},
                              flows=(CashFlow(4.0, Fac("X")),))
        scen = MarketScenario(t=1.0, info={"X": 0.3})
        got = price_asset(graph, scen, CURVE)
        spec = InformationProcessSpec(0.9, 4.0, payoff)
        want = price_bond(payoff, spec, CURVE, 1.0, 0.3).price
        assert got == pytest.approx(want, abs=1e-15)

    def test_dividend_growth_model(self):
        # D_k = D_0 prod X_j with iid mean 1+g factors:
        # S_0 = D_0 sum P_0Tk (1+g)^k
        g = 0.04
        d0 = 2.0
        dates = [1.0, 2.0, 3.0]
        dist = DiscretePayoff(np.array([0.8, 1.28]), np.array([0.5, 0.5]))
        assert dist.mean() == pytest.approx(1 + g)
        factors = {f"X{k}": XFactor(f"X{k}", dates[k - 1], dist, 0.5)
                   for k in (1, 2, 3)}
        flows = tuple(
            CashFlow(dates[k - 1],
                     Mul(tuple([Const(d0)] + [Fac(f"X{j}") for j in range(1, k + 1)])))
            for k in (1, 2, 3))
        graph = CashFlowGraph(factors=factors, flows=flows)
        scen = MarketScenario(t=0.0, info={f"X{k}": 0.0 for k in (1, 2, 3)})
        got = price_asset(graph, scen, CURVE)
        want = d0 * sum(CURVE.df(dates[k - 1]) * (1 + g) ** k for k in (1, 2, 3))
        assert got == pytest.approx(want, rel=1e-13)

    def test_factorization_matches_joint_enumeration(self):
        # product payouts over independent discrete factors: per-factor
        # means equal full joint enumeration
        rng = np.random.default_rng(6)
        for _ in range(5):
            n_fac = 3
            factors = {}
            for k in range(n_fac):
                levels = np.sort(rng.uniform(0, 1, size=3))
                levels += np.arange(3) * 1e-3  # keep strictly increasing
                probs = rng.dirichlet(np.ones(3))
                probs = np.maximum(probs, 1e-3)
                probs /= probs.sum()
                factors[f"F{k}"] = XFactor(
                    f"F{k}", 3.0, DiscretePayoff(levels, probs), 0.7)
            expr = Mul(tuple(Fac(f"F{k}") for k in range(n_fac)))
            scen = MarketScenario(t=0.8, info={f"F{k}": float(rng.normal())
                                               for k in range(n_fac)})
            got = expectation(expr, factors, scen)
            total = 0.0
            conds = [conditional_probs(factors[f"F{k}"].distribution,
                                       factors[f"F{k}"].spec, 0.8,
                                       scen.info[f"F{k}"])
                     for k in range(n_fac)]
            for combo in itertools.product(range(3), repeat=n_fac):
                p = 1.0
                v = 1.0
                for k, i in enumerate(combo):
                    p *= conds[k][i]
                    v *= factors[f"F{k}"].distribution.levels[i]
                total += p * v
            assert got == pytest.approx(total, abs=1e-12)

    def test_powers_use_exact_moments(self):
        # X^2 of a binary is X; of a 3-level factor it needs the second
        # conditional moment, not the squared mean
        payoff = DiscretePayoff(np.array([0.0, 0.5, 1.0]),
                                np.array([0.3, 0.3, 0.4]))
        fac = XFactor("X", 2.0, payoff, 1.0)
        scen = MarketScenario(t=0.5, info={"X": 0.2})
        got = expectation(Mul((Fac("X"), Fac("X"))), {"X": fac}, scen)
        probs = conditional_probs(payoff, fac.spec, 0.5, 0.2)
        want = float(probs @ payoff.levels ** 2)
        assert got == pytest.approx(want, abs=1e-14)

    def test_indicator_expectation(self):
        payoff = DiscretePayoff(np.array([0.0, 0.5, 1.0]),
                                np.array([0.3, 0.3, 0.4]))
        fac = XFactor("X", 2.0, payoff, 1.0)
        scen = MarketScenario(t=0.5, info={"X": 0.2})
        probs = conditional_probs(payoff, fac.spec, 0.5, 0.2)
        got = expectation(Ind("X", 1), {"X": fac}, scen)
        assert got == pytest.approx(float(probs[1]), abs=1e-15)

    def test_resolved_factor_uses_realized_value(self):
        fac = binary_factor("X", 1.0, 0.7, 0.5)
        scen = MarketScenario(t=1.5, realized={"X": 1.0})
        assert expectation(Fac("X"), {"X": fac}, scen) == 1.0
        with pytest.raises(InvalidInputError):
            expectation(Fac("X"), {"X": fac}, MarketScenario(t=1.5))

    def test_opaque_payout_joint_enumeration(self):
        f1 = binary_factor("A", 2.0, 0.6, 0.8)
        f2 = binary_factor("B", 2.0, 0.7, 0.4)
        factors = {"A": f1, "B": f2}
        scen = MarketScenario(t=0.5, info={"A": 0.1, "B": -0.2})
        fn = Func(("A", "B"), lambda a, b: max(a + b - 1.0, 0.0))
        got = expectation(fn, factors, scen)
        ea = cond_mean_binary(f1, 0.5, 0.1)
        eb = cond_mean_binary(f2, 0.5, -0.2)
        want = ea * eb  # payoff is 1 only when both pay
        assert got == pytest.approx(want, abs=1e-14)

    def test_opaque_payout_continuous_quadrature(self):
        prior = ExponentialDensity(1.0)
        fac = XFactor("D", 2.0, prior, 0.5)
        scen = MarketScenario(t=1.0, info={"D": 0.3})
        got = expectation(Func(("D",), lambda d: math.sqrt(d)), {"D": fac}, scen)
        from infoflow.processes import conditional_density
        post = conditional_density(prior, fac.spec, 1.0, 0.3)
        want = post.expect(np.sqrt)
        assert got == pytest.approx(want, rel=1e-8)

    def test_ex_dividend_exclusion(self):
        fac = binary_factor("X", 1.0, 0.8, 0.5)
        graph = CashFlowGraph(factors={"X": fac},
                              flows=(CashFlow(1.0, Fac("X")),))
        scen = MarketScenario(t=1.0, realized={"X": 1.0})
        assert price_asset(graph, scen, CURVE) == 0.0

    def test_ex_dividend_drop_equals_flow(self):
        # the price drops by exactly the realized flow across a payment
        fac = binary_factor("X", 1.0, 0.8, 0.5)
        graph = CashFlowGraph(factors={"X": fac},
                              flows=(CashFlow(2.0, Fac("X")),
                                     CashFlow(3.0, Const(0.4))))
        eps = 1e-9
        before = price_asset(graph, MarketScenario(t=2.0 - eps, realized={"X": 1.0}),
                             CURVE)
        after = price_asset(graph, MarketScenario(t=2.0, realized={"X": 1.0}),
                            CURVE)
        drop = before - after
        assert drop == pytest.approx(1.0, abs=1e-6)

    def test_flow_cannot_use_later_factor(self):
        fac = binary_factor("X", 3.0, 0.8, 0.5)
        with pytest.raises(InvalidInputError):
            CashFlowGraph(factors={"X": fac}, flows=(CashFlow(2.0, Fac("X")),))

    def test_mc_price_agrees(self):
        f1 = binary_factor("A", 2.0, 0.6, 0.8)
        f2 = binary_factor("B", 3.0, 0.7, 0.4)
        graph = CashFlowGraph(
            factors={"A": f1, "B": f2},
            flows=(CashFlow(2.0, Fac("A")),
                   CashFlow(3.0, Mul((Fac("A"), Fac("B"))))))
        scen = MarketScenario(t=0.5, info={"A": 0.1, "B": -0.2})
        exact = price_asset(graph, scen, CURVE)
        mc, se = price_asset_mc(graph, scen, CURVE, 200_000, 8)
        assert abs(mc - exact) < 3 * se


class TestCouponBond:
    def test_no_default_risk_free(self):
        price = price_coupon_bond(
            0.05, 1.0, [1.0, 2.0, 3.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0],
            [1.0, 1.0, 1.0],
            MarketScenario(t=0.0, info={f"X{k}": 0.0 for k in (1, 2, 3)}),
            CURVE)
        want = 0.05 * (CURVE.df(1.0) + CURVE.df(2.0)) + 1.05 * CURVE.df(3.0)
        assert price == pytest.approx(want, abs=1e-14)

    def test_zero_recovery_two_coupons_direct_formula(self):
        c, p = 0.04, 1.0
        dates = [1.0, 2.0]
        dp = [0.15, 0.1]
        sig = [0.8, 0.6]
        scen = MarketScenario(t=0.4, info={"X1": 0.25, "X2": -0.1})
        price = price_coupon_bond(c, p, dates, [0.0, 0.0], dp, sig, scen, CURVE)
        f1 = binary_factor("X1", 1.0, 1 - dp[0], sig[0])
        f2 = binary_factor("X2", 2.0, 1 - dp[1], sig[1])
        e1 = cond_mean_binary(f1, 0.4, 0.25)
        e2 = cond_mean_binary(f2, 0.4, -0.1)
        p1 = CURVE.df(1.0) / CURVE.df(0.4)
        p2 = CURVE.df(2.0) / CURVE.df(0.4)
        want = c * p1 * e1 + (c + p) * p2 * e1 * e2
        assert price == pytest.approx(want, abs=1e-12)

    def test_three_coupons_with_recovery_vs_mc(self):
        c, p = 0.05, 1.0
        dates = [1.0, 2.0, 3.0]
        recovery = [0.3, 0.35, 0.4]
        dp = [0.1, 0.12, 0.15]
        sig = [0.9, 0.7, 0.5]
        scen = MarketScenario(t=0.6, info={"X1": 0.2, "X2": -0.3, "X3": 0.05})
        price = price_coupon_bond(c, p, dates, recovery, dp, sig, scen, CURVE)
        graph = build_coupon_bond_graph(c, p, dates, recovery, dp, sig)
        mc, se = price_asset_mc(graph, scen, CURVE, 400_000, 5)
        assert abs(price - mc) < 3 * se

    def test_exhaustive_enumeration(self):
        c, p = 0.05, 1.0
        dates = [1.0, 2.0, 3.0]
        recovery = [0.3, 0.35, 0.4]
        dp = [0.1, 0.12, 0.15]
        sig = [0.9, 0.7, 0.5]
        scen = MarketScenario(t=0.6, info={"X1": 0.2, "X2": -0.3, "X3": 0.05})
        price = price_coupon_bond(c, p, dates, recovery, dp, sig, scen, CURVE)
        factors = [binary_factor(f"X{k+1}", dates[k], 1 - dp[k], sig[k])
                   for k in range(3)]
        means = [cond_mean_binary(f, 0.6, scen.info[f.factor_id])
                 for f in factors]
        total = 0.0
        for combo in itertools.product((0, 1), repeat=3):
            pr = math.prod(m if b else (1 - m) for b, m in zip(combo, means))
            flows = 0.0
            x = combo
            cp = c + p
            h1 = c * x[0] + recovery[0] * cp * (1 - x[0])
            h2 = c * x[0] * x[1] + recovery[1] * cp * x[0] * (1 - x[1])
            h3 = cp * x[0] * x[1] * x[2] + recovery[2] * cp * x[0] * x[1] * (1 - x[2])
            for d, h in zip(dates, (h1, h2, h3)):
                flows += CURVE.df(d) / CURVE.df(0.6) * h
            total += pr * flows
        assert price == pytest.approx(total, abs=1e-13)


class TestCDS:
    def make_factors(self, p1=0.9, p2=0.85):
        return (binary_factor("X1", 1.0, p1, 0.8),
                binary_factor("X2", 2.0, p2, 0.6))

    def test_certain_no_default(self):
        f1, f2 = self.make_factors(1.0, 1.0)
        scen = MarketScenario(t=0.2, info={"X1": 0.0, "X2": 0.0})
        v = price_cds(0.02, 0.5, f1, f2, scen, CURVE)
        p1 = CURVE.df(1.0) / CURVE.df(0.2)
        p2 = CURVE.df(2.0) / CURVE.df(0.2)
        assert v == pytest.approx(0.02 * (p1 + p2), abs=1e-14)

    def test_certain_immediate_default(self):
        f1, f2 = self.make_factors(0.0, 0.85)
        scen = MarketScenario(t=0.2, info={"X1": 0.0, "X2": 0.0})
        v = price_cds(0.02, 0.5, f1, f2, scen, CURVE)
        p1 = CURVE.df(1.0) / CURVE.df(0.2)
        assert v == pytest.approx(-0.5 * p1, abs=1e-14)

    def test_generic_term_by_term(self):
        f1, f2 = self.make_factors()
        scen = MarketScenario(t=0.3, info={"X1": 0.2, "X2": -0.1})
        v = price_cds(0.02, 0.5, f1, f2, scen, CURVE)
        e1 = cond_mean_binary(f1, 0.3, 0.2)
        e2 = cond_mean_binary(f2, 0.3, -0.1)
        p1 = CURVE.df(1.0) / CURVE.df(0.3)
        p2 = CURVE.df(2.0) / CURVE.df(0.3)
        g, n = 0.02, 0.5
        want = (g * p1 * e1 - n * p1 * (1 - e1)
                + g * p2 * e1 * e2 - n * p2 * e1 * (1 - e2))
        assert v == pytest.approx(want, abs=1e-14)


class TestBaskets:
    def test_single_bond_reduces_to_digital(self):
        basket = BasketSpec(maturities=(2.0,), pay_probs={"": 0.8},
                            sigmas={"": 1.0})
        scen = MarketScenario(t=0.5, info={basket.factor_id(""): 0.3})
        got = price_basket(basket, scen, CURVE)
        fac = binary_factor("N_root", 2.0, 0.8, 1.0)
        want = CURVE.df(2.0) / CURVE.df(0.5) * cond_mean_binary(fac, 0.5, 0.3)
        assert got.per_bond[0] == pytest.approx(want, abs=1e-14)
        assert got.total == pytest.approx(want, abs=1e-14)

    def test_two_bond_a_priori_probability(self):
        p, p0, p1 = 0.9, 0.8, 0.95
        basket = BasketSpec(maturities=(1.0, 2.0),
                            pay_probs={"": p, "0": p0, "1": p1},
                            sigmas={"": 1.0, "0": 1.0, "1": 1.0})
        scen = MarketScenario(
            t=0.0, info={basket.factor_id(k): 0.0 for k in ("", "0", "1")})
        got = price_basket(basket, scen, CURVE)
        want = CURVE.df(2.0) * (p0 + p * (p1 - p0))
        assert got.per_bond[1] == pytest.approx(want, abs=1e-14)

    def test_three_bond_exhaustive_enumeration(self):
        rng = np.random.default_rng(12)
        keys = ["", "0", "1", "00", "01", "10", "11"]
        pay = {k: float(rng.uniform(0.55, 0.95)) for k in keys}
        sig = {k: float(rng.uniform(0.4, 1.2)) for k in keys}
        basket = BasketSpec(maturities=(1.0, 2.0, 3.0), pay_probs=pay,
                            sigmas=sig)
        t = 0.4
        scen = MarketScenario(
            t=t, info={basket.factor_id(k): float(rng.normal(scale=0.5))
                       for k in keys})
        got = price_basket(basket, scen, CURVE)
        factors = basket.factors()
        means = {k: cond_mean_binary(factors[basket.factor_id(k)], t,
                                     scen.info[basket.factor_id(k)])
                 for k in keys}
        # enumerate the 2^7 outcomes of all factors
        want = np.zeros(3)
        for bits in itertools.product((0, 1), repeat=7):
            outcome = dict(zip(keys, bits))
            pr = math.prod(means[k] if b else 1 - means[k]
                           for k, b in outcome.items())
            payoffs = [outcome[""]]
            h2 = outcome[""] * outcome["1"] + (1 - outcome[""]) * outcome["0"]
            payoffs.append(h2)
            h3 = (outcome[""] * outcome["1"] * outcome["11"]
                  + outcome[""] * (1 - outcome["1"]) * outcome["10"]
                  + (1 - outcome[""]) * outcome["0"] * outcome["01"]
                  + (1 - outcome[""]) * (1 - outcome["0"]) * outcome["00"])
            payoffs.append(h3)
            want += pr * np.array(payoffs)
        want *= np.array([CURVE.df(m) / CURVE.df(t) for m in (1.0, 2.0, 3.0)])
        np.testing.assert_allclose(got.per_bond, want, atol=1e-14)

    def test_size_cap(self):
        with pytest.raises(UnsupportedPayoutError):
            BasketSpec(maturities=tuple(float(k) for k in range(1, 14)),
                       pay_probs={}, sigmas={})


class TestHomogeneousBasket:
    def test_no_defaults_possible(self):
        scen = MarketScenario(t=0.5, info={f"Z{j}": 0.0 for j in (1, 2, 3)})
        v = homogeneous_basket_value(3, [0.0, 0.0, 0.0], [1.0] * 3, 4.0,
                                     scen, CURVE)
        assert v == pytest.approx(3 * CURVE.df(4.0) / CURVE.df(0.5), abs=1e-14)

    def test_first_default_certain_second_impossible(self):
        scen = MarketScenario(t=0.5, info={f"Z{j}": 0.0 for j in (1, 2, 3)})
        v = homogeneous_basket_value(3, [1.0, 0.0, 0.0], [1.0] * 3, 4.0,
                                     scen, CURVE)
        assert v == pytest.approx(2 * CURVE.df(4.0) / CURVE.df(0.5), abs=1e-14)

    def test_generic_against_enumeration_n5(self):
        rng = np.random.default_rng(4)
        n = 5
        probs = rng.uniform(0.2, 0.8, size=n)
        sig = rng.uniform(0.5, 1.5, size=n)
        scen = MarketScenario(t=0.0, info={f"Z{j+1}": 0.0 for j in range(n)})
        v = homogeneous_basket_value(n, probs, sig, 4.0, scen, CURVE)
        total = 0.0
        for combo in itertools.product((0, 1), repeat=n):
            pr = math.prod(p if b else 1 - p for b, p in zip(combo, probs))
            h = n
            running = 1
            for b in combo:
                running *= b
                h -= running
            total += pr * h
        assert v == pytest.approx(CURVE.df(4.0) * total, abs=1e-13)

    def test_tranche_digital(self):
        scen = MarketScenario(t=0.0, info={f"Z{j+1}": 0.0 for j in range(5)})
        probs = [0.3, 0.4, 0.5, 0.6, 0.7]
        v = tranche_digital_value(3, probs, [1.0] * 5, 4.0, scen, CURVE)
        assert v == pytest.approx(CURVE.df(4.0) * 0.3 * 0.4 * 0.5, abs=1e-14)


class TestVolatilityVector:
    def test_unused_factor_has_zero_vol(self):
        f1 = binary_factor("A", 2.0, 0.8, 0.9)
        f2 = binary_factor("B", 2.0, 0.7, 0.5)
        graph = CashFlowGraph(factors={"A": f1, "B": f2},
                              flows=(CashFlow(2.0, Fac("A")),))
        scen = MarketScenario(t=0.5, info={"A": 0.2, "B": 0.1})
        gammas, total = volatility_vector(graph, scen, CURVE)
        assert gammas["B"] == 0.0
        assert total == pytest.approx(abs(gammas["A"]))

    def test_single_factor_matches_equity_vol(self):
        prior = ExponentialDensity(1.0)
        fac = XFactor("D", 2.0, prior, 0.5)
        graph = CashFlowGraph(factors={"D": fac},
                              flows=(CashFlow(2.0, Fac("D")),))
        scen = MarketScenario(t=1.0, info={"D": 0.3})
        gammas, total = volatility_vector(graph, scen, CURVE)
        spec = InformationProcessSpec(0.5, 2.0, prior)
        asset = SingleDividendAsset(prior, spec, CURVE)
        _, want = asset_dynamics_coeffs(asset, 1.0, 0.3)
        # discounting reference time differs: rescale to t = 1 money
        want_t = want / CURVE.df(1.0) * CURVE.df(1.0)
        assert total == pytest.approx(want_t, rel=1e-10)

    def test_two_factor_product_vs_finite_difference(self):
        f1 = binary_factor("A", 2.0, 0.85, 0.9)
        f2 = binary_factor("B", 2.0, 0.7, 0.5)
        graph = CashFlowGraph(factors={"A": f1, "B": f2},
                              flows=(CashFlow(2.0, Mul((Fac("A"), Fac("B")))),))
        scen = MarketScenario(t=0.6, info={"A": 0.3, "B": -0.2})
        gammas, _ = volatility_vector(graph, scen, CURVE)
        h = 1e-6
        for fid in ("A", "B"):
            up = dict(scen.info)
            dn = dict(scen.info)
            up[fid] += h
            dn[fid] -= h
            pu = price_asset(graph, MarketScenario(t=0.6, info=up), CURVE)
            pd = price_asset(graph, MarketScenario(t=0.6, info=dn), CURVE)
            fd = (pu - pd) / (2 * h)
            assert gammas[fid] == pytest.approx(fd, rel=1e-5)

    def test_unhedgeable_stochastic_volatility(self):
        # with two live factors the total vol is not a function of the
        # price: within price bins its dispersion dwarfs numerical noise
        f1 = binary_factor("A", 2.0, 0.8, 1.2)
        f2 = binary_factor("B", 2.0, 0.75, 0.8)
        graph = CashFlowGraph(factors={"A": f1, "B": f2},
                              flows=(CashFlow(2.0, Mul((Fac("A"), Fac("B")))),))
        rng = np.random.default_rng(9)
        prices, vols = [], []
        for _ in range(400):
            scen = MarketScenario(t=0.7, info={"A": float(rng.normal()),
                                               "B": float(rng.normal())})
            prices.append(price_asset(graph, scen, CURVE))
            vols.append(volatility_vector(graph, scen, CURVE)[1])
        prices = np.array(prices)
        vols = np.array(vols)
        edges = np.quantile(prices, np.linspace(0, 1, 11))
        dispersions = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            mask = (prices >= lo) & (prices <= hi)
            if mask.sum() >= 10:
                dispersions.append(vols[mask].std())
        assert max(dispersions) > 10 * 1e-10  # far above numerical noise


class TestCorrelatedPair:
    def test_no_shared_factor_uncorrelated(self):
        # make the shared driver degenerate: certain payment
        scen = MarketScenario(t=0.3, info={"X2": 0.1}, realized={})
        p1, p2, rho = correlated_pair_demo(
            1.0, 1.0, 0.4, 0.3, 0.5, 0.2, 1.0, 0.8, 0.9, 0.7, 1.0, 2.0,
            MarketScenario(t=0.3, info={"X1": 0.0, "X2": 0.1}), CURVE)
        assert rho == pytest.approx(0.0, abs=1e-14)

    def test_full_dependence(self):
        # bond 2 payoff proportional to bond 1's at the same date: with X2
        # degenerate (p2 = 1) and all recoveries 0.4, H2 = 2 H1, so the
        # instantaneous correlation is 1
        with pytest.warns(UserWarning):
            p1, p2, rho = correlated_pair_demo(
                1.0, 2.0, 0.4, 0.4, 0.4, 0.4, 0.8, 1.0, 0.9, 0.7, 2.0, 2.0,
                MarketScenario(t=0.3, info={"X1": 0.0, "X2": 0.0}), CURVE)
        assert abs(rho) == pytest.approx(1.0, abs=1e-12)

    def test_generic_against_mc_increment_correlation(self):
        n1, n2 = 1.0, 1.0
        r1, r2a, r2b, r2c = 0.4, 0.35, 0.5, 0.2
        p1pay, p2pay = 0.85, 0.75
        s1, s2 = 0.9, 0.7
        t1, t2 = 1.0, 2.0
        t = 0.5
        scen = MarketScenario(t=t, info={"X1": 0.2, "X2": -0.1})
        _, _, rho = correlated_pair_demo(n1, n2, r1, r2a, r2b, r2c,
                                         p1pay, p2pay, s1, s2, t1, t2, scen,
                                         CURVE)
        # one-step MC: propagate both information processes a short step
        # from the conditional posteriors and correlate price increments
        rng = np.random.default_rng(30)
        n = 60_000
        dt = 0.01
        f1 = binary_factor("X1", t1, p1pay, s1)
        f2 = binary_factor("X2", t2, p2pay, s2)
        pay1 = lambda x1: n1 * x1 + r1 * n1 * (1 - x1)
        pay2 = lambda x1, x2: n2 * (x1 * x2 + r2a * (1 - x1) * x2
                                    + r2b * x1 * (1 - x2)
                                    + r2c * (1 - x1) * (1 - x2))
        def advance(fac, xi_t, rng):
            # exact one-step transition via the restarted bridge
            T = fac.revelation
            post = conditional_probs(fac.distribution, fac.spec, t, xi_t)
            x = rng.choice(fac.distribution.levels, size=n, p=post)
            sig_t = fac.sigma * T / (T - t)
            u = dt
            var = u * (T - t - u) / (T - t)
            eta = sig_t * x * u + rng.standard_normal(n) * math.sqrt(var)
            return x, eta + (T - t - u) / (T - t) * xi_t
        x1, xi1_next = advance(f1, 0.2, rng)
        x2, xi2_next = advance(f2, -0.1, rng)
        e1n = oracles.posterior_matrix(f1.distribution.levels, f1.distribution.probs,
                                       s1, t1, t + dt, xi1_next) @ f1.distribution.levels
        e2n = oracles.posterior_matrix(f2.distribution.levels, f2.distribution.probs,
                                       s2, t2, t + dt, xi2_next) @ f2.distribution.levels
        p1_next = CURVE.df(t1) / CURVE.df(t + dt) * (n1 * e1n + r1 * n1 * (1 - e1n))
        p2_next = CURVE.df(t2) / CURVE.df(t + dt) * n2 * (
            e1n * e2n + r2a * (1 - e1n) * e2n + r2b * e1n * (1 - e2n)
            + r2c * (1 - e1n) * (1 - e2n))
        dc = np.corrcoef(p1_next, p2_next)[0, 1]
        # correlation of small increments approximates the instantaneous one
        assert abs(dc - rho) < 0.05


class TestExpansionGuards:
    def test_indicator_on_continuous_rejected(self):
        prior = ExponentialDensity(1.0)
        fac = XFactor("D", 2.0, prior, 0.5)
        scen = MarketScenario(t=1.0, info={"D": 0.3})
        with pytest.raises(UnsupportedPayoutError):
            expectation(Ind("D", 0), {"D": fac}, scen)

    def test_too_many_quadrature_dims_rejected(self):
        prior = ExponentialDensity(1.0)
        factors = {f"D{k}": XFactor(f"D{k}", 2.0, prior, 0.5) for k in range(4)}
        scen = MarketScenario(t=1.0, info={f"D{k}": 0.0 for k in range(4)})
        fn = Func(tuple(factors), lambda *xs: sum(xs) ** 0.5)
        with pytest.raises(UnsupportedPayoutError):
            expectation(fn, factors, scen)
