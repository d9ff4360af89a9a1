"""Command-line front end.

    infoflow simulate|price|reduce|rates|ad-density|verify
             --config <path> --seed <u64> --out <dir> --format csv|json

Configs are JSON with explicit unit tags on dimensioned quantities
({"value": 5.0, "unit": "years"}); bare numbers for times or rates are
rejected.  Exit codes: 0 ok, 2 config error, 3 numeric divergence,
4 verification failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import arrow_debreu, credit, equity, options, rates, zfactor
from .curves import FlatCurve
from .errors import (
    DegenerateDistributionError,
    DivergenceError,
    GreeksUndefinedError,
    InfoFlowError,
    InvalidInputError,
)
from .processes import (
    DiscretePayoff,
    ExponentialDensity,
    GammaDensity,
    GaussianDensity,
    InformationProcessSpec,
    TimeGrid,
    conditional_probs,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_VERIFY = 4


class ConfigError(Exception):
    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _require(cfg: dict, key: str, path: str):
    if key not in cfg:
        raise ConfigError("missing field", f"{path}.{key}" if path else key)
    return cfg[key]


def _quantity(cfg: dict, key: str, unit: str, path: str) -> float:
    """Dimensioned quantities must carry an explicit unit tag."""
    raw = _require(cfg, key, path)
    here = f"{path}.{key}" if path else key
    if not isinstance(raw, dict) or "value" not in raw or "unit" not in raw:
        raise ConfigError(
            f'expected {{"value": ..., "unit": "{unit}"}}; bare numbers are '
            "rejected to keep units explicit", here)
    if raw["unit"] != unit:
        raise ConfigError(f'unit must be "{unit}", got "{raw["unit"]}"', here)
    try:
        return float(raw["value"])
    except (TypeError, ValueError):
        raise ConfigError("value must be a number", here)


def _payoff(cfg: dict, path: str) -> DiscretePayoff:
    levels = _require(cfg, "levels", path)
    probs = _require(cfg, "probs", path)
    try:
        return DiscretePayoff(np.asarray(levels, dtype=float),
                              np.asarray(probs, dtype=float))
    except InfoFlowError as exc:
        raise ConfigError(str(exc), path)


def _density(cfg: dict, path: str):
    kind = _require(cfg, "kind", path)
    try:
        if kind == "exponential":
            return ExponentialDensity(float(_require(cfg, "delta", path)))
        if kind == "gamma":
            return GammaDensity(float(_require(cfg, "delta", path)),
                                int(_require(cfg, "n", path)))
        if kind == "gaussian":
            return GaussianDensity(float(_require(cfg, "mean", path)),
                                   float(_require(cfg, "var", path)))
    except InfoFlowError as exc:
        raise ConfigError(str(exc), path)
    raise ConfigError(f"unknown density kind {kind!r}", path)


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}")


def _write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

DEFAULT_SIGMAS = (0.04, 0.2, 1.0, 5.0)


def cmd_simulate(cfg: dict, seed: int, out_dir: str, fmt: str) -> int:
    """Bond price paths across the information-rate regimes.

    Emits one file per (sigma, conditioning) pair; conditioning "all"
    stratifies the factor draws in the a-priori proportions, "nodefault"
    and "default" pin the outcome.
    """
    maturity = _quantity(cfg, "maturity", "years", "simulate")
    rate = _quantity(cfg, "short_rate", "rate", "simulate")
    payoff = _payoff(_require(cfg, "bond", "simulate"), "simulate.bond")
    sigmas = cfg.get("sigmas", list(DEFAULT_SIGMAS))
    n_paths = int(cfg.get("n_paths", 10))
    steps = int(cfg.get("steps_per_year", 250))
    t_end = float(cfg.get("grid_fraction", 0.999)) * maturity
    curve = FlatCurve(rate)
    grid = TimeGrid.regular(maturity, steps_per_year=steps, t_end=t_end)
    if not payoff.is_binary:
        raise ConfigError("simulate expects a binary bond", "simulate.bond")
    h0, h1 = payoff.levels
    p_default = float(payoff.probs[0])
    written = []
    for sigma in sigmas:
        spec = InformationProcessSpec(float(sigma), maturity, payoff)
        for label, cond in (("all", None), ("nodefault", h1), ("default", h0)):
            if cond is None:
                n_def = int(round(p_default * n_paths))
                sim_def = credit.simulate_bond_paths(
                    payoff, spec, curve, grid, max(n_def, 1), seed,
                    conditioned_value=h0)
                sim_pay = credit.simulate_bond_paths(
                    payoff, spec, curve, grid, max(n_paths - n_def, 1), seed + 1,
                    conditioned_value=h1)
                prices = np.hstack([sim_def.prices[:, :n_def],
                                    sim_pay.prices[:, :n_paths - n_def]])
                terminal = np.concatenate([sim_def.terminal_values[:n_def],
                                           sim_pay.terminal_values[:n_paths - n_def]])
                sim = credit.BondPathSimulation(grid=grid, prices=prices,
                                                terminal_values=terminal)
            else:
                sim = credit.simulate_bond_paths(payoff, spec, curve, grid,
                                                 n_paths, seed,
                                                 conditioned_value=cond)
            name = f"paths_sigma{sigma:g}_{label}"
            if fmt == "csv":
                fname = os.path.join(out_dir, name + ".csv")
                sim.to_csv(fname)
            else:
                fname = os.path.join(out_dir, name + ".json")
                _write_json(fname, {
                    "t": [_fmt(t) for t in grid.points],
                    "paths": [[_fmt(v) for v in row] for row in sim.prices.T],
                    "terminal_factor": [_fmt(v) for v in sim.terminal_values],
                })
            written.append(fname)
    _write_json(os.path.join(out_dir, "simulate_manifest.json"), {
        "files": [os.path.basename(f) for f in written],
        "seed": seed,
        "sigmas": list(sigmas),
    })
    print(f"wrote {len(written)} path files to {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# price
# ---------------------------------------------------------------------------

def _price_bond_report(cfg, seed):
    maturity = _quantity(cfg, "maturity", "years", "price")
    rate = _quantity(cfg, "short_rate", "rate", "price")
    t = _quantity(cfg, "t", "years", "price")
    payoff = _payoff(_require(cfg, "bond", "price"), "price.bond")
    sigma = float(_require(cfg, "sigma", "price"))
    xi = float(cfg.get("xi", 0.0))
    spec = InformationProcessSpec(sigma, maturity, payoff)
    state = credit.price_bond(payoff, spec, FlatCurve(rate), t, xi)
    return {
        "value": state.price,
        "method": "posterior-mean closed form",
        "tolerance": 0.0,
        "diagnostics": {
            "cond_mean": state.cond_mean,
            "cond_var": state.cond_var,
            "abs_vol": state.abs_vol,
            "vol_of_vol": state.vol_of_vol,
        },
    }


def _price_option_report(cfg, seed):
    maturity = _quantity(cfg, "maturity", "years", "price")
    expiry = _quantity(cfg, "expiry", "years", "price")
    rate = _quantity(cfg, "short_rate", "rate", "price")
    payoff = _payoff(_require(cfg, "bond", "price"), "price.bond")
    sigma = float(_require(cfg, "sigma", "price"))
    strike = float(_require(cfg, "strike", "price"))
    curve = FlatCurve(rate)
    spec = InformationProcessSpec(sigma, maturity, payoff)
    opt = options.OptionSpec(strike, expiry, payoff, spec, curve)
    p_tT = curve.forward(expiry, maturity)
    if strike <= p_tT * payoff.levels[0]:
        branch = "sure-exercise"
    elif strike >= p_tT * payoff.levels[-1]:
        branch = "worthless"
    else:
        branch = "mixed"
    if payoff.is_binary:
        value = options.price_binary_call(opt)
        method = "binary closed form"
        # Cross-check against the Arrow-Debreu quadrature route.
        ad = arrow_debreu.ad_density(spec, payoff, expiry, curve)

        def bond_call(x):
            probs = conditional_probs(payoff, spec, expiry, x)
            return max(p_tT * float(probs @ payoff.levels) - strike, 0.0)

        via_ad = arrow_debreu.price_info_derivative(ad, bond_call)
        agreement = abs(via_ad - value) <= 1e-8 * max(1.0, abs(value))
        diagnostics = {"branch": branch, "arrow_debreu_value": via_ad,
                       "cross_method_agreement": bool(agreement)}
        tol = 1e-8
    else:
        value = options.price_multirecovery_call(opt)
        method = "multi-recovery semi-analytic"
        diagnostics = {"branch": branch}
        tol = 1e-10
    return {"value": value, "method": method, "tolerance": tol,
            "diagnostics": diagnostics}


def _price_greeks_report(cfg, seed):
    maturity = _quantity(cfg, "maturity", "years", "price")
    expiry = _quantity(cfg, "expiry", "years", "price")
    rate = _quantity(cfg, "short_rate", "rate", "price")
    payoff = _payoff(_require(cfg, "bond", "price"), "price.bond")
    sigma = float(_require(cfg, "sigma", "price"))
    strike = float(_require(cfg, "strike", "price"))
    spec = InformationProcessSpec(sigma, maturity, payoff)
    opt = options.OptionSpec(strike, expiry, payoff, spec, FlatCurve(rate))
    g = options.greeks(opt)
    return {"value": {"vega": g.vega, "delta": g.delta},
            "method": "closed-form sensitivities", "tolerance": 0.0,
            "diagnostics": {}}


def _price_equity_report(cfg, seed):
    maturity = _quantity(cfg, "maturity", "years", "price")
    rate = _quantity(cfg, "short_rate", "rate", "price")
    t = _quantity(cfg, "t", "years", "price")
    sigma = float(_require(cfg, "sigma", "price"))
    xi = float(cfg.get("xi", 0.0))
    prior = _density(_require(cfg, "dividend", "price"), "price.dividend")
    spec = InformationProcessSpec(sigma, maturity, prior)
    asset = equity.SingleDividendAsset(prior, spec, FlatCurve(rate))
    value = equity.price_single_dividend(asset, t, xi)
    via_quad = equity.price_single_dividend(asset, t, xi, method="quad")
    return {"value": value, "method": "posterior-mean closed form",
            "tolerance": 1e-8,
            "diagnostics": {"quadrature_value": via_quad,
                            "cross_method_agreement":
                                bool(abs(via_quad - value) <= 1e-8 * max(1.0, abs(value)))}}


PRICE_PRODUCTS = {
    "bond": _price_bond_report,
    "binary_call": _price_option_report,
    "multirecovery_call": _price_option_report,
    "greeks": _price_greeks_report,
    "single_dividend": _price_equity_report,
}


def cmd_price(cfg: dict, seed: int, out_dir: str, fmt: str) -> int:
    product = _require(cfg, "product", "price")
    handler = PRICE_PRODUCTS.get(product)
    if handler is None:
        raise ConfigError(f"unknown product {product!r} "
                          f"(choose from {sorted(PRICE_PRODUCTS)})", "price.product")
    report = handler(cfg, seed)
    path = os.path.join(out_dir, "price_report.json")
    _write_json(path, report)
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# reduce
# ---------------------------------------------------------------------------

def cmd_reduce(cfg: dict, seed: int, out_dir: str, fmt: str) -> int:
    joint_cfg = _require(cfg, "joint", "reduce")
    try:
        joint = {tuple(ch == "1" for ch in key): float(v)
                 for key, v in joint_cfg.items()}
    except (TypeError, AttributeError):
        raise ConfigError("joint must map '0'/'1' pattern strings to probabilities",
                          "reduce.joint")
    for key in joint_cfg:
        if not set(key) <= {"0", "1"}:
            raise ConfigError(f"pattern {key!r} must use only '0'/'1'", "reduce.joint")
    try:
        p_x = zfactor.x_probs_from_joint(joint)
    except DegenerateDistributionError as exc:
        print(f"degenerate joint distribution: {exc} (node {exc.node})",
              file=sys.stderr)
        return EXIT_NUMERIC
    except InfoFlowError as exc:
        raise ConfigError(str(exc), "reduce.joint")
    n = len(next(iter(joint)))
    tree = zfactor.build_reduction(n)
    round_trip = zfactor.joint_from_x_probs(tree, p_x)
    max_err = max(abs(round_trip[k] - v) for k, v in
                  (( (tuple(bool(b) for b in key)), val) for key, val in joint.items()))
    text = zfactor.render_reduction(tree)
    with open(os.path.join(out_dir, "reduction.txt"), "w") as fh:
        fh.write(text + "\n")
    if fmt == "csv":
        with open(os.path.join(out_dir, "x_probs.csv"), "w") as fh:
            fh.write("node,p\n")
            for node in sorted(p_x):
                fh.write(f"{node},{_fmt(p_x[node])}\n")
    else:
        _write_json(os.path.join(out_dir, "x_probs.json"),
                    {str(k): p_x[k] for k in sorted(p_x)})
    _write_json(os.path.join(out_dir, "reduce_report.json"), {
        "n": n, "n_x_factors": tree.n_x_factors,
        "round_trip_max_abs_err": max_err,
        "round_trip_ok": bool(max_err < 1e-13),
    })
    print(text)
    print(f"round-trip max abs err: {max_err:.3g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# rates
# ---------------------------------------------------------------------------

def cmd_rates(cfg: dict, seed: int, out_dir: str, fmt: str) -> int:
    model_kind = cfg.get("model", "rational")
    if model_kind == "rational":
        return _rates_rational(cfg, out_dir, fmt)
    if model_kind == "inflation":
        return _rates_inflation(cfg, out_dir, fmt)
    raise ConfigError(f"unknown rates model {model_kind!r}", "rates.model")


def _lattice_from_cfg(cfg, path):
    depth = int(cfg.get("depth", 10))
    step = _quantity(cfg, "period", "years", path)
    q = float(cfg.get("q", 0.5))
    try:
        return rates.Lattice(np.arange(depth + 1) * step, q=q)
    except InfoFlowError as exc:
        raise ConfigError(str(exc), path)


def _rates_rational(cfg, out_dir, fmt):
    lattice = _lattice_from_cfg(cfg, "rates")
    depth = lattice.depth
    decay = float(cfg.get("alpha_decay", 0.08))
    split = float(cfg.get("beta_weight", 0.4))
    base = np.exp(-decay * lattice.dates)
    alpha = (1.0 - split) * base
    beta = split * np.exp(-1.2 * decay * lattice.dates)
    model = rates.rational_model(lattice, alpha, beta,
                                 up=float(cfg.get("up", 1.25)))
    residual = 0.0
    rows = []
    for i in range(depth + 1):
        for j in range(i, depth + 1):
            lattice_p = rates.bond_price(model, i, j)
            closed = model.closed_form_bond(i, j)
            residual = max(residual, float(np.max(np.abs(lattice_p - closed))))
            rows.append((i, j, float(lattice_p[0])))
    fh_rep = rates.fh_representation(model)
    fh_resid = 0.0
    for i in range(depth):
        for j in range(i, depth + 1):
            fh_resid = max(fh_resid, float(np.max(np.abs(
                fh_rep.bond_price(i, j) - rates.bond_price(model, i, j)))))
    mm = rates.money_market(model)
    moves = [1, 0] * (depth // 2) + [1] * (depth % 2)
    mm_path = mm.along_path(moves)
    doob = rates.doob_decomposition(model)
    doob_resid = max(
        float(np.max(np.abs(a - b)))
        for a, b in zip(doob.a_increments, doob.a_increments_short_rate))
    if fmt == "csv":
        with open(os.path.join(out_dir, "bond_prices.csv"), "w") as fh:
            fh.write("i,j,P_ij_node0\n")
            for i, j, p in rows:
                fh.write(f"{i},{j},{_fmt(p)}\n")
        with open(os.path.join(out_dir, "yields.csv"), "w") as fh:
            fh.write("j,P_0j,simple_yield\n")
            for j in range(1, depth + 1):
                p = float(rates.bond_price(model, 0, j)[0])
                fh.write(f"{j},{_fmt(p)},{_fmt(1.0 / p - 1.0)}\n")
    else:
        _write_json(os.path.join(out_dir, "bond_prices.json"),
                    [{"i": i, "j": j, "P": p} for i, j, p in rows])
    report = {
        "closed_vs_lattice_max_err": residual,
        "fh_reconstruction_max_err": fh_resid,
        "doob_short_rate_agreement_max_err": doob_resid,
        "money_market_path": [float(b) for b in mm_path],
        "maturity_quote_convention": "P_jj = 1; ex-dividend value at maturity is 0",
    }
    _write_json(os.path.join(out_dir, "rates_report.json"), report)
    print(json.dumps({k: v for k, v in report.items()
                      if k != "money_market_path"}, indent=2, sort_keys=True))
    return EXIT_OK


def _rates_inflation(cfg, out_dir, fmt):
    lattice = _lattice_from_cfg(cfg, "rates")
    depth = lattice.depth
    g_money = float(cfg.get("money_growth", 0.05))
    vol = float(cfg.get("money_vol", 0.15))
    util_a = float(cfg.get("A", 1.0))
    util_b = float(cfg.get("B", 1.0))
    gamma = _quantity(cfg, "psych_discount", "rate", "rates")
    money = [np.exp(g_money * lattice.dates[i]
                    + vol * (2.0 * np.arange(i + 1) - i) / max(depth, 1))
             for i in range(depth + 1)]
    consumption = [np.ones(i + 1) for i in range(depth + 1)]
    liquidity = [np.full(i + 1, float(cfg.get("liquidity", 0.2)))
                 for i in range(depth + 1)]
    model = rates.inflation_model(lattice, consumption, money, liquidity,
                                  util_a, util_b, gamma,
                                  float(cfg.get("mu", 1.0)))
    index_linked = [float(model.price_index_linked_bond(j)[0])
                    for j in range(1, depth + 1)]
    price_level_path = [float(model.price_level(i)[-1]) for i in range(depth + 1)]
    report = {
        "velocity_residual": model.velocity_residual(),
        "budget_value": model.budget_value(),
        "index_linked_bond_values": index_linked,
        "price_level_top_path": price_level_path,
    }
    if fmt == "csv":
        with open(os.path.join(out_dir, "price_level.csv"), "w") as fh:
            fh.write("i,t,price_level_top_path\n")
            for i, c in enumerate(price_level_path):
                fh.write(f"{i},{_fmt(lattice.dates[i])},{_fmt(c)}\n")
    _write_json(os.path.join(out_dir, "inflation_report.json"), report)
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# ad-density
# ---------------------------------------------------------------------------

def cmd_ad_density(cfg: dict, seed: int, out_dir: str, fmt: str) -> int:
    maturity = _quantity(cfg, "maturity", "years", "ad-density")
    rate = _quantity(cfg, "short_rate", "rate", "ad-density")
    t = _quantity(cfg, "t", "years", "ad-density")
    sigma = float(_require(cfg, "sigma", "ad-density"))
    if "bond" in cfg:
        factor = _payoff(cfg["bond"], "ad-density.bond")
    else:
        factor = _density(_require(cfg, "dividend", "ad-density"),
                          "ad-density.dividend")
    spec = InformationProcessSpec(sigma, maturity, factor)
    curve = FlatCurve(rate)
    ad = arrow_debreu.ad_density(spec, factor, t, curve)
    lo, hi = ad.integration_range()
    xs = np.linspace(lo, hi, int(cfg.get("n_points", 401)))
    ys = ad.discounted(xs)
    if fmt == "csv":
        with open(os.path.join(out_dir, "ad_density.csv"), "w") as fh:
            fh.write("x,A_0t\n")
            for x, y in zip(xs, ys):
                fh.write(f"{_fmt(x)},{_fmt(y)}\n")
    else:
        _write_json(os.path.join(out_dir, "ad_density.json"),
                    {"x": [_fmt(x) for x in xs], "A_0t": [_fmt(y) for y in ys]})
    mass = float(np.trapezoid(ys, xs))
    _write_json(os.path.join(out_dir, "ad_report.json"), {
        "integrated_mass": mass,
        "discount_factor": curve.df(t),
        "normalization_gap": abs(mass - curve.df(t)),
    })
    print(f"integral A_0t dx = {mass:.12g} (P_0t = {curve.df(t):.12g})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def cmd_verify(cfg: dict, seed: int, out_dir: str, fmt: str) -> int:
    """Cross-method consistency suite; nonzero exit on any failure."""
    checks = []
    curve = FlatCurve(0.05)
    payoff = DiscretePayoff(np.array([0.0, 1.0]), np.array([0.2, 0.8]))
    spec = InformationProcessSpec(1.0, 5.0, payoff)

    probs = conditional_probs(payoff, spec, 1.0, 0.9)
    from scipy.stats import norm as _norm
    var = spec.bridge_var(1.0)
    lik = _norm.pdf(0.9, loc=spec.sigma * payoff.levels * 1.0, scale=math.sqrt(var))
    bayes = payoff.probs * lik / (payoff.probs * lik).sum()
    checks.append(("filter_vs_bayes", float(np.max(np.abs(probs - bayes))), 1e-12))

    d, recon = credit.digital_decomposition(payoff, spec, curve, 1.3, 0.7)
    direct = credit.price_bond(payoff, spec, curve, 1.3, 0.7).price
    checks.append(("digital_reconstruction", abs(recon - direct), 1e-12))

    opt = options.OptionSpec(0.6, 2.0, payoff, spec, curve)
    closed = options.price_binary_call(opt)
    multi = options.price_multirecovery_call(opt)
    checks.append(("binary_vs_multirecovery", abs(closed - multi), 1e-12))

    ad = arrow_debreu.ad_density(spec, payoff, 2.0, curve)
    p_tT = curve.forward(2.0, 5.0)

    def bond_call(x):
        pr = conditional_probs(payoff, spec, 2.0, x)
        return max(p_tT * float(pr @ payoff.levels) - 0.6, 0.0)

    via_ad = arrow_debreu.price_info_derivative(ad, bond_call)
    checks.append(("closed_vs_arrow_debreu_call", abs(via_ad - closed), 1e-8))

    prior = ExponentialDensity(1.0)
    espec = InformationProcessSpec(0.5, 2.0, prior)
    asset = equity.SingleDividendAsset(prior, espec, curve)
    ec1 = equity.price_call_bridge_measure(asset, 0.4, 1.0)
    via_ad2 = arrow_debreu.price_continuous_call_via_ad(prior, espec, curve, 0.4, 1.0)
    checks.append(("bridge_vs_ad_continuous_call", abs(ec1 - via_ad2), 1e-8))

    lattice = rates.Lattice(np.linspace(0.0, 5.0, 11))
    alpha = np.exp(-0.06 * lattice.dates)
    model = rates.rational_model(lattice, 0.6 * alpha, 0.4 * np.exp(-0.08 * lattice.dates))
    worst = 0.0
    for i in range(lattice.depth + 1):
        for j in range(i, lattice.depth + 1):
            worst = max(worst, float(np.max(np.abs(
                rates.bond_price(model, i, j) - model.closed_form_bond(i, j)))))
    checks.append(("rational_lattice_vs_closed", worst, 1e-13))

    report = {name: {"error": err, "tolerance": tol, "ok": bool(err <= tol)}
              for name, err, tol in checks}
    _write_json(os.path.join(out_dir, "verify_report.json"), report)
    failed = [name for name, err, tol in checks if err > tol]
    for name, err, tol in checks:
        status = "ok " if err <= tol else "FAIL"
        print(f"[{status}] {name}: err={err:.3g} tol={tol:g}")
    if failed:
        print(f"verification failed: {failed}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

COMMANDS = {
    "simulate": cmd_simulate,
    "price": cmd_price,
    "reduce": cmd_reduce,
    "rates": cmd_rates,
    "ad-density": cmd_ad_density,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="infoflow",
        description="Information-based asset pricing toolkit")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", default=None,
                        help="JSON config (optional for verify)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config) if args.config else {}
        os.makedirs(args.out, exist_ok=True)
        return COMMANDS[args.command](cfg, args.seed, args.out, args.format)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GreeksUndefinedError, InvalidInputError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return EXIT_CONFIG
    except (DivergenceError, DegenerateDistributionError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return EXIT_NUMERIC
    except InfoFlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
