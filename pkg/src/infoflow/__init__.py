"""Information-based asset pricing.

Market factors are revealed through noisy signals (Brownian-bridge
information processes); prices are discounted conditional expectations of
factor-driven cash flows.  The subpackages cover filtering, credit bonds
and options, Arrow-Debreu densities, continuous-dividend assets,
multi-factor cash-flow engines, factor-reduction combinatorics, and
discrete-time pricing-kernel rate/inflation models.
"""

from .curves import DiscountCurve, FlatCurve, TabulatedCurve
from .errors import (
    DegenerateDistributionError,
    DivergenceError,
    GreeksUndefinedError,
    InfoFlowError,
    InvalidInputError,
    MaturityError,
    NoSolutionError,
    UnsupportedPayoutError,
)
from .processes import (
    ContinuousDensity,
    DiscretePayoff,
    ExponentialDensity,
    GammaDensity,
    GaussianDensity,
    InformationProcessSpec,
    PathSample,
    TabulatedDensity,
    TimeGrid,
    conditional_density,
    conditional_probs,
    innovations_path,
    norm_cdf,
    sample_brownian_bridge,
    sample_information_path,
    stream_generator,
)
from .credit import (
    BondState,
    digital_decomposition,
    implied_a_priori_probs,
    information_timescale,
    price_bond,
    reinitialize,
    simulate_bond_paths,
)
from .options import (
    OptionGreeks,
    OptionSpec,
    greeks,
    option_price_process,
    price_binary_call,
    price_multirecovery_call,
)
from .arrow_debreu import (
    ADensity,
    ad_density,
    bivariate_ad_density,
    price_continuous_call_via_ad,
    price_info_derivative,
)
from .equity import (
    SingleDividendAsset,
    asset_dynamics_coeffs,
    bs_recovery_price,
    price_call_bridge_measure,
    price_exponential_closed,
    price_gamma_closed,
    price_single_dividend,
)
from .xfactor import (
    CashFlow,
    CashFlowGraph,
    MarketScenario,
    XFactor,
    price_asset,
    price_basket,
    price_cds,
    price_coupon_bond,
    volatility_vector,
)
from .zfactor import (
    ReductionTree,
    build_reduction,
    evaluate_reduction,
    joint_from_x_probs,
    x_probs_from_joint,
)
from .rates import (
    KernelModel,
    Lattice,
    bond_price,
    build_kernel_from_G,
    doob_decomposition,
    fh_representation,
    inflation_model,
    info_kernel,
    money_market,
    rational_model,
)

__version__ = "0.1.0"
