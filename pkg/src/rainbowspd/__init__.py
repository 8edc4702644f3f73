"""State-price density recovery from rainbow option prices.

Analytic terminal laws (models), the rainbow payoff family (payoffs),
quadrature / common-random-number Monte Carlo pricing (pricers), a
finite-difference engine for high-order mixed partials (fdiff), and the
density recovery routes that compose them (recovery).  A compiled kernel
core accelerates the hot payoff/density loops when available; see
``rainbowspd._kernels.BACKEND``.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .errors import (
    ConfigError,
    DimensionMismatch,
    DimensionNotTwo,
    MonteCarloUnsupported,
    NonFiniteEvaluation,
    NoStabilization,
    NotAbsolutelyContinuous,
    QuadratureUnavailable,
    RainbowError,
    StencilOutOfDomain,
    UndefinedOnDiagonal,
    UndefinedOnLevelSet,
)
from .fdiff import (
    DiffResult,
    DiffSpec,
    LimitSpec,
    directional_derivative,
    limit_to_zero,
    mixed_partial,
    right_derivative,
)
from .models import (
    CorrelatedLognormal,
    GridDensity,
    LognormalMixture,
    PointMass,
    Sample,
    TerminalLaw,
    UniformBox,
    grid_density_from_csv,
    law_from_dict,
    load_law,
)
from .payoffs import (
    INFINITY,
    StrikeSpec,
    eval_payoff,
    eval_payoff_many,
    payoff_directional_derivative_ones,
    payoff_k_derivative,
    payoff_right_derivative_in_kj,
    validate_pnorm,
)
from .pricers import (
    PriceEstimate,
    PriceLimitResult,
    PricerConfig,
    digital_joint_price,
    price,
    price_limit_p_to_infinity,
)
from .recovery import (
    DensityGrid,
    LadderRung,
    RecoveryReport,
    check_sum_decomposition,
    far_strike,
    make_grid_axes,
    price_by_density_1d,
    recover_density_cdf,
    recover_density_cp,
    recover_density_main,
    recover_density_n2_alternative,
    recover_marginal_survival,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
