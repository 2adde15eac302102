"""Production-network growth analytics.

Network statistics (Leontief inverses, output multipliers, Domar weights),
interdependent productivity dynamics with a closed-form steady state, growth
accounting with policy gradients, and reproducible Monte Carlo experiment
suites, all behind one batch CLI.
"""

from .core import (
    Economy,
    InternalConsistencyError,
    IOTable,
    SchemaError,
    TFPConfig,
    Tolerances,
    ValidationError,
    ValidationReport,
    from_io_table,
    load_economy,
    load_io_table,
    load_tfp_config,
    synthesize_io_table,
    validate,
)
from .dynamics import (
    GrowthState,
    Trajectory,
    integrate_rates,
    integrate_stocks,
    rate_field,
    steady_state,
)
from .growth import (
    EquilibriumState,
    GrowthReport,
    aggregate_growth,
    build_growth_report,
    cobb_douglas_equilibrium,
    hulten_sensitivities,
    policy_gradient,
    real_price_changes,
    squared_inverse_diagonal_gradient,
    tfp_residual,
)
from .network import (
    NetworkStats,
    SpectralReport,
    compute_stats,
    domar_weights,
    leontief_inverse,
    output_multipliers,
    spectral_report,
    weighted_multiplier,
)

__version__ = "0.1.0"

__all__ = [
    "Economy",
    "EquilibriumState",
    "GrowthReport",
    "GrowthState",
    "InternalConsistencyError",
    "IOTable",
    "NetworkStats",
    "SchemaError",
    "SpectralReport",
    "TFPConfig",
    "Tolerances",
    "Trajectory",
    "ValidationError",
    "ValidationReport",
    "aggregate_growth",
    "build_growth_report",
    "cobb_douglas_equilibrium",
    "compute_stats",
    "domar_weights",
    "from_io_table",
    "hulten_sensitivities",
    "integrate_rates",
    "integrate_stocks",
    "leontief_inverse",
    "load_economy",
    "load_io_table",
    "load_tfp_config",
    "output_multipliers",
    "policy_gradient",
    "rate_field",
    "real_price_changes",
    "spectral_report",
    "squared_inverse_diagonal_gradient",
    "steady_state",
    "synthesize_io_table",
    "tfp_residual",
    "validate",
    "weighted_multiplier",
    "__version__",
]
