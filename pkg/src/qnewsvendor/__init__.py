"""Multi-supplier unreliable newsvendor solved with amplitude estimation."""

from .classical import EstimateResult, mc_expected_profit, saa_optimize, sample_reliability
from .encoding import (
    AOperator,
    ScaledPayoff,
    VariationalLoader,
    build_a_operator,
    build_payoff_operator,
    exact_load,
    invert_estimate,
    scale_payoff,
    variational_load,
)
from .model import (
    DemandDistribution,
    Deterministic,
    MarketParams,
    OrderDecision,
    ParameterOrderViolation,
    Supplier,
    TruncatedNormal,
    classical_optimal_q,
    critical_fractile_ratio,
    expected_profit_exact,
    profit,
    validate,
)
from .optimizer import EstimatorChoice, Heatmap, evaluate_order, grid_optimize, reliability_sweep
from .qae import GroverOperator, QaeConfig, canonical_qae, iqae, median_boost, qae_error_bound

__version__ = "0.1.0"
