"""Privacy through periodic intermittent transmission in user-server LQG control."""

from .errors import DetectabilityViolation, DimensionError, MonotonicityViolation, NonConvergence
from .intermittent import (
    PeriodicAnalysis,
    PeriodicScheme,
    analyze_period,
    covariance_cycle,
    degraded_cost,
    gamma,
    lqg_loss,
    periodic_fixed_point,
    privacy_metric,
)
from .model import (
    SystemModel,
    ValidationReport,
    is_controllable,
    is_detectable,
    is_stabilizable,
    paper_example_model,
    validate_model,
)
from .optimize import TradeoffResult, dichotomy_search, linear_scan, sweep, verify_monotone
from .riccati import (
    SteadyState,
    baseline_cost,
    fixed_point,
    lyapunov_step,
    measurement_update,
    riccati_step,
    solve_steady_state,
    steady_controller,
    steady_filter,
)
from .sim import (
    FiniteHorizonCost,
    SimulationTrace,
    empirical_average_cost,
    empirical_covariance_by_offset,
    finite_horizon_cost,
    monte_carlo,
    simulate,
)

__version__ = "0.1.0"
